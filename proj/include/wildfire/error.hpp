#pragma once

#include <stdexcept>
#include <string>

namespace wildfire {

/// Invalid configuration or user input. Maps to CLI exit code 1.
class ConfigError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// Mismatched dimensionality between arguments.
class DimensionError : public ConfigError {
  public:
    using ConfigError::ConfigError;
};

/// Function evaluated outside its mathematical domain.
class DomainError : public std::domain_error {
  public:
    using std::domain_error::domain_error;
};

/// NaN / overflow / divergence during a computation. Maps to CLI exit code 2.
class NumericError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

} // namespace wildfire
