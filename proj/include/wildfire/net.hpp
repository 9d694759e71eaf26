#pragma once

// Fully-connected feed-forward network: sigmoid hidden layers and an affine
// (optionally sigmoid) output layer. Parameters live in one flat vector with
// layer-major ordering [W1 (row-major), b1, W2, b2, ..., WL, bL]; gradients use
// the same ordering.

#include "wildfire/error.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace wildfire {

enum class Activation { linear, sigmoid };

inline Activation parse_activation(const std::string& s)
{
    if (s == "linear")
        return Activation::linear;
    if (s == "sigmoid")
        return Activation::sigmoid;
    throw ConfigError("unknown activation '" + s + "' (expected linear or sigmoid)");
}

inline const char* to_string(Activation a) { return a == Activation::linear ? "linear" : "sigmoid"; }

struct MlpArch {
    std::vector<int> widths; ///< [N0, N1, ..., NL]
    Activation output = Activation::linear;

    std::size_t layers() const { return widths.size() - 1; }
    int inputs() const { return widths.front(); }
    int outputs() const { return widths.back(); }

    void validate() const
    {
        if (widths.size() < 2)
            throw ConfigError("network: need at least input and output widths");
        for (int w : widths)
            if (w < 1)
                throw ConfigError("network: layer widths must be >= 1");
    }

    /// Additional checks for the wildfire surrogate: (x[,y],t) -> (T,E,X).
    void validate_surrogate(int dim) const
    {
        validate();
        if (inputs() != dim + 1)
            throw ConfigError("network: input width must be " + std::to_string(dim + 1) + " for dim " +
                              std::to_string(dim));
        if (outputs() != 3)
            throw ConfigError("network: output width must be 3 (T, E, X)");
    }

    bool operator==(const MlpArch&) const = default;
};

/// Sum over layers of (N_{l-1} + 1) N_l.
inline std::size_t count_params(const MlpArch& arch)
{
    arch.validate();
    std::size_t n = 0;
    for (std::size_t l = 1; l < arch.widths.size(); ++l)
        n += static_cast<std::size_t>(arch.widths[l - 1] + 1) * static_cast<std::size_t>(arch.widths[l]);
    return n;
}

using RowMajorMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct MlpParams {
    MlpArch arch;
    std::vector<double> flat;

    MlpParams() = default;
    explicit MlpParams(MlpArch a) : arch(std::move(a)), flat(count_params(arch), 0.0) {}
    MlpParams(MlpArch a, std::vector<double> values) : arch(std::move(a)), flat(std::move(values))
    {
        if (flat.size() != count_params(arch))
            throw ConfigError("network: flat parameter vector has length " + std::to_string(flat.size()) +
                              ", architecture needs " + std::to_string(count_params(arch)));
    }

    /// Offset of layer l's weight block (l is 0-based over weight layers).
    std::size_t weight_offset(std::size_t l) const
    {
        std::size_t off = 0;
        for (std::size_t k = 0; k < l; ++k)
            off += static_cast<std::size_t>(arch.widths[k] + 1) * static_cast<std::size_t>(arch.widths[k + 1]);
        return off;
    }
    std::size_t bias_offset(std::size_t l) const
    {
        return weight_offset(l) + static_cast<std::size_t>(arch.widths[l]) * static_cast<std::size_t>(arch.widths[l + 1]);
    }

    Eigen::Map<const RowMajorMatrix> weight(std::size_t l) const
    {
        return {flat.data() + weight_offset(l), arch.widths[l + 1], arch.widths[l]};
    }
    Eigen::Map<RowMajorMatrix> weight(std::size_t l)
    {
        return {flat.data() + weight_offset(l), arch.widths[l + 1], arch.widths[l]};
    }
    Eigen::Map<const Eigen::VectorXd> bias(std::size_t l) const
    {
        return {flat.data() + bias_offset(l), arch.widths[l + 1]};
    }
    Eigen::Map<Eigen::VectorXd> bias(std::size_t l) { return {flat.data() + bias_offset(l), arch.widths[l + 1]}; }

    /// Per-layer copies (the structured view).
    std::vector<std::pair<Eigen::MatrixXd, Eigen::VectorXd>> layers() const
    {
        std::vector<std::pair<Eigen::MatrixXd, Eigen::VectorXd>> out;
        for (std::size_t l = 0; l < arch.layers(); ++l)
            out.emplace_back(weight(l), bias(l));
        return out;
    }

    static MlpParams from_layers(const MlpArch& arch,
                                 const std::vector<std::pair<Eigen::MatrixXd, Eigen::VectorXd>>& layers)
    {
        MlpParams p(arch);
        if (layers.size() != arch.layers())
            throw ConfigError("network: layer count mismatch");
        for (std::size_t l = 0; l < layers.size(); ++l) {
            if (layers[l].first.rows() != arch.widths[l + 1] || layers[l].first.cols() != arch.widths[l] ||
                layers[l].second.size() != arch.widths[l + 1])
                throw ConfigError("network: layer " + std::to_string(l + 1) + " has the wrong shape");
            p.weight(l) = layers[l].first;
            p.bias(l) = layers[l].second;
        }
        return p;
    }
};

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

/// Raw network output for one input vector.
inline std::vector<double> forward(const MlpParams& p, std::span<const double> input)
{
    if (input.size() != static_cast<std::size_t>(p.arch.inputs()))
        throw DimensionError("forward: input length " + std::to_string(input.size()) + " != " +
                             std::to_string(p.arch.inputs()));
    Eigen::VectorXd h = Eigen::Map<const Eigen::VectorXd>(input.data(), static_cast<Eigen::Index>(input.size()));
    const std::size_t last = p.arch.layers() - 1;
    for (std::size_t l = 0; l <= last; ++l) {
        Eigen::VectorXd z = p.weight(l) * h + p.bias(l);
        if (l < last || p.arch.output == Activation::sigmoid)
            z = z.unaryExpr([](double v) { return sigmoid(v); });
        h = std::move(z);
    }
    return {h.data(), h.data() + h.size()};
}

/// Uniform on +-sqrt(6 / (fan_in + fan_out)); zero biases.
inline MlpParams init_params(const MlpArch& arch, std::uint64_t seed)
{
    MlpParams p(arch);
    std::mt19937_64 rng(seed);
    for (std::size_t l = 0; l < arch.layers(); ++l) {
        const double limit = std::sqrt(6.0 / (arch.widths[l] + arch.widths[l + 1]));
        std::uniform_real_distribution<double> dist(-limit, limit);
        auto w = p.weight(l);
        for (Eigen::Index r = 0; r < w.rows(); ++r)
            for (Eigen::Index c = 0; c < w.cols(); ++c)
                w(r, c) = dist(rng);
    }
    return p;
}

} // namespace wildfire
