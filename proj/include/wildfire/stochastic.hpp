#pragma once

// Time-correlated Gaussian-process fluctuations of the physical parameters.
// Covariance K_ij = (delta * nominal)^2 exp(-|t_j - t_i| / zeta), sampled as
// L z with K = L L^T and z ~ N(0, I).

#include "wildfire/error.hpp"
#include "wildfire/fdsolver.hpp"
#include "wildfire/model.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace wildfire {

struct GpSpec {
    double delta = 0.05;       ///< relative fluctuation magnitude
    double zeta = 0.005;       ///< correlation time, same units as `times`
    std::uint64_t seed = 0;
    std::vector<double> times; ///< strictly increasing

    void validate() const
    {
        if (!(delta >= 0.0))
            throw ConfigError("noise.delta must be >= 0");
        if (!(zeta > 0.0))
            throw ConfigError("noise.zeta must be > 0");
        for (std::size_t i = 1; i < times.size(); ++i)
            if (!(times[i] > times[i - 1]))
                throw ConfigError("noise: sample times must be strictly increasing");
    }
};

inline Eigen::MatrixXd exponential_covariance(const std::vector<double>& times, double sigma, double zeta)
{
    const auto n = static_cast<Eigen::Index>(times.size());
    Eigen::MatrixXd k(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            k(i, j) = sigma * sigma * std::exp(-std::abs(times[j] - times[i]) / zeta);
    return k;
}

/// Factorizes the covariance once and draws any number of zero-mean samples.
class GpSampler {
  public:
    GpSampler(const GpSpec& spec, double nominal) : sigma_(spec.delta * std::abs(nominal))
    {
        spec.validate();
        n_ = static_cast<Eigen::Index>(spec.times.size());
        if (sigma_ == 0.0 || n_ == 0)
            return;
        Eigen::MatrixXd k = exponential_covariance(spec.times, sigma_, spec.zeta);
        // Jitter is relative to the marginal variance.
        const double var = sigma_ * sigma_;
        Eigen::LLT<Eigen::MatrixXd> llt(k);
        double jitter = 1e-12;
        while (llt.info() != Eigen::Success) {
            if (jitter > 1e-6)
                throw NumericError("sample_gp: covariance factorization failed after maximum jitter");
            Eigen::MatrixXd kj = k;
            kj.diagonal().array() += jitter * var;
            llt.compute(kj);
            jitter *= 10.0;
        }
        factor_ = llt.matrixL();
    }

    template <class Rng>
    std::vector<double> draw(Rng& rng) const
    {
        std::vector<double> out(static_cast<std::size_t>(n_), 0.0);
        if (factor_.size() == 0)
            return out;
        std::normal_distribution<double> normal(0.0, 1.0);
        Eigen::VectorXd z(n_);
        for (Eigen::Index i = 0; i < n_; ++i)
            z(i) = normal(rng);
        const Eigen::VectorXd s = factor_.triangularView<Eigen::Lower>() * z;
        for (Eigen::Index i = 0; i < n_; ++i)
            out[static_cast<std::size_t>(i)] = s(i);
        return out;
    }

    double sigma() const { return sigma_; }

  private:
    double sigma_;
    Eigen::Index n_ = 0;
    Eigen::MatrixXd factor_;
};

/// One fluctuation series, reproducible from spec.seed.
inline std::vector<double> sample_gp(const GpSpec& spec, double nominal)
{
    std::mt19937_64 rng(spec.seed);
    return GpSampler(spec, nominal).draw(rng);
}

/// theta(t) = theta* + Delta theta(t), one independent draw per component.
/// `time_scale` converts spec.times into the series' time units.
inline ParamSeries perturb_params(const PhysParams& nominal, const GpSpec& spec, double time_scale = 1.0)
{
    spec.validate();
    const auto base = nominal.to_vector();
    std::mt19937_64 rng(spec.seed);
    std::vector<std::vector<double>> deltas;
    for (double v : base)
        deltas.push_back(GpSampler(spec, v).draw(rng));

    ParamSeries out;
    std::vector<double> theta(base.size());
    for (std::size_t n = 0; n < spec.times.size(); ++n) {
        out.times.push_back(spec.times[n] * time_scale);
        for (std::size_t c = 0; c < base.size(); ++c)
            theta[c] = base[c] + deltas[c][n];
        out.values.push_back(PhysParams::from_vector(theta, nominal.dim));
    }
    return out;
}

/// Dimensionless sample times t/t_end at the grid's stored levels.
inline std::vector<double> dimensionless_times(const Grid& g)
{
    std::vector<double> t(static_cast<std::size_t>(g.nt));
    for (int n = 0; n < g.nt; ++n)
        t[static_cast<std::size_t>(n)] = g.nt > 1 ? static_cast<double>(n) / (g.nt - 1) : 0.0;
    return t;
}

} // namespace wildfire
