#pragma once

// Dimensionless wildfire spreading model: Arrhenius-type reaction rates and
// the right-hand side of the temperature / endothermic fuel / exothermic fuel
// system
//
//   T_t = a1 (D . lap T - u . grad T) - a2 E r_e + a3 X r_x - a4 U (T - T_a)
//   E_t = -E r_e
//   X_t = -X r_x
//
// with r_e = c1 exp(-b1/T) and r_x = a r_o / (a + r_o), a = c2 exp(-b2/T).

#include "wildfire/error.hpp"

#include <array>
#include <cmath>
#include <span>
#include <string>
#include <vector>

namespace wildfire {

struct Kinetics {
    double c1 = 0.0;  ///< endothermic pre-exponential rate
    double b1 = 0.0;  ///< endothermic activation temperature
    double c2 = 0.0;  ///< exothermic pre-exponential rate
    double b2 = 0.0;  ///< exothermic activation temperature
    double r_o = 0.0; ///< oxygen-supply frequency

    void validate() const
    {
        if (!(c1 >= 0.0) || !(c2 >= 0.0) || !(b1 >= 0.0) || !(b2 >= 0.0) ||
            !(r_o >= 0.0))
            throw ConfigError("kinetics: c1, b1, c2, b2, r_o must all be >= 0");
    }
};

struct PhysConstants {
    double alpha1 = 1.0; ///< dispersion / advection
    double alpha2 = 1.0; ///< endothermic sink
    double alpha3 = 1.0; ///< exothermic source
    double alpha4 = 1.0; ///< convective loss
    double ambient_temperature = 1.0;
    Kinetics kinetics{};

    void validate() const
    {
        if (!(alpha1 >= 0.0) || !(alpha2 >= 0.0) || !(alpha3 >= 0.0) ||
            !(alpha4 >= 0.0))
            throw ConfigError("constants: alpha1..alpha4 must be >= 0");
        if (!(ambient_temperature > 0.0))
            throw ConfigError("constants: ambient_temperature must be > 0");
        kinetics.validate();
    }
};

/// The learnable vector theta = [Dx, (Dy,) ux, (uy,) U].
struct PhysParams {
    int dim = 1;
    std::array<double, 2> dispersion{0.0, 0.0};
    std::array<double, 2> velocity{0.0, 0.0};
    double heat_loss = 0.0;

    static std::size_t size_for(int dim) { return static_cast<std::size_t>(2 * dim + 1); }
    std::size_t size() const { return size_for(dim); }

    std::vector<double> to_vector() const
    {
        std::vector<double> v;
        v.reserve(size());
        for (int k = 0; k < dim; ++k)
            v.push_back(dispersion[k]);
        for (int k = 0; k < dim; ++k)
            v.push_back(velocity[k]);
        v.push_back(heat_loss);
        return v;
    }

    static PhysParams from_vector(std::span<const double> v, int dim)
    {
        if (dim != 1 && dim != 2)
            throw ConfigError("theta: dim must be 1 or 2");
        if (v.size() != size_for(dim))
            throw ConfigError("theta: expected " + std::to_string(size_for(dim)) +
                              " components for dim " + std::to_string(dim) + ", got " +
                              std::to_string(v.size()));
        PhysParams p;
        p.dim = dim;
        for (int k = 0; k < dim; ++k) {
            p.dispersion[k] = v[k];
            p.velocity[k] = v[dim + k];
        }
        p.heat_loss = v[2 * dim];
        return p;
    }

    /// Component names in serialization order.
    static std::vector<std::string> names(int dim)
    {
        if (dim == 1)
            return {"D", "u", "U"};
        return {"Dx", "Dy", "ux", "uy", "U"};
    }
};

struct StatePoint {
    double T = 0.0;
    double E = 0.0;
    double X = 0.0;
};

/// A rate and its derivative with respect to temperature.
struct RateSlope {
    double value;
    double d_dT;
};

inline void check_temperature(double T)
{
    if (!std::isfinite(T) || T <= 0.0)
        throw DomainError("reaction rate evaluated at non-positive or non-finite temperature " +
                          std::to_string(T));
}

/// r_e = c1 exp(-b1/T).
inline double rate_endothermic(double T, const Kinetics& k)
{
    check_temperature(T);
    return k.c1 * std::exp(-k.b1 / T);
}

inline RateSlope rate_endothermic_slope(double T, const Kinetics& k)
{
    const double r = rate_endothermic(T, k);
    return {r, r * k.b1 / (T * T)};
}

/// Oxygen-limited exothermic rate a r_o / (a + r_o). Returns 0 when both
/// c2 and r_o vanish (no oxidation pathway).
inline double rate_exothermic(double T, const Kinetics& k)
{
    check_temperature(T);
    const double a = k.c2 * std::exp(-k.b2 / T);
    const double den = a + k.r_o;
    if (den == 0.0)
        return 0.0;
    if (std::isinf(k.r_o))
        return a;
    return a * k.r_o / den;
}

inline RateSlope rate_exothermic_slope(double T, const Kinetics& k)
{
    check_temperature(T);
    const double a = k.c2 * std::exp(-k.b2 / T);
    const double den = a + k.r_o;
    if (den == 0.0)
        return {0.0, 0.0};
    const double da = a * k.b2 / (T * T);
    const double q = k.r_o / den;
    return {a * q, da * q * q};
}

struct StateRate {
    double dT = 0.0;
    double dE = 0.0;
    double dX = 0.0;
};

/// Pointwise time derivatives. grad and lap hold the spatial first and pure
/// second derivatives of T in each active direction.
inline StateRate rhs(const StatePoint& p, std::span<const double> grad_T,
                     std::span<const double> lap_T, const PhysParams& theta,
                     const PhysConstants& c)
{
    const auto dim = static_cast<std::size_t>(theta.dim);
    if (grad_T.size() != dim || lap_T.size() != dim)
        throw DimensionError("rhs: gradient/laplacian dimensionality does not match theta");
    const double re = rate_endothermic(p.T, c.kinetics);
    const double rx = rate_exothermic(p.T, c.kinetics);
    double transport = 0.0;
    for (std::size_t k = 0; k < dim; ++k)
        transport += theta.dispersion[k] * lap_T[k] - theta.velocity[k] * grad_T[k];
    StateRate r;
    r.dT = c.alpha1 * transport - c.alpha2 * p.E * re + c.alpha3 * p.X * rx -
           c.alpha4 * theta.heat_loss * (p.T - c.ambient_temperature);
    r.dE = -p.E * re;
    r.dX = -p.X * rx;
    return r;
}

} // namespace wildfire
