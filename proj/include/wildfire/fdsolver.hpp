#pragma once

// Explicit finite-difference forward simulator for the wildfire model on a
// structured 1D or 2D grid, plus uniform subsampling into training datasets.
//
// Spatial operators: 3-point (1D) / 5-point (2D) central Laplacian, first-order
// upwind advection. Time: forward Euler with `substeps` internal steps per
// stored time level. Dirichlet values (T_a, E0, X0) are re-imposed on the
// boundary after every step.

#include "wildfire/error.hpp"
#include "wildfire/model.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

namespace wildfire {

struct Grid {
    int dim = 1;
    double lx = 100.0;
    double ly = 0.0;
    double t_end = 200.0;
    int nx = 3;
    int ny = 1;
    int nt = 1;       ///< stored time levels
    int substeps = 1; ///< explicit Euler steps between stored levels

    double dx() const { return lx / (nx - 1); }
    double dy() const { return dim == 2 ? ly / (ny - 1) : 0.0; }
    double dt() const { return nt > 1 ? t_end / (nt - 1) : 0.0; }
    double step_dt() const { return dt() / substeps; }
    std::size_t nodes() const { return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny); }
    std::size_t index(int i, int j = 0) const
    {
        return static_cast<std::size_t>(j) * static_cast<std::size_t>(nx) + static_cast<std::size_t>(i);
    }
    double x(int i) const { return lx * i / (nx - 1); }
    double y(int j) const { return dim == 2 ? ly * j / (ny - 1) : 0.0; }
    double t(int n) const { return nt > 1 ? t_end * n / (nt - 1) : 0.0; }

    bool on_boundary(int i, int j) const
    {
        if (i == 0 || i == nx - 1)
            return true;
        return dim == 2 && (j == 0 || j == ny - 1);
    }

    /// Grid from extents and spacings; counts are extent/spacing + 1 and must
    /// come out integral.
    static Grid uniform(int dim, double lx, double ly, double t_end, double dx, double dy,
                        double dt, int substeps = 1)
    {
        Grid g;
        g.dim = dim;
        g.lx = lx;
        g.ly = dim == 2 ? ly : 0.0;
        g.t_end = t_end;
        g.nx = count_for(lx, dx, "dx");
        g.ny = dim == 2 ? count_for(ly, dy, "dy") : 1;
        g.nt = count_for(t_end, dt, "dt");
        g.substeps = substeps;
        g.validate();
        return g;
    }

    void validate() const
    {
        if (dim != 1 && dim != 2)
            throw ConfigError("grid.dim must be 1 or 2");
        if (!(lx > 0.0) || !(t_end > 0.0) || (dim == 2 && !(ly > 0.0)))
            throw ConfigError("grid: extents must be > 0");
        if (nx < 3 || (dim == 2 && ny < 3))
            throw ConfigError("grid: node counts must be >= 3");
        if (dim == 1 && ny != 1)
            throw ConfigError("grid: ny must be 1 in 1D");
        if (nt < 1)
            throw ConfigError("grid: nt must be >= 1");
        if (substeps < 1)
            throw ConfigError("grid: substeps must be >= 1");
    }

    static int count_for(double extent, double spacing, const char* name)
    {
        if (!(spacing > 0.0))
            throw ConfigError(std::string("grid: ") + name + " must be > 0");
        const double q = extent / spacing;
        const double r = std::round(q);
        if (std::abs(q - r) > 1e-9 * std::max(1.0, q))
            throw ConfigError(std::string("grid: extent is not an integer multiple of ") + name);
        return static_cast<int>(r) + 1;
    }
};

struct InitialCondition {
    double amplitude = 2.0;   ///< pyrolysis-temperature amplitude T_p
    double center_x = 30.0;   ///< ignition center
    double center_y = 50.0;
    double radius = 5.0;      ///< ignition radius gamma
    double endothermic = 0.3; ///< uniform E0
    double exothermic = 0.7;  ///< uniform X0

    void validate(const Grid& g) const
    {
        if (!(radius > 0.0))
            throw ConfigError("initial.radius must be > 0");
        if (!(endothermic >= 0.0 && endothermic <= 1.0) || !(exothermic >= 0.0 && exothermic <= 1.0))
            throw ConfigError("initial: E0 and X0 must lie in [0, 1]");
        if (!(center_x >= 0.0 && center_x <= g.lx) ||
            (g.dim == 2 && !(center_y >= 0.0 && center_y <= g.ly)))
            throw ConfigError("initial: ignition center lies outside the domain");
    }
};

struct FieldState {
    std::vector<double> T;
    std::vector<double> E;
    std::vector<double> X;

    FieldState() = default;
    explicit FieldState(std::size_t n) : T(n), E(n), X(n) {}
    std::size_t size() const { return T.size(); }
    StatePoint at(std::size_t k) const { return {T[k], E[k], X[k]}; }
    bool operator==(const FieldState&) const = default;
};

/// Parameter values per stored time level; level n's values drive the steps
/// from t(n) to t(n+1).
struct ParamSeries {
    std::vector<double> times;
    std::vector<PhysParams> values;

    std::size_t size() const { return times.size(); }
    static ParamSeries constant(const PhysParams& p, const Grid& g)
    {
        ParamSeries s;
        for (int n = 0; n < g.nt; ++n) {
            s.times.push_back(g.t(n));
            s.values.push_back(p);
        }
        return s;
    }
};

struct Trajectory {
    Grid grid;
    std::vector<FieldState> frames;
    ParamSeries params_used;
};

/// Largest stable explicit step for the given parameters:
/// safety * min(h^2 / (2 a1 sum D), h / (a1 max|u|), 1 / r_max), h = min spacing.
inline double stable_step_bound(const Grid& g, const PhysParams& p, const PhysConstants& c,
                                double safety = 0.5)
{
    const double h = g.dim == 2 ? std::min(g.dx(), g.dy()) : g.dx();
    double sum_d = 0.0;
    double max_u = 0.0;
    for (int k = 0; k < g.dim; ++k) {
        sum_d += std::abs(p.dispersion[k]);
        max_u = std::max(max_u, std::abs(p.velocity[k]));
    }
    double bound = std::numeric_limits<double>::infinity();
    if (c.alpha1 * sum_d > 0.0)
        bound = std::min(bound, h * h / (2.0 * c.alpha1 * sum_d));
    if (c.alpha1 * max_u > 0.0)
        bound = std::min(bound, h / (c.alpha1 * max_u));
    const auto& k = c.kinetics;
    const double r_max = std::max(k.c1, std::min(k.c2, k.r_o));
    if (r_max > 0.0)
        bound = std::min(bound, 1.0 / r_max);
    return safety * bound;
}

/// Throws ConfigError (with the bound in the message) if the grid's internal
/// step is not stable for every parameter set in the series.
inline void check_stability(const Grid& g, const ParamSeries& series, const PhysConstants& c)
{
    double bound = std::numeric_limits<double>::infinity();
    for (const auto& p : series.values)
        bound = std::min(bound, stable_step_bound(g, p, c));
    if (g.nt > 1 && g.step_dt() > bound) {
        std::ostringstream os;
        os << "grid: explicit step dt/substeps = " << g.step_dt()
           << " violates the stability bound dt <= " << bound << " (increase grid.substeps to at least "
           << static_cast<int>(std::ceil(g.dt() / bound)) << ")";
        throw ConfigError(os.str());
    }
}

/// Smallest substep count that makes the grid stable for the series.
inline int required_substeps(const Grid& g, const ParamSeries& series, const PhysConstants& c)
{
    double bound = std::numeric_limits<double>::infinity();
    for (const auto& p : series.values)
        bound = std::min(bound, stable_step_bound(g, p, c));
    if (g.nt <= 1 || !std::isfinite(bound))
        return 1;
    return std::max(1, static_cast<int>(std::ceil(g.dt() / bound * (1.0 - 1e-12))));
}

inline void impose_boundary(FieldState& s, const Grid& g, double ambient, const InitialCondition& ic)
{
    auto pin = [&](std::size_t k) {
        s.T[k] = ambient;
        s.E[k] = ic.endothermic;
        s.X[k] = ic.exothermic;
    };
    for (int j = 0; j < g.ny; ++j) {
        pin(g.index(0, j));
        pin(g.index(g.nx - 1, j));
    }
    if (g.dim == 2) {
        for (int i = 0; i < g.nx; ++i) {
            pin(g.index(i, 0));
            pin(g.index(i, g.ny - 1));
        }
    }
}

/// T = T_p exp(-r^2/gamma^2) + T_a with uniform fuels; boundary values pinned.
inline FieldState apply_initial(const Grid& g, const InitialCondition& ic, double ambient)
{
    g.validate();
    ic.validate(g);
    FieldState s(g.nodes());
    const double g2 = ic.radius * ic.radius;
    for (int j = 0; j < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
            const double rx = g.x(i) - ic.center_x;
            const double ry = g.dim == 2 ? g.y(j) - ic.center_y : 0.0;
            const auto k = g.index(i, j);
            s.T[k] = ic.amplitude * std::exp(-(rx * rx + ry * ry) / g2) + ambient;
            s.E[k] = ic.endothermic;
            s.X[k] = ic.exothermic;
        }
    }
    impose_boundary(s, g, ambient, ic);
    return s;
}

namespace detail {

// Upwind first derivative along one axis; `minus`/`plus` are the neighbor values.
inline double upwind(double u, double minus, double centre, double plus, double h)
{
    if (u > 0.0)
        return (centre - minus) / h;
    if (u < 0.0)
        return (plus - centre) / h;
    return 0.5 * ((centre - minus) / h + (plus - centre) / h);
}

} // namespace detail

/// One explicit Euler step of size `dt` from `in` into `out` (which must be
/// sized like `in`). Boundary nodes are re-imposed from `ic`.
inline void step_into(const FieldState& in, FieldState& out, const PhysParams& theta,
                      const PhysConstants& c, const Grid& g, const InitialCondition& ic, double dt)
{
    const double hx = g.dx();
    const double hy = g.dy();
    const auto& kin = c.kinetics;
    const int j_lo = g.dim == 2 ? 1 : 0;
    const int j_hi = g.dim == 2 ? g.ny - 1 : 1;
    for (int j = j_lo; j < j_hi; ++j) {
        for (int i = 1; i < g.nx - 1; ++i) {
            const auto k = g.index(i, j);
            const double T = in.T[k];
            const double tw = in.T[k - 1];
            const double te = in.T[k + 1];
            double transport = theta.dispersion[0] * (te - 2.0 * T + tw) / (hx * hx) -
                               theta.velocity[0] * detail::upwind(theta.velocity[0], tw, T, te, hx);
            if (g.dim == 2) {
                const double ts = in.T[k - static_cast<std::size_t>(g.nx)];
                const double tn = in.T[k + static_cast<std::size_t>(g.nx)];
                transport += theta.dispersion[1] * (tn - 2.0 * T + ts) / (hy * hy) -
                             theta.velocity[1] * detail::upwind(theta.velocity[1], ts, T, tn, hy);
            }
            const double re = rate_endothermic(T, kin);
            const double rx = rate_exothermic(T, kin);
            const double E = in.E[k];
            const double X = in.X[k];
            const double dT = c.alpha1 * transport - c.alpha2 * E * re + c.alpha3 * X * rx -
                              c.alpha4 * theta.heat_loss * (T - c.ambient_temperature);
            out.T[k] = T + dt * dT;
            out.E[k] = E - dt * E * re;
            out.X[k] = X - dt * X * rx;
        }
    }
    impose_boundary(out, g, c.ambient_temperature, ic);
}

inline FieldState step(const FieldState& state, const PhysParams& theta, const PhysConstants& c,
                       const Grid& g, const InitialCondition& ic)
{
    FieldState out(state.size());
    step_into(state, out, theta, c, g, ic, g.step_dt());
    return out;
}

inline bool all_finite(const FieldState& s)
{
    auto ok = [](const std::vector<double>& v) {
        return std::all_of(v.begin(), v.end(), [](double a) { return std::isfinite(a); });
    };
    return ok(s.T) && ok(s.E) && ok(s.X);
}

/// Runs the explicit scheme over all stored levels. The series must hold one
/// entry per stored level; entry n drives the substeps from level n to n+1.
inline Trajectory simulate(const Grid& g, const InitialCondition& ic, const ParamSeries& series,
                           const PhysConstants& c)
{
    g.validate();
    ic.validate(g);
    c.validate();
    if (series.size() != static_cast<std::size_t>(g.nt))
        throw ConfigError("simulate: parameter series length " + std::to_string(series.size()) +
                          " does not match grid.nt " + std::to_string(g.nt));
    for (const auto& p : series.values) {
        if (p.dim != g.dim)
            throw DimensionError("simulate: theta dimensionality does not match grid");
    }
    check_stability(g, series, c);

    Trajectory traj;
    traj.grid = g;
    traj.params_used = series;
    traj.frames.reserve(static_cast<std::size_t>(g.nt));
    traj.frames.push_back(apply_initial(g, ic, c.ambient_temperature));

    FieldState a = traj.frames.back();
    FieldState b(a.size());
    const double dt = g.step_dt();
    for (int n = 0; n + 1 < g.nt; ++n) {
        const auto& theta = series.values[static_cast<std::size_t>(n)];
        try {
            for (int s = 0; s < g.substeps; ++s) {
                step_into(a, b, theta, c, g, ic, dt);
                std::swap(a, b);
            }
        } catch (const DomainError& e) {
            throw NumericError("simulate: stepping failed between time levels " + std::to_string(n) +
                               " and " + std::to_string(n + 1) + ": " + e.what());
        }
        if (!all_finite(a))
            throw NumericError("simulate: non-finite state at time level " + std::to_string(n + 1) +
                               " (t = " + std::to_string(g.t(n + 1)) + ")");
        traj.frames.push_back(a);
    }
    return traj;
}

inline Trajectory simulate(const Grid& g, const InitialCondition& ic, const PhysParams& theta,
                           const PhysConstants& c)
{
    return simulate(g, ic, ParamSeries::constant(theta, g), c);
}

} // namespace wildfire
