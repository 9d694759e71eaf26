#pragma once

// Adam and L-BFGS (two-loop recursion, strong Wolfe line search) over a plain
// std::vector<double>.

#include "wildfire/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <deque>
#include <functional>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

namespace wildfire {

struct AdamSettings {
    double lr = 3e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

struct AdamState {
    AdamSettings settings{};
    std::vector<double> m;
    std::vector<double> v;
    long iteration = 0;

    AdamState() = default;
    AdamState(std::size_t n, AdamSettings s) : settings(s), m(n, 0.0), v(n, 0.0) {}
};

/// One bias-corrected Adam update of `x` in place.
inline void adam_step(AdamState& st, std::span<double> x, std::span<const double> grad)
{
    if (grad.size() != x.size() || st.m.size() != x.size())
        throw DimensionError("adam_step: size mismatch");
    for (double g : grad)
        if (!std::isfinite(g))
            throw NumericError("adam_step: non-finite gradient");
    const auto& s = st.settings;
    ++st.iteration;
    const double bc1 = 1.0 - std::pow(s.beta1, static_cast<double>(st.iteration));
    const double bc2 = 1.0 - std::pow(s.beta2, static_cast<double>(st.iteration));
    for (std::size_t i = 0; i < x.size(); ++i) {
        st.m[i] = s.beta1 * st.m[i] + (1.0 - s.beta1) * grad[i];
        st.v[i] = s.beta2 * st.v[i] + (1.0 - s.beta2) * grad[i] * grad[i];
        const double mhat = st.m[i] / bc1;
        const double vhat = st.v[i] / bc2;
        x[i] -= s.lr * mhat / (std::sqrt(vhat) + s.eps);
    }
}

// ---------------------------------------------------------------------------

/// Objective: returns f(x) and writes the gradient into `g`. Throwing
/// NumericError (or returning a non-finite value) marks x as infeasible; the
/// line search then backs off.
using Objective = std::function<double(std::span<const double> x, std::span<double> g)>;

struct LbfgsSettings {
    int memory = 10;
    double c1 = 1e-4;
    double c2 = 0.9;
    int max_line_search = 50;
    double grad_tol = 1e-9;      ///< stop when |g|_2 < grad_tol
    double step_tol = 1e-12;     ///< stop when |s| < step_tol * max(1, |x|)
    int max_iterations = 20000;
};

enum class LbfgsStatus { converged_gradient, converged_step, max_iterations, line_search_failed };

inline const char* to_string(LbfgsStatus s)
{
    switch (s) {
    case LbfgsStatus::converged_gradient:
        return "converged_gradient";
    case LbfgsStatus::converged_step:
        return "converged_step";
    case LbfgsStatus::max_iterations:
        return "max_iterations";
    case LbfgsStatus::line_search_failed:
        return "line_search_failed";
    }
    return "?";
}

struct LbfgsResult {
    std::vector<double> x;
    double f = 0.0;
    int iterations = 0;
    int evaluations = 0;
    int skipped_updates = 0;
    LbfgsStatus status = LbfgsStatus::max_iterations;
    std::vector<double> f_trace; ///< objective after each accepted step
};

/// History of curvature pairs; only pairs with s.y > 0 are stored.
struct LbfgsState {
    int memory = 10;
    std::deque<std::vector<double>> s;
    std::deque<std::vector<double>> y;
    std::deque<double> rho;

    bool push(std::vector<double> sk, std::vector<double> yk)
    {
        const double sy = std::inner_product(sk.begin(), sk.end(), yk.begin(), 0.0);
        if (!(sy > 1e-16 * std::sqrt(std::inner_product(yk.begin(), yk.end(), yk.begin(), 0.0)) *
                       std::sqrt(std::inner_product(sk.begin(), sk.end(), sk.begin(), 0.0))) ||
            !std::isfinite(sy))
            return false;
        if (static_cast<int>(s.size()) == memory) {
            s.pop_front();
            y.pop_front();
            rho.pop_front();
        }
        s.push_back(std::move(sk));
        y.push_back(std::move(yk));
        rho.push_back(1.0 / sy);
        return true;
    }

    /// Two-loop recursion: returns -H g.
    std::vector<double> direction(std::span<const double> g) const
    {
        const std::size_t n = g.size();
        std::vector<double> q(g.begin(), g.end());
        const std::size_t m = s.size();
        std::vector<double> alpha(m);
        for (std::size_t i = m; i-- > 0;) {
            alpha[i] = rho[i] * std::inner_product(s[i].begin(), s[i].end(), q.begin(), 0.0);
            for (std::size_t k = 0; k < n; ++k)
                q[k] -= alpha[i] * y[i][k];
        }
        double gamma = 1.0;
        if (m > 0) {
            const auto& yl = y.back();
            gamma = 1.0 / (rho.back() * std::inner_product(yl.begin(), yl.end(), yl.begin(), 0.0));
        }
        for (double& v : q)
            v *= gamma;
        for (std::size_t i = 0; i < m; ++i) {
            const double beta = rho[i] * std::inner_product(y[i].begin(), y[i].end(), q.begin(), 0.0);
            for (std::size_t k = 0; k < n; ++k)
                q[k] += s[i][k] * (alpha[i] - beta);
        }
        for (double& v : q)
            v = -v;
        return q;
    }
};

namespace detail {

inline double dot(std::span<const double> a, std::span<const double> b)
{
    return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

inline double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

// Minimizer of the cubic interpolating (a, fa, ga), (b, fb, gb), clamped into
// the interval; falls back to bisection.
inline double cubic_min(double a, double fa, double ga, double b, double fb, double gb)
{
    const double lo = std::min(a, b), hi = std::max(a, b);
    const double d1 = ga + gb - 3.0 * (fa - fb) / (a - b);
    const double disc = d1 * d1 - ga * gb;
    if (disc >= 0.0 && std::isfinite(disc)) {
        const double d2 = std::copysign(std::sqrt(disc), b - a);
        const double t = b - (b - a) * (gb + d2 - d1) / (gb - ga + 2.0 * d2);
        if (std::isfinite(t)) {
            const double margin = 0.1 * (hi - lo);
            return std::clamp(t, lo + margin, hi - margin);
        }
    }
    return 0.5 * (a + b);
}

struct LinePoint {
    double alpha = 0.0;
    double f = 0.0;
    double dphi = 0.0;
    std::vector<double> x;
    std::vector<double> g;
    bool ok = false;
};

} // namespace detail

/// Strong Wolfe line search (bracketing + cubic zoom) along `d` from x0.
/// Returns the accepted point; `ok` is false when no acceptable step was
/// found within the trial budget (the best decreasing point, if any, is
/// still returned in that case).
inline detail::LinePoint strong_wolfe_search(const Objective& fn, std::span<const double> x0, double f0,
                                             std::span<const double> g0, std::span<const double> d,
                                             double alpha_init, const LbfgsSettings& st, int& evals)
{
    using detail::LinePoint;
    const std::size_t n = x0.size();
    const double dphi0 = detail::dot(g0, d);
    auto eval = [&](double alpha) {
        LinePoint p;
        p.alpha = alpha;
        p.x.resize(n);
        p.g.assign(n, 0.0);
        for (std::size_t i = 0; i < n; ++i)
            p.x[i] = x0[i] + alpha * d[i];
        ++evals;
        try {
            p.f = fn(p.x, p.g);
        } catch (const NumericError&) {
            p.f = std::numeric_limits<double>::infinity();
        }
        p.ok = std::isfinite(p.f) && std::all_of(p.g.begin(), p.g.end(), [](double v) { return std::isfinite(v); });
        if (!p.ok)
            p.f = std::numeric_limits<double>::infinity();
        p.dphi = p.ok ? detail::dot(p.g, d) : std::numeric_limits<double>::quiet_NaN();
        return p;
    };
    auto armijo = [&](const LinePoint& p) { return p.ok && p.f <= f0 + st.c1 * p.alpha * dphi0; };
    auto curvature = [&](const LinePoint& p) { return std::abs(p.dphi) <= st.c2 * std::abs(dphi0); };

    LinePoint best;
    best.f = f0;
    auto remember = [&](const LinePoint& p) {
        if (armijo(p) && p.f < best.f)
            best = p;
    };

    int trials = 0;
    LinePoint prev;
    prev.alpha = 0.0;
    prev.f = f0;
    prev.dphi = dphi0;
    prev.ok = true;
    double alpha = alpha_init;

    auto zoom = [&](LinePoint lo, LinePoint hi) -> LinePoint {
        while (trials < st.max_line_search) {
            double a;
            if (hi.ok)
                a = detail::cubic_min(lo.alpha, lo.f, lo.dphi, hi.alpha, hi.f, hi.dphi);
            else
                a = 0.5 * (lo.alpha + hi.alpha);
            if (std::abs(hi.alpha - lo.alpha) < 1e-16 * std::max(1.0, std::abs(lo.alpha)))
                break;
            ++trials;
            LinePoint p = eval(a);
            remember(p);
            if (!armijo(p) || p.f >= lo.f) {
                hi = std::move(p);
            } else {
                if (curvature(p)) {
                    p.ok = true;
                    return p;
                }
                if (p.dphi * (hi.alpha - lo.alpha) >= 0.0)
                    hi = lo;
                lo = std::move(p);
            }
        }
        LinePoint fail = best;
        fail.ok = false;
        return fail;
    };

    while (trials < st.max_line_search) {
        ++trials;
        LinePoint p = eval(alpha);
        remember(p);
        if (!p.ok) {
            // Infeasible: treat as an upper bracket.
            return zoom(prev, std::move(p));
        }
        if (!armijo(p) || (trials > 1 && p.f >= prev.f))
            return zoom(prev, std::move(p));
        if (curvature(p))
            return p;
        if (p.dphi >= 0.0)
            return zoom(std::move(p), prev);
        prev = std::move(p);
        alpha *= 2.0;
    }
    LinePoint fail = best;
    fail.ok = false;
    return fail;
}

/// Callback after each accepted iteration: (iteration, x, f). Returning false
/// stops the run.
using LbfgsMonitor = std::function<bool(int, std::span<const double>, double)>;

inline LbfgsResult lbfgs_run(const Objective& fn, std::vector<double> x, const LbfgsSettings& st = {},
                             const LbfgsMonitor& monitor = {})
{
    LbfgsResult res;
    const std::size_t n = x.size();
    std::vector<double> g(n, 0.0);
    double f = fn(x, g);
    res.evaluations = 1;
    if (!std::isfinite(f))
        throw NumericError("lbfgs_run: objective is not finite at the start point");

    LbfgsState hist;
    hist.memory = st.memory;
    for (int it = 0; it < st.max_iterations; ++it) {
        if (detail::norm2(g) < st.grad_tol) {
            res.status = LbfgsStatus::converged_gradient;
            break;
        }
        std::vector<double> d = hist.direction(g);
        double dphi = detail::dot(g, d);
        if (!(dphi < 0.0)) {
            // Not a descent direction: restart from steepest descent.
            hist.s.clear();
            hist.y.clear();
            hist.rho.clear();
            d.assign(g.begin(), g.end());
            for (double& v : d)
                v = -v;
        }
        const double alpha0 = hist.s.empty() ? std::min(1.0, 1.0 / detail::norm2(g)) : 1.0;
        int evals = 0;
        auto p = strong_wolfe_search(fn, x, f, g, d, alpha0, st, evals);
        res.evaluations += evals;
        if (!p.ok) {
            if (!p.x.empty() && p.f < f) {
                x = std::move(p.x);
                f = p.f;
                g = std::move(p.g);
                res.f_trace.push_back(f);
            }
            res.status = LbfgsStatus::line_search_failed;
            break;
        }
        std::vector<double> sk(n), yk(n);
        for (std::size_t i = 0; i < n; ++i) {
            sk[i] = p.x[i] - x[i];
            yk[i] = p.g[i] - g[i];
        }
        const double step = detail::norm2(sk);
        if (!hist.push(sk, yk))
            ++res.skipped_updates;
        x = std::move(p.x);
        f = p.f;
        g = std::move(p.g);
        ++res.iterations;
        res.f_trace.push_back(f);
        if (monitor && !monitor(res.iterations, x, f)) {
            res.status = LbfgsStatus::max_iterations;
            break;
        }
        if (step < st.step_tol * std::max(1.0, detail::norm2(x))) {
            res.status = LbfgsStatus::converged_step;
            break;
        }
        if (it + 1 == st.max_iterations)
            res.status = LbfgsStatus::max_iterations;
    }
    if (st.max_iterations <= 0)
        res.status = LbfgsStatus::max_iterations;
    res.x = std::move(x);
    res.f = f;
    return res;
}

} // namespace wildfire
