#pragma once

// Physics-informed loss for the wildfire surrogate.
//
//   L = lambda_S L_D + lambda_U (L_PDE + L_BI)
//   L_D   = mean over data points of |P - P_hat|^2 (summed over T, E, X)
//   L_PDE = mean over collocation points of F1^2 + F2^2 + F3^2
//   L_BI  = mean over boundary/initial points of |P_hat - condition|^2
//
// The network sees normalized inputs (x/Lx[, y/Ly], t/t_end) and produces
// standardized outputs; the surrogate maps them back to physical values and
// applies the chain rule to every derivative channel.

#include "wildfire/autodiff.hpp"
#include "wildfire/dataset.hpp"
#include "wildfire/error.hpp"
#include "wildfire/model.hpp"
#include "wildfire/net.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <span>
#include <string>
#include <tuple>
#include <vector>

namespace wildfire {

/// Records sorted by (t, y, x, tag, values), so reductions do not depend on
/// the order of the input file.
inline std::vector<Record> canonical_order(std::vector<Record> recs)
{
    std::sort(recs.begin(), recs.end(), [](const Record& a, const Record& c) {
        return std::tie(a.t, a.y, a.x, a.tag, a.value.T, a.value.E, a.value.X) <
               std::tie(c.t, c.y, c.x, c.tag, c.value.T, c.value.E, c.value.X);
    });
    return recs;
}

struct Normalization {
    int dim = 1;
    std::array<double, 3> input_scale{1.0, 1.0, 1.0}; ///< network input order (x[, y], t)
    std::array<double, 3> output_offset{0.0, 0.0, 0.0};
    std::array<double, 3> output_scale{1.0, 1.0, 1.0};

    int inputs() const { return dim + 1; }

    /// Input scales are the domain extents; outputs are standardized with the
    /// dataset mean and standard deviation of T, E, X.
    static Normalization from_dataset(const Dataset& ds)
    {
        Normalization n;
        n.dim = ds.domain.dim;
        if (n.dim == 1)
            n.input_scale = {ds.domain.lx, ds.domain.t_end, 1.0};
        else
            n.input_scale = {ds.domain.lx, ds.domain.ly, ds.domain.t_end};
        if (ds.records.empty())
            return n;
        std::array<double, 3> sum{}, sq{};
        for (const auto& r : canonical_order(ds.records)) {
            const std::array<double, 3> v{r.value.T, r.value.E, r.value.X};
            for (int c = 0; c < 3; ++c) {
                sum[c] += v[c];
                sq[c] += v[c] * v[c];
            }
        }
        const double cnt = static_cast<double>(ds.records.size());
        for (int c = 0; c < 3; ++c) {
            const double mean = sum[c] / cnt;
            const double var = std::max(0.0, sq[c] / cnt - mean * mean);
            n.output_offset[c] = mean;
            n.output_scale[c] = var > 1e-24 ? std::sqrt(var) : 1.0;
        }
        return n;
    }

    std::array<double, 3> network_input(double x, double y, double t) const
    {
        if (dim == 1)
            return {x / input_scale[0], t / input_scale[1], 0.0};
        return {x / input_scale[0], y / input_scale[1], t / input_scale[2]};
    }
};

/// Physical-space jets of the surrogate at one point.
struct PointJets {
    StatePoint value{};
    StatePoint dt{};
    std::array<double, 2> T_grad{0.0, 0.0};
    std::array<double, 2> T_lap{0.0, 0.0}; ///< pure second derivatives T_xx, T_yy
};

struct Residuals {
    double F1 = 0.0;
    double F2 = 0.0;
    double F3 = 0.0;
};

/// F1 = T_t - a1 (D . [T_xx, T_yy] - u . [T_x, T_y]) + a2 E r_e - a3 X r_x + a4 U (T - T_a)
/// F2 = E_t + E r_e,  F3 = X_t + X r_x
inline Residuals residuals(const PointJets& j, const PhysParams& theta, const PhysConstants& c)
{
    const double re = rate_endothermic(j.value.T, c.kinetics);
    const double rx = rate_exothermic(j.value.T, c.kinetics);
    double transport = 0.0;
    for (int k = 0; k < theta.dim; ++k)
        transport += theta.dispersion[k] * j.T_lap[k] - theta.velocity[k] * j.T_grad[k];
    Residuals r;
    r.F1 = j.dt.T - c.alpha1 * transport + c.alpha2 * j.value.E * re - c.alpha3 * j.value.X * rx +
           c.alpha4 * theta.heat_loss * (j.value.T - c.ambient_temperature);
    r.F2 = j.dt.E + j.value.E * re;
    r.F3 = j.dt.X + j.value.X * rx;
    return r;
}

struct LossWeights {
    double lambda_s = 1.0;
    double lambda_u = 1.0;
};

struct LossBreakdown {
    double total = 0.0;
    double data = 0.0;
    double pde = 0.0;
    double bi = 0.0;
};

/// Physical prediction at one coordinate (no derivatives).
inline StatePoint predict_state(const MlpParams& p, const Normalization& norm, double x, double y, double t)
{
    const auto in = norm.network_input(x, y, t);
    const auto out = forward(p, std::span<const double>(in.data(), static_cast<std::size_t>(norm.inputs())));
    const auto& os = norm.output_scale;
    const auto& oo = norm.output_offset;
    return {oo[0] + os[0] * out[0], oo[1] + os[1] * out[1], oo[2] + os[2] * out[2]};
}

/// Training points. Every record is a data point; interior records are the
/// PDE collocation points; boundary/initial records carry their condition
/// targets. Points are kept in a canonical (t, y, x, tag) order so the
/// reduction order does not depend on the input order.
struct Batches {
    struct Point {
        std::array<double, 3> coords{}; ///< x, y, t
        StatePoint target{};
        bool pde = false;
        bool bi = false;
    };
    int dim = 1;
    std::vector<Point> points;

    std::size_t n_data() const { return points.size(); }
    std::size_t n_pde() const
    {
        return static_cast<std::size_t>(std::count_if(points.begin(), points.end(), [](const Point& p) { return p.pde; }));
    }
    std::size_t n_bi() const
    {
        return static_cast<std::size_t>(std::count_if(points.begin(), points.end(), [](const Point& p) { return p.bi; }));
    }

    static Batches from_dataset(const Dataset& ds)
    {
        Batches b;
        b.dim = ds.domain.dim;
        const std::vector<Record> recs = canonical_order(ds.records);
        for (const auto& r : recs) {
            Point p;
            p.coords = {r.x, r.y, r.t};
            p.target = r.value;
            p.pde = r.tag == Tag::interior;
            p.bi = !p.pde;
            b.points.push_back(p);
        }
        b.validate();
        return b;
    }

    void validate() const
    {
        if (n_data() == 0 || n_pde() == 0 || n_bi() == 0)
            throw ConfigError("batches: data, collocation and boundary/initial sets must all be non-empty");
    }
};

/// Loss over a fixed set of batches, with the exact gradient with respect to
/// the joint vector [network parameters, theta].
class PinnLoss {
  public:
    PinnLoss(Batches batches, Normalization norm, PhysConstants constants, LossWeights weights = {})
        : batches_(std::move(batches)), norm_(norm), c_(constants), w_(weights)
    {
        if (batches_.dim != norm_.dim)
            throw DimensionError("PinnLoss: batch and normalization dimensionality differ");
        batches_.validate();
        all_.resize(batches_.points.size());
        std::iota(all_.begin(), all_.end(), std::size_t{0});
    }

    const Batches& batches() const { return batches_; }
    const Normalization& normalization() const { return norm_; }
    const PhysConstants& constants() const { return c_; }
    const LossWeights& weights() const { return w_; }
    int dim() const { return norm_.dim; }
    std::size_t theta_size() const { return PhysParams::size_for(norm_.dim); }

    /// Loss on every point. If `grad` is non-empty it must have length
    /// params + theta and receives the gradient (overwritten).
    LossBreakdown evaluate(const MlpParams& p, const PhysParams& theta, std::span<double> grad = {})
    {
        return evaluate_subset(p, theta, all_, grad);
    }

    /// Loss restricted to the points listed in `subset` (means are taken over
    /// the subset's members of each term).
    LossBreakdown evaluate_subset(const MlpParams& p, const PhysParams& theta,
                                  const std::vector<std::size_t>& subset, std::span<double> grad = {})
    {
        const int dim = norm_.dim;
        if (theta.dim != dim)
            throw DimensionError("PinnLoss: theta dimensionality mismatch");
        p.arch.validate_surrogate(dim);
        const bool want_grad = !grad.empty();
        const std::size_t np = p.flat.size();
        if (want_grad && grad.size() != np + theta_size())
            throw DimensionError("PinnLoss: gradient buffer has the wrong length");

        const auto n = static_cast<Eigen::Index>(subset.size());
        const int nin = dim + 1;
        Eigen::MatrixXd x(nin, n);
        std::size_t nd = 0, npde = 0, nbi = 0;
        for (Eigen::Index i = 0; i < n; ++i) {
            const auto& pt = batches_.points[subset[static_cast<std::size_t>(i)]];
            const auto in = norm_.network_input(pt.coords[0], pt.coords[1], pt.coords[2]);
            for (int k = 0; k < nin; ++k)
                x(k, i) = in[static_cast<std::size_t>(k)];
            ++nd;
            npde += pt.pde ? 1 : 0;
            nbi += pt.bi ? 1 : 0;
        }
        if (nd == 0)
            throw ConfigError("PinnLoss: empty evaluation set");

        jets_.forward(p, x, dim);

        const int t_in = dim; // network input index of t
        const int nc = jets_.channels();
        std::vector<Eigen::MatrixXd> adj;
        if (want_grad)
            adj.assign(static_cast<std::size_t>(nc), Eigen::MatrixXd::Zero(3, n));
        std::vector<double> g_theta(theta_size(), 0.0);

        const auto& os = norm_.output_scale;
        const auto& oo = norm_.output_offset;
        const auto& is = norm_.input_scale;
        const auto& kin = c_.kinetics;
        const double inv_nd = 1.0 / static_cast<double>(nd);
        const double inv_npde = npde ? 1.0 / static_cast<double>(npde) : 0.0;
        const double inv_nbi = nbi ? 1.0 / static_cast<double>(nbi) : 0.0;

        const auto& y0 = jets_.output(0);
        double sum_d = 0.0, sum_pde = 0.0, sum_bi = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            const auto& pt = batches_.points[subset[static_cast<std::size_t>(i)]];
            std::array<double, 3> pv{}, diff{};
            const std::array<double, 3> tgt{pt.target.T, pt.target.E, pt.target.X};
            double sq = 0.0;
            for (int c = 0; c < 3; ++c) {
                pv[c] = oo[c] + os[c] * y0(c, i);
                diff[c] = pv[c] - tgt[c];
                sq += diff[c] * diff[c];
            }
            sum_d += sq;
            if (pt.bi)
                sum_bi += sq;
            if (want_grad) {
                const double wd = w_.lambda_s * 2.0 * inv_nd + (pt.bi ? w_.lambda_u * 2.0 * inv_nbi : 0.0);
                for (int c = 0; c < 3; ++c)
                    adj[0](c, i) += wd * diff[c] * os[c];
            }
            if (!pt.pde)
                continue;

            PointJets j;
            j.value = {pv[0], pv[1], pv[2]};
            const auto& yt = jets_.output(1 + t_in);
            j.dt = {os[0] * yt(0, i) / is[t_in], os[1] * yt(1, i) / is[t_in], os[2] * yt(2, i) / is[t_in]};
            for (int k = 0; k < dim; ++k) {
                j.T_grad[k] = os[0] * jets_.output(1 + k)(0, i) / is[k];
                j.T_lap[k] = os[0] * jets_.output(1 + nin + k)(0, i) / (is[k] * is[k]);
            }
            if (!std::isfinite(j.value.T) || j.value.T <= 0.0)
                throw NumericError("PDE term: surrogate temperature " + std::to_string(j.value.T) +
                                   " is not positive at (x=" + std::to_string(pt.coords[0]) +
                                   ", y=" + std::to_string(pt.coords[1]) + ", t=" + std::to_string(pt.coords[2]) + ")");
            const auto re = rate_endothermic_slope(j.value.T, kin);
            const auto rx = rate_exothermic_slope(j.value.T, kin);
            const Residuals r = residuals(j, theta, c_);
            sum_pde += r.F1 * r.F1 + r.F2 * r.F2 + r.F3 * r.F3;
            if (!want_grad)
                continue;

            const double s = w_.lambda_u * 2.0 * inv_npde;
            const double a1 = s * r.F1, a2 = s * r.F2, a3 = s * r.F3;
            const double E = j.value.E, X = j.value.X, T = j.value.T;
            // d/dT, d/dE, d/dX of the three residuals
            const double dT = a1 * (c_.alpha2 * E * re.d_dT - c_.alpha3 * X * rx.d_dT +
                                    c_.alpha4 * theta.heat_loss) +
                              a2 * E * re.d_dT + a3 * X * rx.d_dT;
            const double dE = a1 * c_.alpha2 * re.value + a2 * re.value;
            const double dX = -a1 * c_.alpha3 * rx.value + a3 * rx.value;
            adj[0](0, i) += dT * os[0];
            adj[0](1, i) += dE * os[1];
            adj[0](2, i) += dX * os[2];
            auto& at = adj[static_cast<std::size_t>(1 + t_in)];
            at(0, i) += a1 * os[0] / is[t_in];
            at(1, i) += a2 * os[1] / is[t_in];
            at(2, i) += a3 * os[2] / is[t_in];
            for (int k = 0; k < dim; ++k) {
                adj[static_cast<std::size_t>(1 + k)](0, i) += a1 * c_.alpha1 * theta.velocity[k] * os[0] / is[k];
                adj[static_cast<std::size_t>(1 + nin + k)](0, i) +=
                    -a1 * c_.alpha1 * theta.dispersion[k] * os[0] / (is[k] * is[k]);
                g_theta[static_cast<std::size_t>(k)] += -a1 * c_.alpha1 * j.T_lap[k];
                g_theta[static_cast<std::size_t>(dim + k)] += a1 * c_.alpha1 * j.T_grad[k];
            }
            g_theta[static_cast<std::size_t>(2 * dim)] += a1 * c_.alpha4 * (T - c_.ambient_temperature);
        }

        LossBreakdown out;
        out.data = sum_d * inv_nd;
        out.pde = sum_pde * inv_npde;
        out.bi = sum_bi * inv_nbi;
        out.total = w_.lambda_s * out.data + w_.lambda_u * (out.pde + out.bi);
        check_finite(out);

        if (want_grad) {
            std::fill(grad.begin(), grad.end(), 0.0);
            jets_.backward(p, std::move(adj), grad.first(np));
            for (std::size_t k = 0; k < g_theta.size(); ++k)
                grad[np + k] = g_theta[k];
        }
        return out;
    }

    StatePoint predict(const MlpParams& p, double x, double y, double t) const
    {
        return predict_state(p, norm_, x, y, t);
    }

  private:
    static void check_finite(const LossBreakdown& b)
    {
        if (!std::isfinite(b.data))
            throw NumericError("data term is not finite");
        if (!std::isfinite(b.pde))
            throw NumericError("PDE term is not finite");
        if (!std::isfinite(b.bi))
            throw NumericError("boundary/initial term is not finite");
    }

    Batches batches_;
    Normalization norm_;
    PhysConstants c_;
    LossWeights w_;
    std::vector<std::size_t> all_;
    JetBatch jets_;
};

/// Physical-space jets of the surrogate at one coordinate via per-point
/// forward jets (independent of the batched path).
inline PointJets surrogate_jets(const MlpParams& p, const Normalization& norm, double x, double y, double t)
{
    const auto in = norm.network_input(x, y, t);
    const auto& os = norm.output_scale;
    const auto& oo = norm.output_offset;
    const auto& is = norm.input_scale;
    PointJets j;
    auto fill = [&](const auto& jets, int dim) {
        j.value = {oo[0] + os[0] * jets[0].v, oo[1] + os[1] * jets[1].v, oo[2] + os[2] * jets[2].v};
        j.dt = {os[0] * jets[0].d[dim] / is[dim], os[1] * jets[1].d[dim] / is[dim], os[2] * jets[2].d[dim] / is[dim]};
        for (int k = 0; k < dim; ++k) {
            j.T_grad[k] = os[0] * jets[0].d[k] / is[k];
            j.T_lap[k] = os[0] * jets[0].dd[k] / (is[k] * is[k]);
        }
    };
    if (norm.dim == 1)
        fill(net_jets<2>(p, std::span<const double>(in.data(), 2)), 1);
    else
        fill(net_jets<3>(p, std::span<const double>(in.data(), 3)), 2);
    return j;
}

/// Loss with per-term breakdown; throws NumericError naming the term when a
/// term is not finite.
inline LossBreakdown total_loss(const Batches& batches, const Normalization& norm, const MlpParams& p,
                                const PhysParams& theta, const PhysConstants& c, const LossWeights& w = {})
{
    PinnLoss loss(batches, norm, c, w);
    return loss.evaluate(p, theta);
}

} // namespace wildfire
