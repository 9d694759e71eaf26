#include "oracle.hpp"

#include "wildfire/autodiff.hpp"
#include "wildfire/config.hpp"
#include "wildfire/pinn.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

using namespace wildfire;

namespace {

// Synthetic 1D dataset on a coarse grid with smooth positive targets.
Dataset synthetic(int dim, double spacing)
{
    Dataset ds;
    ds.domain = {dim, 100.0, dim == 2 ? 100.0 : 0.0, 200.0};
    ds.spacing = {spacing, dim == 2 ? spacing : 0.0, spacing};
    const int nx = static_cast<int>(100.0 / spacing);
    const int nt = static_cast<int>(200.0 / spacing);
    const int ny = dim == 2 ? nx : 0;
    for (int n = 0; n <= nt; ++n)
        for (int j = 0; j <= ny; ++j)
            for (int i = 0; i <= nx; ++i) {
                Record r;
                r.x = i * spacing;
                r.y = j * spacing;
                r.t = n * spacing;
                const double s = std::sin(0.03 * r.x + 0.01 * r.t) + (dim == 2 ? std::cos(0.02 * r.y) : 0.0);
                r.value = {1.2 + 0.3 * s, 0.3 - 0.05 * s, 0.7 - 0.1 * s};
                const bool edge = i == 0 || i == nx || (dim == 2 && (j == 0 || j == ny));
                r.tag = n == 0 ? Tag::initial : edge ? Tag::boundary : Tag::interior;
                ds.records.push_back(r);
            }
    return ds;
}

} // namespace

TEST(Jets, ZeroWeightsHaveZeroDerivatives)
{
    const MlpParams p(MlpArch{{2, 6, 6, 3}, Activation::sigmoid});
    const std::vector<double> in{0.2, 0.7};
    for (const auto& j : net_jets<2>(p, in)) {
        EXPECT_EQ(j.v, 0.5);
        for (int k = 0; k < 2; ++k) {
            EXPECT_EQ(j.d[k], 0.0);
            EXPECT_EQ(j.dd[k], 0.0);
        }
    }
}

TEST(Jets, ExactOnPolynomials)
{
    using J = Jet2<2>;
    const J x = J::variable(1.5, 0);
    const J y = J::variable(-0.5, 1);
    const J f = x * x * y + 3.0 * y * y - x; // f_x = 2xy - 1, f_xx = 2y, f_y = x^2 + 6y, f_yy = 6
    EXPECT_DOUBLE_EQ(f.v, 1.5 * 1.5 * -0.5 + 0.75 - 1.5);
    EXPECT_DOUBLE_EQ(f.d[0], 2 * 1.5 * -0.5 - 1);
    EXPECT_DOUBLE_EQ(f.dd[0], -1.0);
    EXPECT_DOUBLE_EQ(f.d[1], 2.25 - 3.0);
    EXPECT_DOUBLE_EQ(f.dd[1], 6.0);
    const J q = J(1.0) / x; // -1/x^2, 2/x^3
    EXPECT_DOUBLE_EQ(q.d[0], -1.0 / 2.25);
    EXPECT_DOUBLE_EQ(q.dd[0], 2.0 / 3.375);
}

TEST(Jets, MatchFiniteDifferences)
{
    // Central differences of the network value: first derivatives with
    // h = 1e-5, second derivatives with the three-point stencil at h = 1e-3.
    // Derivatives of a deep sigmoid net at init are small (around 1e-5), so
    // the stencils run on the extended precision forward pass.
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst1 = 0.0, worst2 = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const bool two = trial % 2 == 1;
        const MlpArch a{{two ? 3 : 2, 20, 20, 20, 20, 3}};
        const auto p = init_params(a, static_cast<std::uint64_t>(trial));
        const std::vector<oracle::LD> flat(p.flat.begin(), p.flat.end());
        std::vector<double> in{u(rng), u(rng), u(rng)};
        in.resize(static_cast<std::size_t>(a.inputs()));
        std::vector<std::array<double, 3>> d(3), dd(3);
        if (two) {
            const auto j = net_jets<3>(p, in);
            for (int c = 0; c < 3; ++c)
                for (int k = 0; k < 3; ++k) {
                    d[c][k] = j[c].d[k];
                    dd[c][k] = j[c].dd[k];
                }
        } else {
            const auto j = net_jets<2>(p, in);
            for (int c = 0; c < 3; ++c)
                for (int k = 0; k < 2; ++k) {
                    d[c][k] = j[c].d[k];
                    dd[c][k] = j[c].dd[k];
                }
        }
        for (int c = 0; c < 3; ++c)
            for (std::size_t k = 0; k < in.size(); ++k) {
                const oracle::LD h1 = 1e-5L, h2 = 1e-3L;
                auto f = [&](oracle::LD s) {
                    std::array<oracle::LD, 3> q{in[0], in[1], in.size() > 2 ? in[2] : 0.0};
                    q[k] += s;
                    return oracle::net(a, flat, q)[static_cast<std::size_t>(c)].v;
                };
                const double fd1 = static_cast<double>((f(h1) - f(-h1)) / (2 * h1));
                const double fd2 = static_cast<double>((f(h2) - 2 * f(0) + f(-h2)) / (h2 * h2));
                EXPECT_NEAR(forward(p, in)[static_cast<std::size_t>(c)], static_cast<double>(f(0)), 1e-14);
                worst1 = std::max(worst1, oracle::rel_error(d[c][k], fd1));
                worst2 = std::max(worst2, oracle::rel_error(dd[c][k], fd2));
            }
    }
    EXPECT_LT(worst1, 1e-6);
    EXPECT_LT(worst2, 1e-4);
}

TEST(JetBatch, AgreesWithPerPointJets)
{
    const auto p = init_params({{3, 10, 10, 3}}, 3);
    Eigen::MatrixXd x(3, 5);
    x << 0.1, 0.2, 0.3, 0.4, 0.5, 0.9, 0.8, 0.7, 0.6, 0.5, 0.0, 0.25, 0.5, 0.75, 1.0;
    JetBatch b;
    b.forward(p, x, 2);
    ASSERT_EQ(b.channels(), 6);
    for (Eigen::Index i = 0; i < x.cols(); ++i) {
        const std::vector<double> in{x(0, i), x(1, i), x(2, i)};
        const auto j = net_jets<3>(p, in);
        for (int c = 0; c < 3; ++c) {
            EXPECT_NEAR(b.output(0)(c, i), j[c].v, 1e-14);
            for (int k = 0; k < 3; ++k)
                EXPECT_NEAR(b.output(1 + k)(c, i), j[c].d[k], 1e-13);
            for (int s = 0; s < 2; ++s)
                EXPECT_NEAR(b.output(4 + s)(c, i), j[c].dd[s], 1e-13);
        }
    }
}

TEST(JetBatch, BackwardOfValueChannelIsParameterGradient)
{
    // d(sum of output 1)/d(params) against central differences
    const auto p = init_params({{2, 5, 4, 3}}, 8);
    Eigen::MatrixXd x(2, 3);
    x << 0.1, 0.5, 0.9, 0.3, 0.6, 0.2;
    JetBatch b;
    b.forward(p, x, 1);
    std::vector<Eigen::MatrixXd> adj(static_cast<std::size_t>(b.channels()), Eigen::MatrixXd::Zero(3, 3));
    adj[0].row(1).setOnes();
    std::vector<double> g(p.flat.size(), 0.0);
    b.backward(p, adj, g);
    for (std::size_t k = 0; k < p.flat.size(); ++k) {
        auto f = [&](double s) {
            MlpParams q = p;
            q.flat[k] += s;
            double sum = 0.0;
            for (Eigen::Index i = 0; i < 3; ++i)
                sum += forward(q, std::vector<double>{x(0, i), x(1, i)})[1];
            return sum;
        };
        EXPECT_NEAR(g[k], (f(1e-6) - f(-1e-6)) / 2e-6, 1e-8) << "param " << k;
    }
}

TEST(LossGradient, MatchesExtendedPrecisionDifferences)
{
    // Relative error below 1e-6 on every coordinate with |g| > 1e-8. The
    // reference is a per-point long double loss with a five-point stencil.
    std::mt19937_64 rng(31);
    std::normal_distribution<double> nrm(0.0, 1.0);
    double worst = 0.0;
    std::size_t checked = 0;
    for (int trial = 0; trial < 4; ++trial) {
        const int dim = trial % 2 == 0 ? 1 : 2;
        const auto ds = synthetic(dim, dim == 1 ? 20.0 : 50.0);
        const MlpArch a{{dim + 1, 6, 5, 3}};
        auto p = init_params(a, static_cast<std::uint64_t>(100 + trial));
        for (auto& v : p.bias(a.layers() - 1))
            v = 0.1 * nrm(rng);
        const auto theta = PhysParams::from_vector(
            dim == 1 ? std::vector<double>{0.41, 0.25, 0.61} : std::vector<double>{0.74, 0.41, 0.35, 0.2, 0.4}, dim);
        PinnLoss loss(Batches::from_dataset(ds), Normalization::from_dataset(ds), canonical_constants(),
                      {1.0 + trial, 0.5});
        std::vector<double> g(p.flat.size() + theta.to_vector().size());
        const double L = loss.evaluate(p, theta, g).total;

        std::vector<oracle::LD> x(p.flat.begin(), p.flat.end());
        for (double v : theta.to_vector())
            x.push_back(v);
        auto f = [&](const std::vector<oracle::LD>& v) { return oracle::loss(loss, a, v); };
        EXPECT_NEAR(static_cast<double>(f(x)), L, 1e-13 * L);
        for (std::size_t k = 0; k < x.size(); ++k) {
            if (std::abs(g[k]) <= 1e-8)
                continue;
            const double ref = static_cast<double>(oracle::derivative5(f, x, k, 1e-4L));
            worst = std::max(worst, oracle::rel_error(g[k], ref));
            ++checked;
        }
    }
    EXPECT_GT(checked, 100u);
    EXPECT_LT(worst, 1e-6);
}
