#include "wildfire/net.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

using namespace wildfire;

TEST(Arch, ParameterCounts)
{
    EXPECT_EQ(count_params({{2, 20, 20, 20, 20, 3}}), 1383u);
    EXPECT_EQ(count_params({{3, 20, 20, 20, 20, 3}}), 1403u);
    EXPECT_EQ(count_params({{1, 1}}), 2u);
    EXPECT_EQ(count_params({{2, 5, 3}}), 15u + 18u);
}

TEST(Arch, Validation)
{
    EXPECT_THROW(count_params({{3}}), ConfigError);
    EXPECT_THROW(count_params({{2, 0, 3}}), ConfigError);
    EXPECT_NO_THROW(MlpArch({2, 20, 3}).validate_surrogate(1));
    EXPECT_THROW(MlpArch({3, 20, 3}).validate_surrogate(1), ConfigError);
    EXPECT_THROW(MlpArch({2, 20, 2}).validate_surrogate(1), ConfigError);
    EXPECT_EQ(parse_activation("sigmoid"), Activation::sigmoid);
    EXPECT_THROW(parse_activation("relu"), ConfigError);
}

TEST(Forward, ZeroWeightsGiveZeroOutputOnLinearHead)
{
    const MlpParams p(MlpArch{{2, 20, 20, 20, 20, 3}});
    for (double x : {-3.0, 0.0, 0.4, 10.0}) {
        const std::vector<double> in{x, 1.0 - x};
        EXPECT_EQ(forward(p, in), (std::vector<double>{0.0, 0.0, 0.0}));
    }
}

TEST(Forward, ZeroWeightsSigmoidHeadGivesOneHalf)
{
    const MlpParams p(MlpArch{{2, 4, 3}, Activation::sigmoid});
    const std::vector<double> in{0.3, 0.9};
    EXPECT_EQ(forward(p, in), (std::vector<double>{0.5, 0.5, 0.5}));
}

TEST(Forward, OutputBiasPassesThroughWhenLastWeightsAreZero)
{
    MlpParams p = init_params({{2, 8, 8, 3}}, 5);
    p.weight(2).setZero();
    p.bias(2) << 0.25, -1.5, 3.0;
    for (double x : {0.0, 0.7}) {
        const std::vector<double> in{x, 0.2};
        EXPECT_EQ(forward(p, in), (std::vector<double>{0.25, -1.5, 3.0}));
    }
}

TEST(Forward, HandComputedSingleHiddenUnit)
{
    MlpParams p(MlpArch{{1, 1, 1}});
    p.weight(0)(0, 0) = 2.0;
    p.bias(0)(0) = -1.0;
    p.weight(1)(0, 0) = 3.0;
    p.bias(1)(0) = 0.5;
    const std::vector<double> in{0.75};
    EXPECT_DOUBLE_EQ(forward(p, in)[0], 3.0 / (1.0 + std::exp(-0.5)) + 0.5);
}

TEST(Forward, Deterministic)
{
    const auto p = init_params({{3, 20, 20, 20, 20, 3}}, 17);
    const std::vector<double> in{0.1, 0.2, 0.3};
    EXPECT_EQ(forward(p, in), forward(p, in));
    EXPECT_THROW(forward(p, std::vector<double>{0.1, 0.2}), DimensionError);
}

TEST(Forward, FlatLayoutIsLayerMajorRowMajor)
{
    MlpParams p(MlpArch{{2, 3, 1}});
    for (std::size_t k = 0; k < p.flat.size(); ++k)
        p.flat[k] = static_cast<double>(k);
    EXPECT_EQ(p.weight(0)(1, 0), 2.0);
    EXPECT_EQ(p.weight(0)(2, 1), 5.0);
    EXPECT_EQ(p.bias(0)(0), 6.0);
    EXPECT_EQ(p.weight(1)(0, 2), 11.0);
    EXPECT_EQ(p.bias(1)(0), 12.0);
}

TEST(Init, SameSeedSameParameters)
{
    const MlpArch a{{2, 20, 20, 20, 20, 3}};
    EXPECT_EQ(init_params(a, 42).flat, init_params(a, 42).flat);
    EXPECT_NE(init_params(a, 42).flat, init_params(a, 43).flat);
}

TEST(Init, UniformGlorotStatistics)
{
    // 25 seeds x 400 weights of a 20 -> 20 layer
    const MlpArch a{{2, 20, 20, 20, 20, 3}};
    const double limit = std::sqrt(6.0 / 40.0);
    double sum = 0.0, sq = 0.0;
    std::size_t n = 0;
    for (std::uint64_t seed = 0; seed < 25; ++seed) {
        const auto p = init_params(a, seed);
        const auto w = p.weight(1);
        for (Eigen::Index i = 0; i < w.size(); ++i) {
            const double v = w.data()[i];
            EXPECT_LE(std::abs(v), limit);
            sum += v;
            sq += v * v;
            ++n;
        }
        EXPECT_TRUE(p.bias(1).isZero());
    }
    const double sigma = limit / std::sqrt(3.0);
    EXPECT_LT(std::abs(sum / n), 3.0 * sigma / std::sqrt(static_cast<double>(n)));
    EXPECT_NEAR(sq / n, sigma * sigma, 0.05 * sigma * sigma);
}

TEST(Views, StructuredRoundTripIsExact)
{
    const MlpArch a{{3, 7, 5, 3}};
    const auto p = init_params(a, 9);
    const auto q = MlpParams::from_layers(a, p.layers());
    EXPECT_EQ(p.flat, q.flat);
    auto bad = p.layers();
    bad[1].first.resize(4, 7);
    EXPECT_THROW(MlpParams::from_layers(a, bad), ConfigError);
    EXPECT_THROW(MlpParams(a, std::vector<double>(3, 0.0)), ConfigError);
}
