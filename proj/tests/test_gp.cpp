#include "safeset/gp.hpp"
#include "safeset/rng.hpp"
#include "oracles.hpp"

#include <boost/math/distributions/normal.hpp>
#include <gtest/gtest.h>

#include <cmath>
#include <vector>

using namespace safeset;
using oracle::dense_gp;

namespace {

GpDataset random_dataset(const ParamGrid& grid, std::size_t n, RngStream& r) {
    GpDataset d;
    for (std::size_t i = 0; i < n; ++i) {
        ParamVector p;
        for (std::size_t k = 0; k < grid.dim(); ++k) p.push_back(r.uniform(grid.dims()[k].lo, grid.dims()[k].hi));
        d.add(p, r.uniform(), r.uniform(1e-4, 1e-2));
    }
    return d;
}

} // namespace

TEST(Gp, EmptyDatasetIsPrior) {
    const auto g = build_grid({{"a", 0, 1, 5}});
    const auto post = gp_condition({}, g, {0.1, {}});
    for (std::size_t i = 0; i < g.size(); ++i) {
        EXPECT_EQ(post.mean[i], 0.0);
        EXPECT_EQ(post.std[i], 1.0);
    }
}

TEST(Gp, NearInterpolation) {
    const auto g = build_grid({{"a", 0, 1, 5}});
    GpDataset d;
    d.add({0.5}, 0.3, 1e-10);
    const auto post = gp_condition(d, g, {0.1, {}});
    EXPECT_NEAR(post.mean[2], 0.3, 1e-4);
    EXPECT_LE(post.std[2], 1e-3);
}

TEST(Gp, MatchesDenseOracle) {
    RngStream r(17, 0);
    for (int t = 0; t < 100; ++t) {
        const auto g = t % 2 ? build_grid({{"a", 0, 2, 9}, {"b", -1, 1, 7}}) : build_grid({{"a", 0, 1, 5}});
        const std::size_t n = 1 + r.below(20);
        const double l = r.uniform(0.1, 0.6);
        const auto d = random_dataset(g, n, r);
        const auto post = gp_condition(d, g, {l, {}});
        const auto o = dense_gp(d, g, l);
        for (std::size_t i = 0; i < g.size(); ++i) {
            EXPECT_NEAR(post.mean[i], o.mean[i], 1e-8);
            EXPECT_NEAR(post.std[i] * post.std[i], std::max(0.0, o.var[i]), 1e-8);
        }
    }
}

TEST(Gp, ThreePointsOnFiveGrid) {
    const auto g = build_grid({{"a", 0, 1, 5}});
    GpDataset d;
    d.add({0.1}, 0.2, 1e-3);
    d.add({0.55}, 0.6, 2e-3);
    d.add({0.9}, 0.1, 1e-3);
    const auto post = gp_condition(d, g, {0.3, {}});
    const auto o = dense_gp(d, g, 0.3);
    for (std::size_t i = 0; i < g.size(); ++i) {
        EXPECT_NEAR(post.mean[i], o.mean[i], 1e-8);
        EXPECT_NEAR(post.std[i] * post.std[i], o.var[i], 1e-8);
    }
}

TEST(Gp, VarianceNeverIncreasesWithData) {
    RngStream r(23, 0);
    const auto g = build_grid({{"a", 0, 1, 11}, {"b", 0, 1, 11}});
    for (int t = 0; t < 30; ++t) {
        GpDataset d;
        auto prev = gp_condition(d, g, {0.2, {}});
        for (int k = 0; k < 15; ++k) {
            d.add({r.uniform(), r.uniform()}, r.uniform(), r.uniform(1e-4, 1e-2));
            const auto next = gp_condition(d, g, {0.2, {}});
            for (std::size_t i = 0; i < g.size(); ++i) EXPECT_LE(next.std[i] * next.std[i], prev.std[i] * prev.std[i] + 1e-7);
            prev = next;
        }
    }
}

TEST(Gp, CovarianceDiagonalMatchesStd) {
    RngStream r(29, 0);
    const auto g = build_grid({{"a", 0, 1, 9}});
    const auto d = random_dataset(g, 6, r);
    const auto post = gp_condition(d, g, {0.2, {}}, true);
    ASSERT_TRUE(post.has_covariance());
    for (std::size_t i = 0; i < g.size(); ++i)
        EXPECT_NEAR(post.cov(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)), post.std[i] * post.std[i], 1e-10);
}

TEST(EstimatorNoise, Examples) {
    EXPECT_NEAR(estimator_noise(0.5, 100), 2.5e-3, 0.05 * 2.5e-3);
    EXPECT_NEAR(estimator_noise(0.0, 100), (1.0 / 102) * (101.0 / 102) / 100, 1e-12);
    EXPECT_GT(estimator_noise(0.0, 100), 0.0);
    double prev = estimator_noise(0.3, 1);
    for (int n = 2; n < 2000; n *= 2) {
        const double v = estimator_noise(0.3, n);
        EXPECT_LT(v, prev);
        prev = v;
    }
    EXPECT_GE(estimator_noise(0.0, 100000000), gp_noise_floor);
    EXPECT_THROW(estimator_noise(0.5, 0), Error);
}

TEST(GpSafeSet, BetaAndExamples) {
    EXPECT_NEAR(gp_beta(0.95), 1.6449, 1e-3);
    EXPECT_NEAR(gp_beta(0.5), 0.0, 1e-12);
    GpPosterior post;
    post.mean = {0.05, 0.09};
    post.std = {0.01, 0.01};
    const auto est = gp_safe_set(post, {0.1, 0.95});
    EXPECT_TRUE(est.mask[0]);
    EXPECT_FALSE(est.mask[1]);
    EXPECT_TRUE(gp_safe_set(post, {0.1, 0.5}).mask[1]);
}

TEST(GpSafeSet, MonotoneInDelta) {
    RngStream r(31, 0);
    const auto g = build_grid({{"a", 0, 1, 21}});
    const auto d = random_dataset(g, 10, r);
    const auto post = gp_condition(d, g, {0.15, {}});
    for (double d1 = 0.55; d1 < 0.99; d1 += 0.05) {
        const auto lo = gp_safe_set(post, {0.4, d1}), hi = gp_safe_set(post, {0.4, d1 + 0.04});
        for (std::size_t i = 0; i < g.size(); ++i)
            if (hi.mask[i]) { EXPECT_TRUE(lo.mask[i]); }
    }
}

namespace {

// Sampling oracle for the expected safe-set size after one evaluation at x:
// draw y from the predictive distribution, recondition, and count points that
// are safe before or after the update.
double mile_mc(const GpDataset& data, const ParamGrid& grid, const KernelSpec& spec, const SafetyConfig& cfg,
               std::size_t x, int samples, RngStream& r) {
    const auto post = gp_condition(data, grid, spec);
    const auto before = gp_safe_set(post, cfg);
    const double nu = estimator_noise(std::clamp(post.mean[x], 0.0, 1.0), data.episodes_per_eval);
    const double sd = std::sqrt(post.std[x] * post.std[x] + nu);
    // The posterior mean is linear in y, so condition once on y = 0 and once on
    // a unit observation, then combine; y may fall outside [0, 1].
    GpDataset zero = data;
    zero.add(grid.point(x), 0.0, nu);
    GpDataset unit = zero;
    for (auto& v : unit.values) v = 0.0;
    unit.values.back() = 1.0;
    const auto at_zero = gp_condition(zero, grid, spec);
    const auto basis = gp_condition(unit, grid, spec);
    double total = 0.0;
    for (int s = 0; s < samples; ++s) {
        const double y = post.mean[x] + sd * r.normal();
        GpPosterior after = at_zero;
        for (std::size_t i = 0; i < grid.size(); ++i) after.mean[i] += y * basis.mean[i];
        const auto mask = gp_safe_set(after, cfg).mask;
        for (std::size_t i = 0; i < grid.size(); ++i) total += (before.mask[i] || mask[i]) ? 1.0 : 0.0;
    }
    return total / samples;
}

} // namespace

TEST(Mile, MatchesSamplingOracle) {
    const auto g = build_grid({{"a", 0, 1, 15}});
    const KernelSpec spec{0.15, {}};
    const SafetyConfig cfg{0.3, 0.95};
    GpDataset d;
    d.episodes_per_eval = 100;
    d.add({0.0}, 0.02, estimator_noise(0.02, 100));
    d.add({0.2}, 0.05, estimator_noise(0.05, 100));
    d.add({0.9}, 0.8, estimator_noise(0.8, 100));
    const auto post = gp_condition(d, g, spec, true);
    const auto scores = mile_expected_safe_counts(post, d, cfg);
    const double current = static_cast<double>(gp_safe_set(post, cfg).count());
    RngStream r(37, 0);
    for (std::size_t x : {1u, 3u, 5u, 8u, 12u}) {
        const double mc = mile_mc(d, g, spec, cfg, x, 10000, r);
        EXPECT_NEAR(scores[x], mc, 0.02 * std::max(1.0, mc)) << "x=" << x;
    }
    for (double s : scores) EXPECT_GE(s, current - 1e-9);
}

TEST(Mile, BoundaryBeatsDeepInterior) {
    // Constructed 1-D posterior: a deep safe point with tiny sigma and a
    // boundary point with moderate sigma near the threshold.
    const auto g = build_grid({{"a", 0, 1, 11}});
    const KernelSpec spec{0.1, {}};
    GpDataset d;
    d.episodes_per_eval = 100;
    for (int k = 0; k < 4; ++k) d.add({0.0}, 0.01, 1e-5);
    d.add({0.6}, 0.2, 1e-2);
    const SafetyConfig cfg{0.3, 0.95};
    const auto post = gp_condition(d, g, spec, true);
    ASSERT_TRUE(gp_safe_set(post, cfg).mask[0]);
    const auto scores = mile_expected_safe_counts(post, d, cfg);
    EXPECT_LT(scores[0], scores[5]);
    RngStream r(41, 0);
    EXPECT_LT(mile_mc(d, g, spec, cfg, 0, 4000, r), mile_mc(d, g, spec, cfg, 5, 4000, r));
}

TEST(Mile, SymmetricPriorPicksLowestArgmax) {
    const auto g = build_grid({{"a", 0, 1, 9}});
    GpDataset d;
    const auto post = gp_condition(d, g, {0.2, {}}, true);
    const SafetyConfig cfg{0.5, 0.6};
    const auto scores = mile_expected_safe_counts(post, d, cfg);
    const std::size_t pick = mile_select(post, d, g, cfg);
    const std::size_t mirror = g.size() - 1 - pick;
    EXPECT_LE(pick, mirror);
    EXPECT_NEAR(scores[pick], scores[mirror], 1e-9);
    for (double s : scores) EXPECT_LE(s, scores[pick] + 1e-9);
}

TEST(Mile, DegeneratePosteriorPicksUnevaluated) {
    const auto g = build_grid({{"a", 0, 1, 4}});
    GpDataset d;
    d.add({0.0}, 0.1, 1e-3);
    GpPosterior post;
    post.mean.assign(4, 0.1);
    post.std.assign(4, 0.0);
    post.cov = Eigen::MatrixXd::Zero(4, 4);
    EXPECT_EQ(mile_select(post, d, g, {0.3, 0.95}), 1u);
}
