#pragma once
// Beta-Bernoulli threshold bandit: posterior over failure probability, robust
// safe-set extraction, and the DKWUCB acquisition rule.

#include "safeset/core.hpp"

#include <boost/math/special_functions/beta.hpp>

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>

namespace safeset {

/// Boost evaluation policy: stay in double rather than promoting to long double.
using math_policy = boost::math::policies::policy<boost::math::policies::promote_double<false>>;

struct BetaDist {
    double alpha = 1.0;
    double beta = 1.0;

    BetaDist() = default;
    BetaDist(double a, double b) : alpha(a), beta(b) {
        require(std::isfinite(a) && std::isfinite(b) && a > 0.0 && b > 0.0, "beta parameters must be positive");
    }

    [[nodiscard]] double mean() const noexcept { return alpha / (alpha + beta); }

    [[nodiscard]] double cdf(double x) const {
        if (x <= 0.0) return 0.0;
        if (x >= 1.0) return 1.0;
        return boost::math::ibeta(alpha, beta, x, math_policy());
    }

    friend bool operator==(const BetaDist&, const BetaDist&) = default;
};

/// Posterior over P_fail = 1 - theta under a Beta(1, 1) prior on theta:
/// Beta(1 + q, 1 + p). Counts may be fractional.
inline BetaDist failure_posterior(double p, double q) {
    require(p >= 0.0 && q >= 0.0, "counts must be non-negative");
    return {1.0 + q, 1.0 + p};
}

inline double beta_quantile(const BetaDist& dist, double u) {
    require(u > 0.0 && u < 1.0, "quantile level must lie in (0, 1)");
    return boost::math::ibeta_inv(dist.alpha, dist.beta, u, math_policy());
}

/// Eta is safe when the delta-quantile of its failure posterior is at most gamma.
inline SafeSetEstimate bandit_safe_set(const CountTable& counts, const SafetyConfig& cfg) {
    cfg.validate();
    require(counts.p.size() == counts.q.size(), "count vectors differ in length");
    SafeSetEstimate est;
    est.mask.resize(counts.size());
    est.statistic.resize(counts.size());
    for (std::size_t i = 0; i < counts.size(); ++i) {
        const double x = beta_quantile(failure_posterior(counts.p[i], counts.q[i]), cfg.delta);
        est.statistic[i] = x;
        est.mask[i] = x <= cfg.gamma;
    }
    return est;
}

/// sqrt(log(2/c) / (2N)), clamped at zero when c > 2.
inline double dkwucb_bonus(double n, double c) {
    require(c > 0.0, "exploration constant must be positive");
    require(n > 0.0, "bonus needs a positive count");
    return std::sqrt(std::max(0.0, std::log(2.0 / c)) / (2.0 * n));
}

/// Score of one arm. Members of the current safe set get -inf; unvisited arms
/// get their prior CDF at gamma plus one.
inline double dkwucb_score(double p, double q, bool in_safe_set, double gamma, double c) {
    if (in_safe_set) return -std::numeric_limits<double>::infinity();
    const double f = failure_posterior(p, q).cdf(gamma);
    const double n = p + q;
    return n > 0.0 ? f + dkwucb_bonus(n, c) : f + 1.0;
}

/// Arm maximizing the DKWUCB score, lowest index on ties. Returns nullopt when
/// every arm is already in the safe set.
inline std::optional<std::size_t> dkwucb_select(const CountTable& counts, const SafeSetEstimate& safe,
                                                const SafetyConfig& cfg, double c) {
    require(c > 0.0, "exploration constant must be positive");
    require(safe.size() == counts.size(), "safe set does not match count table");
    std::optional<std::size_t> best;
    double best_score = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < counts.size(); ++i) {
        if (safe.mask[i]) continue;
        const double s = dkwucb_score(counts.p[i], counts.q[i], false, cfg.gamma, c);
        if (!best || s > best_score) {
            best = i;
            best_score = s;
        }
    }
    return best;
}

} // namespace safeset
