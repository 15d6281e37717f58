#pragma once
// Smoothing bandits: Beta-Bernoulli arms whose counts are kernel-weighted sums
// of every arm's observations, plus per-point Bayesian learning of the kernel
// length parameter.
//
// Kernel learning scores each candidate length by the marginal likelihood of a
// point's own counts under the Beta posterior implied by its neighbours'
// smoothed counts:
//
//   P(p | l) = G(a^ + b^) G(a + b - 1) G(a^ + a - 1) G(b^ + b - 1)
//              / [G(a^) G(a) G(b^) G(b) G(a^ + b^ + a + b - 2)]
//
// with a = p + 1, b = q + 1, a^ = p^ + 1, b^ = q^ + 1. The posterior over
// theta is then a mixture of smoothed Beta distributions weighted by the
// length posterior, evaluated on a discrete theta grid.

#include "safeset/beta_model.hpp"
#include "safeset/core.hpp"
#include "safeset/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

namespace safeset {

// ---------------------------------------------------------------------------
// Fixed-length smoothing bandit

inline CountTable smoothed_state(const CountTable& counts, const GridKernel& kernel) {
    return kernel.smooth(counts);
}

inline SafeSetEstimate smoothing_bandit_safe_set(const CountTable& counts, const GridKernel& kernel,
                                                 const SafetyConfig& cfg) {
    return bandit_safe_set(smoothed_state(counts, kernel), cfg);
}

inline std::optional<std::size_t> smoothed_dkwucb_select(const CountTable& counts, const GridKernel& kernel,
                                                         const SafeSetEstimate& current_safe,
                                                         const SafetyConfig& cfg, double c) {
    return dkwucb_select(smoothed_state(counts, kernel), current_safe, cfg, c);
}

inline CountTable smoothed_state(const CountTable& counts, const ParamGrid& grid, const KernelSpec& spec) {
    return smoothed_state(counts, GridKernel(grid, spec));
}

inline SafeSetEstimate smoothing_bandit_safe_set(const CountTable& counts, const ParamGrid& grid,
                                                 const KernelSpec& spec, const SafetyConfig& cfg) {
    return smoothing_bandit_safe_set(counts, GridKernel(grid, spec), cfg);
}

inline std::optional<std::size_t> smoothed_dkwucb_select(const CountTable& counts, const ParamGrid& grid,
                                                         const KernelSpec& spec, const SafeSetEstimate& current_safe,
                                                         const SafetyConfig& cfg, double c) {
    return smoothed_dkwucb_select(counts, GridKernel(grid, spec), current_safe, cfg, c);
}

// ---------------------------------------------------------------------------
// Length likelihood

inline double log_length_likelihood(double p, double q, double p_hat, double q_hat) {
    require(p >= 0.0 && q >= 0.0 && p_hat >= 0.0 && q_hat >= 0.0, "length likelihood needs non-negative counts");
    const double a = p + 1.0, b = q + 1.0, ah = p_hat + 1.0, bh = q_hat + 1.0;
    return std::lgamma(ah + bh) + std::lgamma(a + b - 1.0) + std::lgamma(ah + a - 1.0) + std::lgamma(bh + b - 1.0) -
           std::lgamma(ah) - std::lgamma(a) - std::lgamma(bh) - std::lgamma(b) - std::lgamma(ah + bh + a + b - 2.0);
}

/// Probability of observing p successes in p + q episodes when theta follows
/// Beta(p_hat + 1, q_hat + 1).
inline double length_likelihood(double p, double q, double p_hat, double q_hat) {
    return std::exp(log_length_likelihood(p, q, p_hat, q_hat));
}

// ---------------------------------------------------------------------------
// Length grid

enum class LengthSpacing { Linear, Logarithmic };

struct LengthGridSpec {
    std::size_t bins = 100;
    double lo = 0.0;
    double hi = 0.0;
    LengthSpacing spacing = LengthSpacing::Logarithmic;

    void validate() const {
        require(bins >= 2, "length grid needs at least two bins", ErrorKind::Config);
        require(lo > 0.0 && lo < hi && std::isfinite(hi), "length grid needs 0 < lo < hi", ErrorKind::Config);
    }

    [[nodiscard]] std::vector<double> values() const {
        validate();
        std::vector<double> v(bins);
        for (std::size_t b = 0; b < bins; ++b) {
            const double t = static_cast<double>(b) / static_cast<double>(bins - 1);
            v[b] = spacing == LengthSpacing::Linear ? lo + t * (hi - lo) : lo * std::pow(hi / lo, t);
        }
        v.back() = hi;
        return v;
    }

    /// 100 equal-width bins from a quarter of the finest grid spacing up to the
    /// shortest axis extent, both measured in the kernel's weighted metric.
    static LengthGridSpec for_grid(const ParamGrid& grid, const KernelSpec& spec) {
        double spacing = std::numeric_limits<double>::infinity();
        double extent = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < grid.dim(); ++k) {
            const auto count = grid.dims()[k].count;
            if (count < 2) continue;
            const double scale = std::sqrt(spec.weight(k, k, grid.dim()));
            spacing = std::min(spacing, scale / static_cast<double>(count - 1));
            extent = std::min(extent, scale);
        }
        require(std::isfinite(spacing), "length grid needs an axis with at least two points", ErrorKind::Config);
        return LengthGridSpec{100, 0.25 * spacing, extent, LengthSpacing::Linear};
    }
};

/// Per-point length posteriors, one row per grid point.
struct LengthPosterior {
    std::vector<double> lengths;
    std::vector<std::vector<double>> probs;
};

inline std::vector<double> uniform_prior(std::size_t bins) {
    require(bins >= 1, "prior needs at least one bin");
    return std::vector<double>(bins, 1.0 / static_cast<double>(bins));
}

// ---------------------------------------------------------------------------
// Length learner

/// Per-point length posteriors and the resulting theta mixtures over one grid.
/// Holds one grid kernel per length bin.
class LengthLearner {
public:
    LengthLearner(const ParamGrid& grid, const KernelSpec& base, LengthGridSpec lgrid, std::vector<double> prior = {},
                  bool leave_one_out = true)
        : grid_(&grid), lgrid_(lgrid), lengths_(lgrid.values()), leave_one_out_(leave_one_out) {
        prior_ = prior.empty() ? uniform_prior(lengths_.size()) : std::move(prior);
        require(prior_.size() == lengths_.size(), "length prior does not match the number of bins");
        const double total = std::accumulate(prior_.begin(), prior_.end(), 0.0);
        require(total > 0.0 && std::all_of(prior_.begin(), prior_.end(), [](double w) { return w >= 0.0; }),
                "length prior must be non-negative with positive mass");
        for (auto& w : prior_) w /= total;
        kernels_.reserve(lengths_.size());
        for (double l : lengths_) kernels_.emplace_back(grid, base.with_length(l));
    }

    [[nodiscard]] const ParamGrid& grid() const noexcept { return *grid_; }
    [[nodiscard]] const std::vector<double>& lengths() const noexcept { return lengths_; }
    [[nodiscard]] const std::vector<double>& prior() const noexcept { return prior_; }
    [[nodiscard]] const GridKernel& kernel(std::size_t bin) const { return kernels_.at(bin); }
    [[nodiscard]] std::size_t bins() const noexcept { return lengths_.size(); }
    [[nodiscard]] bool leave_one_out() const noexcept { return leave_one_out_; }

    /// Smoothed counts for every bin: result[b] = K_b counts.
    [[nodiscard]] std::vector<CountTable> smooth_all(const CountTable& counts) const {
        std::vector<CountTable> out;
        out.reserve(bins());
        for (const auto& k : kernels_) out.push_back(k.smooth(counts));
        return out;
    }

    /// Posterior over length bins at one point given per-bin smoothed counts.
    [[nodiscard]] std::vector<double> posterior_row(const CountTable& counts, const std::vector<CountTable>& smoothed,
                                                    std::size_t i) const {
        const double p = counts.p[i], q = counts.q[i];
        std::vector<double> logw(bins());
        double top = -std::numeric_limits<double>::infinity();
        for (std::size_t b = 0; b < bins(); ++b) {
            double ph = smoothed[b].p[i], qh = smoothed[b].q[i];
            if (leave_one_out_) {
                ph = std::max(0.0, ph - p);
                qh = std::max(0.0, qh - q);
            }
            logw[b] = prior_[b] > 0.0 ? std::log(prior_[b]) + log_length_likelihood(p, q, ph, qh)
                                      : -std::numeric_limits<double>::infinity();
            top = std::max(top, logw[b]);
        }
        double total = 0.0;
        for (auto& w : logw) {
            w = std::exp(w - top);
            total += w;
        }
        for (auto& w : logw) w /= total;
        return logw;
    }

    [[nodiscard]] std::vector<double> posterior_row(const CountTable& counts, std::size_t i) const {
        require(i < grid_->size(), "point index out of range");
        return posterior_row(counts, smooth_all(counts), i);
    }

    [[nodiscard]] LengthPosterior posterior(const CountTable& counts) const {
        const auto smoothed = smooth_all(counts);
        LengthPosterior out{lengths_, {}};
        out.probs.reserve(counts.size());
        for (std::size_t i = 0; i < counts.size(); ++i) out.probs.push_back(posterior_row(counts, smoothed, i));
        return out;
    }

    /// Posterior mean of the length parameter for a posterior row.
    [[nodiscard]] double mean_length(std::span<const double> row) const {
        double m = 0.0;
        for (std::size_t b = 0; b < bins(); ++b) m += row[b] * lengths_[b];
        return m;
    }

private:
    const ParamGrid* grid_;
    LengthGridSpec lgrid_;
    std::vector<double> lengths_;
    std::vector<double> prior_;
    std::vector<GridKernel> kernels_;
    bool leave_one_out_;
};

/// Row of the length posterior at one grid point.
inline std::vector<double> length_posterior(const CountTable& counts, const ParamGrid& grid, std::size_t eta_index,
                                            const LengthGridSpec& lgrid, const std::vector<double>& prior,
                                            const KernelSpec& base = {}, bool leave_one_out = true) {
    counts.validate();
    require(counts.size() == grid.size(), "count table does not match grid");
    const LengthLearner learner(grid, base, lgrid, prior, leave_one_out);
    return learner.posterior_row(counts, eta_index);
}

// ---------------------------------------------------------------------------
// Theta mixtures

/// Discrete distribution over theta (success probability) on a uniform grid.
struct ThetaRow {
    std::vector<double> support;
    std::vector<double> probs;
};

/// Per-point theta posteriors over a shared support.
struct ThetaPosterior {
    std::vector<double> support;
    std::vector<std::vector<double>> probs;
};

inline std::vector<double> theta_support(std::size_t bins) {
    require(bins >= 10, "theta discretization needs at least 10 bins");
    std::vector<double> s(bins);
    for (std::size_t k = 0; k < bins; ++k) s[k] = static_cast<double>(k) / static_cast<double>(bins - 1);
    return s;
}

/// Precomputed log theta / log(1 - theta) tables for mixture evaluation.
class ThetaGrid {
public:
    explicit ThetaGrid(std::size_t bins = 201) : support_(theta_support(bins)), log_t_(bins), log_1mt_(bins) {
        for (std::size_t k = 0; k < bins; ++k) {
            log_t_[k] = std::log(support_[k]);
            log_1mt_[k] = std::log1p(-support_[k]);
        }
    }

    [[nodiscard]] const std::vector<double>& support() const noexcept { return support_; }
    [[nodiscard]] std::size_t size() const noexcept { return support_.size(); }

    /// Adds weight * Beta(alpha, beta) density (normalized over the grid) into
    /// acc. alpha, beta >= 1 make the log density concave, so evaluation walks
    /// outward from the mode and stops once the density drops below e^-40 of
    /// its peak.
    void add_beta(double alpha, double beta, double weight, std::span<double> acc, std::span<double> scratch) const {
        const std::size_t n = size();
        auto logd = [&](std::size_t k) {
            const double a = alpha == 1.0 ? 0.0 : (alpha - 1.0) * log_t_[k];
            const double b = beta == 1.0 ? 0.0 : (beta - 1.0) * log_1mt_[k];
            return a + b;
        };
        const double am = alpha - 1.0, bm = beta - 1.0;
        const double mode = am + bm > 0.0 ? std::clamp(am / (am + bm), 0.0, 1.0) : 0.5;
        auto m = static_cast<std::size_t>(std::lround(mode * static_cast<double>(n - 1)));
        // Nudge onto the discrete maximum.
        while (m + 1 < n && logd(m + 1) > logd(m)) ++m;
        while (m > 0 && logd(m - 1) > logd(m)) --m;
        const double top = logd(m);
        constexpr double cutoff = 40.0;
        std::size_t lo = m, hi = m;
        scratch[m] = 1.0;
        double total = 1.0;
        while (lo > 0) {
            const double d = logd(lo - 1) - top;
            if (d < -cutoff) break;
            --lo;
            scratch[lo] = std::exp(d);
            total += scratch[lo];
        }
        while (hi + 1 < n) {
            const double d = logd(hi + 1) - top;
            if (d < -cutoff) break;
            ++hi;
            scratch[hi] = std::exp(d);
            total += scratch[hi];
        }
        const double s = weight / total;
        for (std::size_t k = lo; k <= hi; ++k) acc[k] += s * scratch[k];
    }

    /// Mixture of Beta(1 + p_b, 1 + q_b) over components with weight > cutoff, normalized.
    [[nodiscard]] std::vector<double> mixture(std::span<const double> weights, std::span<const double> p,
                                              std::span<const double> q, double cutoff = 0.0) const {
        std::vector<double> acc(size(), 0.0), scratch(size());
        for (std::size_t b = 0; b < weights.size(); ++b)
            if (weights[b] > cutoff) add_beta(1.0 + p[b], 1.0 + q[b], weights[b], acc, scratch);
        const double total = std::accumulate(acc.begin(), acc.end(), 0.0);
        for (auto& a : acc) a /= total;
        return acc;
    }

private:
    std::vector<double> support_;
    std::vector<double> log_t_;
    std::vector<double> log_1mt_;
};

/// u-quantile of a discrete distribution, linearly interpolating its CDF
/// between support points.
inline double discrete_quantile(const std::vector<double>& support, const std::vector<double>& probs, double u) {
    require(u > 0.0 && u < 1.0, "quantile level must lie in (0, 1)");
    double cum = 0.0;
    for (std::size_t k = 0; k < probs.size(); ++k) {
        const double next = cum + probs[k];
        if (next >= u) {
            if (k == 0 || probs[k] <= 0.0) return support[k];
            const double t = (u - cum) / probs[k];
            return support[k - 1] + t * (support[k] - support[k - 1]);
        }
        cum = next;
    }
    return support.back();
}

/// delta-quantile of P_fail = 1 - theta under a theta row.
inline double failure_quantile(const ThetaRow& row, double delta) {
    std::vector<double> fail_support(row.support.size()), fail_probs(row.probs.size());
    const std::size_t n = row.support.size();
    for (std::size_t k = 0; k < n; ++k) {
        fail_support[k] = 1.0 - row.support[n - 1 - k];
        fail_probs[k] = row.probs[n - 1 - k];
    }
    return discrete_quantile(fail_support, fail_probs, delta);
}

/// Marginal theta posterior at one point: the smoothed Beta distributions of
/// every length bin mixed by that point's length posterior.
inline ThetaRow marginal_theta_posterior(const CountTable& counts, const ParamGrid& grid, std::size_t eta_index,
                                         const LengthGridSpec& lgrid, const std::vector<double>& prior,
                                         std::size_t theta_bins, const KernelSpec& base = {},
                                         bool leave_one_out = true) {
    counts.validate();
    require(counts.size() == grid.size(), "count table does not match grid");
    require(eta_index < grid.size(), "point index out of range");
    const LengthLearner learner(grid, base, lgrid, prior, leave_one_out);
    const auto smoothed = learner.smooth_all(counts);
    const auto weights = learner.posterior_row(counts, smoothed, eta_index);
    std::vector<double> p(learner.bins()), q(learner.bins());
    for (std::size_t b = 0; b < learner.bins(); ++b) {
        p[b] = smoothed[b].p[eta_index];
        q[b] = smoothed[b].q[eta_index];
    }
    const ThetaGrid theta(theta_bins);
    return ThetaRow{theta.support(), theta.mixture(weights, p, q)};
}

} // namespace safeset
