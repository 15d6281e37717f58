#pragma once
// Safe-set estimation loop with pluggable model and acquisition, Monte Carlo
// ground truth, and evaluation metrics.

#include "safeset/beta_model.hpp"
#include "safeset/core.hpp"
#include "safeset/gp.hpp"
#include "safeset/kernel.hpp"
#include "safeset/rng.hpp"
#include "safeset/sim/simulator.hpp"
#include "safeset/smoothing.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace safeset {

enum class MethodKind { GpMile, BanditRandom, BanditDkwucb, SmoothingDkwucb, SmoothingLearned };

inline const std::vector<std::string>& method_names() {
    static const std::vector<std::string> names{"gp-mile", "bandit-random", "bandit-dkwucb", "smoothing-dkwucb",
                                                "smoothing-learned"};
    return names;
}

inline std::string method_name(MethodKind k) { return method_names().at(static_cast<std::size_t>(k)); }

inline MethodKind parse_method_kind(const std::string& name) {
    const auto& names = method_names();
    for (std::size_t i = 0; i < names.size(); ++i)
        if (names[i] == name) return static_cast<MethodKind>(i);
    std::string valid;
    for (const auto& n : names) valid += (valid.empty() ? "" : ", ") + n;
    throw Error(ErrorKind::Config, "unknown method '" + name + "' (valid: " + valid + ")");
}

struct MethodSpec {
    MethodKind kind = MethodKind::SmoothingDkwucb;
    double length = 0.1;                 // fixed kernel length (gp-mile, smoothing-dkwucb)
    std::vector<double> weights;         // kernel weight matrix, empty = identity
    double c = 1.0;                      // DKWUCB exploration constant
    int episodes_per_eval = 100;         // gp-mile batch size
    std::optional<LengthGridSpec> lgrid; // smoothing-learned; default derived from the grid
    int refresh_every = 100;             // smoothing-learned posterior refresh cadence
    bool leave_one_out = true;
    std::size_t theta_bins = 201;
    double prune = 1e-10; // length bins below prune * max weight are dropped from theta mixtures

    [[nodiscard]] KernelSpec kernel() const { return KernelSpec{length, weights}; }

    void validate(std::size_t d) const {
        try {
            kernel().validate(d);
        } catch (const Error& e) {
            throw Error(ErrorKind::Config, e.what());
        }
        require(c > 0.0, "c must be positive", ErrorKind::Config);
        require(episodes_per_eval >= 1, "episodes_per_eval must be at least 1", ErrorKind::Config);
        require(refresh_every >= 1, "refresh_every must be at least 1", ErrorKind::Config);
        require(theta_bins >= 10, "theta_bins must be at least 10", ErrorKind::Config);
        require(prune >= 0.0 && prune < 1.0, "prune must lie in [0, 1)", ErrorKind::Config);
        if (lgrid) lgrid->validate();
    }
};

struct EpisodeRecord {
    std::int64_t episode = 0; // 1-based
    std::size_t index = 0;
    bool safe = true;
};

struct Checkpoint {
    std::int64_t episode = 0;
    std::vector<bool> mask;
    std::optional<double> precision;
    std::optional<double> recall;
};

struct RunTrace {
    std::vector<EpisodeRecord> episodes;
    std::vector<Checkpoint> checkpoints;
    std::int64_t total_budget = 0;
    bool saturated = false;
    bool stopped = false; // ended early by RunOptions::stop

    [[nodiscard]] std::int64_t used() const noexcept { return static_cast<std::int64_t>(episodes.size()); }
};

struct GroundTruth {
    std::vector<double> p_fail_hat;
    std::int64_t n_per_point = 0;
    std::vector<bool> safe_mask;

    [[nodiscard]] std::size_t size() const noexcept { return p_fail_hat.size(); }

    void validate(double gamma) const {
        require(p_fail_hat.size() == safe_mask.size(), "ground truth vectors differ in length");
        require(n_per_point >= 1, "ground truth needs n_per_point >= 1");
        for (std::size_t i = 0; i < size(); ++i) {
            require(p_fail_hat[i] >= 0.0 && p_fail_hat[i] <= 1.0, "ground truth p_fail_hat outside [0, 1]");
            require(safe_mask[i] == (p_fail_hat[i] < gamma), "ground truth mask inconsistent with gamma");
        }
    }
};

struct Metrics {
    double precision = 1.0;
    double recall = 1.0;
    std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
};

inline Metrics evaluate(const std::vector<bool>& estimate, const std::vector<bool>& truth) {
    require(estimate.size() == truth.size(), "estimate and ground truth grids differ");
    Metrics m;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (estimate[i] && truth[i]) ++m.tp;
        else if (estimate[i]) ++m.fp;
        else if (truth[i]) ++m.fn;
        else ++m.tn;
    }
    m.precision = m.tp + m.fp == 0 ? 1.0 : static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fp);
    m.recall = m.tp + m.fn == 0 ? 1.0 : static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fn);
    return m;
}

inline Metrics evaluate(const SafeSetEstimate& estimate, const GroundTruth& truth) {
    return evaluate(estimate.mask, truth.safe_mask);
}

/// Applies a simulator and rewraps its errors with point context.
inline sim::EpisodeOutcome run_episode(const sim::Simulator& sim, const ParamGrid& grid, std::size_t index,
                                       RngStream rng) {
    try {
        return sim(grid.point(index), std::move(rng));
    } catch (const std::exception& e) {
        throw Error(ErrorKind::Simulator,
                    "simulator '" + sim.id() + "' failed at point " + std::to_string(index) + ": " + e.what());
    }
}

/// Failure-fraction estimates with n episodes per grid point. Point i, episode
/// e always uses stream episode_stream(i, e) under `seed`, so the result does
/// not depend on the thread count.
inline GroundTruth mc_ground_truth(const sim::Simulator& sim, const ParamGrid& grid, std::int64_t n,
                                   const SafetyConfig& cfg, std::uint64_t seed, unsigned threads = 1) {
    require(n >= 1, "ground truth needs at least one episode per point");
    cfg.validate();
    GroundTruth truth;
    truth.n_per_point = n;
    truth.p_fail_hat.assign(grid.size(), 0.0);
    truth.safe_mask.assign(grid.size(), false);

    const unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(grid.size())));
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto work = [&](unsigned w) {
        try {
            for (std::size_t i = w; i < grid.size(); i += workers) {
                std::int64_t failures = 0;
                for (std::int64_t e = 0; e < n; ++e) {
                    const RngStream rng(seed, episode_stream(i, static_cast<std::uint64_t>(e)));
                    failures += run_episode(sim, grid, i, rng).safe ? 0 : 1;
                }
                truth.p_fail_hat[i] = static_cast<double>(failures) / static_cast<double>(n);
            }
        } catch (...) {
            const std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
        }
    };
    if (workers == 1) {
        work(0);
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work, w);
        for (auto& t : pool) t.join();
    }
    if (failure) std::rethrow_exception(failure);
    std::vector<bool> mask(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) mask[i] = truth.p_fail_hat[i] < cfg.gamma;
    truth.safe_mask = std::move(mask);
    return truth;
}

inline GroundTruth mc_ground_truth(const std::string& sim_id, const ParamGrid& grid, std::int64_t n,
                                   const SafetyConfig& cfg, std::uint64_t seed, unsigned threads = 1) {
    return mc_ground_truth(sim::make_simulator(sim_id), grid, n, cfg, seed, threads);
}

// ---------------------------------------------------------------------------
// Models

namespace detail {

class Model {
public:
    virtual ~Model() = default;
    virtual void observe(std::size_t index, bool safe) = 0;
    /// Next arm, or nullopt when every arm is in the current safe set.
    virtual std::optional<std::size_t> select() = 0;
    /// Current safe set as used by acquisition and checkpoints.
    [[nodiscard]] virtual std::vector<bool> current_mask() const = 0;
    /// Robust test applied to the full model state.
    [[nodiscard]] virtual SafeSetEstimate extract() = 0;
    /// Called every `refresh_every` episodes; no-op for most models.
    virtual void refresh() {}
};

/// Incrementally maintained F(gamma) and safe flags for DKWUCB over real counts.
class DkwucbState {
public:
    DkwucbState(std::size_t n, const SafetyConfig& cfg, double c) : cfg_(cfg), c_(c), f_(n), safe_(n, false) {
        const double f0 = failure_posterior(0.0, 0.0).cdf(cfg.gamma);
        std::fill(f_.begin(), f_.end(), f0);
        for (std::size_t i = 0; i < n; ++i) safe_[i] = f0 >= cfg.delta;
    }

    void update(std::size_t i, double p, double q, bool update_mask = true) {
        f_[i] = failure_posterior(p, q).cdf(cfg_.gamma);
        // quantile(delta) <= gamma  <=>  F(gamma) >= delta
        if (update_mask) safe_[i] = f_[i] >= cfg_.delta;
    }

    void set_mask(std::vector<bool> mask) { safe_ = std::move(mask); }
    void set_safe(std::size_t i, bool safe) { safe_[i] = safe; }

    [[nodiscard]] std::optional<std::size_t> select(const CountTable& counts) const {
        std::optional<std::size_t> best;
        double best_score = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < f_.size(); ++i) {
            if (safe_[i]) continue;
            const double n = counts.p[i] + counts.q[i];
            const double s = n > 0.0 ? f_[i] + dkwucb_bonus(n, c_) : f_[i] + 1.0;
            if (!best || s > best_score) {
                best = i;
                best_score = s;
            }
        }
        return best;
    }

    [[nodiscard]] const std::vector<bool>& mask() const noexcept { return safe_; }

private:
    SafetyConfig cfg_;
    double c_;
    std::vector<double> f_;
    std::vector<bool> safe_;
};

class RawBandit : public Model {
public:
    RawBandit(std::size_t n, const SafetyConfig& cfg, double c, bool random, RngStream rng)
        : cfg_(cfg), counts_(n), state_(n, cfg, c), random_(random), rng_(rng) {}

    void observe(std::size_t i, bool safe) override {
        counts_.record(i, safe);
        state_.update(i, counts_.p[i], counts_.q[i]);
    }

    std::optional<std::size_t> select() override {
        if (random_) return static_cast<std::size_t>(rng_.below(counts_.size()));
        return state_.select(counts_);
    }

    [[nodiscard]] std::vector<bool> current_mask() const override { return state_.mask(); }
    SafeSetEstimate extract() override { return bandit_safe_set(counts_, cfg_); }

private:
    SafetyConfig cfg_;
    CountTable counts_;
    DkwucbState state_;
    bool random_;
    RngStream rng_;
};

class FixedSmoothing : public Model {
public:
    FixedSmoothing(const ParamGrid& grid, const KernelSpec& spec, const SafetyConfig& cfg, double c)
        : cfg_(cfg), kernel_(grid, spec), counts_(grid.size()), smoothed_(grid.size()), state_(grid.size(), cfg, c),
          column_(grid.size()) {
        smoothed_.raw = false;
    }

    void observe(std::size_t j, bool safe) override {
        counts_.record(j, safe);
        std::fill(column_.begin(), column_.end(), 0.0);
        kernel_.add_column(j, 1.0, column_);
        auto& target = safe ? smoothed_.p : smoothed_.q;
        for (std::size_t i = 0; i < column_.size(); ++i) {
            if (column_[i] < kernel_truncation) continue;
            target[i] += column_[i];
            state_.update(i, smoothed_.p[i], smoothed_.q[i]);
        }
    }

    std::optional<std::size_t> select() override { return state_.select(smoothed_); }
    [[nodiscard]] std::vector<bool> current_mask() const override { return state_.mask(); }
    SafeSetEstimate extract() override { return smoothing_bandit_safe_set(counts_, kernel_, cfg_); }

private:
    SafetyConfig cfg_;
    GridKernel kernel_;
    CountTable counts_;
    CountTable smoothed_;
    DkwucbState state_;
    std::vector<double> column_;
};

/// Smoothing bandit with per-point length posteriors. Smoothed counts for
/// every length bin are kept exact. Length posteriors are recomputed at every
/// refresh; between refreshes acquisition mixes the per-bin counts with the
/// last posteriors, and an arm chosen by acquisition is first re-tested with
/// its up-to-date posterior and joins the safe set if it passes.
class LearnedSmoothing : public Model {
public:
    LearnedSmoothing(const ParamGrid& grid, const MethodSpec& m, const SafetyConfig& cfg)
        : cfg_(cfg), grid_(&grid), weights_spec_{1.0, m.weights},
          learner_(grid, weights_spec_, m.lgrid ? *m.lgrid : LengthGridSpec::for_grid(grid, weights_spec_), {},
                   m.leave_one_out),
          theta_(m.theta_bins), prune_(m.prune), counts_(grid.size()), smoothed_(learner_.bins(), CountTable(grid.size())),
          bar_(grid.size()), state_(grid.size(), cfg, m.c), column_(grid.size()), delta_(grid.size()),
          p_(learner_.bins()), q_(learner_.bins()) {
        bar_.raw = false;
        for (auto& t : smoothed_) t.raw = false;
        refresh();
    }

    void observe(std::size_t j, bool safe) override {
        counts_.record(j, safe);
        const std::size_t n = grid_->size();
        std::fill(delta_.begin(), delta_.end(), 0.0);
        for (std::size_t b = 0; b < learner_.bins(); ++b) {
            std::fill(column_.begin(), column_.end(), 0.0);
            learner_.kernel(b).add_column(j, 1.0, column_);
            auto& target = safe ? smoothed_[b].p : smoothed_[b].q;
            for (std::size_t i = 0; i < n; ++i) {
                target[i] += column_[i];
                delta_[i] += weights_[i * learner_.bins() + b] * column_[i];
            }
        }
        auto& target = safe ? bar_.p : bar_.q;
        for (std::size_t i = 0; i < n; ++i) {
            if (delta_[i] < kernel_truncation) continue;
            target[i] += delta_[i];
            state_.update(i, bar_.p[i], bar_.q[i], false);
        }
    }

    std::optional<std::size_t> select() override {
        for (std::size_t tries = 0; tries <= grid_->size(); ++tries) {
            const auto chosen = state_.select(bar_);
            if (!chosen) return chosen;
            const auto row = learner_.posterior_row(counts_, smoothed_, *chosen);
            const double stat = test_point(*chosen, row);
            if (stat > cfg_.gamma) return chosen;
            statistic_[*chosen] = stat;
            mask_[*chosen] = true;
            state_.set_safe(*chosen, true);
        }
        return std::nullopt;
    }

    [[nodiscard]] std::vector<bool> current_mask() const override { return mask_; }

    void refresh() override {
        smoothed_ = learner_.smooth_all(counts_);
        const std::size_t n = grid_->size(), bins = learner_.bins();
        mean_length_.assign(n, 0.0);
        weights_.assign(n * bins, 0.0);
        posterior_.lengths = learner_.lengths();
        posterior_.probs.assign(n, {});
        statistic_.assign(n, 1.0);
        mask_.assign(n, false);
        for (std::size_t i = 0; i < n; ++i) {
            auto row = learner_.posterior_row(counts_, smoothed_, i);
            double pb = 0.0, qb = 0.0;
            for (std::size_t b = 0; b < bins; ++b) {
                weights_[i * bins + b] = row[b];
                pb += row[b] * smoothed_[b].p[i];
                qb += row[b] * smoothed_[b].q[i];
            }
            bar_.p[i] = pb;
            bar_.q[i] = qb;
            mean_length_[i] = learner_.mean_length(row);
            statistic_[i] = test_point(i, row);
            mask_[i] = statistic_[i] <= cfg_.gamma;
            state_.update(i, pb, qb, false);
            posterior_.probs[i] = std::move(row);
        }
        state_.set_mask(mask_);
    }

    SafeSetEstimate extract() override {
        refresh();
        return SafeSetEstimate{mask_, statistic_};
    }

    [[nodiscard]] const std::vector<double>& mean_length() const noexcept { return mean_length_; }
    [[nodiscard]] const LengthPosterior& posterior() const noexcept { return posterior_; }

private:
    /// delta-quantile of P_fail under the theta mixture at point i.
    double test_point(std::size_t i, const std::vector<double>& row) {
        for (std::size_t b = 0; b < learner_.bins(); ++b) {
            p_[b] = smoothed_[b].p[i];
            q_[b] = smoothed_[b].q[i];
        }
        const double top = *std::max_element(row.begin(), row.end());
        const ThetaRow theta{theta_.support(), theta_.mixture(row, p_, q_, prune_ * top)};
        return failure_quantile(theta, cfg_.delta);
    }

    SafetyConfig cfg_;
    const ParamGrid* grid_;
    KernelSpec weights_spec_;
    LengthLearner learner_;
    ThetaGrid theta_;
    double prune_;
    CountTable counts_;
    std::vector<CountTable> smoothed_; // per length bin
    CountTable bar_;                   // posterior-weighted smoothed counts
    DkwucbState state_;
    std::vector<double> weights_; // n x bins length posteriors from the last refresh
    std::vector<double> column_, delta_, p_, q_;
    std::vector<double> mean_length_;
    std::vector<double> statistic_;
    std::vector<bool> mask_;
    LengthPosterior posterior_;
};

class GpMile : public Model {
public:
    GpMile(const ParamGrid& grid, const KernelSpec& spec, const SafetyConfig& cfg, int episodes_per_eval)
        : cfg_(cfg), grid_(&grid), spec_(spec) {
        data_.episodes_per_eval = episodes_per_eval;
        post_ = gp_condition(data_, grid, spec_, true);
    }

    void observe(std::size_t, bool) override {}

    /// One evaluation: `failures` out of episodes_per_eval at grid point i.
    void observe_batch(std::size_t i, int failures) {
        const double p_hat = static_cast<double>(failures) / static_cast<double>(data_.episodes_per_eval);
        data_.add(grid_->point(i), p_hat, estimator_noise(p_hat, data_.episodes_per_eval));
        post_ = gp_condition(data_, *grid_, spec_, true);
    }

    std::optional<std::size_t> select() override { return mile_select(post_, data_, *grid_, cfg_); }
    [[nodiscard]] std::vector<bool> current_mask() const override { return gp_safe_set(post_, cfg_).mask; }
    SafeSetEstimate extract() override { return gp_safe_set(post_, cfg_); }
    [[nodiscard]] int episodes_per_eval() const noexcept { return data_.episodes_per_eval; }

private:
    SafetyConfig cfg_;
    const ParamGrid* grid_;
    KernelSpec spec_;
    GpDataset data_;
    GpPosterior post_;
};

inline constexpr std::uint64_t init_stream = 0xFFFF'FFFF'0000'0001ull;
inline constexpr std::uint64_t acquisition_stream = 0xFFFF'FFFF'0000'0002ull;

} // namespace detail

struct RunOptions {
    int checkpoint_every = 100;
    std::function<bool(const Checkpoint&)> stop; // ends the run after a checkpoint when it returns true
};

struct RunResult {
    SafeSetEstimate estimate;
    RunTrace trace;
    std::vector<double> mean_length; // smoothing-learned only: posterior-mean length per point
};

/// Thrown when the simulator fails mid-run; carries the trace up to the failure.
class RunAborted : public Error {
public:
    RunAborted(const Error& cause, RunTrace partial)
        : Error(cause.kind(), cause.what()), partial_(std::move(partial)) {}
    [[nodiscard]] const RunTrace& partial() const noexcept { return partial_; }

private:
    RunTrace partial_;
};

/// Runs the estimation loop until the budget is spent or acquisition reports
/// that every arm is already in the safe set.
inline RunResult run_estimation(const sim::Simulator& sim, const ParamGrid& grid, const MethodSpec& method,
                                const SafetyConfig& cfg, std::int64_t budget, std::uint64_t seed,
                                const GroundTruth* truth = nullptr, RunOptions options = {}) {
    cfg.validate();
    method.validate(grid.dim());
    require(options.checkpoint_every >= 1, "checkpoint_every must be at least 1", ErrorKind::Config);
    const std::int64_t unit = method.kind == MethodKind::GpMile ? method.episodes_per_eval : 1;
    require(budget >= unit, "budget is smaller than one evaluation unit", ErrorKind::Config);
    if (truth) require(truth->size() == grid.size(), "ground truth does not match grid", ErrorKind::Config);

    std::unique_ptr<detail::Model> model;
    detail::GpMile* gp = nullptr;
    detail::LearnedSmoothing* learned = nullptr;
    switch (method.kind) {
    case MethodKind::GpMile: {
        auto m = std::make_unique<detail::GpMile>(grid, method.kernel(), cfg, method.episodes_per_eval);
        gp = m.get();
        model = std::move(m);
        break;
    }
    case MethodKind::BanditRandom:
    case MethodKind::BanditDkwucb:
        model = std::make_unique<detail::RawBandit>(grid.size(), cfg, method.c, method.kind == MethodKind::BanditRandom,
                                                    RngStream(seed, detail::acquisition_stream));
        break;
    case MethodKind::SmoothingDkwucb:
        model = std::make_unique<detail::FixedSmoothing>(grid, method.kernel(), cfg, method.c);
        break;
    case MethodKind::SmoothingLearned: {
        auto m = std::make_unique<detail::LearnedSmoothing>(grid, method, cfg);
        learned = m.get();
        model = std::move(m);
        break;
    }
    }

    RunResult result;
    RunTrace& trace = result.trace;
    trace.total_budget = budget;
    trace.episodes.reserve(static_cast<std::size_t>(budget));

    auto checkpoint = [&](std::int64_t episode) {
        Checkpoint cp{episode, model->current_mask(), std::nullopt, std::nullopt};
        if (truth) {
            const Metrics m = evaluate(cp.mask, truth->safe_mask);
            cp.precision = m.precision;
            cp.recall = m.recall;
        }
        trace.checkpoints.push_back(std::move(cp));
    };

    std::int64_t episode = 0;
    std::int64_t next_checkpoint = options.checkpoint_every;
    std::int64_t next_refresh = method.refresh_every;
    auto simulate = [&](std::size_t index) {
        const RngStream rng(seed, episode_stream(index, static_cast<std::uint64_t>(episode)));
        try {
            const bool safe = run_episode(sim, grid, index, rng).safe;
            trace.episodes.push_back({++episode, index, safe});
            return safe;
        } catch (const Error& e) {
            throw RunAborted(e, trace);
        }
    };

    std::size_t next = static_cast<std::size_t>(RngStream(seed, detail::init_stream).below(grid.size()));
    while (episode + unit <= budget) {
        if (gp) {
            int failures = 0;
            for (int e = 0; e < gp->episodes_per_eval(); ++e) failures += simulate(next) ? 0 : 1;
            gp->observe_batch(next, failures);
        } else {
            model->observe(next, simulate(next));
        }
        if (learned && episode >= next_refresh) {
            learned->refresh();
            next_refresh += method.refresh_every;
        }
        if (episode >= next_checkpoint) {
            checkpoint(episode);
            while (next_checkpoint <= episode) next_checkpoint += options.checkpoint_every;
            if (options.stop && options.stop(trace.checkpoints.back())) {
                trace.stopped = true;
                break;
            }
        }
        const auto chosen = model->select();
        if (!chosen) {
            trace.saturated = true;
            break;
        }
        next = *chosen;
    }

    result.estimate = model->extract();
    if (trace.checkpoints.empty() || trace.checkpoints.back().episode != episode) {
        Checkpoint cp{episode, result.estimate.mask, std::nullopt, std::nullopt};
        if (truth) {
            const Metrics m = evaluate(cp.mask, truth->safe_mask);
            cp.precision = m.precision;
            cp.recall = m.recall;
        }
        trace.checkpoints.push_back(std::move(cp));
    }
    if (learned) result.mean_length = learned->mean_length();
    return result;
}

inline RunResult run_estimation(const std::string& sim_id, const ParamGrid& grid, const MethodSpec& method,
                                const SafetyConfig& cfg, std::int64_t budget, std::uint64_t seed,
                                const GroundTruth* truth = nullptr, RunOptions options = {}) {
    return run_estimation(sim::make_simulator(sim_id), grid, method, cfg, budget, seed, truth, options);
}

/// Precision floor that episodes_to_recall applies by default: 2 delta - 1.
inline double default_precision_floor(double delta) { return 2.0 * delta - 1.0; }

/// Episode count of the first checkpoint with recall >= target and precision
/// >= floor, or nullopt if no checkpoint qualifies.
inline std::optional<std::int64_t> episodes_to_recall(const RunTrace& trace, double target_recall,
                                                      double precision_floor) {
    for (const auto& cp : trace.checkpoints) {
        if (!cp.recall || !cp.precision) continue;
        if (*cp.recall >= target_recall && *cp.precision >= precision_floor) return cp.episode;
    }
    return std::nullopt;
}

} // namespace safeset
