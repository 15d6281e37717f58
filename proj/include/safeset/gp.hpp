#pragma once
// Gaussian-process level-set estimation baseline.
//
// Observations are Monte Carlo failure-probability estimates with Gaussian
// noise. The GP has zero prior mean and the weighted squared exponential
// kernel on normalized grid coordinates.

#include "safeset/core.hpp"
#include "safeset/kernel.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <boost/math/distributions/normal.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <vector>

namespace safeset {

struct GpDataset {
    std::vector<ParamVector> points; // physical coordinates
    std::vector<double> values;      // failure-probability estimates
    std::vector<double> noise;       // observation variance per row
    int episodes_per_eval = 100;

    [[nodiscard]] std::size_t size() const noexcept { return points.size(); }

    void add(ParamVector eta, double value, double variance) {
        points.push_back(std::move(eta));
        values.push_back(value);
        noise.push_back(variance);
    }

    void validate() const {
        require(points.size() == values.size() && values.size() == noise.size(), "gp dataset lengths differ");
        require(episodes_per_eval >= 1, "episodes_per_eval must be positive");
        for (std::size_t i = 0; i < size(); ++i) {
            require(values[i] >= 0.0 && values[i] <= 1.0, "gp observations must lie in [0, 1]");
            require(noise[i] > 0.0, "gp observation noise must be positive");
        }
    }
};

struct GpPosterior {
    std::vector<double> mean;
    std::vector<double> std;
    KernelSpec spec;
    Eigen::MatrixXd cov; // grid x grid posterior covariance; empty unless requested

    [[nodiscard]] bool has_covariance() const noexcept { return cov.size() > 0; }
};

inline constexpr double gp_noise_floor = 1e-6;

/// Observation variance for an N-episode estimate: the binomial variance of a
/// Laplace-smoothed estimate, so that p_hat in {0, 1} still gets nonzero noise.
inline double estimator_noise(double p_hat, int n) {
    require(n >= 1, "estimator_noise needs at least one episode");
    require(p_hat >= 0.0 && p_hat <= 1.0, "estimator_noise needs p_hat in [0, 1]");
    const double nd = static_cast<double>(n);
    const double p = (p_hat * nd + 1.0) / (nd + 2.0);
    return std::max(gp_noise_floor, p * (1.0 - p) / nd);
}

/// Standard normal quantile at delta.
inline double gp_beta(double delta) {
    require(delta > 0.0 && delta < 1.0, "delta must lie in (0, 1)");
    return boost::math::quantile(boost::math::normal_distribution<double>(0.0, 1.0), delta);
}

namespace detail {

inline Eigen::MatrixXd gp_kernel(const std::vector<ParamVector>& a, const std::vector<ParamVector>& b,
                                 const KernelSpec& spec) {
    Eigen::MatrixXd k(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) k(i, j) = wsqe(a[i], b[j], spec);
    return k;
}

/// Cholesky of K + diag(noise) with escalating jitter (1e-10 up to 1e-6).
inline Eigen::LLT<Eigen::MatrixXd> factor(const Eigen::MatrixXd& k, const std::vector<double>& noise) {
    for (double jitter = 1e-10; jitter <= 1e-6 * 1.0000001; jitter *= 10.0) {
        Eigen::MatrixXd a = k;
        for (Eigen::Index i = 0; i < a.rows(); ++i) a(i, i) += noise[i] + jitter;
        Eigen::LLT<Eigen::MatrixXd> llt(a);
        if (llt.info() == Eigen::Success) return llt;
    }
    throw Error(ErrorKind::Numerical, "gp covariance not positive definite after jitter escalation");
}

inline double clamp_variance(double v) {
    if (v < -1e-8) throw Error(ErrorKind::Numerical, "gp posterior variance is negative");
    return std::max(0.0, v);
}

} // namespace detail

/// Conditions the GP on `data` and returns the posterior over every grid point.
inline GpPosterior gp_condition(const GpDataset& data, const ParamGrid& grid, const KernelSpec& spec,
                                bool with_covariance = false) {
    data.validate();
    spec.validate(grid.dim());
    const std::size_t n = grid.size();
    const std::vector<ParamVector> query = grid.unit_points();

    GpPosterior post;
    post.spec = spec;
    post.mean.assign(n, 0.0);
    post.std.assign(n, 1.0);
    if (data.size() == 0) {
        if (with_covariance) post.cov = detail::gp_kernel(query, query, spec);
        return post;
    }

    std::vector<ParamVector> train;
    train.reserve(data.size());
    for (const auto& p : data.points) train.push_back(grid.normalize(p));

    const Eigen::MatrixXd k_train = detail::gp_kernel(train, train, spec);
    const auto llt = detail::factor(k_train, data.noise);
    const Eigen::MatrixXd k_cross = detail::gp_kernel(train, query, spec); // train x grid
    const Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(data.values.data(), data.size());
    const Eigen::VectorXd alpha = llt.solve(y);
    const Eigen::MatrixXd v = llt.matrixL().solve(k_cross); // L^{-1} K*

    const Eigen::VectorXd mu = k_cross.transpose() * alpha;
    for (std::size_t i = 0; i < n; ++i) {
        post.mean[i] = mu(static_cast<Eigen::Index>(i));
        const double var = 1.0 - v.col(static_cast<Eigen::Index>(i)).squaredNorm();
        post.std[i] = std::sqrt(detail::clamp_variance(var));
    }
    if (with_covariance) post.cov = detail::gp_kernel(query, query, spec) - v.transpose() * v;
    return post;
}

/// Eta is safe when mu + beta sigma <= gamma, beta the normal quantile at delta.
inline SafeSetEstimate gp_safe_set(const GpPosterior& post, const SafetyConfig& cfg) {
    cfg.validate();
    const double beta = gp_beta(cfg.delta);
    SafeSetEstimate est;
    est.mask.resize(post.mean.size());
    est.statistic.resize(post.mean.size());
    for (std::size_t i = 0; i < post.mean.size(); ++i) {
        est.statistic[i] = post.mean[i] + beta * post.std[i];
        est.mask[i] = est.statistic[i] <= cfg.gamma;
    }
    return est;
}

/// Expected safe-set size after one hypothetical evaluation at each grid point.
///
/// An observation y at x with variance D = sigma_x^2 + nu_x shrinks every
/// sigma_i deterministically and moves mu_i by a Gaussian with standard
/// deviation |cov(i, x)| / sqrt(D). Points already in the safe set are kept;
/// every other point contributes its probability of passing the test.
inline std::vector<double> mile_expected_safe_counts(const GpPosterior& post, const GpDataset& data,
                                                     const SafetyConfig& cfg) {
    require(post.has_covariance(), "mile needs the posterior covariance");
    cfg.validate();
    const std::size_t n = post.mean.size();
    const double beta = gp_beta(cfg.delta);
    const boost::math::normal_distribution<double> unit(0.0, 1.0);

    std::vector<bool> safe(n);
    std::size_t current = 0;
    for (std::size_t i = 0; i < n; ++i) {
        safe[i] = post.mean[i] + beta * post.std[i] <= cfg.gamma;
        current += safe[i] ? 1 : 0;
    }

    std::vector<double> scores(n, static_cast<double>(current));
    for (std::size_t x = 0; x < n; ++x) {
        const auto xi = static_cast<Eigen::Index>(x);
        const double nu = estimator_noise(std::clamp(post.mean[x], 0.0, 1.0), data.episodes_per_eval);
        const double denom = post.std[x] * post.std[x] + nu;
        double gain = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (safe[i]) continue;
            const double c = post.cov(static_cast<Eigen::Index>(i), xi);
            const double var_new = std::max(0.0, post.std[i] * post.std[i] - c * c / denom);
            const double margin = cfg.gamma - beta * std::sqrt(var_new) - post.mean[i];
            const double s = std::abs(c) / std::sqrt(denom);
            if (s > 0.0)
                gain += boost::math::cdf(unit, margin / s);
            else
                gain += margin >= 0.0 ? 1.0 : 0.0;
        }
        scores[x] += gain;
    }
    return scores;
}

/// Maximum improvement in level-set estimation: the grid point whose
/// evaluation maximizes the expected safe-set size, lowest index on ties.
inline std::size_t mile_select(const GpPosterior& post, const GpDataset& data, const ParamGrid& grid,
                               const SafetyConfig& cfg) {
    const std::size_t n = post.mean.size();
    require(n == grid.size(), "posterior does not match grid");
    if (std::all_of(post.std.begin(), post.std.end(), [](double s) { return s == 0.0; })) {
        std::vector<bool> evaluated(n, false);
        for (const auto& p : data.points) evaluated[nearest_grid_point(grid, p)] = true;
        for (std::size_t i = 0; i < n; ++i)
            if (!evaluated[i]) return i;
        return 0;
    }
    const std::vector<double> scores = mile_expected_safe_counts(post, data, cfg);
    std::size_t best = 0;
    for (std::size_t i = 1; i < n; ++i)
        if (scores[i] > scores[best] + 1e-9 * std::max(1.0, std::abs(scores[best]))) best = i;
    return best;
}

} // namespace safeset
