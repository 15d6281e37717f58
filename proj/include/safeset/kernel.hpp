#pragma once
// Weighted squared exponential kernel, kernel matrices, and kernel smoothing
// of observation counts.

#include "safeset/core.hpp"

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace safeset {

/// k(a, b) = exp(-(a-b)^T W (a-b) / (2 l^2)). An empty weight matrix means W = I.
struct KernelSpec {
    double length = 0.1;
    std::vector<double> weights; // row-major d x d

    [[nodiscard]] bool identity_weights() const noexcept { return weights.empty(); }

    void validate(std::size_t d) const {
        require(std::isfinite(length) && length > 0.0, "kernel length must be positive");
        if (weights.empty()) return;
        require(weights.size() == d * d, "kernel weight matrix must be d x d");
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = 0; j < i; ++j)
                require(weights[i * d + j] == weights[j * d + i], "kernel weight matrix must be symmetric");
        // Cholesky as the positive-definiteness check
        std::vector<double> l(d * d, 0.0);
        for (std::size_t j = 0; j < d; ++j) {
            double s = weights[j * d + j];
            for (std::size_t k = 0; k < j; ++k) s -= l[j * d + k] * l[j * d + k];
            require(s > 0.0, "kernel weight matrix must be positive definite");
            l[j * d + j] = std::sqrt(s);
            for (std::size_t i = j + 1; i < d; ++i) {
                double t = weights[i * d + j];
                for (std::size_t k = 0; k < j; ++k) t -= l[i * d + k] * l[j * d + k];
                l[i * d + j] = t / l[j * d + j];
            }
        }
    }

    [[nodiscard]] bool diagonal_weights(std::size_t d) const {
        if (weights.empty()) return true;
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = 0; j < d; ++j)
                if (i != j && weights[i * d + j] != 0.0) return false;
        return true;
    }

    [[nodiscard]] double weight(std::size_t i, std::size_t j, std::size_t d) const {
        if (weights.empty()) return i == j ? 1.0 : 0.0;
        return weights[i * d + j];
    }

    [[nodiscard]] KernelSpec with_length(double l) const { return KernelSpec{l, weights}; }
};

/// Squared W-norm of a - b.
inline double weighted_sq_distance(std::span<const double> a, std::span<const double> b, const KernelSpec& spec) {
    require(a.size() == b.size(), "kernel arguments differ in dimension");
    const std::size_t d = a.size();
    double s = 0.0;
    if (spec.identity_weights()) {
        for (std::size_t i = 0; i < d; ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
        return s;
    }
    require(spec.weights.size() == d * d, "kernel weight matrix does not match dimension");
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) s += (a[i] - b[i]) * spec.weights[i * d + j] * (a[j] - b[j]);
    return s;
}

inline double wsqe(std::span<const double> a, std::span<const double> b, const KernelSpec& spec) {
    return std::exp(-weighted_sq_distance(a, b, spec) / (2.0 * spec.length * spec.length));
}

/// Entries smaller than this are stored as zero in explicit kernel matrices.
inline constexpr double kernel_truncation = 1e-12;

struct KernelMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> entries; // row-major

    [[nodiscard]] double operator()(std::size_t i, std::size_t j) const { return entries[i * cols + j]; }
};

inline KernelMatrix kernel_matrix(const std::vector<ParamVector>& rows, const std::vector<ParamVector>& cols,
                                  const KernelSpec& spec) {
    KernelMatrix k{rows.size(), cols.size(), std::vector<double>(rows.size() * cols.size())};
    if (!rows.empty()) spec.validate(rows.front().size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < cols.size(); ++j) {
            const double v = wsqe(rows[i], cols[j], spec);
            k.entries[i * k.cols + j] = v < kernel_truncation ? 0.0 : v;
        }
    return k;
}

/// p_hat = K p and q_hat = K q, without row normalization.
inline CountTable smooth_counts(const CountTable& counts, const KernelMatrix& k) {
    require(k.rows == k.cols, "smoothing kernel must be square");
    require(k.cols == counts.size(), "smoothing kernel size does not match count table");
    CountTable out(counts.size());
    out.raw = false;
    for (std::size_t i = 0; i < k.rows; ++i) {
        double sp = 0.0, sq = 0.0;
        const double* row = &k.entries[i * k.cols];
        for (std::size_t j = 0; j < k.cols; ++j) {
            sp += row[j] * counts.p[j];
            sq += row[j] * counts.q[j];
        }
        out.p[i] = sp;
        out.q[i] = sq;
    }
    return out;
}

/// Kernel over all points of a grid in normalized coordinates, without forming
/// the |grid| x |grid| matrix. Diagonal weights factor into per-axis tables and
/// K v is computed as one 1-D pass per axis; general weights fall back to direct
/// evaluation. No truncation is applied.
class GridKernel {
public:
    GridKernel(const ParamGrid& grid, KernelSpec spec) : grid_(&grid), spec_(std::move(spec)) {
        spec_.validate(grid.dim());
        separable_ = spec_.diagonal_weights(grid.dim());
        const double denom = 2.0 * spec_.length * spec_.length;
        if (separable_) {
            tables_.resize(grid.dim());
            for (std::size_t k = 0; k < grid.dim(); ++k) {
                const auto& ax = grid.unit_axis(k);
                const double w = spec_.weight(k, k, grid.dim());
                tables_[k].resize(ax.size());
                for (std::size_t m = 0; m < ax.size(); ++m) {
                    const double du = ax[m] - ax[0];
                    tables_[k][m] = std::exp(-w * du * du / denom);
                }
            }
        } else {
            units_ = grid.unit_points();
        }
    }

    [[nodiscard]] const ParamGrid& grid() const noexcept { return *grid_; }
    [[nodiscard]] const KernelSpec& spec() const noexcept { return spec_; }
    [[nodiscard]] std::size_t size() const noexcept { return grid_->size(); }
    [[nodiscard]] bool separable() const noexcept { return separable_; }

    [[nodiscard]] double entry(std::size_t i, std::size_t j) const {
        if (!separable_) return wsqe(units_[i], units_[j], spec_);
        double v = 1.0;
        for (std::size_t k = 0; k < tables_.size(); ++k) {
            const std::size_t a = grid_->coord(i, k), b = grid_->coord(j, k);
            v *= tables_[k][a > b ? a - b : b - a];
        }
        return v;
    }

    /// out[i] += scale * K(i, j) for every grid point i.
    void add_column(std::size_t j, double scale, std::span<double> out) const {
        require(out.size() == size(), "column output has wrong length");
        if (!separable_) {
            for (std::size_t i = 0; i < size(); ++i) out[i] += scale * wsqe(units_[i], units_[j], spec_);
            return;
        }
        // Walk the tensor product with running partial products.
        const std::size_t d = tables_.size();
        std::vector<std::size_t> cj(d);
        for (std::size_t k = 0; k < d; ++k) cj[k] = grid_->coord(j, k);
        std::vector<std::vector<double>> rows(d);
        for (std::size_t k = 0; k < d; ++k) {
            const std::size_t n = grid_->dims()[k].count;
            rows[k].resize(n);
            for (std::size_t m = 0; m < n; ++m) rows[k][m] = tables_[k][m > cj[k] ? m - cj[k] : cj[k] - m];
        }
        const std::size_t last = d - 1;
        const std::size_t inner = grid_->dims()[last].count;
        const std::size_t outer = size() / inner;
        for (std::size_t o = 0; o < outer; ++o) {
            double prefix = scale;
            std::size_t rem = o;
            for (std::size_t k = last; k-- > 0;) {
                const std::size_t n = grid_->dims()[k].count;
                prefix *= rows[k][rem % n];
                rem /= n;
            }
            double* dst = out.data() + o * inner;
            const double* r = rows[last].data();
            for (std::size_t m = 0; m < inner; ++m) dst[m] += prefix * r[m];
        }
    }

    /// K v.
    [[nodiscard]] std::vector<double> apply(std::span<const double> v) const {
        require(v.size() == size(), "vector length does not match grid");
        if (!separable_) {
            std::vector<double> out(size(), 0.0);
            for (std::size_t i = 0; i < size(); ++i) {
                double s = 0.0;
                for (std::size_t j = 0; j < size(); ++j) s += wsqe(units_[i], units_[j], spec_) * v[j];
                out[i] = s;
            }
            return out;
        }
        std::vector<double> cur(v.begin(), v.end()), next(size());
        for (std::size_t k = 0; k < tables_.size(); ++k) {
            const std::size_t n = grid_->dims()[k].count;
            const std::size_t stride = grid_->stride(k);
            const auto& t = tables_[k];
            for (std::size_t i = 0; i < size(); ++i) {
                const std::size_t c = (i / stride) % n;
                const std::size_t base = i - c * stride;
                double s = 0.0;
                for (std::size_t m = 0; m < n; ++m) s += t[m > c ? m - c : c - m] * cur[base + m * stride];
                next[i] = s;
            }
            cur.swap(next);
        }
        return cur;
    }

    [[nodiscard]] CountTable smooth(const CountTable& counts) const {
        require(counts.size() == size(), "count table does not match grid");
        CountTable out;
        out.p = apply(counts.p);
        out.q = apply(counts.q);
        out.raw = false;
        return out;
    }

private:
    const ParamGrid* grid_;
    KernelSpec spec_;
    bool separable_ = true;
    std::vector<std::vector<double>> tables_;
    std::vector<ParamVector> units_;
};

} // namespace safeset
