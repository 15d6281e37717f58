#pragma once
// Shared domain types: parameter grids, count tables, safety configuration,
// safe-set estimates, and the library's error type.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace safeset {

enum class ErrorKind : std::uint8_t {
    InvalidArgument,
    Config,
    Io,
    Simulator,
    Numerical,
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

inline void require(bool ok, const std::string& msg, ErrorKind kind = ErrorKind::InvalidArgument) {
    if (!ok) throw Error(kind, msg);
}

/// A point in performance-characteristic space, in physical units.
using ParamVector = std::vector<double>;

struct GridDim {
    std::string name;
    double lo = 0.0;
    double hi = 0.0;
    std::size_t count = 1;

    friend bool operator==(const GridDim&, const GridDim&) = default;
};

/// Finite candidate set as a row-major tensor product of evenly spaced axes.
/// The last declared dimension varies fastest.
///
/// Every point is stored twice: in physical units and in normalized
/// coordinates where each axis spans [0, 1]. Kernels work on the normalized
/// copy so a single length parameter is meaningful across heterogeneous units.
class ParamGrid {
public:
    ParamGrid() = default;

    explicit ParamGrid(std::vector<GridDim> dims) : dims_(std::move(dims)) {
        require(!dims_.empty(), "grid needs at least one dimension");
        std::size_t total = 1;
        for (const auto& d : dims_) {
            require(d.count >= 1, "grid dimension '" + d.name + "' has count 0");
            require(std::isfinite(d.lo) && std::isfinite(d.hi),
                    "grid dimension '" + d.name + "' has non-finite bounds");
            require(d.lo <= d.hi, "grid dimension '" + d.name + "' has lo > hi");
            require(d.lo < d.hi || d.count == 1,
                    "grid dimension '" + d.name + "' is degenerate but count > 1");
            total *= d.count;
        }
        axes_.resize(dims_.size());
        unit_axes_.resize(dims_.size());
        for (std::size_t k = 0; k < dims_.size(); ++k) {
            const auto& d = dims_[k];
            for (std::size_t i = 0; i < d.count; ++i) {
                const double t = d.count == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(d.count - 1);
                // exact endpoints
                const double v = i + 1 == d.count && d.count > 1 ? d.hi : d.lo + t * (d.hi - d.lo);
                axes_[k].push_back(v);
                unit_axes_[k].push_back(t);
            }
        }
        strides_.assign(dims_.size(), 1);
        for (std::size_t k = dims_.size(); k-- > 1;) strides_[k - 1] = strides_[k] * dims_[k].count;
        size_ = total;
    }

    [[nodiscard]] std::size_t size() const noexcept { return size_; }
    [[nodiscard]] std::size_t dim() const noexcept { return dims_.size(); }
    [[nodiscard]] const std::vector<GridDim>& dims() const noexcept { return dims_; }
    [[nodiscard]] const std::vector<double>& axis(std::size_t k) const { return axes_.at(k); }
    [[nodiscard]] const std::vector<double>& unit_axis(std::size_t k) const { return unit_axes_.at(k); }
    [[nodiscard]] std::size_t stride(std::size_t k) const { return strides_.at(k); }

    [[nodiscard]] std::vector<std::size_t> multi_index(std::size_t flat) const {
        require(flat < size_, "flat index out of range");
        std::vector<std::size_t> idx(dims_.size());
        for (std::size_t k = 0; k < dims_.size(); ++k) {
            idx[k] = flat / strides_[k];
            flat %= strides_[k];
        }
        return idx;
    }

    [[nodiscard]] std::size_t flat_index(const std::vector<std::size_t>& idx) const {
        require(idx.size() == dims_.size(), "multi-index has wrong dimension");
        std::size_t flat = 0;
        for (std::size_t k = 0; k < dims_.size(); ++k) {
            require(idx[k] < dims_[k].count, "multi-index out of range");
            flat += idx[k] * strides_[k];
        }
        return flat;
    }

    /// Index along axis k of flat point i.
    [[nodiscard]] std::size_t coord(std::size_t flat, std::size_t k) const {
        return (flat / strides_[k]) % dims_[k].count;
    }

    [[nodiscard]] ParamVector point(std::size_t flat) const {
        ParamVector v(dims_.size());
        for (std::size_t k = 0; k < dims_.size(); ++k) v[k] = axes_[k][coord(flat, k)];
        return v;
    }

    [[nodiscard]] ParamVector unit_point(std::size_t flat) const {
        ParamVector v(dims_.size());
        for (std::size_t k = 0; k < dims_.size(); ++k) v[k] = unit_axes_[k][coord(flat, k)];
        return v;
    }

    [[nodiscard]] std::vector<ParamVector> points() const {
        std::vector<ParamVector> out;
        out.reserve(size_);
        for (std::size_t i = 0; i < size_; ++i) out.push_back(point(i));
        return out;
    }

    [[nodiscard]] std::vector<ParamVector> unit_points() const {
        std::vector<ParamVector> out;
        out.reserve(size_);
        for (std::size_t i = 0; i < size_; ++i) out.push_back(unit_point(i));
        return out;
    }

    /// Maps a physical vector into normalized coordinates (degenerate axes map to 0).
    [[nodiscard]] ParamVector normalize(const ParamVector& eta) const {
        require(eta.size() == dims_.size(), "parameter vector has wrong dimension");
        ParamVector u(eta.size());
        for (std::size_t k = 0; k < dims_.size(); ++k) {
            const auto& d = dims_[k];
            u[k] = d.hi > d.lo ? (eta[k] - d.lo) / (d.hi - d.lo) : 0.0;
        }
        return u;
    }

    /// Smallest spacing between adjacent normalized coordinates over all axes
    /// with more than one point; 1 when every axis is degenerate.
    [[nodiscard]] double min_unit_spacing() const {
        double s = 1.0;
        for (const auto& d : dims_)
            if (d.count > 1) s = std::min(s, 1.0 / static_cast<double>(d.count - 1));
        return s;
    }

    friend bool operator==(const ParamGrid& a, const ParamGrid& b) { return a.dims_ == b.dims_; }

private:
    std::vector<GridDim> dims_;
    std::vector<std::vector<double>> axes_;
    std::vector<std::vector<double>> unit_axes_;
    std::vector<std::size_t> strides_;
    std::size_t size_ = 0;
};

inline ParamGrid build_grid(std::vector<GridDim> dims) { return ParamGrid(std::move(dims)); }

/// Nearest grid point by Euclidean distance in normalized coordinates; ties go
/// to the lowest flat index. Points outside the box snap to the boundary.
inline std::size_t nearest_grid_point(const ParamGrid& grid, const ParamVector& eta) {
    const ParamVector u = grid.normalize(eta);
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < grid.size(); ++i) {
        double d2 = 0.0;
        for (std::size_t k = 0; k < grid.dim(); ++k) {
            const double diff = grid.unit_axis(k)[grid.coord(i, k)] - u[k];
            d2 += diff * diff;
        }
        if (d2 < best_d) {
            best_d = d2;
            best = i;
        }
    }
    return best;
}

/// Success counts p and failure counts q over a grid. Raw tables hold integers;
/// smoothed tables hold non-negative reals.
struct CountTable {
    std::vector<double> p;
    std::vector<double> q;
    bool raw = true;

    CountTable() = default;
    explicit CountTable(std::size_t n) : p(n, 0.0), q(n, 0.0) {}
    CountTable(std::vector<double> successes, std::vector<double> failures, bool is_raw = true)
        : p(std::move(successes)), q(std::move(failures)), raw(is_raw) {
        validate();
    }

    [[nodiscard]] std::size_t size() const noexcept { return p.size(); }
    [[nodiscard]] double n(std::size_t i) const { return p[i] + q[i]; }

    void record(std::size_t i, bool safe) {
        require(i < p.size(), "count index out of range");
        (safe ? p[i] : q[i]) += 1.0;
    }

    void validate() const {
        require(p.size() == q.size(), "count vectors differ in length");
        for (std::size_t i = 0; i < p.size(); ++i) {
            require(p[i] >= 0.0 && q[i] >= 0.0, "counts must be non-negative");
            if (raw)
                require(p[i] == std::floor(p[i]) && q[i] == std::floor(q[i]), "raw counts must be integers");
        }
    }
};

struct SafetyConfig {
    double gamma = 0.1;  ///< failure-probability threshold
    double delta = 0.95; ///< required posterior confidence

    void validate() const {
        require(gamma > 0.0 && gamma < 1.0, "gamma must lie in (0, 1)", ErrorKind::Config);
        require(delta > 0.0 && delta < 1.0, "delta must lie in (0, 1)", ErrorKind::Config);
    }
};

struct SafeSetEstimate {
    std::vector<bool> mask;
    std::vector<double> statistic;

    [[nodiscard]] std::size_t size() const noexcept { return mask.size(); }
    [[nodiscard]] std::size_t count() const {
        std::size_t c = 0;
        for (bool b : mask) c += b ? 1 : 0;
        return c;
    }
};

} // namespace safeset
