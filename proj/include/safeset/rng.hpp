#pragma once
// Deterministic random streams. A stream is fully determined by its
// (seed, stream id) pair; all draws use fixed integer arithmetic and explicit
// transforms so results do not depend on the standard library's distributions.

#include <cmath>
#include <cstdint>
#include <numbers>

namespace safeset {

inline constexpr std::uint64_t splitmix64(std::uint64_t& x) noexcept {
    std::uint64_t z = (x += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

/// xoshiro256** keyed by (seed, stream id).
class RngStream {
public:
    RngStream(std::uint64_t seed, std::uint64_t stream_id) noexcept : seed_(seed), stream_(stream_id) {
        std::uint64_t x = seed ^ (0xD1B54A32D192ED03ull * (stream_id + 1));
        std::uint64_t y = stream_id;
        splitmix64(y);
        x ^= splitmix64(y);
        for (auto& s : s_) s = splitmix64(x);
    }

    [[nodiscard]] std::uint64_t seed() const noexcept { return seed_; }
    [[nodiscard]] std::uint64_t stream_id() const noexcept { return stream_; }

    /// Independent child stream; equal (parent, key) always yields the same child.
    [[nodiscard]] RngStream fork(std::uint64_t key) const noexcept {
        std::uint64_t x = seed_ ^ (stream_ * 0x9E3779B97F4A7C15ull);
        return RngStream(splitmix64(x), key);
    }

    std::uint64_t next_u64() noexcept {
        const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    /// Uniform in [0, 1) with 53 bits of resolution.
    double uniform() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n) by rejection.
    std::uint64_t below(std::uint64_t n) noexcept {
        if (n <= 1) return 0;
        const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
        std::uint64_t r;
        do r = next_u64();
        while (r >= limit);
        return r % n;
    }

    bool bernoulli(double p) noexcept { return uniform() < p; }

    /// Standard normal via Box-Muller (one value per call).
    double normal() noexcept {
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    double normal(double mean, double sd) noexcept { return mean + sd * normal(); }

private:
    static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept { return (x << k) | (x >> (64 - k)); }

    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t s_[4]{};
};

/// Stream id for the n-th episode at a grid point.
inline constexpr std::uint64_t episode_stream(std::uint64_t point, std::uint64_t episode) noexcept {
    return (point << 32) ^ episode;
}

} // namespace safeset
