#pragma once
// Planar vision-based detect-and-avoid encounters.
//
// Ownship and intruder fly at constant speed on a near-collision course. Each
// sensor cycle, an intruder inside the camera's horizontal field of view is
// detected with a range-dependent probability. After the first detection the
// track persists and, once the response delay has elapsed, ownship turns away
// at a fixed rate until its heading has changed by max_turn. An episode fails
// when the minimum separation drops below the NMAC radius.

#include "safeset/core.hpp"
#include "safeset/rng.hpp"
#include "safeset/sim/outcome.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace safeset::sim {

/// Linear drop-off detection model: nothing inside 200 m, then a line from
/// y0 at zero range down to zero at x0, clamped to [0, 1].
inline double detect_probability(double r, double x0, double y0) {
    require(r >= 0.0 && std::isfinite(r), "range must be finite and non-negative");
    require(x0 > 0.0 && std::isfinite(x0), "detection x-intercept must be positive");
    require(y0 >= 0.0 && std::isfinite(y0), "detection y-intercept must be non-negative");
    if (r <= 200.0) return 0.0;
    return std::clamp(y0 - (y0 / x0) * r, 0.0, 1.0);
}

struct DaaConfig {
    double nmac_radius = 150.0; // m
    double step = 1.0;          // s, sensor cycle
    int horizon = 60;           // sensor cycles
    int substeps = 10;          // kinematic substeps per cycle
    double own_speed_lo = 45.0, own_speed_hi = 55.0;     // m/s
    double intr_speed_lo = 45.0, intr_speed_hi = 55.0;   // m/s
    double tcpa_lo = 38.0, tcpa_hi = 46.0;               // s, unmitigated time of closest approach
    double miss_max = 120.0;                             // m, |unmitigated miss distance| ~ U[0, miss_max]
    double heading_sd_deg = 30.0;                        // intruder course offset from head-on
    double turn_rate_deg = 4.0;                          // deg/s
    double max_turn_deg = 90.0;
    double response_delay = 6.0;                         // s between first detection and turn start

    void validate() const {
        require(nmac_radius > 0.0, "daa nmac_radius must be positive", ErrorKind::Config);
        require(step > 0.0 && horizon >= 1 && substeps >= 1, "daa time discretization invalid", ErrorKind::Config);
        require(own_speed_lo > 0.0 && own_speed_lo <= own_speed_hi, "daa ownship speed range invalid",
                ErrorKind::Config);
        require(intr_speed_lo > 0.0 && intr_speed_lo <= intr_speed_hi, "daa intruder speed range invalid",
                ErrorKind::Config);
        require(tcpa_lo > 0.0 && tcpa_lo <= tcpa_hi, "daa tcpa range invalid", ErrorKind::Config);
        require(miss_max >= 0.0 && heading_sd_deg >= 0.0, "daa geometry spread invalid", ErrorKind::Config);
        require(turn_rate_deg > 0.0 && max_turn_deg > 0.0 && response_delay >= 0.0, "daa maneuver invalid",
                ErrorKind::Config);
    }
};

namespace detail {

inline double wrap_pi(double a) {
    a = std::fmod(a + std::numbers::pi, 2.0 * std::numbers::pi);
    if (a < 0.0) a += 2.0 * std::numbers::pi;
    return a - std::numbers::pi;
}

/// Minimum distance over a straight relative segment from a to b.
inline double segment_min_distance(double ax, double ay, double bx, double by) {
    const double dx = bx - ax, dy = by - ay;
    const double len2 = dx * dx + dy * dy;
    double t = len2 > 0.0 ? -(ax * dx + ay * dy) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    const double px = ax + t * dx, py = ay + t * dy;
    return std::sqrt(px * px + py * py);
}

} // namespace detail

/// eta = [x0 (m), y0 (-), h_fov (deg)].
inline EpisodeOutcome daa_episode(const ParamVector& eta, const DaaConfig& cfg, RngStream rng) {
    require(eta.size() == 3, "daa expects eta = [x0, y0, h_fov]");
    const double x0 = eta[0], y0 = eta[1], hfov = eta[2];
    require(x0 > 0.0 && y0 >= 0.0, "daa detection parameters invalid");
    require(hfov > 0.0 && hfov < 360.0, "daa h_fov must lie in (0, 360) degrees");

    constexpr double deg = std::numbers::pi / 180.0;
    const double v_own = rng.uniform(cfg.own_speed_lo, cfg.own_speed_hi);
    const double v_int = rng.uniform(cfg.intr_speed_lo, cfg.intr_speed_hi);
    const double tcpa = rng.uniform(cfg.tcpa_lo, cfg.tcpa_hi);
    const double miss = (rng.uniform() < 0.5 ? -1.0 : 1.0) * rng.uniform(0.0, cfg.miss_max);
    const double course = std::numbers::pi + cfg.heading_sd_deg * deg * rng.normal();

    // Place the intruder so that, unmitigated, it passes `miss` metres
    // abeam of ownship at tcpa.
    const double ivx = v_int * std::cos(course), ivy = v_int * std::sin(course);
    const double rvx = ivx - v_own, rvy = ivy;
    const double rv = std::hypot(rvx, rvy);
    const double nx = rv > 1e-9 ? -rvy / rv : 0.0;
    const double ny = rv > 1e-9 ? rvx / rv : 1.0;
    double ox = 0.0, oy = 0.0, own_heading = 0.0;
    double ix = v_own * tcpa + miss * nx - ivx * tcpa;
    double iy = miss * ny - ivy * tcpa;

    const double half_fov = 0.5 * hfov * deg;
    const double turn_rate = cfg.turn_rate_deg * deg;
    const double max_turn = cfg.max_turn_deg * deg;
    const double h = cfg.step / cfg.substeps;

    bool detected = false;
    double detect_time = 0.0;
    double turn_sign = 0.0;
    double min_range = std::hypot(ix - ox, iy - oy);

    EpisodeOutcome out;
    for (int k = 0; k < cfg.horizon; ++k) {
        const double t = k * cfg.step;
        const double rx = ix - ox, ry = iy - oy;
        const double range = std::hypot(rx, ry);
        if (!detected) {
            const double bearing = detail::wrap_pi(std::atan2(ry, rx) - own_heading);
            if (std::abs(bearing) <= half_fov && rng.bernoulli(detect_probability(range, x0, y0))) {
                detected = true;
                detect_time = t;
                // turn away from the side the intruder is predicted to pass on
                const double cross = rx * (ivy - v_own * std::sin(own_heading)) -
                                     ry * (ivx - v_own * std::cos(own_heading));
                turn_sign = cross > 0.0 ? -1.0 : 1.0;
                if (cross == 0.0) turn_sign = bearing >= 0.0 ? -1.0 : 1.0;
            }
        }
        for (int s = 0; s < cfg.substeps; ++s) {
            const double ts = t + s * h;
            if (detected && ts >= detect_time + cfg.response_delay && std::abs(own_heading) < max_turn)
                own_heading = std::clamp(own_heading + turn_sign * turn_rate * h, -max_turn, max_turn);
            const double ax = ix - ox, ay = iy - oy;
            ox += v_own * std::cos(own_heading) * h;
            oy += v_own * std::sin(own_heading) * h;
            ix += ivx * h;
            iy += ivy * h;
            min_range = std::min(min_range, detail::segment_min_distance(ax, ay, ix - ox, iy - oy));
        }
        out.steps = k + 1;
        if (!std::isfinite(min_range) || !std::isfinite(ox) || !std::isfinite(oy)) {
            out.safe = false;
            out.numerical_fault = true;
            return out;
        }
        if (min_range < cfg.nmac_radius) {
            out.safe = false;
            return out;
        }
    }
    out.safe = true;
    return out;
}

} // namespace safeset::sim
