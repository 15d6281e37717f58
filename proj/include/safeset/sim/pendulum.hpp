#pragma once
// Inverted pendulum under a saturated PD controller that acts on noisy state
// estimates. The performance characteristics are the standard deviations of
// the angle and angular-velocity estimation errors.

#include "safeset/core.hpp"
#include "safeset/rng.hpp"
#include "safeset/sim/outcome.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace safeset::sim {

struct PendulumConfig {
    double dt = 0.05;      // s
    int horizon = 100;     // steps
    double gravity = 9.81; // m/s^2
    double length = 1.0;   // m
    double mass = 1.0;     // kg
    double torque_limit = 3.0;
    double kp = 20.0;
    double kd = 20.0;
    double theta0_max = 0.2; // initial angle drawn from [-theta0_max, theta0_max]
    double omega0_max = 0.2; // initial rate drawn from [-omega0_max, omega0_max]
    double fail_angle = std::numbers::pi / 4.0;

    void validate() const {
        require(dt > 0.0, "pendulum dt must be positive", ErrorKind::Config);
        require(horizon >= 1, "pendulum horizon must be at least 1", ErrorKind::Config);
        require(torque_limit > 0.0, "pendulum torque_limit must be positive", ErrorKind::Config);
        require(gravity >= 0.0 && length > 0.0 && mass > 0.0, "pendulum physical constants invalid",
                ErrorKind::Config);
        require(theta0_max >= 0.0 && omega0_max >= 0.0, "pendulum initial box invalid", ErrorKind::Config);
        require(theta0_max < fail_angle, "pendulum initial box must start inside the safe band", ErrorKind::Config);
    }
};

/// eta = [sigma_theta (rad), sigma_omega (rad/s)].
inline EpisodeOutcome pendulum_episode(const ParamVector& eta, const PendulumConfig& cfg, RngStream rng) {
    require(eta.size() == 2, "pendulum expects eta = [sigma_theta, sigma_omega]");
    require(eta[0] >= 0.0 && eta[1] >= 0.0, "pendulum noise levels must be non-negative");

    double theta = rng.uniform(-cfg.theta0_max, cfg.theta0_max);
    double omega = rng.uniform(-cfg.omega0_max, cfg.omega0_max);
    const double g_over_l = cfg.gravity / cfg.length;
    const double inertia = cfg.mass * cfg.length * cfg.length;

    EpisodeOutcome out;
    for (int t = 0; t < cfg.horizon; ++t) {
        const double theta_hat = theta + eta[0] * rng.normal();
        const double omega_hat = omega + eta[1] * rng.normal();
        const double u = std::clamp(-cfg.kp * theta_hat - cfg.kd * omega_hat, -cfg.torque_limit, cfg.torque_limit);
        omega += cfg.dt * (g_over_l * std::sin(theta) + u / inertia);
        theta += cfg.dt * omega;
        out.steps = t + 1;
        if (!std::isfinite(theta) || !std::isfinite(omega)) {
            out.safe = false;
            out.numerical_fault = true;
            return out;
        }
        if (std::abs(theta) >= cfg.fail_angle) {
            out.safe = false;
            return out;
        }
    }
    out.safe = true;
    return out;
}

} // namespace safeset::sim
