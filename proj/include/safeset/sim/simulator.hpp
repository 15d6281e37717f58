#pragma once
// Uniform black-box simulator interface and the built-in registry.

#include "safeset/core.hpp"
#include "safeset/rng.hpp"
#include "safeset/sim/daa.hpp"
#include "safeset/sim/outcome.hpp"
#include "safeset/sim/pendulum.hpp"

#include <algorithm>
#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace safeset::sim {

/// Bernoulli test simulator: P_fail(eta) = clamp(intercept + slope . eta, 0, 1).
struct StubConfig {
    double intercept = 0.5;
    std::vector<double> slope; // empty means zero

    [[nodiscard]] double p_fail(const ParamVector& eta) const {
        double p = intercept;
        for (std::size_t k = 0; k < slope.size() && k < eta.size(); ++k) p += slope[k] * eta[k];
        return std::clamp(p, 0.0, 1.0);
    }

    void validate() const {
        require(std::isfinite(intercept), "stub intercept must be finite", ErrorKind::Config);
        for (double s : slope) require(std::isfinite(s), "stub slope must be finite", ErrorKind::Config);
    }
};

inline EpisodeOutcome stub_episode(const ParamVector& eta, const StubConfig& cfg, RngStream rng) {
    EpisodeOutcome out;
    out.steps = 1;
    out.safe = !rng.bernoulli(cfg.p_fail(eta));
    return out;
}

using EpisodeFn = std::function<EpisodeOutcome(const ParamVector&, RngStream)>;

/// A named episode function. Episodes must be pure functions of (eta, stream).
class Simulator {
public:
    Simulator(std::string id, EpisodeFn fn) : id_(std::move(id)), fn_(std::move(fn)) {
        require(static_cast<bool>(fn_), "simulator '" + id_ + "' has no episode function");
    }

    [[nodiscard]] const std::string& id() const noexcept { return id_; }

    EpisodeOutcome operator()(const ParamVector& eta, RngStream rng) const { return fn_(eta, std::move(rng)); }

private:
    std::string id_;
    EpisodeFn fn_;
};

inline Simulator make_pendulum(PendulumConfig cfg = {}) {
    cfg.validate();
    return Simulator("pendulum", [cfg](const ParamVector& eta, RngStream rng) {
        return pendulum_episode(eta, cfg, std::move(rng));
    });
}

inline Simulator make_daa(DaaConfig cfg = {}) {
    cfg.validate();
    return Simulator("daa", [cfg](const ParamVector& eta, RngStream rng) { return daa_episode(eta, cfg, std::move(rng)); });
}

inline Simulator make_stub(StubConfig cfg = {}) {
    cfg.validate();
    return Simulator("stub", [cfg](const ParamVector& eta, RngStream rng) { return stub_episode(eta, cfg, std::move(rng)); });
}

inline const std::vector<std::string>& registered_simulators() {
    static const std::vector<std::string> ids{"pendulum", "daa", "stub"};
    return ids;
}

/// Built-in simulator with default configuration.
inline Simulator make_simulator(const std::string& sim_id) {
    if (sim_id == "pendulum") return make_pendulum();
    if (sim_id == "daa") return make_daa();
    if (sim_id == "stub") return make_stub();
    throw Error(ErrorKind::InvalidArgument, "unknown simulator '" + sim_id + "'");
}

inline EpisodeOutcome simulate(const std::string& sim_id, const ParamVector& eta, RngStream rng) {
    return make_simulator(sim_id)(eta, std::move(rng));
}

} // namespace safeset::sim
