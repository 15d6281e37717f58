#pragma once

namespace safeset::sim {

struct EpisodeOutcome {
    bool safe = true;
    int steps = 0;
    bool numerical_fault = false; ///< non-finite state; always reported as a failure
};

} // namespace safeset::sim
