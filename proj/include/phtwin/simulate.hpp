#pragma once

// End-to-end run on the virtual clock: node physics and firmware, the lossy
// link, byte-level framing and the host session store.

#include "phtwin/protocol.hpp"
#include "phtwin/scenario.hpp"
#include "phtwin/session.hpp"

#include <cstdint>
#include <vector>

namespace phtwin {

struct SimulationResult
{
    SessionData session;
    std::uint64_t ticks = 0;
    std::uint64_t data_frames_sent = 0;
    std::uint64_t data_frames_dropped = 0;
    std::uint64_t status_frames_received = 0;
    /// Frames lost after the last delivered one; invisible to the host.
    std::uint64_t trailing_lost = 0;
    double device_start_s = 0.0;
    std::vector<DecodeDiagnostic> diagnostics;
};

/// Deterministic for a given scenario. Throws LinkFailure, StateError or
/// NotReadyError when the session cannot be started.
SimulationResult simulate(const Scenario& scenario);

} // namespace phtwin
