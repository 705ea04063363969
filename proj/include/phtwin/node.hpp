#pragma once

#include "phtwin/device_sim.hpp"
#include "phtwin/firmware.hpp"
#include "phtwin/protocol.hpp"

#include <cstdint>
#include <vector>

namespace phtwin {

struct NodeConfig
{
    ElectrodeParams electrode;
    AfeParams afe;
    TempSensorParams temp_sensor;
    BathSchedule bath;
    FirmwareConfig firmware;
    bool hydrated = true;
    std::uint16_t battery_mv = 3900;
    int status_every_frames = 100;   ///< one Status frame per 10 s at 10 Hz
};

/// Virtual telemetry node: the front-end physics sampled by the firmware
/// chain, plus the command handler the host talks to over the link.
class SimulatedNode
{
public:
    explicit SimulatedNode(NodeConfig cfg);

    /// Command responder; also usable as a LinkSimulator CommandResponder.
    Ack handle_command(const Frame& command, double at_ms);

    /// Advances one sample period. Returns the frames the node transmits
    /// during it (empty while stopped).
    std::vector<Frame> tick();

    bool running() const { return running_; }
    double sample_period_s() const { return 1.0 / firmware_.config().sample_hz; }
    /// World time of the next sample.
    double world_time_s() const { return state_.t_s; }
    /// World time at which device time 0 was latched by the last CmdStart.
    double start_time_s() const { return start_time_s_; }
    const ElectrodeState& electrode_state() const { return state_; }
    const Firmware& firmware() const { return firmware_; }
    const NodeConfig& config() const { return cfg_; }
    std::uint64_t data_frames_sent() const { return firmware_.frames_emitted(); }

private:
    NodeConfig cfg_;
    AfeParams temp_afe_;
    Firmware firmware_;
    ElectrodeState state_;
    std::uint64_t world_ticks_ = 0;
    bool running_ = false;
    bool saturated_ = false;
    double start_time_s_ = 0.0;
};

} // namespace phtwin
