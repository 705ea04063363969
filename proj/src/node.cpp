#include "phtwin/node.hpp"

#include "phtwin/errors.hpp"

namespace phtwin {

SimulatedNode::SimulatedNode(NodeConfig cfg)
    : cfg_(std::move(cfg)),
      temp_afe_(temperature_channel(cfg_.afe)),
      firmware_(cfg_.firmware)
{
    validate(cfg_.electrode);
    validate(cfg_.afe);
    validate(cfg_.bath);
    state_ = initial_state(cfg_.bath, cfg_.hydrated);
}

Ack SimulatedNode::handle_command(const Frame& command, double /*at_ms*/)
{
    const auto type = static_cast<std::uint8_t>(frame_type(command));
    if (const auto* c = std::get_if<CmdConfig>(&command)) {
        const FirmwareConfig next = from_command(*c);
        try {
            validate(next);
        } catch (const ValidationError&) {
            return Ack{type, kAckRejected};
        }
        if (running_ && !(next == firmware_.config()))
            return Ack{type, kAckBadState};
        if (!running_)
            firmware_ = Firmware(next);
        return Ack{type, kAckOk};
    }
    if (std::holds_alternative<CmdStart>(command)) {
        if (running_)
            return Ack{type, kAckOk};
        if (!state_.hydrated)
            return Ack{type, kAckRejected};
        firmware_.reset();
        saturated_ = false;
        running_ = true;
        start_time_s_ = state_.t_s;
        return Ack{type, kAckOk};
    }
    if (std::holds_alternative<CmdStop>(command)) {
        running_ = false;
        return Ack{type, kAckOk};
    }
    return Ack{type, kAckRejected};
}

std::vector<Frame> SimulatedNode::tick()
{
    std::vector<Frame> out;
    if (running_) {
        const double e_mv = electrode_potential_mv(cfg_.electrode, state_);
        const AdcReading ph = adc_quantize(e_mv, cfg_.afe);
        const AdcReading temp = adc_quantize(temp_sensor_mv(cfg_.bath.temp_c, cfg_.temp_sensor), temp_afe_);
        saturated_ = saturated_ || ph.saturated || temp.saturated;
        if (auto frame = firmware_.tick(ph.counts, temp.counts)) {
            out.emplace_back(*frame);
            if (cfg_.status_every_frames > 0
                && firmware_.frames_emitted() % static_cast<std::uint64_t>(cfg_.status_every_frames) == 0) {
                std::uint8_t flags = kStatusRecording;
                if (saturated_)
                    flags |= kStatusSaturated;
                if (state_.hydrated)
                    flags |= kStatusHydrated;
                out.emplace_back(StatusFrame{cfg_.battery_mv, flags});
            }
        }
    }
    state_ = step(state_, cfg_.bath, cfg_.electrode, sample_period_s());
    // Re-derive time from the tick count so long runs do not accumulate error.
    state_.t_s = static_cast<double>(++world_ticks_) * sample_period_s();
    return out;
}

} // namespace phtwin
