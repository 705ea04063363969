#include "phtwin/link.hpp"

#include "phtwin/errors.hpp"

#include <fmt/core.h>

namespace phtwin {

void validate(const LinkParams& p)
{
    if (!(p.drop_prob >= 0.0 && p.drop_prob < 1.0))
        throw ValidationError("drop_prob must be in [0, 1)");
    if (!(p.command_drop_prob >= 0.0 && p.command_drop_prob <= 1.0))
        throw ValidationError("command_drop_prob must be in [0, 1]");
    if (!(p.latency_ms >= 0.0))
        throw ValidationError("latency_ms must be non-negative");
    if (!(p.jitter_ms >= 0.0))
        throw ValidationError("jitter_ms must be non-negative");
}

LinkSimulator::LinkSimulator(LinkParams params)
    : params_((validate(params), params)),
      rng_(params.seed),
      drop_(params.drop_prob),
      cmd_drop_(params.command_drop_prob),
      jitter_(0.0, params.jitter_ms)
{
}

double LinkSimulator::delay_ms()
{
    return params_.latency_ms + (params_.jitter_ms > 0.0 ? jitter_(rng_) : 0.0);
}

std::optional<Delivery> LinkSimulator::transmit(const Frame& frame, double t_now_ms)
{
    if (is_command(frame))
        throw ProtocolError("commands must be sent with request()");
    ++sent_;
    if (drop_(rng_)) {
        ++dropped_;
        return std::nullopt;
    }
    return Delivery{frame, t_now_ms + delay_ms()};
}

CommandResult LinkSimulator::request(const Frame& command, double t_now_ms,
                                     const CommandResponder& responder)
{
    if (!is_command(command))
        throw ProtocolError("request() only carries command frames");
    double t = t_now_ms;
    for (int attempt = 1; attempt <= 1 + kMaxRetries; ++attempt) {
        const bool forward_lost = cmd_drop_(rng_);
        if (!forward_lost) {
            const double at_device = t + delay_ms();
            Ack ack = responder(command, at_device);
            const bool ack_lost = cmd_drop_(rng_);
            const double at_host = at_device + delay_ms();
            if (!ack_lost && at_host - t <= kAckTimeoutMs)
                return CommandResult{ack, at_host, attempt};
        }
        t += kAckTimeoutMs;
    }
    throw LinkFailure(fmt::format("{} not acknowledged after {} retries",
                                  frame_type_name(frame_type(command)), kMaxRetries));
}

} // namespace phtwin
