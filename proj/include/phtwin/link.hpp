#pragma once

// Seeded model of the radio link between node and host. Data and Status
// frames behave like BLE notifications (unacknowledged, may be lost).
// Commands are retried until acknowledged.

#include "phtwin/protocol.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <random>

namespace phtwin {

struct LinkParams
{
    double drop_prob = 0.0;          ///< per Data/Status frame, in [0, 1)
    double latency_ms = 0.0;
    double jitter_ms = 0.0;          ///< uniform extra delay in [0, jitter]
    std::uint64_t seed = 1;
    /// Loss per command or ack leg, in [0, 1]. 1 models a dead link.
    double command_drop_prob = 0.0;
};

void validate(const LinkParams& p);

struct Delivery
{
    Frame frame;
    double deliver_at_ms = 0.0;
};

struct CommandResult
{
    Ack ack;
    double completed_at_ms = 0.0;
    int attempts = 0;
};

/// Device-side command handler: receives the command at the given time.
using CommandResponder = std::function<Ack(const Frame& command, double at_ms)>;

class LinkSimulator
{
public:
    static constexpr int kMaxRetries = 3;
    static constexpr double kAckTimeoutMs = 200.0;

    explicit LinkSimulator(LinkParams params = {});

    /// Fire-and-forget path for Data/Status frames. Commands are rejected
    /// with ProtocolError; they go through request().
    std::optional<Delivery> transmit(const Frame& frame, double t_now_ms);

    /// Sends a command, retrying up to kMaxRetries times after a 200 ms ack
    /// timeout. Throws LinkFailure when no attempt is acknowledged.
    CommandResult request(const Frame& command, double t_now_ms, const CommandResponder& responder);

    const LinkParams& params() const { return params_; }
    std::uint64_t sent() const { return sent_; }
    std::uint64_t dropped() const { return dropped_; }

private:
    double delay_ms();

    LinkParams params_;
    std::mt19937_64 rng_;
    std::bernoulli_distribution drop_;
    std::bernoulli_distribution cmd_drop_;
    std::uniform_real_distribution<double> jitter_;
    std::uint64_t sent_ = 0;
    std::uint64_t dropped_ = 0;
};

} // namespace phtwin
