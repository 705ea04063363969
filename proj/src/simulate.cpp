#include "phtwin/simulate.hpp"

#include "phtwin/errors.hpp"
#include "phtwin/link.hpp"
#include "phtwin/node.hpp"

#include <cmath>
#include <limits>
#include <queue>

namespace phtwin {

namespace {

class VirtualDeviceChannel : public DeviceChannel
{
public:
    VirtualDeviceChannel(SimulatedNode& node, LinkSimulator& link, const double& now_ms)
        : node_(node), link_(link), now_ms_(now_ms)
    {
    }

    std::string device_id() const override { return "sim-node"; }

    Ack send_command(const Frame& command) override
    {
        auto result = link_.request(command, now_ms_, [this](const Frame& f, double at_ms) {
            return node_.handle_command(f, at_ms);
        });
        return result.ack;
    }

private:
    SimulatedNode& node_;
    LinkSimulator& link_;
    const double& now_ms_;
};

struct Pending
{
    double at_ms;
    std::uint64_t order;
    Frame frame;

    bool operator>(const Pending& o) const
    {
        return at_ms != o.at_ms ? at_ms > o.at_ms : order > o.order;
    }
};

} // namespace

SimulationResult simulate(const Scenario& scenario)
{
    validate(scenario);
    SimulationResult result;

    SimulatedNode node(scenario.node);
    LinkSimulator link(scenario.link);
    double now_ms = 0.0;
    VirtualDeviceChannel channel(node, link, now_ms);

    SessionStore store([&] { return scenario.start_utc_ms + static_cast<std::int64_t>(std::llround(now_ms)); });
    SessionConfig config{scenario.node.firmware, scenario.node.afe, scenario.node.temp_sensor};
    if (!scenario.node.hydrated)
        throw NotReadyError("electrode is not hydrated; soak it before recording");
    auto session = store.start_session(config, channel);
    result.device_start_s = node.start_time_s();

    std::priority_queue<Pending, std::vector<Pending>, std::greater<>> in_flight;
    std::uint64_t order = 0;
    Decoder decoder;
    std::vector<std::uint8_t> wire;

    auto deliver_until = [&](double t_ms) {
        while (!in_flight.empty() && in_flight.top().at_ms <= t_ms) {
            const Pending p = in_flight.top();
            in_flight.pop();
            wire.clear();
            encode_into(p.frame, wire);
            for (const auto& f : decoder.feed(wire)) {
                if (const auto* d = std::get_if<DataFrame>(&f)) {
                    const auto recv = scenario.start_utc_ms + static_cast<std::int64_t>(std::llround(p.at_ms));
                    session->ingest_frame(*d, recv);
                } else if (const auto* s = std::get_if<StatusFrame>(&f)) {
                    session->record_status(*s);
                    ++result.status_frames_received;
                }
            }
        }
    };

    const auto total_ticks = static_cast<std::uint64_t>(
        std::llround(scenario.duration_s * scenario.node.firmware.sample_hz));
    const double period_ms = 1000.0 / scenario.node.firmware.sample_hz;
    for (std::uint64_t i = 0; i < total_ticks; ++i) {
        now_ms = static_cast<double>(i) * period_ms;
        deliver_until(now_ms);
        for (auto& frame : node.tick()) {
            if (auto d = link.transmit(frame, now_ms))
                in_flight.push(Pending{d->deliver_at_ms, order++, std::move(d->frame)});
            else if (std::holds_alternative<DataFrame>(frame))
                ++result.data_frames_dropped;
        }
        ++result.ticks;
    }
    now_ms = static_cast<double>(total_ticks) * period_ms;
    deliver_until(std::numeric_limits<double>::infinity());
    auto tail = decoder.finish();
    (void)tail;

    for (const auto& a : scenario_annotations(scenario, result.device_start_s))
        session->add_annotation(a);
    store.stop_session(session->info().id);

    result.session = session->snapshot();
    result.data_frames_sent = node.data_frames_sent();
    result.trailing_lost =
        result.data_frames_sent - (result.session.samples.size() + result.session.missing_total());
    result.diagnostics = decoder.take_diagnostics();
    return result;
}

} // namespace phtwin
