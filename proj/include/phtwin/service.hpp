#pragma once

// HTTP endpoints of the acquisition host (used by the CLI and the operator
// console). Request and response bodies are JSON; the stream endpoint is a
// server-sent event stream with one JSON record per event. See docs/http-api.md.
//
//   POST /sessions                       start  {"device": id?, "config": {...}?}
//   GET  /sessions                       list
//   GET  /sessions/{id}                  info + last status
//   POST /sessions/{id}/stop
//   POST /sessions/{id}/annotations      {"label", "t_start_ms", "t_end_ms", "expected_ph"?}
//   GET  /sessions/{id}/export?format=jsonl|csv
//   GET  /sessions/{id}/stream?since_t_ms=N

#include "phtwin/link.hpp"
#include "phtwin/node.hpp"
#include "phtwin/session.hpp"

#include <atomic>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>

namespace phtwin {

class DaqService
{
public:
    explicit DaqService(SessionStore& store);
    ~DaqService();

    DaqService(const DaqService&) = delete;
    DaqService& operator=(const DaqService&) = delete;

    /// The channel must outlive the service.
    void add_device(DeviceChannel& device);

    /// Binds to an ephemeral port and returns it; call run() afterwards.
    int bind_any_port(const std::string& host = "127.0.0.1");
    bool bind(const std::string& host, int port);
    /// Blocks serving requests until stop().
    bool run();
    void stop();
    void wait_until_ready() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// Simulated node paced against the wall clock (optionally sped up), feeding
/// whichever session is recording on it. Commands go through the same lossy
/// link model as in offline simulation.
class LiveSimulatedDevice : public DeviceChannel
{
public:
    LiveSimulatedDevice(std::string id, NodeConfig node, LinkParams link, SessionStore& store,
                        double speed = 1.0);
    ~LiveSimulatedDevice() override;

    std::string device_id() const override { return id_; }
    Ack send_command(const Frame& command) override;

    void start();
    void stop();

private:
    void run();

    std::string id_;
    SessionStore& store_;
    double speed_;
    std::mutex mu_;
    SimulatedNode node_;
    LinkSimulator link_;
    Decoder decoder_;
    std::atomic<bool> running_{false};
    std::thread thread_;
};

} // namespace phtwin
