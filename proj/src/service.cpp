#include "phtwin/service.hpp"

#include "phtwin/errors.hpp"
#include "phtwin/session_io.hpp"

#include <fmt/core.h>
#include <httplib.h>

#include <chrono>
#include <deque>

namespace phtwin {

using nlohmann::json;

namespace {

json session_json(const LiveSession& s)
{
    const auto info = s.info();
    json j = header_record(info).at("session");
    j["config"] = config_to_json(info.config);
    if (auto st = s.last_status())
        j["last_status"] = {{"battery_mv", st->battery_mv}, {"flags", st->flags}};
    return j;
}

void send_json(httplib::Response& res, int status, const json& body)
{
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

template <typename F>
httplib::Server::Handler guarded(F&& f)
{
    return [f = std::forward<F>(f)](const httplib::Request& req, httplib::Response& res) {
        try {
            f(req, res);
        } catch (const json::exception& e) {
            send_json(res, 400, {{"error", e.what()}});
        } catch (const ValidationError& e) {
            send_json(res, 400, {{"error", e.what()}});
        } catch (const NotFoundError& e) {
            send_json(res, 404, {{"error", e.what()}});
        } catch (const BusyError& e) {
            send_json(res, 409, {{"error", e.what()}});
        } catch (const StateError& e) {
            send_json(res, 409, {{"error", e.what()}});
        } catch (const LinkFailure& e) {
            send_json(res, 502, {{"error", e.what()}});
        } catch (const std::invalid_argument& e) {
            send_json(res, 400, {{"error", e.what()}});
        } catch (const std::out_of_range& e) {
            send_json(res, 400, {{"error", e.what()}});
        } catch (const std::exception& e) {
            send_json(res, 500, {{"error", e.what()}});
        }
    };
}

} // namespace

struct DaqService::Impl
{
    SessionStore& store;
    httplib::Server server;
    std::mutex mu;
    std::map<std::string, DeviceChannel*> devices;

    explicit Impl(SessionStore& s) : store(s) { routes(); }

    DeviceChannel& device_for(const json& body)
    {
        std::lock_guard lock(mu);
        if (body.contains("device")) {
            const auto id = body.at("device").get<std::string>();
            auto it = devices.find(id);
            if (it == devices.end())
                throw NotFoundError(fmt::format("unknown device '{}'", id));
            return *it->second;
        }
        if (devices.size() != 1)
            throw ValidationError("request must name a device");
        return *devices.begin()->second;
    }

    void routes()
    {
        server.Post("/sessions", guarded([this](const httplib::Request& req, httplib::Response& res) {
            const json body = req.body.empty() ? json::object() : json::parse(req.body);
            SessionConfig cfg = body.contains("config") ? config_from_json(body.at("config")) : SessionConfig{};
            auto session = store.start_session(cfg, device_for(body));
            send_json(res, 201, session_json(*session));
        }));

        server.Get("/sessions", guarded([this](const httplib::Request&, httplib::Response& res) {
            json arr = json::array();
            for (const auto& info : store.list())
                arr.push_back(session_json(*store.get(info.id)));
            send_json(res, 200, arr);
        }));

        server.Get(R"(/sessions/([^/]+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
            send_json(res, 200, session_json(*store.get(req.matches[1])));
        }));

        server.Post(R"(/sessions/([^/]+)/stop)", guarded([this](const httplib::Request& req, httplib::Response& res) {
            const std::string id = req.matches[1];
            const bool acked = store.stop_session(id);
            json j = session_json(*store.get(id));
            j["stop_acknowledged"] = acked;
            send_json(res, 200, j);
        }));

        server.Post(R"(/sessions/([^/]+)/annotations)",
                    guarded([this](const httplib::Request& req, httplib::Response& res) {
                        auto session = store.get(req.matches[1]);
                        const Annotation a = session->add_annotation(annotation_from_json(json::parse(req.body)));
                        send_json(res, 201, to_record(a));
                    }));

        server.Get(R"(/sessions/([^/]+)/export)", guarded([this](const httplib::Request& req, httplib::Response& res) {
            auto session = store.get(req.matches[1]);
            const std::string format = req.has_param("format") ? req.get_param_value("format") : "jsonl";
            const auto fmt_kind = parse_export_format(format);
            res.status = 200;
            res.set_content(export_session(session->snapshot(), fmt_kind),
                            fmt_kind == ExportFormat::Csv ? "text/csv" : "application/x-ndjson");
        }));

        server.Get(R"(/sessions/([^/]+)/stream)", guarded([this](const httplib::Request& req, httplib::Response& res) {
            auto session = store.get(req.matches[1]);
            std::optional<double> since;
            if (req.has_param("since_t_ms"))
                since = std::stod(req.get_param_value("since_t_ms"));
            auto cursor = std::make_shared<std::size_t>(0);
            res.set_header("Cache-Control", "no-cache");
            res.set_chunked_content_provider(
                "text/event-stream", [session, since, cursor](std::size_t, httplib::DataSink& sink) {
                    const auto events = session->events_since(*cursor, std::chrono::milliseconds(250));
                    std::string chunk;
                    bool ended = false;
                    for (const auto& ev : events) {
                        const std::size_t index = (*cursor)++;
                        if (since) {
                            if (const auto* s = std::get_if<SampleRecord>(&ev); s && s->t_ms <= *since)
                                continue;
                            if (const auto* g = std::get_if<GapEvent>(&ev); g && g->t_ms <= *since)
                                continue;
                        }
                        chunk += fmt::format("id: {}\ndata: {}\n\n", index, to_record(ev).dump());
                        if (std::holds_alternative<StreamEnd>(ev))
                            ended = true;
                    }
                    if (chunk.empty())
                        chunk = ": keep-alive\n\n";
                    if (!sink.write(chunk.data(), chunk.size()))
                        return false;
                    if (ended)
                        sink.done();
                    return true;
                });
        }));
    }
};

DaqService::DaqService(SessionStore& store) : impl_(std::make_unique<Impl>(store)) {}

DaqService::~DaqService()
{
    stop();
}

void DaqService::add_device(DeviceChannel& device)
{
    std::lock_guard lock(impl_->mu);
    impl_->devices[device.device_id()] = &device;
}

int DaqService::bind_any_port(const std::string& host)
{
    return impl_->server.bind_to_any_port(host);
}

bool DaqService::bind(const std::string& host, int port)
{
    return impl_->server.bind_to_port(host, port);
}

bool DaqService::run()
{
    return impl_->server.listen_after_bind();
}

void DaqService::stop()
{
    if (impl_)
        impl_->server.stop();
}

void DaqService::wait_until_ready() const
{
    impl_->server.wait_until_ready();
}

LiveSimulatedDevice::LiveSimulatedDevice(std::string id, NodeConfig node, LinkParams link, SessionStore& store,
                                         double speed)
    : id_(std::move(id)), store_(store), speed_(speed), node_(std::move(node)), link_(link)
{
    if (!(speed > 0.0))
        throw ValidationError("speed must be positive");
}

LiveSimulatedDevice::~LiveSimulatedDevice()
{
    stop();
}

Ack LiveSimulatedDevice::send_command(const Frame& command)
{
    std::lock_guard lock(mu_);
    const double now_ms = node_.world_time_s() * 1000.0;
    return link_.request(command, now_ms, [this](const Frame& f, double at) { return node_.handle_command(f, at); })
        .ack;
}

void LiveSimulatedDevice::start()
{
    if (running_.exchange(true))
        return;
    thread_ = std::thread([this] { run(); });
}

void LiveSimulatedDevice::stop()
{
    running_ = false;
    if (thread_.joinable())
        thread_.join();
}

void LiveSimulatedDevice::run()
{
    using clock = std::chrono::steady_clock;
    const auto wall0 = clock::now();
    struct InFlight
    {
        double at_ms;
        Frame frame;
    };
    std::deque<InFlight> in_flight;
    std::vector<std::uint8_t> wire;

    while (running_) {
        const double target_s =
            std::chrono::duration<double>(clock::now() - wall0).count() * speed_;
        std::vector<Frame> delivered;
        {
            std::lock_guard lock(mu_);
            while (node_.world_time_s() < target_s) {
                const double now_ms = node_.world_time_s() * 1000.0;
                for (auto& f : node_.tick()) {
                    if (auto d = link_.transmit(f, now_ms))
                        in_flight.push_back({d->deliver_at_ms, std::move(d->frame)});
                }
            }
            const double now_ms = node_.world_time_s() * 1000.0;
            while (!in_flight.empty() && in_flight.front().at_ms <= now_ms) {
                wire.clear();
                encode_into(in_flight.front().frame, wire);
                in_flight.pop_front();
                auto frames = decoder_.feed(wire);
                delivered.insert(delivered.end(), frames.begin(), frames.end());
            }
        }
        if (auto session = store_.recording_on(id_)) {
            for (const auto& f : delivered) {
                try {
                    if (const auto* d = std::get_if<DataFrame>(&f))
                        session->ingest_frame(*d, SessionStore::system_clock_ms());
                    else if (const auto* s = std::get_if<StatusFrame>(&f))
                        session->record_status(*s);
                } catch (const StateError&) {
                    break;
                }
            }
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(20));
    }
}

} // namespace phtwin
