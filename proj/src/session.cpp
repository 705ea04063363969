#include "phtwin/session.hpp"

#include "phtwin/errors.hpp"
#include "phtwin/session_io.hpp"

#include <fmt/core.h>

namespace phtwin {

std::string_view to_string(SessionState s)
{
    return s == SessionState::Recording ? "recording" : "stopped";
}

void validate(const Annotation& a)
{
    if (a.label.empty())
        throw ValidationError("annotation label must not be empty");
    if (a.t_start_ms >= a.t_end_ms)
        throw ValidationError(fmt::format("annotation '{}' has t_start {} >= t_end {}", a.label, a.t_start_ms,
                                          a.t_end_ms));
    if (a.expected_ph && !(*a.expected_ph >= 0.0 && *a.expected_ph <= 14.0))
        throw ValidationError("expected_ph must be within 0..14");
}

std::uint64_t SessionData::missing_total() const
{
    std::uint64_t n = 0;
    for (const auto& g : gaps)
        n += g.missing;
    return n;
}

double counts_to_ph_mv(std::uint16_t counts, const SessionConfig& cfg)
{
    return adc_counts_to_mv(counts, cfg.afe);
}

double counts_to_temp_c(std::uint16_t counts, const SessionConfig& cfg)
{
    return temp_from_sensor_mv(adc_counts_to_mv(counts, temperature_channel(cfg.afe)), cfg.temp_sensor);
}

LiveSession::LiveSession(SessionInfo info, std::optional<std::uint16_t> expected_first_seq)
{
    data_.info = std::move(info);
    // The node restarts its counter on CmdStart, so frames lost before the
    // first arrival still count as a gap.
    if (expected_first_seq)
        last_seq_ = static_cast<std::uint16_t>(*expected_first_seq - 1);
}

LiveSession::~LiveSession() = default;

void LiveSession::publish(StreamEvent ev)
{
    if (journal_.is_open()) {
        journal_ << to_record(ev).dump() << '\n';
        journal_.flush();
    }
    events_.push_back(std::move(ev));
    cv_.notify_all();
}

IngestOutcome LiveSession::ingest_frame(const DataFrame& frame, std::int64_t recv_utc_ms)
{
    std::lock_guard lock(mu_);
    if (data_.info.state != SessionState::Recording)
        throw StateError(fmt::format("session {} is stopped; frame rejected", data_.info.id));

    IngestOutcome outcome;
    if (last_seq_) {
        const auto delta = static_cast<std::uint16_t>(frame.seq - *last_seq_);
        if (delta == 0 || delta >= 0x8000)
            return IngestOutcome{IngestOutcome::Kind::Duplicate, 0};
        if (delta > 1) {
            outcome = IngestOutcome{IngestOutcome::Kind::Gap, static_cast<std::uint16_t>(delta - 1)};
            GapEvent gap{frame.t_ms, *last_seq_, outcome.missing};
            data_.gaps.push_back(gap);
            publish(gap);
        }
    }
    last_seq_ = frame.seq;

    SampleRecord r;
    r.seq = frame.seq;
    r.t_ms = frame.t_ms;
    r.recv_utc_ms = recv_utc_ms;
    r.ph_raw = frame.ph_raw;
    r.temp_raw = frame.temp_raw;
    r.ph_mv = counts_to_ph_mv(frame.ph_raw, data_.info.config);
    r.temp_c = counts_to_temp_c(frame.temp_raw, data_.info.config);
    data_.samples.push_back(r);
    publish(r);
    return outcome;
}

Annotation LiveSession::add_annotation(const Annotation& a)
{
    validate(a);
    std::lock_guard lock(mu_);
    data_.annotations.push_back(a);
    publish(a);
    return a;
}

void LiveSession::record_status(const StatusFrame& status)
{
    std::lock_guard lock(mu_);
    last_status_ = status;
}

void LiveSession::stop()
{
    std::lock_guard lock(mu_);
    if (data_.info.state == SessionState::Stopped)
        return;
    data_.info.state = SessionState::Stopped;
    publish(StreamEnd{});
}

void LiveSession::attach_journal(const std::filesystem::path& path)
{
    std::lock_guard lock(mu_);
    journal_.open(path, std::ios::out | std::ios::trunc);
    if (!journal_)
        throw Error(fmt::format("cannot open journal {}", path.string()));
    journal_ << header_record(data_.info).dump() << '\n';
    for (const auto& ev : events_)
        journal_ << to_record(ev).dump() << '\n';
    journal_.flush();
}

SessionData LiveSession::snapshot() const
{
    std::lock_guard lock(mu_);
    return data_;
}

SessionInfo LiveSession::info() const
{
    std::lock_guard lock(mu_);
    return data_.info;
}

std::optional<StatusFrame> LiveSession::last_status() const
{
    std::lock_guard lock(mu_);
    return last_status_;
}

bool LiveSession::recording() const
{
    std::lock_guard lock(mu_);
    return data_.info.state == SessionState::Recording;
}

std::vector<StreamEvent> LiveSession::events_since(std::size_t from, std::chrono::milliseconds timeout) const
{
    std::unique_lock lock(mu_);
    cv_.wait_for(lock, timeout, [&] { return events_.size() > from; });
    if (from >= events_.size())
        return {};
    return {events_.begin() + static_cast<std::ptrdiff_t>(from), events_.end()};
}

std::size_t LiveSession::event_count() const
{
    std::lock_guard lock(mu_);
    return events_.size();
}

SessionStore::SessionStore(Clock clock, std::optional<std::filesystem::path> journal_dir)
    : clock_(std::move(clock)), journal_dir_(std::move(journal_dir))
{
}

std::int64_t SessionStore::system_clock_ms()
{
    using namespace std::chrono;
    return duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count();
}

std::shared_ptr<LiveSession> SessionStore::recording_on(const std::string& device_id) const
{
    std::lock_guard lock(mu_);
    for (const auto& [id, dev] : device_of_) {
        if (dev != device_id)
            continue;
        auto s = sessions_.at(id);
        if (s->recording())
            return s;
    }
    return nullptr;
}

std::shared_ptr<LiveSession> SessionStore::start_session(const SessionConfig& config, DeviceChannel& device)
{
    validate(config.firmware);
    validate(config.afe);
    const std::string device_id = device.device_id();
    if (recording_on(device_id))
        throw BusyError(fmt::format("device {} already has a recording session", device_id));

    const Ack cfg_ack = device.send_command(to_command(config.firmware));
    if (cfg_ack.status != kAckOk)
        throw StateError(fmt::format("device {} rejected configuration (status {})", device_id, cfg_ack.status));
    const Ack start_ack = device.send_command(CmdStart{});
    if (start_ack.status != kAckOk)
        throw StateError(fmt::format("device {} rejected start (status {})", device_id, start_ack.status));

    std::lock_guard lock(mu_);
    SessionInfo info;
    info.id = fmt::format("{}-{:04}", device_id, ++counter_);
    info.start_utc_ms = clock_();
    info.config = config;
    info.device_info = device_id;
    info.state = SessionState::Recording;
    auto session = std::make_shared<LiveSession>(std::move(info), std::uint16_t{1});
    if (journal_dir_)
        session->attach_journal(*journal_dir_ / (session->info().id + ".jsonl"));
    const auto id = session->info().id;
    sessions_[id] = session;
    device_of_[id] = device_id;
    channel_of_[id] = &device;
    return session;
}

bool SessionStore::stop_session(const std::string& id)
{
    auto session = get(id);
    DeviceChannel* channel = nullptr;
    {
        std::lock_guard lock(mu_);
        channel = channel_of_.at(id);
    }
    bool acked = false;
    if (session->recording()) {
        try {
            acked = channel->send_command(CmdStop{}).status == kAckOk;
        } catch (const LinkFailure&) {
            acked = false;
        }
    }
    session->stop();
    return acked;
}

std::shared_ptr<LiveSession> SessionStore::get(const std::string& id) const
{
    std::lock_guard lock(mu_);
    auto it = sessions_.find(id);
    if (it == sessions_.end())
        throw NotFoundError(fmt::format("unknown session '{}'", id));
    return it->second;
}

std::vector<SessionInfo> SessionStore::list() const
{
    std::lock_guard lock(mu_);
    std::vector<SessionInfo> out;
    for (const auto& [id, s] : sessions_)
        out.push_back(s->info());
    return out;
}

} // namespace phtwin
