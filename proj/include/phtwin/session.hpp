#pragma once

// Host-side acquisition: sessions, frame ingestion with gap/duplicate
// handling, annotations and a live event log for streaming readers.

#include "phtwin/device_sim.hpp"
#include "phtwin/firmware.hpp"
#include "phtwin/link.hpp"
#include "phtwin/protocol.hpp"

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace phtwin {

struct SessionConfig
{
    FirmwareConfig firmware;
    AfeParams afe;
    TempSensorParams temp_sensor;
};

enum class SessionState
{
    Recording,
    Stopped,
};

std::string_view to_string(SessionState s);

struct SessionInfo
{
    std::string id;
    std::int64_t start_utc_ms = 0;
    SessionConfig config;
    std::string device_info;
    SessionState state = SessionState::Recording;
};

struct SampleRecord
{
    std::uint16_t seq = 0;
    std::uint32_t t_ms = 0;
    std::int64_t recv_utc_ms = 0;
    std::uint16_t ph_raw = 0;
    std::uint16_t temp_raw = 0;
    double ph_mv = 0.0;
    double temp_c = 0.0;
};

struct Annotation
{
    std::string label;
    std::int64_t t_start_ms = 0;
    std::int64_t t_end_ms = 0;
    std::optional<double> expected_ph;
};

/// Throws ValidationError for an empty label or t_start >= t_end.
void validate(const Annotation& a);

struct GapEvent
{
    std::uint32_t t_ms = 0;         ///< device time of the frame that revealed the gap
    std::uint16_t after_seq = 0;    ///< last sequence number seen before the gap
    std::uint16_t missing = 0;
};

/// Plain snapshot of a session; what export, import and analysis work on.
struct SessionData
{
    SessionInfo info;
    std::vector<SampleRecord> samples;
    std::vector<Annotation> annotations;
    std::vector<GapEvent> gaps;

    std::uint64_t missing_total() const;
};

struct IngestOutcome
{
    enum class Kind
    {
        Stored,
        Duplicate,   ///< same seq as the last stored frame, or an older one
        Gap,         ///< stored after `missing` lost frames
    };
    Kind kind = Kind::Stored;
    std::uint16_t missing = 0;
};

/// Raw counts to engineering units using the session's front-end parameters.
double counts_to_ph_mv(std::uint16_t counts, const SessionConfig& cfg);
double counts_to_temp_c(std::uint16_t counts, const SessionConfig& cfg);

struct StreamEnd
{
};

using StreamEvent = std::variant<SampleRecord, Annotation, GapEvent, StreamEnd>;

/// A session being recorded. One writer ingests frames; any number of
/// readers may take snapshots or follow the event log concurrently and
/// always observe a consistent prefix.
class LiveSession
{
public:
    LiveSession(SessionInfo info, std::optional<std::uint16_t> expected_first_seq);
    ~LiveSession();

    LiveSession(const LiveSession&) = delete;
    LiveSession& operator=(const LiveSession&) = delete;

    /// Throws StateError once the session is stopped.
    IngestOutcome ingest_frame(const DataFrame& frame, std::int64_t recv_utc_ms);
    /// Allowed while recording and after stop. Throws ValidationError.
    Annotation add_annotation(const Annotation& a);
    void record_status(const StatusFrame& status);
    void stop();

    /// Appends every event to an append-only JSONL journal as it happens.
    void attach_journal(const std::filesystem::path& path);

    SessionData snapshot() const;
    SessionInfo info() const;
    std::optional<StatusFrame> last_status() const;
    bool recording() const;

    /// Events with index >= from; waits up to `timeout` when none are ready.
    std::vector<StreamEvent> events_since(std::size_t from, std::chrono::milliseconds timeout) const;
    std::size_t event_count() const;

private:
    void publish(StreamEvent ev);

    mutable std::mutex mu_;
    mutable std::condition_variable cv_;
    SessionData data_;
    std::vector<StreamEvent> events_;
    std::optional<std::uint16_t> last_seq_;
    std::optional<StatusFrame> last_status_;
    std::ofstream journal_;
};

/// Host view of a device reachable over a link.
class DeviceChannel
{
public:
    virtual ~DeviceChannel() = default;
    virtual std::string device_id() const = 0;
    /// Sends a command and waits for its Ack. Throws LinkFailure.
    virtual Ack send_command(const Frame& command) = 0;
};

class SessionStore
{
public:
    using Clock = std::function<std::int64_t()>;

    /// `clock` returns wall time in ms since the Unix epoch.
    explicit SessionStore(Clock clock = system_clock_ms, std::optional<std::filesystem::path> journal_dir = {});

    /// Configures and starts the device. Throws BusyError when the device is
    /// already recording, LinkFailure when commands go unacknowledged and
    /// StateError when the device rejects them.
    std::shared_ptr<LiveSession> start_session(const SessionConfig& config, DeviceChannel& device);

    /// Sends CmdStop and closes the session. The session is closed even if
    /// the stop command is lost; the return value says whether it was acked.
    bool stop_session(const std::string& id);

    std::shared_ptr<LiveSession> get(const std::string& id) const;
    std::vector<SessionInfo> list() const;
    std::shared_ptr<LiveSession> recording_on(const std::string& device_id) const;

    static std::int64_t system_clock_ms();

private:
    Clock clock_;
    std::optional<std::filesystem::path> journal_dir_;
    mutable std::mutex mu_;
    std::map<std::string, std::shared_ptr<LiveSession>> sessions_;
    std::map<std::string, std::string> device_of_;
    std::map<std::string, DeviceChannel*> channel_of_;
    int counter_ = 0;
};

} // namespace phtwin
