#pragma once

// Session persistence. JSONL: a header record, then one record per sample,
// gap and annotation in device-time order. CSV: samples only. Both are
// byte-stable for a given session.

#include "phtwin/session.hpp"

#include <json.hpp>

#include <string>
#include <string_view>

namespace phtwin {

inline constexpr int kSessionFormatVersion = 1;
inline constexpr std::string_view kCsvHeader = "seq,t_ms,recv_utc,ph_raw,temp_raw,ph_mv,temp_c";

enum class ExportFormat
{
    Jsonl,
    Csv,
};

/// Throws ValidationError for anything but "jsonl" or "csv".
ExportFormat parse_export_format(std::string_view name);

/// "2026-01-01T08:00:00.100Z"
std::string format_utc(std::int64_t ms_since_epoch);
std::int64_t parse_utc(std::string_view text);

nlohmann::json config_to_json(const SessionConfig& cfg);
SessionConfig config_from_json(const nlohmann::json& j);

nlohmann::json header_record(const SessionInfo& info);
nlohmann::json to_record(const SampleRecord& s);
nlohmann::json to_record(const Annotation& a);
nlohmann::json to_record(const GapEvent& g);
nlohmann::json to_record(const StreamEvent& ev);

Annotation annotation_from_json(const nlohmann::json& j);

/// Requires a stopped session (StateError otherwise).
std::string export_session(const SessionData& session, ExportFormat format);
std::string export_session(const SessionData& session, std::string_view format);

/// Parses a JSONL export (or a recording journal). Throws ValidationError.
SessionData import_session_jsonl(std::string_view text);

} // namespace phtwin
