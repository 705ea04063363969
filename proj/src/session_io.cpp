#include "phtwin/session_io.hpp"

#include "phtwin/errors.hpp"
#include "phtwin/json_io.hpp"

#include <fmt/core.h>

#include <algorithm>
#include <ctime>
#include <sstream>
#include <tuple>

namespace phtwin {

using nlohmann::json;

ExportFormat parse_export_format(std::string_view name)
{
    if (name == "jsonl")
        return ExportFormat::Jsonl;
    if (name == "csv")
        return ExportFormat::Csv;
    throw ValidationError(fmt::format("unknown export format '{}'", name));
}

std::string format_utc(std::int64_t ms)
{
    std::int64_t secs = ms / 1000;
    std::int64_t rem = ms % 1000;
    if (rem < 0) {
        rem += 1000;
        --secs;
    }
    const std::time_t t = static_cast<std::time_t>(secs);
    std::tm tm{};
    gmtime_r(&t, &tm);
    return fmt::format("{:04}-{:02}-{:02}T{:02}:{:02}:{:02}.{:03}Z", tm.tm_year + 1900, tm.tm_mon + 1,
                       tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec, rem);
}

std::int64_t parse_utc(std::string_view text)
{
    std::tm tm{};
    int ms = 0;
    const std::string s(text);
    int n = std::sscanf(s.c_str(), "%4d-%2d-%2dT%2d:%2d:%2d.%3dZ", &tm.tm_year, &tm.tm_mon, &tm.tm_mday,
                        &tm.tm_hour, &tm.tm_min, &tm.tm_sec, &ms);
    if (n < 6)
        throw ValidationError(fmt::format("bad UTC timestamp '{}'", text));
    if (n == 6)
        ms = 0;
    tm.tm_year -= 1900;
    tm.tm_mon -= 1;
    return static_cast<std::int64_t>(timegm(&tm)) * 1000 + ms;
}

json config_to_json(const SessionConfig& cfg)
{
    return json{{"firmware", cfg.firmware}, {"afe", cfg.afe}, {"temp_sensor", cfg.temp_sensor}};
}

SessionConfig config_from_json(const json& j)
{
    SessionConfig cfg;
    if (j.contains("firmware"))
        j.at("firmware").get_to(cfg.firmware);
    if (j.contains("afe"))
        j.at("afe").get_to(cfg.afe);
    if (j.contains("temp_sensor"))
        j.at("temp_sensor").get_to(cfg.temp_sensor);
    return cfg;
}

json header_record(const SessionInfo& info)
{
    return json{{"type", "header"},
                {"version", kSessionFormatVersion},
                {"session",
                 {{"id", info.id},
                  {"start_utc", format_utc(info.start_utc_ms)},
                  {"device_info", info.device_info},
                  {"state", to_string(info.state)}}},
                {"config", config_to_json(info.config)}};
}

json to_record(const SampleRecord& s)
{
    return json{{"type", "sample"},       {"seq", s.seq},         {"t_ms", s.t_ms},
                {"recv_utc", format_utc(s.recv_utc_ms)},  {"ph_raw", s.ph_raw},
                {"temp_raw", s.temp_raw}, {"ph_mv", s.ph_mv},     {"temp_c", s.temp_c}};
}

json to_record(const Annotation& a)
{
    return json{{"type", "annotation"},
                {"label", a.label},
                {"t_start_ms", a.t_start_ms},
                {"t_end_ms", a.t_end_ms},
                {"expected_ph", a.expected_ph ? json(*a.expected_ph) : json(nullptr)}};
}

json to_record(const GapEvent& g)
{
    return json{{"type", "gap"}, {"t_ms", g.t_ms}, {"after_seq", g.after_seq}, {"missing", g.missing}};
}

json to_record(const StreamEvent& ev)
{
    return std::visit(
        [](const auto& e) -> json {
            if constexpr (std::is_same_v<std::decay_t<decltype(e)>, StreamEnd>)
                return json{{"type", "end"}};
            else
                return to_record(e);
        },
        ev);
}

Annotation annotation_from_json(const json& j)
{
    Annotation a;
    a.label = j.at("label").get<std::string>();
    a.t_start_ms = j.at("t_start_ms").get<std::int64_t>();
    a.t_end_ms = j.at("t_end_ms").get<std::int64_t>();
    if (auto it = j.find("expected_ph"); it != j.end() && !it->is_null())
        a.expected_ph = it->get<double>();
    return a;
}

namespace {

// Time key, then gaps before the sample that revealed them, then annotations.
struct OrderedRecord
{
    std::int64_t t;
    int rank;
    std::size_t index;

    auto key() const { return std::tie(t, rank, index); }
    bool operator<(const OrderedRecord& o) const { return key() < o.key(); }
};

std::string export_jsonl(const SessionData& s)
{
    std::vector<OrderedRecord> order;
    order.reserve(s.samples.size() + s.gaps.size() + s.annotations.size());
    for (std::size_t i = 0; i < s.gaps.size(); ++i)
        order.push_back({s.gaps[i].t_ms, 0, i});
    for (std::size_t i = 0; i < s.samples.size(); ++i)
        order.push_back({s.samples[i].t_ms, 1, i});
    for (std::size_t i = 0; i < s.annotations.size(); ++i)
        order.push_back({s.annotations[i].t_start_ms, 2, i});
    std::stable_sort(order.begin(), order.end());

    std::string out = header_record(s.info).dump();
    out += '\n';
    for (const auto& r : order) {
        switch (r.rank) {
        case 0: out += to_record(s.gaps[r.index]).dump(); break;
        case 1: out += to_record(s.samples[r.index]).dump(); break;
        default: out += to_record(s.annotations[r.index]).dump(); break;
        }
        out += '\n';
    }
    return out;
}

std::string export_csv(const SessionData& s)
{
    std::string out(kCsvHeader);
    out += '\n';
    for (const auto& r : s.samples)
        out += fmt::format("{},{},{},{},{},{},{}\n", r.seq, r.t_ms, format_utc(r.recv_utc_ms), r.ph_raw,
                           r.temp_raw, r.ph_mv, r.temp_c);
    return out;
}

SessionState parse_state(const std::string& s)
{
    if (s == "recording")
        return SessionState::Recording;
    if (s == "stopped")
        return SessionState::Stopped;
    throw ValidationError(fmt::format("unknown session state '{}'", s));
}

} // namespace

std::string export_session(const SessionData& session, ExportFormat format)
{
    if (session.info.state != SessionState::Stopped)
        throw StateError("session must be stopped before export");
    return format == ExportFormat::Jsonl ? export_jsonl(session) : export_csv(session);
}

std::string export_session(const SessionData& session, std::string_view format)
{
    return export_session(session, parse_export_format(format));
}

SessionData import_session_jsonl(std::string_view text)
{
    SessionData data;
    bool have_header = false;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos)
            end = text.size();
        const std::string_view line = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (line.empty())
            continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            throw ValidationError(fmt::format("line {}: {}", line_no, e.what()));
        }
        try {
            const auto type = j.at("type").get<std::string>();
            if (type == "header") {
                if (j.at("version").get<int>() != kSessionFormatVersion)
                    throw ValidationError(fmt::format("unsupported session version {}", j.at("version").dump()));
                const auto& s = j.at("session");
                data.info.id = s.at("id").get<std::string>();
                data.info.start_utc_ms = parse_utc(s.at("start_utc").get<std::string>());
                data.info.device_info = s.value("device_info", "");
                data.info.state = parse_state(s.at("state").get<std::string>());
                data.info.config = config_from_json(j.at("config"));
                have_header = true;
            } else if (!have_header) {
                throw ValidationError("first record must be the header");
            } else if (type == "sample") {
                SampleRecord r;
                r.seq = j.at("seq").get<std::uint16_t>();
                r.t_ms = j.at("t_ms").get<std::uint32_t>();
                r.recv_utc_ms = parse_utc(j.at("recv_utc").get<std::string>());
                r.ph_raw = j.at("ph_raw").get<std::uint16_t>();
                r.temp_raw = j.at("temp_raw").get<std::uint16_t>();
                r.ph_mv = j.at("ph_mv").get<double>();
                r.temp_c = j.at("temp_c").get<double>();
                data.samples.push_back(r);
            } else if (type == "annotation") {
                data.annotations.push_back(annotation_from_json(j));
            } else if (type == "gap") {
                data.gaps.push_back(GapEvent{j.at("t_ms").get<std::uint32_t>(), j.at("after_seq").get<std::uint16_t>(),
                                             j.at("missing").get<std::uint16_t>()});
            } else if (type == "end") {
                data.info.state = SessionState::Stopped;
            } else {
                throw ValidationError(fmt::format("unknown record type '{}'", type));
            }
        } catch (const json::exception& e) {
            throw ValidationError(fmt::format("line {}: {}", line_no, e.what()));
        }
    }
    if (!have_header)
        throw ValidationError("session file has no header record");
    return data;
}

} // namespace phtwin
