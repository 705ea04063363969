#include "phtwin/scenario.hpp"

#include "phtwin/errors.hpp"
#include "phtwin/json_io.hpp"
#include "phtwin/metrics.hpp"
#include "phtwin/session_io.hpp"

#include <fmt/core.h>

#include <cmath>

namespace phtwin {

using nlohmann::json;

void validate(const Scenario& s)
{
    validate(s.node.electrode);
    validate(s.node.afe);
    validate(s.node.bath);
    validate(s.node.firmware);
    validate(s.link);
    if (!(s.duration_s > 0.0))
        throw ValidationError("duration_s must be positive");
    if (!s.segment_labels.empty() && s.segment_labels.size() != s.node.bath.segments.size())
        throw ValidationError("segment labels must match bath segments");
    if (s.settle_margin_s < 0.0 || s.transition_window_s <= 0.0)
        throw ValidationError("annotation margins must be non-negative");
    for (const auto& a : s.extra_annotations)
        validate(a);
}

Scenario scenario_from_json(const json& j)
{
    try {
        Scenario s;
        s.name = j.value("name", s.name);
        if (j.contains("seed") && !j.at("seed").is_null())
            s.seed = j.at("seed").get<std::uint64_t>();
        if (j.contains("start_utc"))
            s.start_utc_ms = parse_utc(j.at("start_utc").get<std::string>());
        s.duration_s = j.value("duration_s", s.duration_s);
        if (j.contains("electrode"))
            j.at("electrode").get_to(s.node.electrode);
        if (j.contains("afe"))
            j.at("afe").get_to(s.node.afe);
        if (j.contains("temp_sensor"))
            j.at("temp_sensor").get_to(s.node.temp_sensor);
        if (j.contains("firmware"))
            j.at("firmware").get_to(s.node.firmware);
        if (j.contains("link"))
            j.at("link").get_to(s.link);
        s.node.hydrated = j.value("hydrated", true);
        s.node.battery_mv = j.value("battery_mv", s.node.battery_mv);
        if (j.contains("bath")) {
            j.at("bath").get_to(s.node.bath);
            for (const auto& seg : j.at("bath").value("segments", json::array()))
                s.segment_labels.push_back(seg.value("label", ""));
        }
        if (j.contains("annotations")) {
            const auto& a = j.at("annotations");
            s.auto_annotations = a.value("auto", s.auto_annotations);
            s.settle_margin_s = a.value("settle_margin_s", s.settle_margin_s);
            s.transition_window_s = a.value("transition_window_s", s.transition_window_s);
            for (const auto& extra : a.value("extra", json::array()))
                s.extra_annotations.push_back(annotation_from_json(extra));
        }
        if (s.seed) {
            s.node.electrode.rng_seed = *s.seed;
            s.link.seed = *s.seed ^ 0x5DEECE66Dull;
        }
        validate(s);
        return s;
    } catch (const json::exception& e) {
        throw ValidationError(fmt::format("bad scenario: {}", e.what()));
    }
}

json to_json(const Scenario& s)
{
    json bath = s.node.bath;
    for (std::size_t i = 0; i < s.segment_labels.size() && i < bath["segments"].size(); ++i) {
        if (!s.segment_labels[i].empty())
            bath["segments"][i]["label"] = s.segment_labels[i];
    }
    json extra = json::array();
    for (const auto& a : s.extra_annotations) {
        json r = to_record(a);
        r.erase("type");
        extra.push_back(r);
    }
    return json{{"name", s.name},
                {"seed", s.seed ? json(*s.seed) : json(nullptr)},
                {"start_utc", format_utc(s.start_utc_ms)},
                {"duration_s", s.duration_s},
                {"electrode", s.node.electrode},
                {"afe", s.node.afe},
                {"temp_sensor", s.node.temp_sensor},
                {"firmware", s.node.firmware},
                {"link", s.link},
                {"hydrated", s.node.hydrated},
                {"battery_mv", s.node.battery_mv},
                {"bath", bath},
                {"annotations",
                 {{"auto", s.auto_annotations},
                  {"settle_margin_s", s.settle_margin_s},
                  {"transition_window_s", s.transition_window_s},
                  {"extra", extra}}}};
}

std::vector<Annotation> scenario_annotations(const Scenario& s, double device_start_s)
{
    std::vector<Annotation> out;
    auto to_device_ms = [&](double world_s) {
        return static_cast<std::int64_t>(std::llround((world_s - device_start_s) * 1000.0));
    };
    if (s.auto_annotations) {
        const auto& segs = s.node.bath.segments;
        for (std::size_t i = 0; i < segs.size(); ++i) {
            const double start = segs[i].start_s;
            const double end = i + 1 < segs.size() ? segs[i + 1].start_s : s.duration_s;
            if (start >= s.duration_s)
                break;
            if (i > 0) {
                const double t_end = std::min(start + s.transition_window_s, end);
                out.push_back({std::string(kTransitionLabel), to_device_ms(start), to_device_ms(t_end), segs[i].ph});
            }
            const std::string label = i < s.segment_labels.size() ? s.segment_labels[i] : "";
            if (label.empty())
                continue;
            const double w_start = std::max(start + (i > 0 ? s.settle_margin_s : 0.0), device_start_s);
            if (w_start < end)
                out.push_back({label, to_device_ms(w_start), to_device_ms(end), segs[i].ph});
        }
    }
    out.insert(out.end(), s.extra_annotations.begin(), s.extra_annotations.end());
    return out;
}

Scenario reference_run_scenario(std::uint64_t seed)
{
    Scenario s;
    s.name = "reference-run";
    s.seed = seed;
    s.start_utc_ms = parse_utc("2026-01-01T08:00:00.000Z");
    s.duration_s = 5 * 3600.0;
    s.node.bath.temp_c = 25.0;
    s.node.bath.segments = {{0.0, 7.0}, {5400.0, 10.0}, {9000.0, 4.0}, {12600.0, 7.0}};
    s.segment_labels = {"cal-ph7-a", "cal-ph10", "cal-ph4", "cal-ph7-b"};
    s.node.electrode.rng_seed = seed;
    s.link.seed = seed ^ 0x5DEECE66Dull;
    return s;
}

Scenario stability_scenario(std::uint64_t seed)
{
    Scenario s;
    s.name = "stability-90min";
    s.seed = seed;
    s.start_utc_ms = parse_utc("2026-01-01T08:00:00.000Z");
    s.duration_s = 90 * 60.0;
    s.node.bath.segments = {{0.0, 7.0}};
    s.segment_labels = {""};
    s.extra_annotations = {
        {"cal-ph7-a", 0, 5 * 60 * 1000, 7.0},
        {"cal-ph7-b", 85 * 60 * 1000, 90 * 60 * 1000 + 1, 7.0},
        {"baseline", 0, 90 * 60 * 1000 + 1, 7.0},
    };
    s.node.electrode.rng_seed = seed;
    s.link.seed = seed ^ 0x5DEECE66Dull;
    return s;
}

} // namespace phtwin
