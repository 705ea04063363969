#include "phtwin/metrics.hpp"

#include "phtwin/errors.hpp"
#include "phtwin/firmware.hpp"

#include <fmt/core.h>

#include <algorithm>

namespace phtwin {

using nlohmann::json;

namespace {

bool starts_with(std::string_view s, std::string_view prefix)
{
    return s.substr(0, prefix.size()) == prefix;
}

const Annotation* find_label(const std::vector<Annotation>& anns, std::string_view label)
{
    auto it = std::find_if(anns.begin(), anns.end(), [&](const Annotation& a) { return a.label == label; });
    return it == anns.end() ? nullptr : &*it;
}

std::vector<Annotation> calibration_windows(const SessionData& s)
{
    std::vector<Annotation> out;
    for (const auto& a : s.annotations) {
        if (starts_with(a.label, kCalibrationPrefix) && a.expected_ph)
            out.push_back(a);
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const Annotation& a, const Annotation& b) { return a.t_start_ms < b.t_start_ms; });
    return out;
}

Series shifted(Series s, double delay_ms)
{
    for (auto& p : s)
        p.t_ms -= delay_ms;
    return s;
}

json window_json(const WindowStats& w)
{
    return json{{"mean_mv", w.mean_mv}, {"mean_t_ms", w.mean_t_ms}, {"stddev_mv", w.stddev_mv}, {"n", w.n}};
}

WindowStats window_from_json(const json& j)
{
    return WindowStats{j.at("mean_mv").get<double>(), j.at("mean_t_ms").get<double>(),
                       j.at("stddev_mv").get<double>(), j.at("n").get<std::size_t>()};
}

template <typename T>
json opt(const std::optional<T>& v)
{
    return v ? json(*v) : json(nullptr);
}

} // namespace

Metrics analyze(const SessionData& session, const AnalysisOptions& options)
{
    if (session.samples.empty())
        throw EmptyWindowError(fmt::format("session {} has no samples", session.info.id));

    Metrics m;
    m.session_id = session.info.id;
    m.samples = session.samples.size();
    m.t_first_ms = session.samples.front().t_ms;
    m.t_last_ms = session.samples.back().t_ms;
    m.gap_events = session.gaps.size();
    m.missing_frames = session.missing_total();
    m.chain_delay_ms = options.align_chain_delay ? chain_group_delay_ms(session.info.config.firmware) : 0.0;
    m.power = power_totals(options.power_budget);

    const Series potential = potential_series(session);
    const Series temperature = temperature_series(session);
    double temp_sum = 0.0;
    for (const auto& p : temperature)
        temp_sum += p.value;
    m.mean_temp_c = temp_sum / static_cast<double>(temperature.size());
    m.nernst_slope_mv_per_ph = nernst_slope(25.0);

    // Drift from the two pH 7 reference windows.
    Series corrected = potential;
    const auto* ref_a = find_label(session.annotations, kDriftWindowA);
    const auto* ref_b = find_label(session.annotations, kDriftWindowB);
    if (ref_a && ref_b) {
        m.drift = fit_drift(window_stats(potential, *ref_a), window_stats(potential, *ref_b));
        corrected = apply_drift(potential, *m.drift);
    }

    const auto cal = calibration_windows(session);
    for (const auto& w : cal)
        m.calibration_windows.push_back({w.label, *w.expected_ph, window_stats(potential, w), window_stats(corrected, w)});

    const double cal_temp = std::clamp(m.mean_temp_c, -19.0, 99.0);
    try {
        m.sensitivity = fit_sensitivity(corrected, cal, cal_temp);
    } catch (const RankError&) {
        if (options.assumed_slope_mv_per_ph) {
            const auto* anchor = ref_a ? ref_a : nullptr;
            for (const auto& w : cal) {
                if (!anchor && *w.expected_ph == 7.0)
                    anchor = &w;
            }
            if (anchor) {
                m.sensitivity = SensitivityModel{*options.assumed_slope_mv_per_ph,
                                                 window_stats(corrected, *anchor).mean_mv};
                m.sensitivity_assumed = true;
            }
        }
    }

    if (m.drift && m.sensitivity) {
        m.drift_ph_per_min = m.drift->rate_mv_per_min / m.sensitivity->slope_mv_per_ph;
        const double ea = window_stats(corrected, *ref_a).mean_mv;
        const double eb = window_stats(corrected, *ref_b).mean_mv;
        m.ph7_window_disagreement_ph = std::abs(eb - ea) / m.sensitivity->slope_mv_per_ph;
    }

    if (!m.sensitivity)
        return m;

    const Series ph = ph_series(session, m, options);
    const Series ph_aligned = shifted(ph, m.chain_delay_ms);

    for (const auto& a : session.annotations) {
        if (!starts_with(a.label, kTransitionLabel) || !a.expected_ph)
            continue;
        ResponseEntry entry;
        entry.label = a.label;
        entry.to_ph = *a.expected_ph;
        entry.t_start_ms = a.t_start_ms;
        // The pH before the step is the level of the last calibrated phase
        // that ended at or before the transition began.
        const Annotation* before = nullptr;
        for (const auto& w : cal) {
            if (w.t_end_ms <= a.t_start_ms && (!before || w.t_end_ms >= before->t_end_ms))
                before = &w;
        }
        if (!before) {
            entry.error = "no calibrated phase precedes the transition";
            m.responses.push_back(entry);
            continue;
        }
        entry.from_ph = *before->expected_ph;
        try {
            entry.response = response_rate(ph_aligned, entry.from_ph, entry.to_ph, options.settling_band_ph, a);
        } catch (const AnalysisError& e) {
            entry.error = e.what();
        }
        m.responses.push_back(entry);
    }

    for (const auto& a : session.annotations) {
        if (a.label != kBaselineLabel && !starts_with(a.label, kCalibrationPrefix))
            continue;
        try {
            m.stability.push_back({a.label, stability(ph, a)});
        } catch (const EmptyWindowError&) {
        }
    }
    return m;
}

Series ph_series(const SessionData& session, const Metrics& metrics, const AnalysisOptions& options)
{
    if (!metrics.sensitivity)
        return {};
    Series corrected = potential_series(session);
    if (metrics.drift)
        corrected = apply_drift(corrected, *metrics.drift);
    if (options.temperature_compensation)
        return to_ph_temperature_compensated(corrected, temperature_series(session), *metrics.sensitivity,
                                             metrics.mean_temp_c);
    return to_ph(corrected, *metrics.sensitivity);
}

json to_json(const Metrics& m)
{
    json j;
    j["version"] = 1;
    j["session_id"] = m.session_id;
    j["samples"] = m.samples;
    j["t_first_ms"] = m.t_first_ms;
    j["t_last_ms"] = m.t_last_ms;
    j["gaps"] = {{"events", m.gap_events}, {"missing_frames", m.missing_frames}};
    j["mean_temp_c"] = m.mean_temp_c;
    j["chain_delay_ms"] = m.chain_delay_ms;
    j["drift"] = m.drift ? json{{"rate_mv_per_min", m.drift->rate_mv_per_min},
                                {"t_ref_ms", m.drift->t_ref_ms},
                                {"e_ref_mv", m.drift->e_ref_mv},
                                {"rate_ph_per_min", opt(m.drift_ph_per_min)},
                                {"ph7_window_disagreement_ph", opt(m.ph7_window_disagreement_ph)}}
                         : json(nullptr);
    j["sensitivity"] = m.sensitivity ? json{{"slope_mv_per_ph", m.sensitivity->slope_mv_per_ph},
                                            {"e7_mv", m.sensitivity->e7_mv},
                                            {"assumed", m.sensitivity_assumed},
                                            {"nernst_slope_25c_mv_per_ph", m.nernst_slope_mv_per_ph}}
                                     : json(nullptr);
    j["calibration_windows"] = json::array();
    for (const auto& w : m.calibration_windows)
        j["calibration_windows"].push_back({{"label", w.label},
                                            {"expected_ph", w.expected_ph},
                                            {"raw", window_json(w.raw)},
                                            {"corrected", window_json(w.corrected)}});
    j["responses"] = json::array();
    for (const auto& r : m.responses) {
        json e{{"label", r.label}, {"from_ph", r.from_ph}, {"to_ph", r.to_ph}, {"t_start_ms", r.t_start_ms}};
        if (r.response) {
            e["settling_s"] = r.response->settling_s;
            e["rate_ph_per_s"] = r.response->rate_ph_per_s;
        } else {
            e["error"] = r.error;
        }
        j["responses"].push_back(e);
    }
    j["stability"] = json::array();
    for (const auto& s : m.stability)
        j["stability"].push_back({{"label", s.label}, {"max_abs_deviation_ph", s.max_abs_deviation_ph}});
    j["power"] = {{"total_mw", m.power.total_mw},
                  {"total_without_optional_mw", m.power.total_without_optional_mw},
                  {"intraoral_mw", m.power.intraoral_mw}};
    return j;
}

Metrics metrics_from_json(const json& j)
{
    try {
        Metrics m;
        m.session_id = j.at("session_id").get<std::string>();
        m.samples = j.at("samples").get<std::size_t>();
        m.t_first_ms = j.at("t_first_ms").get<std::int64_t>();
        m.t_last_ms = j.at("t_last_ms").get<std::int64_t>();
        m.gap_events = j.at("gaps").at("events").get<std::size_t>();
        m.missing_frames = j.at("gaps").at("missing_frames").get<std::uint64_t>();
        m.mean_temp_c = j.at("mean_temp_c").get<double>();
        m.chain_delay_ms = j.at("chain_delay_ms").get<double>();
        if (const auto& d = j.at("drift"); !d.is_null()) {
            m.drift = DriftModel{d.at("rate_mv_per_min").get<double>(), d.at("t_ref_ms").get<double>(),
                                 d.at("e_ref_mv").get<double>()};
            if (!d.at("rate_ph_per_min").is_null())
                m.drift_ph_per_min = d.at("rate_ph_per_min").get<double>();
            if (!d.at("ph7_window_disagreement_ph").is_null())
                m.ph7_window_disagreement_ph = d.at("ph7_window_disagreement_ph").get<double>();
        }
        if (const auto& s = j.at("sensitivity"); !s.is_null()) {
            m.sensitivity = SensitivityModel{s.at("slope_mv_per_ph").get<double>(), s.at("e7_mv").get<double>()};
            m.sensitivity_assumed = s.at("assumed").get<bool>();
            m.nernst_slope_mv_per_ph = s.at("nernst_slope_25c_mv_per_ph").get<double>();
        }
        for (const auto& w : j.at("calibration_windows"))
            m.calibration_windows.push_back({w.at("label").get<std::string>(), w.at("expected_ph").get<double>(),
                                             window_from_json(w.at("raw")), window_from_json(w.at("corrected"))});
        for (const auto& r : j.at("responses")) {
            ResponseEntry e;
            e.label = r.at("label").get<std::string>();
            e.from_ph = r.at("from_ph").get<double>();
            e.to_ph = r.at("to_ph").get<double>();
            e.t_start_ms = r.at("t_start_ms").get<std::int64_t>();
            if (r.contains("settling_s"))
                e.response = ResponseMetrics{r.at("settling_s").get<double>(), r.at("rate_ph_per_s").get<double>()};
            else
                e.error = r.value("error", "");
            m.responses.push_back(e);
        }
        for (const auto& s : j.at("stability"))
            m.stability.push_back({s.at("label").get<std::string>(), s.at("max_abs_deviation_ph").get<double>()});
        const auto& p = j.at("power");
        m.power = PowerTotals{p.at("total_mw").get<double>(), p.at("total_without_optional_mw").get<double>(),
                              p.at("intraoral_mw").get<double>()};
        return m;
    } catch (const json::exception& e) {
        throw ValidationError(fmt::format("metrics document is incomplete: {}", e.what()));
    }
}

} // namespace phtwin
