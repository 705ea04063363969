#include "phtwin/analysis.hpp"

#include "phtwin/errors.hpp"

#include <fmt/core.h>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace phtwin {

namespace {

constexpr double kGasConstant = 8.314462618;   // J/(mol K)
constexpr double kFaraday = 96485.33212;       // C/mol

bool in_window(double t, const Annotation& w)
{
    return t >= static_cast<double>(w.t_start_ms) && t < static_cast<double>(w.t_end_ms);
}

} // namespace

Series potential_series(const SessionData& session)
{
    Series s;
    s.reserve(session.samples.size());
    for (const auto& r : session.samples)
        s.push_back({static_cast<double>(r.t_ms), r.ph_mv});
    return s;
}

Series temperature_series(const SessionData& session)
{
    Series s;
    s.reserve(session.samples.size());
    for (const auto& r : session.samples)
        s.push_back({static_cast<double>(r.t_ms), r.temp_c});
    return s;
}

WindowStats window_stats(const Series& series, const Annotation& window)
{
    WindowStats st;
    double sum_v = 0.0;
    double sum_t = 0.0;
    for (const auto& p : series) {
        if (!in_window(p.t_ms, window))
            continue;
        sum_v += p.value;
        sum_t += p.t_ms;
        ++st.n;
    }
    if (st.n == 0)
        throw EmptyWindowError(fmt::format("window '{}' [{}, {}) contains no samples", window.label,
                                           window.t_start_ms, window.t_end_ms));
    st.mean_mv = sum_v / static_cast<double>(st.n);
    st.mean_t_ms = sum_t / static_cast<double>(st.n);
    double ss = 0.0;
    for (const auto& p : series) {
        if (in_window(p.t_ms, window))
            ss += (p.value - st.mean_mv) * (p.value - st.mean_mv);
    }
    st.stddev_mv = std::sqrt(ss / static_cast<double>(st.n));
    return st;
}

DriftModel fit_drift(const WindowStats& ref_a, const WindowStats& ref_b)
{
    if (!(ref_b.mean_t_ms > ref_a.mean_t_ms))
        throw AnalysisError(fmt::format("second reference window (t = {} ms) must follow the first (t = {} ms)",
                                        ref_b.mean_t_ms, ref_a.mean_t_ms));
    const double dt_min = (ref_b.mean_t_ms - ref_a.mean_t_ms) / 60000.0;
    return DriftModel{(ref_b.mean_mv - ref_a.mean_mv) / dt_min, ref_a.mean_t_ms, ref_a.mean_mv};
}

Series apply_drift(const Series& series, const DriftModel& model)
{
    Series out = series;
    for (auto& p : out)
        p.value -= model.rate_mv_per_min * (p.t_ms - model.t_ref_ms) / 60000.0;
    return out;
}

SensitivityModel fit_sensitivity(std::span<const CalibrationPoint> points)
{
    if (points.size() < 2)
        throw RankError("sensitivity fit needs at least two calibration windows");
    const double n = static_cast<double>(points.size());
    double mean_ph = 0.0;
    double mean_e = 0.0;
    for (const auto& p : points) {
        mean_ph += p.ph;
        mean_e += p.mean_mv;
    }
    mean_ph /= n;
    mean_e /= n;
    double sxx = 0.0;
    double sxy = 0.0;
    for (const auto& p : points) {
        sxx += (p.ph - mean_ph) * (p.ph - mean_ph);
        sxy += (p.ph - mean_ph) * (p.mean_mv - mean_e);
    }
    if (sxx <= 0.0)
        throw RankError("all calibration windows share one pH; slope is undetermined");
    const double de_dph = sxy / sxx;
    return SensitivityModel{-de_dph, mean_e + de_dph * (7.0 - mean_ph)};
}

SensitivityModel fit_sensitivity(const Series& corrected, std::span<const Annotation> cal_windows,
                                 double temp_c)
{
    std::vector<CalibrationPoint> points;
    for (const auto& w : cal_windows) {
        if (!w.expected_ph)
            continue;
        points.push_back({*w.expected_ph, window_stats(corrected, w).mean_mv});
    }
    auto model = fit_sensitivity(points);
    const double bound = nernst_slope(temp_c) + 5.0;
    if (!(model.slope_mv_per_ph > 0.0) || model.slope_mv_per_ph > bound)
        throw AnalysisError(fmt::format("fitted slope {:.3f} mV/pH outside (0, {:.2f}]", model.slope_mv_per_ph,
                                        bound));
    return model;
}

double nernst_slope(double temp_c)
{
    if (!(temp_c > -20.0 && temp_c < 100.0))
        throw RangeError(fmt::format("temperature {} degC outside (-20, 100)", temp_c));
    return std::numbers::ln10 * kGasConstant * (temp_c + 273.15) / kFaraday * 1000.0;
}

Series to_ph(const Series& corrected, const SensitivityModel& model)
{
    if (!(model.slope_mv_per_ph > 0.0))
        throw DomainError("sensitivity slope must be positive");
    Series out = corrected;
    for (auto& p : out)
        p.value = 7.0 + (model.e7_mv - p.value) / model.slope_mv_per_ph;
    return out;
}

Series to_ph_temperature_compensated(const Series& corrected, const Series& temperature_c,
                                     const SensitivityModel& model, double calibration_temp_c)
{
    if (!(model.slope_mv_per_ph > 0.0))
        throw DomainError("sensitivity slope must be positive");
    if (temperature_c.empty())
        return to_ph(corrected, model);
    const double t_cal_k = calibration_temp_c + 273.15;
    Series out = corrected;
    std::size_t j = 0;
    for (auto& p : out) {
        while (j + 1 < temperature_c.size()
               && std::abs(temperature_c[j + 1].t_ms - p.t_ms) <= std::abs(temperature_c[j].t_ms - p.t_ms))
            ++j;
        const double slope = model.slope_mv_per_ph * (temperature_c[j].value + 273.15) / t_cal_k;
        p.value = 7.0 + (model.e7_mv - p.value) / slope;
    }
    return out;
}

ResponseMetrics response_rate(const Series& ph, double from_ph, double to_ph, double band,
                              const Annotation& transition)
{
    if (!(band > 0.0))
        throw DomainError("settling band must be positive");
    const double t0 = static_cast<double>(transition.t_start_ms);
    const double t1 = static_cast<double>(transition.t_end_ms);

    std::vector<SeriesPoint> window;
    for (const auto& p : ph) {
        if (p.t_ms > t0 && p.t_ms < t1)
            window.push_back(p);
    }
    if (window.empty())
        throw EmptyWindowError(fmt::format("transition '{}' contains no samples", transition.label));

    auto dev = [&](const SeriesPoint& p) { return std::abs(p.value - to_ph); };
    std::ptrdiff_t last_out = -1;
    for (std::size_t i = 0; i < window.size(); ++i) {
        if (dev(window[i]) > band)
            last_out = static_cast<std::ptrdiff_t>(i);
    }
    if (last_out == static_cast<std::ptrdiff_t>(window.size()) - 1)
        throw NoSettleError(fmt::format("series never settles within +-{} pH of {} in '{}'", band, to_ph,
                                        transition.label));

    double t_settled = window.front().t_ms;
    if (last_out >= 0) {
        const auto& a = window[static_cast<std::size_t>(last_out)];
        const auto& b = window[static_cast<std::size_t>(last_out) + 1];
        const double da = dev(a);
        const double db = dev(b);
        t_settled = a.t_ms + (da - band) / (da - db) * (b.t_ms - a.t_ms);
    }
    ResponseMetrics m;
    m.settling_s = (t_settled - t0) / 1000.0;
    m.rate_ph_per_s = std::abs(from_ph - to_ph) / m.settling_s;
    return m;
}

double stability(const Series& ph, const Annotation& window)
{
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& p : ph) {
        if (in_window(p.t_ms, window)) {
            sum += p.value;
            ++n;
        }
    }
    if (n == 0)
        throw EmptyWindowError(fmt::format("stability window '{}' contains no samples", window.label));
    const double mean = sum / static_cast<double>(n);
    double worst = 0.0;
    for (const auto& p : ph) {
        if (in_window(p.t_ms, window))
            worst = std::max(worst, std::abs(p.value - mean));
    }
    return worst;
}

} // namespace phtwin
