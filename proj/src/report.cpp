#include "phtwin/report.hpp"

#include "phtwin/errors.hpp"
#include "phtwin/power.hpp"
#include "phtwin/session_io.hpp"

#include <fmt/core.h>

#include <algorithm>
#include <cmath>

namespace phtwin {

namespace {

constexpr double kWidth = 960.0;
constexpr double kHeight = 420.0;
constexpr double kMarginLeft = 60.0;
constexpr double kMarginRight = 20.0;
constexpr double kMarginTop = 20.0;
constexpr double kMarginBottom = 50.0;

constexpr const char* kPalette[] = {"#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f",
                                    "#edc948", "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac"};

std::string escape(std::string_view s)
{
    std::string out;
    for (char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

std::string fixed(double v, int digits)
{
    if (v == 0.0)
        v = 0.0;   // no "-0.000"
    return fmt::format("{:.{}f}", v, digits);
}

struct Axes
{
    double t0, t1, y0, y1;

    double x(double t) const
    {
        const double span = t1 > t0 ? t1 - t0 : 1.0;
        return kMarginLeft + (t - t0) / span * (kWidth - kMarginLeft - kMarginRight);
    }
    double y(double v) const
    {
        const double span = y1 > y0 ? y1 - y0 : 1.0;
        return kHeight - kMarginBottom - (v - y0) / span * (kHeight - kMarginTop - kMarginBottom);
    }
};

std::string render_svg(const ReportDocument& doc)
{
    double lo = 14.0;
    double hi = 0.0;
    for (const auto& p : doc.plot) {
        lo = std::min(lo, p.value);
        hi = std::max(hi, p.value);
    }
    if (doc.plot.empty()) {
        lo = 0.0;
        hi = 14.0;
    }
    Axes ax{doc.t_min_ms, doc.t_max_ms, std::floor(lo) - 0.5, std::ceil(hi) + 0.5};

    std::string svg = fmt::format(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {} {}\" width=\"{}\" height=\"{}\" "
        "font-family=\"sans-serif\" font-size=\"11\">\n",
        kWidth, kHeight, kWidth, kHeight);
    svg += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"#ffffff\" stroke=\"#444\"/>\n",
                       kMarginLeft, kMarginTop, kWidth - kMarginLeft - kMarginRight,
                       kHeight - kMarginTop - kMarginBottom);

    for (std::size_t i = 0; i < doc.regions.size(); ++i) {
        const auto& r = doc.regions[i];
        const double xa = ax.x(std::clamp(r.t_start_ms, ax.t0, ax.t1));
        const double xb = ax.x(std::clamp(r.t_end_ms, ax.t0, ax.t1));
        svg += fmt::format("<rect class=\"region\" data-label=\"{}\" x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" "
                           "fill=\"{}\" fill-opacity=\"0.18\"/>\n",
                           escape(r.label), fixed(xa, 2), kMarginTop, fixed(std::max(xb - xa, 0.5), 2),
                           kHeight - kMarginTop - kMarginBottom, kPalette[i % std::size(kPalette)]);
    }

    // Axis ticks: whole pH units and roughly eight time ticks in minutes.
    for (double v = std::ceil(ax.y0); v <= ax.y1; v += 1.0) {
        svg += fmt::format("<line x1=\"{}\" x2=\"{}\" y1=\"{}\" y2=\"{}\" stroke=\"#ddd\"/>"
                           "<text x=\"{}\" y=\"{}\" text-anchor=\"end\">{}</text>\n",
                           kMarginLeft, kWidth - kMarginRight, fixed(ax.y(v), 2), fixed(ax.y(v), 2),
                           kMarginLeft - 6, fixed(ax.y(v) + 4, 2), fixed(v, 0));
    }
    const double span_min = (ax.t1 - ax.t0) / 60000.0;
    const double step_min = span_min > 0 ? std::max(1.0, std::ceil(span_min / 8.0)) : 1.0;
    for (double m = 0.0; m <= span_min + 1e-9; m += step_min) {
        const double x = ax.x(ax.t0 + m * 60000.0);
        svg += fmt::format("<line x1=\"{0}\" x2=\"{0}\" y1=\"{1}\" y2=\"{2}\" stroke=\"#444\"/>"
                           "<text x=\"{0}\" y=\"{3}\" text-anchor=\"middle\">{4}</text>\n",
                           fixed(x, 2), kHeight - kMarginBottom, kHeight - kMarginBottom + 5,
                           kHeight - kMarginBottom + 18, fixed(m, 0));
    }
    svg += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">time [min]</text>\n",
                       (kWidth + kMarginLeft) / 2, kHeight - 8);
    svg += fmt::format("<text transform=\"translate(14 {}) rotate(-90)\" text-anchor=\"middle\">pH</text>\n",
                       (kHeight - kMarginBottom + kMarginTop) / 2);

    if (!doc.plot.empty()) {
        svg += "<polyline class=\"trace\" fill=\"none\" stroke=\"#1f3b73\" stroke-width=\"1\" points=\"";
        for (std::size_t i = 0; i < doc.plot.size(); ++i) {
            if (i)
                svg += ' ';
            svg += fixed(ax.x(doc.plot[i].t_ms), 2);
            svg += ',';
            svg += fixed(ax.y(doc.plot[i].value), 2);
        }
        svg += "\"/>\n";
    }

    for (const auto& a : doc.anchors) {
        svg += fmt::format("<circle class=\"anchor\" data-label=\"{}\" cx=\"{}\" cy=\"{}\" r=\"4\" fill=\"#000\"/>\n",
                           escape(a.label), fixed(ax.x(a.t_ms), 2), fixed(ax.y(a.ph), 2));
    }
    svg += "</svg>\n";
    return svg;
}

std::string render_table(const std::vector<std::pair<std::string, std::string>>& rows, const char* cls)
{
    std::string out = fmt::format("<table class=\"{}\">\n", cls);
    for (const auto& [k, v] : rows)
        out += fmt::format("<tr><th>{}</th><td>{}</td></tr>\n", escape(k), escape(v));
    out += "</table>\n";
    return out;
}

} // namespace

Series downsample_minmax(const Series& series, std::size_t max_points)
{
    if (series.size() <= max_points || max_points < 2)
        return series;
    const std::size_t bins = max_points / 2;
    const double t0 = series.front().t_ms;
    const double t1 = series.back().t_ms;
    const double width = (t1 - t0) / static_cast<double>(bins);
    Series out;
    out.reserve(bins * 2);
    std::size_t i = 0;
    for (std::size_t b = 0; b < bins && i < series.size(); ++b) {
        const double edge = b + 1 == bins ? t1 : t0 + width * static_cast<double>(b + 1);
        std::size_t lo = i;
        std::size_t hi = i;
        const std::size_t first = i;
        while (i < series.size() && (series[i].t_ms < edge || b + 1 == bins)) {
            if (series[i].value < series[lo].value)
                lo = i;
            if (series[i].value > series[hi].value)
                hi = i;
            ++i;
        }
        if (i == first)
            continue;
        if (lo == hi) {
            out.push_back(series[lo]);
        } else {
            out.push_back(series[std::min(lo, hi)]);
            out.push_back(series[std::max(lo, hi)]);
        }
    }
    return out;
}

ReportDocument build_report(const SessionData& session, const Metrics& metrics)
{
    if (session.samples.empty())
        throw ValidationError("cannot render a report for a session without samples");
    if (metrics.session_id != session.info.id)
        throw ValidationError(fmt::format("metrics belong to session '{}', not '{}'", metrics.session_id,
                                          session.info.id));
    if (!metrics.sensitivity)
        throw ValidationError("metrics carry no sensitivity model; run analyze with calibration windows");

    ReportDocument doc;
    doc.title = fmt::format("pH telemetry report - {}", session.info.id);
    doc.metadata = {
        {"Session", session.info.id},
        {"Device", session.info.device_info},
        {"Start (UTC)", format_utc(session.info.start_utc_ms)},
        {"Samples", fmt::format("{}", session.samples.size())},
        {"Duration", fmt::format("{} min", fixed((metrics.t_last_ms - metrics.t_first_ms) / 60000.0, 1))},
        {"Sampling", fmt::format("{} Hz, averaged over {}, moving average {}",
                                 session.info.config.firmware.sample_hz, session.info.config.firmware.avg_n,
                                 session.info.config.firmware.ma_window)},
    };

    doc.t_min_ms = session.samples.front().t_ms;
    doc.t_max_ms = session.samples.back().t_ms;
    doc.plot = downsample_minmax(ph_series(session, metrics), kMaxPlotPoints);

    for (const auto& a : session.annotations)
        doc.regions.push_back({a.label, static_cast<double>(a.t_start_ms), static_cast<double>(a.t_end_ms),
                               a.expected_ph});
    for (const auto& w : metrics.calibration_windows) {
        const double ph = 7.0 + (metrics.sensitivity->e7_mv - w.corrected.mean_mv) / metrics.sensitivity->slope_mv_per_ph;
        doc.anchors.push_back({w.label, w.corrected.mean_t_ms, ph});
    }

    auto& t = doc.metrics_table;
    if (metrics.drift) {
        t.emplace_back("Drift", fmt::format("{} mV/min", fixed(metrics.drift->rate_mv_per_min, 4)));
        if (metrics.drift_ph_per_min)
            t.emplace_back("Drift (pH)", fmt::format("{} pH/min", fixed(*metrics.drift_ph_per_min, 5)));
        if (metrics.ph7_window_disagreement_ph)
            t.emplace_back("pH 7 reference agreement after correction",
                           fmt::format("{} pH", fixed(*metrics.ph7_window_disagreement_ph, 4)));
    } else {
        t.emplace_back("Drift", "not compensated (reference windows missing)");
    }
    t.emplace_back(metrics.sensitivity_assumed ? "Sensitivity (assumed)" : "Sensitivity",
                   fmt::format("{} mV/pH ({}% of Nernst {} mV/pH at 25 degC)",
                               fixed(metrics.sensitivity->slope_mv_per_ph, 2),
                               fixed(100.0 * metrics.sensitivity->slope_mv_per_ph / metrics.nernst_slope_mv_per_ph, 1),
                               fixed(metrics.nernst_slope_mv_per_ph, 2)));
    t.emplace_back("E at pH 7", fmt::format("{} mV", fixed(metrics.sensitivity->e7_mv, 2)));
    for (const auto& r : metrics.responses) {
        const auto key = fmt::format("Response {} -> {}", fixed(r.from_ph, 1), fixed(r.to_ph, 1));
        if (r.response)
            t.emplace_back(key, fmt::format("settles after {} s, {} pH/s", fixed(r.response->settling_s, 2),
                                            fixed(r.response->rate_ph_per_s, 3)));
        else
            t.emplace_back(key, r.error);
    }
    for (const auto& s : metrics.stability)
        t.emplace_back(fmt::format("Stability ({})", s.label), fmt::format("+-{} pH", fixed(s.max_abs_deviation_ph, 3)));
    t.emplace_back("Link gaps", fmt::format("{} events, {} frames missing", metrics.gap_events, metrics.missing_frames));
    t.emplace_back("Mean temperature", fmt::format("{} degC", fixed(metrics.mean_temp_c, 2)));

    for (const auto& e : reference_budget().entries)
        doc.power_table.emplace_back(fmt::format("{} ({})", e.component, e.part), fmt::format("{} mW", fixed(e.power_mw, 3)));
    doc.power_table.emplace_back("Full system", fmt::format("{} mW", fixed(metrics.power.total_mw, 2)));
    doc.power_table.emplace_back("Without optional components",
                                 fmt::format("{} mW", fixed(metrics.power.total_without_optional_mw, 2)));
    doc.power_table.emplace_back("Intraoral", fmt::format("{} mW", fixed(metrics.power.intraoral_mw, 2)));
    return doc;
}

std::string render_html(const ReportDocument& doc)
{
    std::string html = "<!DOCTYPE html>\n<html lang=\"en\">\n<head>\n<meta charset=\"utf-8\">\n";
    html += fmt::format("<title>{}</title>\n", escape(doc.title));
    html += "<style>\n"
            "body{font-family:sans-serif;margin:24px;color:#222}\n"
            "table{border-collapse:collapse;margin:8px 0 16px}\n"
            "th,td{border:1px solid #bbb;padding:3px 8px;text-align:left;font-size:12px}\n"
            ".legend span{display:inline-block;margin-right:14px;font-size:12px}\n"
            ".swatch{display:inline-block;width:12px;height:12px;margin-right:4px;vertical-align:middle}\n"
            "@media print{body{margin:0}@page{size:A4 landscape;margin:12mm}}\n"
            "</style>\n</head>\n<body>\n";
    html += fmt::format("<h1>{}</h1>\n", escape(doc.title));
    html += render_table(doc.metadata, "metadata");
    html += "<h2>Measurement</h2>\n";
    html += render_svg(doc);
    html += "<div class=\"legend\">\n";
    for (std::size_t i = 0; i < doc.regions.size(); ++i) {
        const auto& r = doc.regions[i];
        html += fmt::format("<span class=\"legend-item\"><i class=\"swatch\" style=\"background:{}\"></i>{} "
                            "[{} - {} min]{}</span>\n",
                            kPalette[i % std::size(kPalette)], escape(r.label), fixed(r.t_start_ms / 60000.0, 2),
                            fixed(r.t_end_ms / 60000.0, 2),
                            r.expected_ph ? fmt::format(" pH {}", fixed(*r.expected_ph, 2)) : std::string());
    }
    html += "</div>\n<h2>Metrics</h2>\n";
    html += render_table(doc.metrics_table, "metrics");
    html += "<h2>Power consumption at 3.3 V</h2>\n";
    html += render_table(doc.power_table, "power");
    html += "</body>\n</html>\n";
    return html;
}

std::string render_report(const SessionData& session, const Metrics& metrics)
{
    return render_html(build_report(session, metrics));
}

} // namespace phtwin
