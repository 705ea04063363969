#pragma once

// Print-ready measurement report: a self-contained HTML document with an
// inline SVG plot of pH over time, shaded annotation regions, calibration
// anchors, the metrics table and the power table.

#include "phtwin/analysis.hpp"
#include "phtwin/metrics.hpp"
#include "phtwin/session.hpp"

#include <string>
#include <vector>

namespace phtwin {

inline constexpr std::size_t kMaxPlotPoints = 5000;

struct PlotRegion
{
    std::string label;
    double t_start_ms = 0.0;
    double t_end_ms = 0.0;
    std::optional<double> expected_ph;
};

struct PlotAnchor
{
    std::string label;
    double t_ms = 0.0;
    double ph = 0.0;
};

struct ReportDocument
{
    std::string title;
    std::vector<std::pair<std::string, std::string>> metadata;
    double t_min_ms = 0.0;       ///< plot axis spans exactly the session
    double t_max_ms = 0.0;
    Series plot;                 ///< pH, downsampled
    std::vector<PlotRegion> regions;
    std::vector<PlotAnchor> anchors;
    std::vector<std::pair<std::string, std::string>> metrics_table;
    std::vector<std::pair<std::string, std::string>> power_table;
};

/// Keeps the minimum and maximum of each time bin (in time order), so
/// transient extremes survive. Returns the input when it already fits.
Series downsample_minmax(const Series& series, std::size_t max_points);

/// Throws ValidationError for an empty session or metrics that belong to a
/// different session or lack a sensitivity model.
ReportDocument build_report(const SessionData& session, const Metrics& metrics);

std::string render_html(const ReportDocument& doc);

/// build_report + render_html; deterministic for identical inputs.
std::string render_report(const SessionData& session, const Metrics& metrics);

} // namespace phtwin
