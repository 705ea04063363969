#pragma once

// Full analysis pipeline over a recorded session, and the metrics document
// it produces.

#include "phtwin/analysis.hpp"
#include "phtwin/power.hpp"
#include "phtwin/session.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace phtwin {

inline constexpr std::string_view kDriftWindowA = "cal-ph7-a";
inline constexpr std::string_view kDriftWindowB = "cal-ph7-b";
inline constexpr std::string_view kCalibrationPrefix = "cal-";
inline constexpr std::string_view kTransitionLabel = "transition";
inline constexpr std::string_view kBaselineLabel = "baseline";

struct AnalysisOptions
{
    double settling_band_ph = 0.05;
    /// Shift response timing by the firmware chain's group delay so settling
    /// is measured on the electrode's own timeline.
    bool align_chain_delay = true;
    bool temperature_compensation = false;
    /// Used when fewer than two distinct pH windows are annotated.
    std::optional<double> assumed_slope_mv_per_ph;
    PowerBudget power_budget = reference_budget();
};

struct CalibrationWindowMetrics
{
    std::string label;
    double expected_ph = 7.0;
    WindowStats raw;
    WindowStats corrected;
};

struct ResponseEntry
{
    std::string label;
    double from_ph = 0.0;
    double to_ph = 0.0;
    std::int64_t t_start_ms = 0;
    std::optional<ResponseMetrics> response;
    std::string error;
};

struct StabilityEntry
{
    std::string label;
    double max_abs_deviation_ph = 0.0;
};

struct Metrics
{
    std::string session_id;
    std::size_t samples = 0;
    std::int64_t t_first_ms = 0;
    std::int64_t t_last_ms = 0;
    std::size_t gap_events = 0;
    std::uint64_t missing_frames = 0;
    double mean_temp_c = 0.0;
    double chain_delay_ms = 0.0;

    std::optional<DriftModel> drift;
    std::optional<double> drift_ph_per_min;
    std::optional<double> ph7_window_disagreement_ph;
    std::optional<SensitivityModel> sensitivity;
    bool sensitivity_assumed = false;
    double nernst_slope_mv_per_ph = 0.0;

    std::vector<CalibrationWindowMetrics> calibration_windows;
    std::vector<ResponseEntry> responses;
    std::vector<StabilityEntry> stability;
    PowerTotals power;
};

/// Runs the pipeline. Throws EmptyWindowError for a session without samples.
Metrics analyze(const SessionData& session, const AnalysisOptions& options = {});

/// pH over device time using the drift and sensitivity models in `metrics`.
/// Empty when the metrics carry no sensitivity model.
Series ph_series(const SessionData& session, const Metrics& metrics, const AnalysisOptions& options = {});

nlohmann::json to_json(const Metrics& m);
/// Throws ValidationError when required sections are missing.
Metrics metrics_from_json(const nlohmann::json& j);

} // namespace phtwin
