#pragma once

// Post-processing primitives: window statistics, two-point time-based drift
// compensation, least-squares sensitivity, mV -> pH conversion and the
// response / stability metrics. All functions are pure.

#include "phtwin/session.hpp"

#include <span>
#include <string>
#include <vector>

namespace phtwin {

struct SeriesPoint
{
    double t_ms = 0.0;
    double value = 0.0;
};

using Series = std::vector<SeriesPoint>;

/// Electrode potential (ph_mv) over device time.
Series potential_series(const SessionData& session);
/// Temperature (temp_c) over device time.
Series temperature_series(const SessionData& session);

struct WindowStats
{
    double mean_mv = 0.0;      ///< mean of the series values in the window
    double mean_t_ms = 0.0;
    double stddev_mv = 0.0;    ///< population standard deviation
    std::size_t n = 0;
};

/// Samples with t_start <= t < t_end. Throws EmptyWindowError.
WindowStats window_stats(const Series& series, const Annotation& window);

struct DriftModel
{
    double rate_mv_per_min = 0.0;
    double t_ref_ms = 0.0;
    double e_ref_mv = 0.0;
};

/// Two windows at the same pH; b must be later than a (AnalysisError).
DriftModel fit_drift(const WindowStats& ref_a, const WindowStats& ref_b);

/// E'(t) = E(t) - rate * (t - t_ref); extrapolates outside the anchors.
Series apply_drift(const Series& series, const DriftModel& model);

struct SensitivityModel
{
    double slope_mv_per_ph = 0.0;   ///< reported positive
    double e7_mv = 0.0;
};

struct CalibrationPoint
{
    double ph = 7.0;
    double mean_mv = 0.0;
};

/// Least-squares line of potential against pH. Throws RankError when all
/// points share one pH.
SensitivityModel fit_sensitivity(std::span<const CalibrationPoint> points);

/// Uses every window carrying an expected_ph. Rejects slopes outside
/// (0, nernst_slope(temp_c) + 5] with AnalysisError.
SensitivityModel fit_sensitivity(const Series& corrected, std::span<const Annotation> cal_windows,
                                 double temp_c = 25.0);

/// ln(10) R T / F in mV/pH. Valid for -20 < T < 100 degC (RangeError).
double nernst_slope(double temp_c);

/// pH(t) = 7 + (e7 - E'(t)) / slope
Series to_ph(const Series& corrected, const SensitivityModel& model);

/// Same, with the slope scaled by the Nernst temperature factor relative to
/// the calibration temperature, using the nearest temperature sample.
Series to_ph_temperature_compensated(const Series& corrected, const Series& temperature_c,
                                     const SensitivityModel& model, double calibration_temp_c);

struct ResponseMetrics
{
    double settling_s = 0.0;
    double rate_ph_per_s = 0.0;
};

/// Settling time after `transition.t_start_ms` into +-band of to_ph, taking
/// samples strictly after the start and before the annotation end. The
/// crossing is interpolated linearly between the last out-of-band sample and
/// the next one. Throws NoSettleError when the series leaves the band again
/// at the end of the window, EmptyWindowError when there are no samples.
ResponseMetrics response_rate(const Series& ph, double from_ph, double to_ph, double band,
                              const Annotation& transition);

/// max |pH(t) - mean pH| over the window. Throws EmptyWindowError.
double stability(const Series& ph, const Annotation& window);

} // namespace phtwin
