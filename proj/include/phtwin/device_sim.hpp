#pragma once

// Lumped physical model of the intraoral front-end: glass electrode, JFET
// source-follower buffer, RC filter, analog temperature sensor and the
// 12-bit ADC. Everything runs on a virtual clock supplied by the caller.

#include <cstdint>
#include <vector>

namespace phtwin {

struct ElectrodeParams
{
    double e0_mv = 0.0;                 ///< potential at pH 7
    double sensitivity_mv_per_ph = 31.0;
    double drift_mv_per_min = 0.155;    ///< 0.005 pH/min at 31 mV/pH
    double tau_s = 0.67;                ///< first-order membrane response
    double noise_sigma_mv = 0.6;
    double source_impedance_gohm = 5.1;
    std::uint64_t rng_seed = 1;
};

struct AfeParams
{
    double c_gs_pf = 3.0;
    double c_gd_pf = 1.0;
    double buffer_gain = 1.0;
    double bias_offset_mv = 1024.0;     ///< lifts E0 to mid-scale
    double adc_fullscale_mv = 2048.0;
    int adc_bits = 12;

    double c_iss_pf() const { return c_gs_pf + c_gd_pf; }
    std::uint16_t max_count() const { return static_cast<std::uint16_t>((1u << adc_bits) - 1u); }
};

/// Linear transfer of the analog temperature sensor (negative tempco).
struct TempSensorParams
{
    double v25_mv = 1050.0;
    double k_mv_per_c = 5.19;
};

struct BathSegment
{
    double start_s = 0.0;
    double ph = 7.0;
};

struct BathSchedule
{
    std::vector<BathSegment> segments;
    double temp_c = 25.0;

    /// pH of the bath at virtual time t (the first segment extends backwards).
    double ph_at(double t_s) const;
    double min_ph() const;
    double max_ph() const;
};

struct ElectrodeState
{
    double t_s = 0.0;
    double ph_surface = 7.0;
    bool hydrated = true;
};

/// Result of one conversion; `saturated` is set when the input hit a rail.
struct AdcReading
{
    std::uint16_t counts = 0;
    bool saturated = false;
};

void validate(const ElectrodeParams& p);
void validate(const AfeParams& afe);
void validate(const BathSchedule& schedule);

/// |Z_in| = 1 / (2 pi f C_iss), in gigaohms. Throws DomainError for f <= 0.
double input_impedance_gohm(const AfeParams& afe, double freq_hz);

/// Zero-mean Gaussian sample that depends only on (seed, t).
double potential_noise_mv(std::uint64_t seed, double t_s, double sigma_mv);

/// Membrane potential for the current surface pH, including drift and noise.
/// Throws NotReadyError when the electrode is not hydrated.
double electrode_potential_mv(const ElectrodeParams& params, const ElectrodeState& state);

/// Advances the first-order lag by dt towards the bath pH at state.t_s.
ElectrodeState step(const ElectrodeState& state, const BathSchedule& schedule,
                    const ElectrodeParams& params, double dt_s);

ElectrodeState initial_state(const BathSchedule& schedule, bool hydrated = true);

/// Valid for -10..60 degC; throws RangeError outside.
double temp_sensor_mv(double temp_c, const TempSensorParams& sensor = {});

/// Inverse of temp_sensor_mv. Throws DomainError for a zero coefficient.
double temp_from_sensor_mv(double v_mv, const TempSensorParams& sensor = {});

/// round-half-up(clamp(v*gain + bias, 0, FS) / FS * (2^bits - 1))
AdcReading adc_quantize(double v_mv, const AfeParams& afe);

/// Host-side inverse of adc_quantize for in-range counts.
double adc_counts_to_mv(std::uint16_t counts, const AfeParams& afe);

/// Same converter without buffer gain or bias; the temperature sensor is
/// wired straight to the second ADC channel.
AfeParams temperature_channel(const AfeParams& afe);

} // namespace phtwin
