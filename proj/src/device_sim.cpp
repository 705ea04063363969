#include "phtwin/device_sim.hpp"

#include "phtwin/errors.hpp"

#include <fmt/core.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace phtwin {

namespace {

// splitmix64 as a URBG, keyed per (seed, time) so noise is a pure function
// of its arguments and does not depend on call order.
class CounterEngine
{
public:
    using result_type = std::uint64_t;

    explicit CounterEngine(std::uint64_t state) : state_(state) {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return ~result_type{0}; }

    result_type operator()()
    {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

private:
    std::uint64_t state_;
};

} // namespace

double BathSchedule::ph_at(double t_s) const
{
    if (segments.empty())
        throw ValidationError("bath schedule has no segments");
    double ph = segments.front().ph;
    for (const auto& seg : segments) {
        if (seg.start_s > t_s)
            break;
        ph = seg.ph;
    }
    return ph;
}

double BathSchedule::min_ph() const
{
    auto it = std::min_element(segments.begin(), segments.end(),
                               [](const auto& a, const auto& b) { return a.ph < b.ph; });
    return it == segments.end() ? 7.0 : it->ph;
}

double BathSchedule::max_ph() const
{
    auto it = std::max_element(segments.begin(), segments.end(),
                               [](const auto& a, const auto& b) { return a.ph < b.ph; });
    return it == segments.end() ? 7.0 : it->ph;
}

void validate(const ElectrodeParams& p)
{
    if (!(p.sensitivity_mv_per_ph > 0.0))
        throw ValidationError("electrode sensitivity must be positive");
    if (!(p.tau_s > 0.0))
        throw ValidationError("electrode time constant must be positive");
    if (!(p.noise_sigma_mv >= 0.0))
        throw ValidationError("noise sigma must be non-negative");
    if (!(p.source_impedance_gohm > 0.0))
        throw ValidationError("source impedance must be positive");
    if (!std::isfinite(p.e0_mv) || !std::isfinite(p.drift_mv_per_min))
        throw ValidationError("electrode potential terms must be finite");
}

void validate(const AfeParams& afe)
{
    if (!(afe.c_iss_pf() > 0.0))
        throw ValidationError("JFET input capacitance must be positive");
    if (!(afe.buffer_gain > 0.0 && afe.buffer_gain <= 1.0))
        throw ValidationError("buffer gain must be in (0, 1]");
    if (afe.adc_bits != 12)
        throw ValidationError("ADC resolution must be 12 bits");
    if (!(afe.adc_fullscale_mv > 0.0))
        throw ValidationError("ADC full-scale must be positive");
}

void validate(const BathSchedule& schedule)
{
    if (schedule.segments.empty())
        throw ValidationError("bath schedule has no segments");
    for (std::size_t i = 0; i < schedule.segments.size(); ++i) {
        const auto& seg = schedule.segments[i];
        if (!(seg.ph >= 0.0 && seg.ph <= 14.0))
            throw ValidationError(fmt::format("segment {} pH {} outside 0..14", i, seg.ph));
        if (i > 0 && !(seg.start_s > schedule.segments[i - 1].start_s))
            throw ValidationError("segment start times must be strictly increasing");
    }
}

double input_impedance_gohm(const AfeParams& afe, double freq_hz)
{
    if (!(freq_hz > 0.0))
        throw DomainError("input impedance is unbounded at DC; frequency must be positive");
    if (!(afe.c_iss_pf() > 0.0))
        throw DomainError("input capacitance must be positive");
    const double c_farad = afe.c_iss_pf() * 1e-12;
    return 1.0 / (2.0 * std::numbers::pi * freq_hz * c_farad) * 1e-9;
}

double potential_noise_mv(std::uint64_t seed, double t_s, double sigma_mv)
{
    if (sigma_mv <= 0.0)
        return 0.0;
    const auto tick_us = static_cast<std::uint64_t>(std::llround(t_s * 1e6));
    CounterEngine engine(seed * 0xD1B54A32D192ED03ull ^ tick_us);
    std::normal_distribution<double> dist(0.0, sigma_mv);
    return dist(engine);
}

double electrode_potential_mv(const ElectrodeParams& params, const ElectrodeState& state)
{
    if (!state.hydrated)
        throw NotReadyError("electrode membrane is not hydrated");
    const double t_min = state.t_s / 60.0;
    return params.e0_mv
         + params.sensitivity_mv_per_ph * (7.0 - state.ph_surface)
         + params.drift_mv_per_min * t_min
         + potential_noise_mv(params.rng_seed, state.t_s, params.noise_sigma_mv);
}

ElectrodeState step(const ElectrodeState& state, const BathSchedule& schedule,
                    const ElectrodeParams& params, double dt_s)
{
    if (!(dt_s > 0.0))
        throw DomainError("step size must be positive");
    ElectrodeState next = state;
    const double target = schedule.ph_at(state.t_s);
    const double alpha = -std::expm1(-dt_s / params.tau_s);
    next.ph_surface = state.ph_surface + (target - state.ph_surface) * alpha;
    next.t_s = state.t_s + dt_s;
    return next;
}

ElectrodeState initial_state(const BathSchedule& schedule, bool hydrated)
{
    return ElectrodeState{0.0, schedule.ph_at(0.0), hydrated};
}

double temp_sensor_mv(double temp_c, const TempSensorParams& sensor)
{
    if (!(temp_c >= -10.0 && temp_c <= 60.0))
        throw RangeError(fmt::format("temperature {} degC outside -10..60", temp_c));
    return sensor.v25_mv - sensor.k_mv_per_c * (temp_c - 25.0);
}

double temp_from_sensor_mv(double v_mv, const TempSensorParams& sensor)
{
    if (sensor.k_mv_per_c == 0.0)
        throw DomainError("temperature sensor with zero coefficient is not invertible");
    return 25.0 - (v_mv - sensor.v25_mv) / sensor.k_mv_per_c;
}

AdcReading adc_quantize(double v_mv, const AfeParams& afe)
{
    const double fs = afe.adc_fullscale_mv;
    const double v = v_mv * afe.buffer_gain + afe.bias_offset_mv;
    AdcReading r;
    r.saturated = v < 0.0 || v > fs;
    const double clamped = std::clamp(v, 0.0, fs);
    const double scaled = clamped / fs * afe.max_count();
    r.counts = static_cast<std::uint16_t>(std::floor(scaled + 0.5));
    return r;
}

double adc_counts_to_mv(std::uint16_t counts, const AfeParams& afe)
{
    const double v = static_cast<double>(counts) / afe.max_count() * afe.adc_fullscale_mv;
    return (v - afe.bias_offset_mv) / afe.buffer_gain;
}

AfeParams temperature_channel(const AfeParams& afe)
{
    AfeParams t = afe;
    t.buffer_gain = 1.0;
    t.bias_offset_mv = 0.0;
    return t;
}

} // namespace phtwin
