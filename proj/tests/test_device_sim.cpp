#include "phtwin/device_sim.hpp"
#include "phtwin/errors.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace phtwin;

TEST_CASE("impedance of the 4 pF buffer at 1 Hz")
{
    AfeParams afe;
    CHECK(afe.c_iss_pf() == doctest::Approx(4.0));
    // independent oracle: 1 / (2 pi * 1 Hz * 4e-12 F) = 39.788735772973834 GOhm
    CHECK(input_impedance_gohm(afe, 1.0) == doctest::Approx(39.788735772973834).epsilon(1e-12));
}

TEST_CASE("impedance falls as 1/f")
{
    AfeParams afe;
    for (double f : {0.01, 0.1, 1.0, 10.0, 1000.0})
        CHECK(input_impedance_gohm(afe, f) * f == doctest::Approx(input_impedance_gohm(afe, 1.0)));
}

TEST_CASE("impedance rejects DC and negative frequencies")
{
    AfeParams afe;
    CHECK_THROWS_AS(input_impedance_gohm(afe, 0.0), DomainError);
    CHECK_THROWS_AS(input_impedance_gohm(afe, -1.0), DomainError);
    afe.c_gs_pf = 0.0;
    afe.c_gd_pf = 0.0;
    CHECK_THROWS_AS(input_impedance_gohm(afe, 1.0), DomainError);
}

TEST_CASE("electrode potential without noise follows the linear model")
{
    ElectrodeParams p;
    p.noise_sigma_mv = 0.0;
    p.e0_mv = 12.0;
    ElectrodeState st{120.0, 4.0, true};
    CHECK(electrode_potential_mv(p, st) == doctest::Approx(12.0 + 31.0 * 3.0 + 0.155 * 2.0));
}

TEST_CASE("dry electrode is not readable")
{
    ElectrodeParams p;
    ElectrodeState st{0.0, 7.0, false};
    CHECK_THROWS_AS(electrode_potential_mv(p, st), NotReadyError);
}

TEST_CASE("noise is a pure function of seed and time")
{
    const double a = potential_noise_mv(7, 12.34, 0.6);
    CHECK(potential_noise_mv(7, 12.34, 0.6) == a);
    CHECK(potential_noise_mv(8, 12.34, 0.6) != a);
    CHECK(potential_noise_mv(7, 12.35, 0.6) != a);
    CHECK(potential_noise_mv(7, 12.34, 0.0) == 0.0);
}

TEST_CASE("noise has the configured spread")
{
    double sum = 0.0, sq = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double v = potential_noise_mv(99, i * 0.01, 0.6);
        sum += v;
        sq += v * v;
    }
    const double mean = sum / n;
    const double sd = std::sqrt(sq / n - mean * mean);
    CHECK(std::abs(mean) < 0.01);
    CHECK(sd == doctest::Approx(0.6).epsilon(0.01));
}

TEST_CASE("first-order step response matches the closed form")
{
    ElectrodeParams p;
    BathSchedule bath{{{0.0, 10.0}, {1.0, 4.0}}, 25.0};
    ElectrodeState st{1.0, 10.0, true};
    const double dt = 0.01;
    for (int i = 1; i <= 500; ++i) {
        st = step(st, bath, p, dt);
        const double t = i * dt;
        CHECK(st.ph_surface == doctest::Approx(4.0 + 6.0 * std::exp(-t / p.tau_s)).epsilon(1e-9));
    }
}

TEST_CASE("settling into 0.05 pH after a 6 pH step takes tau ln(120)")
{
    ElectrodeParams p;
    BathSchedule bath{{{0.0, 10.0}, {0.0001, 4.0}}, 25.0};
    ElectrodeState st{0.0001, 10.0, true};
    const double dt = 1e-4;
    double t = 0.0;
    while (std::abs(st.ph_surface - 4.0) > 0.05) {
        st = step(st, bath, p, dt);
        t += dt;
    }
    CHECK(t == doctest::Approx(0.67 * std::log(120.0)).epsilon(1e-3));
    CHECK(t == doctest::Approx(3.2).epsilon(0.1 / 3.2));
}

TEST_CASE("step is monotone and never overshoots")
{
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> ph(0.0, 14.0), dt(1e-4, 5.0);
    ElectrodeParams p;
    for (int i = 0; i < 2000; ++i) {
        const double from = ph(rng), to = ph(rng);
        BathSchedule bath{{{0.0, to}}, 25.0};
        const auto next = step(ElectrodeState{0.0, from, true}, bath, p, dt(rng));
        CHECK(std::abs(next.ph_surface - to) <= std::abs(from - to) + 1e-12);
        CHECK((next.ph_surface - to) * (from - to) >= 0.0);
    }
}

TEST_CASE("step rejects non-positive dt")
{
    BathSchedule bath{{{0.0, 7.0}}, 25.0};
    CHECK_THROWS_AS(step(ElectrodeState{}, bath, ElectrodeParams{}, 0.0), DomainError);
}

TEST_CASE("bath schedule lookup")
{
    BathSchedule bath{{{0.0, 7.0}, {10.0, 10.0}, {20.0, 4.0}}, 25.0};
    CHECK(bath.ph_at(-5.0) == 7.0);
    CHECK(bath.ph_at(9.999) == 7.0);
    CHECK(bath.ph_at(10.0) == 10.0);
    CHECK(bath.ph_at(1e9) == 4.0);
    CHECK(bath.min_ph() == 4.0);
    CHECK(bath.max_ph() == 10.0);
    CHECK_THROWS_AS(BathSchedule{}.ph_at(0.0), ValidationError);
    CHECK_THROWS_AS(validate(BathSchedule{{{0.0, 7.0}, {0.0, 8.0}}, 25.0}), ValidationError);
    CHECK_THROWS_AS(validate(BathSchedule{{{0.0, 15.0}}, 25.0}), ValidationError);
}

TEST_CASE("temperature sensor transfer and inverse")
{
    CHECK(temp_sensor_mv(25.0) == doctest::Approx(1050.0));
    CHECK(temp_sensor_mv(35.0) == doctest::Approx(1050.0 - 51.9));
    CHECK(temp_sensor_mv(-10.0) == doctest::Approx(1050.0 + 5.19 * 35.0));
    for (double t = -10.0; t <= 60.0; t += 0.7)
        CHECK(temp_from_sensor_mv(temp_sensor_mv(t)) == doctest::Approx(t));
    CHECK_THROWS_AS(temp_sensor_mv(-10.01), RangeError);
    CHECK_THROWS_AS(temp_sensor_mv(60.01), RangeError);
    CHECK_THROWS_AS(temp_from_sensor_mv(1000.0, TempSensorParams{1050.0, 0.0}), DomainError);
}

TEST_CASE("ADC maps the bias point to mid-scale")
{
    AfeParams afe;
    CHECK(afe.max_count() == 4095);
    // 1024 / 2048 * 4095 = 2047.5 -> rounds half up
    CHECK(adc_quantize(0.0, afe).counts == 2048);
    CHECK(adc_quantize(-1024.0, afe).counts == 0);
    CHECK(adc_quantize(1024.0, afe).counts == 4095);
    CHECK_FALSE(adc_quantize(1024.0, afe).saturated);
}

TEST_CASE("ADC clamps and flags saturation")
{
    AfeParams afe;
    auto hi = adc_quantize(5000.0, afe);
    CHECK(hi.counts == 4095);
    CHECK(hi.saturated);
    auto lo = adc_quantize(-5000.0, afe);
    CHECK(lo.counts == 0);
    CHECK(lo.saturated);
}

TEST_CASE("ADC is monotone non-decreasing and within one LSB of the ideal")
{
    AfeParams afe;
    const double lsb = afe.adc_fullscale_mv / afe.max_count();
    std::uint16_t prev = 0;
    for (double v = -1100.0; v <= 1100.0; v += 0.037) {
        const auto r = adc_quantize(v, afe);
        CHECK(r.counts >= prev);
        prev = r.counts;
        if (!r.saturated)
            CHECK(std::abs(adc_counts_to_mv(r.counts, afe) - v) <= lsb / 2 + 1e-9);
    }
}

TEST_CASE("temperature channel has no bias")
{
    const auto t = temperature_channel(AfeParams{});
    CHECK(t.bias_offset_mv == 0.0);
    const auto r = adc_quantize(temp_sensor_mv(25.0), t);
    CHECK(r.counts == static_cast<std::uint16_t>(std::floor(1050.0 / 2048.0 * 4095.0 + 0.5)));
}

TEST_CASE("parameter validation")
{
    ElectrodeParams e;
    e.tau_s = 0.0;
    CHECK_THROWS_AS(validate(e), ValidationError);
    e = {};
    e.sensitivity_mv_per_ph = -1.0;
    CHECK_THROWS_AS(validate(e), ValidationError);
    AfeParams a;
    a.adc_bits = 10;
    CHECK_THROWS_AS(validate(a), ValidationError);
    a = {};
    a.buffer_gain = 1.5;
    CHECK_THROWS_AS(validate(a), ValidationError);
    CHECK_NOTHROW(validate(AfeParams{}));
    CHECK_NOTHROW(validate(ElectrodeParams{}));
}
