// Acceptance suite: one PASS/FAIL line per criterion. Tolerances are fixed
// here and must not be relaxed to make a run pass.

#include "phtwin/analysis.hpp"
#include "phtwin/device_sim.hpp"
#include "phtwin/metrics.hpp"
#include "phtwin/power.hpp"
#include "phtwin/protocol.hpp"
#include "phtwin/scenario.hpp"
#include "phtwin/session_io.hpp"
#include "phtwin/simulate.hpp"

#include <fmt/core.h>

#include <chrono>
#include <cmath>
#include <random>

using namespace phtwin;

namespace tol {
constexpr double kImpedanceGohm = 39.79;
constexpr double kImpedanceRel = 0.005;
constexpr double kPowerTotalMw = 15.81;
constexpr double kPowerNoLedMw = 8.89;
constexpr double kPowerAbsMw = 0.01;
constexpr double kDriftMvPerMin = 0.005 * 31.0;
constexpr double kDriftRel = 0.05;
constexpr double kPh7AgreementPh = 0.02;
constexpr double kSlopeMvPerPh = 31.0;
constexpr double kSlopeRel = 0.01;
constexpr double kNernstMvPerPh = 59.16;
constexpr double kNernstAbs = 0.01;
constexpr double kSettlingS = 3.2;
constexpr double kSettlingAbsS = 0.1;
constexpr double kRatePhPerS = 1.875;
constexpr double kRateAbs = 0.06;
constexpr double kStabilityPh = 0.15;
constexpr int kStabilitySeeds = 20;
constexpr int kRoundTripFrames = 20000;
constexpr double kDropProb = 0.1;
constexpr double kWallTimeS = 30.0;
} // namespace tol

namespace {

int failures = 0;

void report(bool ok, const std::string& name, const std::string& detail)
{
    fmt::print("{} {}: {}\n", ok ? "PASS" : "FAIL", name, detail);
    std::fflush(stdout);
    failures += ok ? 0 : 1;
}

double seconds_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

const ResponseEntry* find_response(const Metrics& m, double from, double to)
{
    for (const auto& r : m.responses)
        if (r.from_ph == from && r.to_ph == to)
            return &r;
    return nullptr;
}

Frame random_frame(std::mt19937_64& rng)
{
    std::uniform_int_distribution<int> kind(0, 5), u8(0, 255), u16(0, 0xFFFF), raw(0, 4095);
    std::uniform_int_distribution<std::uint32_t> u32;
    auto b = [&] { return static_cast<std::uint8_t>(u8(rng)); };
    auto w = [&] { return static_cast<std::uint16_t>(u16(rng)); };
    auto r = [&] { return static_cast<std::uint16_t>(raw(rng)); };
    switch (kind(rng)) {
    case 0: return DataFrame{w(), u32(rng), r(), r()};
    case 1: return StatusFrame{w(), b()};
    case 2: return CmdStart{};
    case 3: return CmdStop{};
    case 4: return CmdConfig{w(), b(), b()};
    default: return Ack{b(), b()};
    }
}

void impedance()
{
    const double z = input_impedance_gohm(AfeParams{}, 1.0);
    const double rel = std::abs(z - tol::kImpedanceGohm) / tol::kImpedanceGohm;
    report(rel <= tol::kImpedanceRel, "input impedance",
           fmt::format("|Z|(4 pF, 1 Hz) = {:.3f} GOhm, target {} +-{:.1f}%", z, tol::kImpedanceGohm,
                       tol::kImpedanceRel * 100));
}

void power()
{
    const auto t = power_totals(reference_budget());
    const bool ok = std::abs(t.total_mw - tol::kPowerTotalMw) <= tol::kPowerAbsMw + 1e-9
                 && std::abs(t.total_without_optional_mw - tol::kPowerNoLedMw) <= tol::kPowerAbsMw + 1e-9;
    report(ok, "power totals",
           fmt::format("total {:.2f} mW (target {} +-{}), without LED {:.2f} mW (target {} +-{})", t.total_mw,
                       tol::kPowerTotalMw, tol::kPowerAbsMw, t.total_without_optional_mw, tol::kPowerNoLedMw,
                       tol::kPowerAbsMw));
}

void drift(const Metrics& m)
{
    if (!m.drift || !m.ph7_window_disagreement_ph) {
        report(false, "drift", "no drift model");
        return;
    }
    const double rel = std::abs(m.drift->rate_mv_per_min - tol::kDriftMvPerMin) / tol::kDriftMvPerMin;
    const bool ok = rel <= tol::kDriftRel && *m.ph7_window_disagreement_ph < tol::kPh7AgreementPh;
    report(ok, "drift",
           fmt::format("rate {:.5f} mV/min (injected {:.3f}, error {:.2f}% <= {}%), pH 7 windows differ by "
                       "{:.2e} pH after correction (< {})",
                       m.drift->rate_mv_per_min, tol::kDriftMvPerMin, rel * 100, tol::kDriftRel * 100,
                       *m.ph7_window_disagreement_ph, tol::kPh7AgreementPh));
}

void sensitivity(const Metrics& m)
{
    const double nernst = nernst_slope(25.0);
    const bool nernst_ok = std::abs(nernst - tol::kNernstMvPerPh) <= tol::kNernstAbs;
    if (!m.sensitivity || m.sensitivity_assumed) {
        report(false, "sensitivity", "no fitted sensitivity");
        return;
    }
    const double rel = std::abs(m.sensitivity->slope_mv_per_ph - tol::kSlopeMvPerPh) / tol::kSlopeMvPerPh;
    report(rel <= tol::kSlopeRel && nernst_ok, "sensitivity",
           fmt::format("slope {:.3f} mV/pH (injected {}, error {:.3f}% <= {}%), Nernst(25 degC) {:.4f} mV/pH "
                       "(target {} +-{})",
                       m.sensitivity->slope_mv_per_ph, tol::kSlopeMvPerPh, rel * 100, tol::kSlopeRel * 100, nernst,
                       tol::kNernstMvPerPh, tol::kNernstAbs));
}

void response(const Metrics& m)
{
    // Electrode alone, stepped at the firmware sample rate.
    ElectrodeParams p;
    BathSchedule bath{{{0.0, 10.0}, {1.0, 4.0}}, 25.0};
    ElectrodeState st{1.0, 10.0, true};
    const double dt = 0.01;
    double t = 0.0, prev_dev = 6.0;
    while (std::abs(st.ph_surface - 4.0) > 0.05) {
        prev_dev = std::abs(st.ph_surface - 4.0);
        st = step(st, bath, p, dt);
        t += dt;
    }
    const double dev = std::abs(st.ph_surface - 4.0);
    const double t_device = t - dt + (prev_dev - 0.05) / (prev_dev - dev) * dt;
    const bool device_ok = std::abs(t_device - tol::kSettlingS) <= tol::kSettlingAbsS;
    report(device_ok, "response (electrode model)",
           fmt::format("10 -> 4 settles into +-0.05 pH after {:.3f} s (target {} +-{})", t_device, tol::kSettlingS,
                       tol::kSettlingAbsS));

    const auto* r = find_response(m, 10.0, 4.0);
    if (!r || !r->response) {
        report(false, "response (pipeline)", r ? r->error : "no 10 -> 4 transition");
        return;
    }
    const bool ok = std::abs(r->response->settling_s - tol::kSettlingS) <= tol::kSettlingAbsS
                 && std::abs(r->response->rate_ph_per_s - tol::kRatePhPerS) <= tol::kRateAbs;
    report(ok, "response (pipeline)",
           fmt::format("10 -> 4 settles after {:.3f} s (target {} +-{}), rate {:.3f} pH/s (target {} +-{}); "
                       "firmware chain delay {:.0f} ms removed",
                       r->response->settling_s, tol::kSettlingS, tol::kSettlingAbsS, r->response->rate_ph_per_s,
                       tol::kRatePhPerS, tol::kRateAbs, m.chain_delay_ms));
}

void stability_check()
{
    AnalysisOptions opt;
    opt.assumed_slope_mv_per_ph = tol::kSlopeMvPerPh;
    double worst = 0.0;
    std::uint64_t worst_seed = 0;
    std::string error;
    for (int seed = 1; seed <= tol::kStabilitySeeds; ++seed) {
        const auto r = simulate(stability_scenario(static_cast<std::uint64_t>(seed)));
        const auto m = analyze(r.session, opt);
        bool found = false;
        for (const auto& s : m.stability) {
            if (s.label != kBaselineLabel)
                continue;
            found = true;
            if (s.max_abs_deviation_ph > worst) {
                worst = s.max_abs_deviation_ph;
                worst_seed = static_cast<std::uint64_t>(seed);
            }
        }
        if (!found)
            error = fmt::format("seed {}: no baseline stability", seed);
    }
    report(error.empty() && worst < tol::kStabilityPh, "stability",
           error.empty() ? fmt::format("worst max |pH - mean| over 90 min = {:.4f} pH (seed {}) across {} seeds, "
                                       "bound < {}",
                                       worst, worst_seed, tol::kStabilitySeeds, tol::kStabilityPh)
                         : error);
}

void protocol()
{
    std::mt19937_64 rng(20260101);
    std::vector<Frame> frames;
    std::vector<std::uint8_t> stream;
    for (int i = 0; i < tol::kRoundTripFrames; ++i) {
        frames.push_back(random_frame(rng));
        encode_into(frames.back(), stream);
    }
    const auto decoded = decode(stream);
    const bool roundtrip = decoded.frames == frames && decoded.diagnostics.empty();

    const std::vector<Frame> each{DataFrame{7, 700, 2048, 1050}, StatusFrame{3900, 6}, CmdStart{}, CmdStop{},
                                  CmdConfig{100, 10, 5}, Ack{0x10, 0}};
    std::size_t flips = 0, rejected = 0;
    for (const auto& f : each) {
        const auto good = encode(f);
        for (std::size_t bit = 0; bit < good.size() * 8; ++bit) {
            auto bad = good;
            bad[bit / 8] ^= static_cast<std::uint8_t>(1u << (bit % 8));
            ++flips;
            rejected += decode(bad).frames.empty() ? 1 : 0;
        }
    }
    const std::uint8_t check[] = {'1', '2', '3', '4', '5', '6', '7', '8', '9'};
    const auto crc = crc16_ccitt(check);
    report(roundtrip && rejected == flips && crc == 0x29B1, "protocol",
           fmt::format("{} random frames round-trip {}; {}/{} single-bit flips rejected; CRC(\"123456789\") = "
                       "0x{:04X}",
                       tol::kRoundTripFrames, roundtrip ? "identically" : "WITH DIFFERENCES", rejected, flips, crc));
}

void rate(const SimulationResult& lossless)
{
    const auto& samples = lossless.session.samples;
    const std::uint64_t expected = static_cast<std::uint64_t>(5 * 3600 * 10);
    bool spacing = samples.size() == expected;
    for (std::size_t i = 0; spacing && i < samples.size(); ++i)
        spacing = samples[i].t_ms == (i + 1) * 100;
    report(spacing && lossless.data_frames_sent == expected && lossless.session.gaps.empty(),
           "frame rate (lossless)",
           fmt::format("{} frames sent, {} stored over {} ticks at 100 Hz; timestamps every 100 ms: {}",
                       lossless.data_frames_sent, samples.size(), lossless.ticks, spacing ? "yes" : "no"));

    auto s = reference_run_scenario();
    s.link.drop_prob = tol::kDropProb;
    const auto r = simulate(s);
    const auto stored = r.session.samples.size();
    const auto missing = r.session.missing_total();
    report(stored + missing == r.data_frames_sent, "frame accounting (drop 0.1)",
           fmt::format("sent {}, dropped {}, stored {}, missing in {} gap events {}, trailing lost {}; "
                       "stored + missing = {}",
                       r.data_frames_sent, r.data_frames_dropped, stored, r.session.gaps.size(), missing,
                       r.trailing_lost, stored + missing));
}

void determinism(const std::string& first_export, const Metrics& first_metrics)
{
    const auto again = simulate(reference_run_scenario());
    const auto second_export = export_session(again.session, ExportFormat::Jsonl);
    const auto csv_a = export_session(again.session, ExportFormat::Csv);
    const auto csv_b = export_session(import_session_jsonl(second_export), ExportFormat::Csv);
    const auto m1 = to_json(first_metrics).dump(2);
    const auto m2 = to_json(analyze(import_session_jsonl(first_export))).dump(2);
    const bool ok = first_export == second_export && csv_a == csv_b && m1 == m2;
    report(ok, "determinism",
           fmt::format("export {} bytes identical: {}; CSV identical: {}; metrics identical: {}",
                       first_export.size(), first_export == second_export ? "yes" : "no",
                       csv_a == csv_b ? "yes" : "no", m1 == m2 ? "yes" : "no"));
}

} // namespace

int main()
{
    const auto t_all = std::chrono::steady_clock::now();
    impedance();
    power();

    const auto t_run = std::chrono::steady_clock::now();
    const auto reference = simulate(reference_run_scenario());
    const auto exported = export_session(reference.session, ExportFormat::Jsonl);
    const auto metrics = analyze(import_session_jsonl(exported));
    const double run_s = seconds_since(t_run);

    drift(metrics);
    sensitivity(metrics);
    response(metrics);
    stability_check();
    protocol();
    rate(reference);
    determinism(exported, metrics);
    report(run_s < tol::kWallTimeS, "wall time",
           fmt::format("5 h reference run simulated, exported and analyzed in {:.2f} s (< {} s)", run_s,
                       tol::kWallTimeS));

    fmt::print("{} failed; suite took {:.1f} s\n", failures, seconds_since(t_all));
    return failures == 0 ? 0 : 1;
}
