#include "phtwin/json_io.hpp"

namespace phtwin {

using nlohmann::json;

namespace {

template <typename T>
void read(const json& j, const char* key, T& field)
{
    if (auto it = j.find(key); it != j.end() && !it->is_null())
        it->get_to(field);
}

} // namespace

void to_json(json& j, const ElectrodeParams& p)
{
    j = json{{"e0_mv", p.e0_mv},
             {"sensitivity_mv_per_ph", p.sensitivity_mv_per_ph},
             {"drift_mv_per_min", p.drift_mv_per_min},
             {"tau_s", p.tau_s},
             {"noise_sigma_mv", p.noise_sigma_mv},
             {"source_impedance_gohm", p.source_impedance_gohm},
             {"rng_seed", p.rng_seed}};
}

void from_json(const json& j, ElectrodeParams& p)
{
    read(j, "e0_mv", p.e0_mv);
    read(j, "sensitivity_mv_per_ph", p.sensitivity_mv_per_ph);
    read(j, "drift_mv_per_min", p.drift_mv_per_min);
    read(j, "tau_s", p.tau_s);
    read(j, "noise_sigma_mv", p.noise_sigma_mv);
    read(j, "source_impedance_gohm", p.source_impedance_gohm);
    read(j, "rng_seed", p.rng_seed);
}

void to_json(json& j, const AfeParams& p)
{
    j = json{{"c_gs_pf", p.c_gs_pf},
             {"c_gd_pf", p.c_gd_pf},
             {"buffer_gain", p.buffer_gain},
             {"bias_offset_mv", p.bias_offset_mv},
             {"adc_fullscale_mv", p.adc_fullscale_mv},
             {"adc_bits", p.adc_bits}};
}

void from_json(const json& j, AfeParams& p)
{
    read(j, "c_gs_pf", p.c_gs_pf);
    read(j, "c_gd_pf", p.c_gd_pf);
    read(j, "buffer_gain", p.buffer_gain);
    read(j, "bias_offset_mv", p.bias_offset_mv);
    read(j, "adc_fullscale_mv", p.adc_fullscale_mv);
    read(j, "adc_bits", p.adc_bits);
}

void to_json(json& j, const TempSensorParams& p)
{
    j = json{{"v25_mv", p.v25_mv}, {"k_mv_per_c", p.k_mv_per_c}};
}

void from_json(const json& j, TempSensorParams& p)
{
    read(j, "v25_mv", p.v25_mv);
    read(j, "k_mv_per_c", p.k_mv_per_c);
}

void to_json(json& j, const FirmwareConfig& p)
{
    j = json{{"sample_hz", p.sample_hz},
             {"avg_n", p.avg_n},
             {"ma_window", p.ma_window},
             {"tx_period_ms", p.tx_period_ms}};
}

void from_json(const json& j, FirmwareConfig& p)
{
    read(j, "sample_hz", p.sample_hz);
    read(j, "avg_n", p.avg_n);
    read(j, "ma_window", p.ma_window);
    read(j, "tx_period_ms", p.tx_period_ms);
}

void to_json(json& j, const LinkParams& p)
{
    j = json{{"drop_prob", p.drop_prob},
             {"latency_ms", p.latency_ms},
             {"jitter_ms", p.jitter_ms},
             {"seed", p.seed},
             {"command_drop_prob", p.command_drop_prob}};
}

void from_json(const json& j, LinkParams& p)
{
    read(j, "drop_prob", p.drop_prob);
    read(j, "latency_ms", p.latency_ms);
    read(j, "jitter_ms", p.jitter_ms);
    read(j, "seed", p.seed);
    read(j, "command_drop_prob", p.command_drop_prob);
}

void to_json(json& j, const BathSchedule& p)
{
    j = json{{"temp_c", p.temp_c}, {"segments", json::array()}};
    for (const auto& s : p.segments)
        j["segments"].push_back(json{{"start_s", s.start_s}, {"ph", s.ph}});
}

void from_json(const json& j, BathSchedule& p)
{
    read(j, "temp_c", p.temp_c);
    if (auto it = j.find("segments"); it != j.end()) {
        p.segments.clear();
        for (const auto& s : *it)
            p.segments.push_back(BathSegment{s.at("start_s").get<double>(), s.at("ph").get<double>()});
    }
}

} // namespace phtwin
