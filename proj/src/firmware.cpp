#include "phtwin/firmware.hpp"

#include "phtwin/errors.hpp"

#include <fmt/core.h>

namespace phtwin {

void validate(const FirmwareConfig& cfg)
{
    if (cfg.sample_hz < 1 || cfg.sample_hz > 0xFFFF)
        throw ValidationError("sample_hz must be in 1..65535");
    if (cfg.avg_n < 1 || cfg.avg_n > 0xFF)
        throw ValidationError("avg_n must be in 1..255");
    if (cfg.ma_window < 1 || cfg.ma_window > 0xFF)
        throw ValidationError("ma_window must be in 1..255");
    if (cfg.tx_period_ms < 1)
        throw ValidationError("tx_period_ms must be positive");
    if (static_cast<long>(cfg.sample_hz) * cfg.tx_period_ms != static_cast<long>(cfg.avg_n) * 1000)
        throw ValidationError(fmt::format("sample_hz / avg_n ({} / {}) must equal 1000 / tx_period_ms ({})",
                                          cfg.sample_hz, cfg.avg_n, cfg.tx_period_ms));
}

FirmwareConfig from_command(const CmdConfig& cmd)
{
    FirmwareConfig cfg;
    cfg.sample_hz = cmd.sample_hz;
    cfg.avg_n = cmd.avg_n;
    cfg.ma_window = cmd.ma_window;
    cfg.tx_period_ms = cmd.sample_hz == 0 ? 0 : cmd.avg_n * 1000 / cmd.sample_hz;
    return cfg;
}

CmdConfig to_command(const FirmwareConfig& cfg)
{
    return CmdConfig{static_cast<std::uint16_t>(cfg.sample_hz), static_cast<std::uint8_t>(cfg.avg_n),
                     static_cast<std::uint8_t>(cfg.ma_window)};
}

double chain_group_delay_ms(const FirmwareConfig& cfg)
{
    const double sample_ms = 1000.0 / cfg.sample_hz;
    return (cfg.avg_n + 1) / 2.0 * sample_ms + (cfg.ma_window - 1) / 2.0 * cfg.tx_period_ms;
}

std::uint32_t div_round_half_up(std::uint64_t sum, std::uint64_t n)
{
    return static_cast<std::uint32_t>((2 * sum + n) / (2 * n));
}

ChannelPipeline::ChannelPipeline(int avg_n, int ma_window) : avg_n_(avg_n), ma_window_(ma_window)
{
    if (avg_n < 1 || ma_window < 1)
        throw ValidationError("avg_n and ma_window must be at least 1");
}

std::optional<std::uint16_t> ChannelPipeline::ingest_sample(std::uint16_t raw)
{
    if (raw > kMaxRawCount)
        throw ProtocolError(fmt::format("raw sample {} exceeds 12-bit range", raw));
    accumulator_ += raw;
    if (++block_count_ < avg_n_)
        return std::nullopt;
    const auto mean = static_cast<std::uint16_t>(div_round_half_up(accumulator_, avg_n_));
    accumulator_ = 0;
    block_count_ = 0;
    return mean;
}

std::uint16_t ChannelPipeline::moving_average(std::uint16_t value)
{
    ma_buffer_.push_back(value);
    ma_sum_ += value;
    if (static_cast<int>(ma_buffer_.size()) > ma_window_) {
        ma_sum_ -= ma_buffer_.front();
        ma_buffer_.pop_front();
    }
    return static_cast<std::uint16_t>(div_round_half_up(ma_sum_, ma_buffer_.size()));
}

void ChannelPipeline::reset()
{
    accumulator_ = 0;
    block_count_ = 0;
    ma_buffer_.clear();
    ma_sum_ = 0;
}

Firmware::Firmware(FirmwareConfig cfg)
    : cfg_((validate(cfg), cfg)), ph_(cfg.avg_n, cfg.ma_window), temp_(cfg.avg_n, cfg.ma_window)
{
}

std::optional<DataFrame> Firmware::tick(std::uint16_t ph_raw, std::uint16_t temp_raw)
{
    ++ticks_;
    auto ph_block = ph_.ingest_sample(ph_raw);
    auto temp_block = temp_.ingest_sample(temp_raw);
    if (!ph_block)
        return std::nullopt;

    DataFrame frame;
    frame.seq = ++seq_;
    frame.t_ms = static_cast<std::uint32_t>(ticks_ * 1000 / cfg_.sample_hz);
    frame.ph_raw = ph_.moving_average(*ph_block);
    frame.temp_raw = temp_.moving_average(*temp_block);
    ++frames_;
    return frame;
}

void Firmware::reset()
{
    ph_.reset();
    temp_.reset();
    seq_ = 0;
    ticks_ = 0;
    frames_ = 0;
}

} // namespace phtwin
