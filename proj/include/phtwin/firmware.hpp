#pragma once

// Emulation of the node firmware's acquisition chain: each ADC channel is
// block-averaged (avg_n samples at sample_hz), the block means are smoothed
// by a moving average over ma_window blocks, and one Data frame is emitted
// per completed block. All arithmetic is integer with round-half-up.

#include "phtwin/protocol.hpp"

#include <cstdint>
#include <deque>
#include <optional>

namespace phtwin {

struct FirmwareConfig
{
    int sample_hz = 100;
    int avg_n = 10;
    int ma_window = 5;
    int tx_period_ms = 100;

    bool operator==(const FirmwareConfig&) const = default;
};

/// Throws ValidationError unless sample_hz / avg_n == 1000 / tx_period_ms.
void validate(const FirmwareConfig& cfg);

FirmwareConfig from_command(const CmdConfig& cmd);
CmdConfig to_command(const FirmwareConfig& cfg);

/// Delay between the signal and a frame timestamp for a slowly varying input:
/// half a block plus one sample period (frames are stamped at the block end)
/// plus half of the moving-average span.
double chain_group_delay_ms(const FirmwareConfig& cfg);

/// round-half-up(sum / n) for non-negative sums.
std::uint32_t div_round_half_up(std::uint64_t sum, std::uint64_t n);

class ChannelPipeline
{
public:
    ChannelPipeline(int avg_n, int ma_window);

    /// Returns the block mean on every avg_n-th sample. Throws ProtocolError
    /// for counts above 4095.
    std::optional<std::uint16_t> ingest_sample(std::uint16_t raw);

    /// Mean of the last min(ma_window, count) block values.
    std::uint16_t moving_average(std::uint16_t value);

    int block_count() const { return block_count_; }
    std::size_t ma_size() const { return ma_buffer_.size(); }
    void reset();

private:
    int avg_n_;
    int ma_window_;
    std::uint32_t accumulator_ = 0;
    int block_count_ = 0;
    std::deque<std::uint16_t> ma_buffer_;
    std::uint32_t ma_sum_ = 0;
};

/// Two-channel (pH, temperature) acquisition loop driven at sample_hz.
class Firmware
{
public:
    explicit Firmware(FirmwareConfig cfg = {});

    /// Call exactly once per 1/sample_hz of virtual time.
    std::optional<DataFrame> tick(std::uint16_t ph_raw, std::uint16_t temp_raw);

    /// Restarts the time base and the sequence counter.
    void reset();

    const FirmwareConfig& config() const { return cfg_; }
    std::uint64_t ticks() const { return ticks_; }
    std::uint64_t frames_emitted() const { return frames_; }

private:
    FirmwareConfig cfg_;
    ChannelPipeline ph_;
    ChannelPipeline temp_;
    std::uint16_t seq_ = 0;
    std::uint64_t ticks_ = 0;
    std::uint64_t frames_ = 0;
};

} // namespace phtwin
