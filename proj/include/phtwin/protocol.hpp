#pragma once

// Telemetry framing shared by the node and the host.
//
//   SYNC 0xA5 | VER 0x01 | TYPE u8 | LEN u8 | payload[LEN] | CRC16 (LE)
//
// Multi-byte fields are little-endian. The CRC is CRC16-CCITT (poly 0x1021,
// init 0xFFFF, no reflection, no final xor) over TYPE, LEN and the payload.
// The full byte layout of every frame type is documented in docs/wire-format.md.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

namespace phtwin {

inline constexpr std::uint8_t kSync = 0xA5;
inline constexpr std::uint8_t kProtocolVersion = 0x01;
inline constexpr std::size_t kHeaderSize = 4;
inline constexpr std::size_t kCrcSize = 2;
inline constexpr std::uint16_t kMaxRawCount = 4095;

enum class FrameType : std::uint8_t
{
    Data = 0x01,
    Status = 0x02,
    CmdStart = 0x10,
    CmdStop = 0x11,
    CmdConfig = 0x12,
    Ack = 0x20,
};

struct DataFrame
{
    std::uint16_t seq = 0;
    std::uint32_t t_ms = 0;
    std::uint16_t ph_raw = 0;
    std::uint16_t temp_raw = 0;
    bool operator==(const DataFrame&) const = default;
};

// Status flag bits.
inline constexpr std::uint8_t kStatusSaturated = 0x01;
inline constexpr std::uint8_t kStatusRecording = 0x02;
inline constexpr std::uint8_t kStatusHydrated = 0x04;

struct StatusFrame
{
    std::uint16_t battery_mv = 0;
    std::uint8_t flags = 0;
    bool operator==(const StatusFrame&) const = default;
};

struct CmdStart
{
    bool operator==(const CmdStart&) const = default;
};

struct CmdStop
{
    bool operator==(const CmdStop&) const = default;
};

struct CmdConfig
{
    std::uint16_t sample_hz = 100;
    std::uint8_t avg_n = 10;
    std::uint8_t ma_window = 5;
    bool operator==(const CmdConfig&) const = default;
};

// Ack status codes.
inline constexpr std::uint8_t kAckOk = 0x00;
inline constexpr std::uint8_t kAckRejected = 0x01;
inline constexpr std::uint8_t kAckBadState = 0x02;

struct Ack
{
    std::uint8_t cmd = 0;     ///< TYPE byte of the acknowledged command
    std::uint8_t status = kAckOk;
    bool operator==(const Ack&) const = default;
};

using Frame = std::variant<DataFrame, StatusFrame, CmdStart, CmdStop, CmdConfig, Ack>;

FrameType frame_type(const Frame& frame);
bool is_command(const Frame& frame);
std::string_view frame_type_name(FrameType type);

/// Payload length for a known TYPE byte, or -1.
int payload_length(std::uint8_t type);

/// Table-driven CRC16-CCITT (0x1021, init 0xFFFF).
std::uint16_t crc16_ccitt(std::span<const std::uint8_t> bytes);

/// Throws ProtocolError when a Data frame carries counts above 4095.
std::vector<std::uint8_t> encode(const Frame& frame);
void encode_into(const Frame& frame, std::vector<std::uint8_t>& out);

struct DecodeDiagnostic
{
    enum class Kind
    {
        NoSync,       ///< bytes outside any frame
        BadVersion,
        UnknownType,
        BadLength,
        CrcMismatch,
        InvalidField, ///< CRC valid but a field violates its range
        Truncated,
    };

    Kind kind = Kind::NoSync;
    std::size_t offset = 0;   ///< stream offset where the malformed region starts
    std::size_t length = 0;   ///< bytes skipped
};

std::string_view diagnostic_name(DecodeDiagnostic::Kind kind);

/// Incremental decoder. Malformed regions never abort the stream: the decoder
/// resynchronizes at the next SYNC byte and reports one diagnostic per
/// contiguous region it had to skip.
class Decoder
{
public:
    /// Appends bytes and returns every complete frame they finish.
    std::vector<Frame> feed(std::span<const std::uint8_t> bytes);

    /// Marks end of stream: a pending partial frame becomes a Truncated region.
    std::vector<Frame> finish();

    const std::vector<DecodeDiagnostic>& diagnostics() const { return diagnostics_; }
    std::vector<DecodeDiagnostic> take_diagnostics();

private:
    std::vector<Frame> drain(bool final);
    void mark_bad(std::size_t abs_offset, DecodeDiagnostic::Kind kind);
    void flush_bad(std::size_t abs_end);

    std::vector<std::uint8_t> buf_;
    std::size_t base_ = 0;          ///< absolute offset of buf_[0]
    bool bad_open_ = false;
    DecodeDiagnostic bad_;
    std::vector<DecodeDiagnostic> diagnostics_;
};

struct DecodeResult
{
    std::vector<Frame> frames;
    std::vector<DecodeDiagnostic> diagnostics;
};

/// One-shot decode of a complete byte sequence.
DecodeResult decode(std::span<const std::uint8_t> stream);

} // namespace phtwin
