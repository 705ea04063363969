#include "phtwin/protocol.hpp"

#include "phtwin/errors.hpp"

#include <fmt/core.h>

#include <algorithm>
#include <array>
#include <utility>

namespace phtwin {

namespace {

constexpr std::array<std::uint16_t, 256> make_crc_table()
{
    std::array<std::uint16_t, 256> table{};
    for (unsigned i = 0; i < 256; ++i) {
        std::uint16_t crc = static_cast<std::uint16_t>(i << 8);
        for (int bit = 0; bit < 8; ++bit)
            crc = static_cast<std::uint16_t>((crc & 0x8000) ? (crc << 1) ^ 0x1021 : crc << 1);
        table[i] = crc;
    }
    return table;
}

constexpr auto kCrcTable = make_crc_table();

void put_u8(std::vector<std::uint8_t>& out, std::uint8_t v) { out.push_back(v); }

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v)
{
    out.push_back(static_cast<std::uint8_t>(v & 0xFF));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v)
{
    for (int i = 0; i < 4; ++i)
        out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint16_t get_u16(const std::uint8_t* p)
{
    return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint32_t get_u32(const std::uint8_t* p)
{
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8)
         | (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

struct PayloadWriter
{
    std::vector<std::uint8_t>& out;

    void operator()(const DataFrame& f) const
    {
        if (f.ph_raw > kMaxRawCount || f.temp_raw > kMaxRawCount)
            throw ProtocolError(fmt::format("data frame counts out of range (ph {}, temp {})",
                                            f.ph_raw, f.temp_raw));
        put_u16(out, f.seq);
        put_u32(out, f.t_ms);
        put_u16(out, f.ph_raw);
        put_u16(out, f.temp_raw);
    }
    void operator()(const StatusFrame& f) const
    {
        put_u16(out, f.battery_mv);
        put_u8(out, f.flags);
    }
    void operator()(const CmdStart&) const {}
    void operator()(const CmdStop&) const {}
    void operator()(const CmdConfig& f) const
    {
        put_u16(out, f.sample_hz);
        put_u8(out, f.avg_n);
        put_u8(out, f.ma_window);
    }
    void operator()(const Ack& f) const
    {
        put_u8(out, f.cmd);
        put_u8(out, f.status);
    }
};

// Returns false when a field violates its range.
bool parse_payload(std::uint8_t type, const std::uint8_t* p, Frame& out)
{
    switch (static_cast<FrameType>(type)) {
    case FrameType::Data: {
        DataFrame f{get_u16(p), get_u32(p + 2), get_u16(p + 6), get_u16(p + 8)};
        if (f.ph_raw > kMaxRawCount || f.temp_raw > kMaxRawCount)
            return false;
        out = f;
        return true;
    }
    case FrameType::Status:
        out = StatusFrame{get_u16(p), p[2]};
        return true;
    case FrameType::CmdStart:
        out = CmdStart{};
        return true;
    case FrameType::CmdStop:
        out = CmdStop{};
        return true;
    case FrameType::CmdConfig:
        out = CmdConfig{get_u16(p), p[2], p[3]};
        return true;
    case FrameType::Ack:
        out = Ack{p[0], p[1]};
        return true;
    }
    return false;
}

} // namespace

FrameType frame_type(const Frame& frame)
{
    static constexpr FrameType kTypes[] = {FrameType::Data,    FrameType::Status,
                                           FrameType::CmdStart, FrameType::CmdStop,
                                           FrameType::CmdConfig, FrameType::Ack};
    return kTypes[frame.index()];
}

bool is_command(const Frame& frame)
{
    const auto t = frame_type(frame);
    return t == FrameType::CmdStart || t == FrameType::CmdStop || t == FrameType::CmdConfig;
}

std::string_view frame_type_name(FrameType type)
{
    switch (type) {
    case FrameType::Data: return "data";
    case FrameType::Status: return "status";
    case FrameType::CmdStart: return "cmd-start";
    case FrameType::CmdStop: return "cmd-stop";
    case FrameType::CmdConfig: return "cmd-config";
    case FrameType::Ack: return "ack";
    }
    return "unknown";
}

int payload_length(std::uint8_t type)
{
    switch (static_cast<FrameType>(type)) {
    case FrameType::Data: return 10;
    case FrameType::Status: return 3;
    case FrameType::CmdStart: return 0;
    case FrameType::CmdStop: return 0;
    case FrameType::CmdConfig: return 4;
    case FrameType::Ack: return 2;
    }
    return -1;
}

std::uint16_t crc16_ccitt(std::span<const std::uint8_t> bytes)
{
    std::uint16_t crc = 0xFFFF;
    for (auto b : bytes)
        crc = static_cast<std::uint16_t>((crc << 8) ^ kCrcTable[((crc >> 8) ^ b) & 0xFF]);
    return crc;
}

void encode_into(const Frame& frame, std::vector<std::uint8_t>& out)
{
    const std::size_t start = out.size();
    out.push_back(kSync);
    out.push_back(kProtocolVersion);
    out.push_back(static_cast<std::uint8_t>(frame_type(frame)));
    out.push_back(0);
    std::visit(PayloadWriter{out}, frame);
    const std::size_t len = out.size() - start - kHeaderSize;
    out[start + 3] = static_cast<std::uint8_t>(len);
    const auto crc = crc16_ccitt(std::span(out).subspan(start + 2, len + 2));
    put_u16(out, crc);
}

std::vector<std::uint8_t> encode(const Frame& frame)
{
    std::vector<std::uint8_t> out;
    out.reserve(16);
    encode_into(frame, out);
    return out;
}

std::string_view diagnostic_name(DecodeDiagnostic::Kind kind)
{
    using K = DecodeDiagnostic::Kind;
    switch (kind) {
    case K::NoSync: return "no-sync";
    case K::BadVersion: return "bad-version";
    case K::UnknownType: return "unknown-type";
    case K::BadLength: return "bad-length";
    case K::CrcMismatch: return "crc-mismatch";
    case K::InvalidField: return "invalid-field";
    case K::Truncated: return "truncated";
    }
    return "unknown";
}

void Decoder::mark_bad(std::size_t abs_offset, DecodeDiagnostic::Kind kind)
{
    if (bad_open_)
        return;
    bad_open_ = true;
    bad_ = DecodeDiagnostic{kind, abs_offset, 0};
}

void Decoder::flush_bad(std::size_t abs_end)
{
    if (!bad_open_)
        return;
    bad_.length = abs_end - bad_.offset;
    diagnostics_.push_back(bad_);
    bad_open_ = false;
}

std::vector<Frame> Decoder::drain(bool final)
{
    using K = DecodeDiagnostic::Kind;
    std::vector<Frame> frames;
    std::size_t pos = 0;
    const std::size_t n = buf_.size();

    while (pos < n) {
        auto sync_it = std::find(buf_.begin() + static_cast<std::ptrdiff_t>(pos), buf_.end(), kSync);
        const auto sync = static_cast<std::size_t>(sync_it - buf_.begin());
        if (sync > pos)
            mark_bad(base_ + pos, K::NoSync);
        pos = sync;
        if (pos >= n)
            break;

        const std::size_t avail = n - pos;
        if (avail < kHeaderSize) {
            if (final) {
                mark_bad(base_ + pos, K::Truncated);
                pos = n;
            }
            break;
        }
        const std::uint8_t* h = buf_.data() + pos;
        if (h[1] != kProtocolVersion) {
            mark_bad(base_ + pos, K::BadVersion);
            ++pos;
            continue;
        }
        const int expected = payload_length(h[2]);
        if (expected < 0) {
            mark_bad(base_ + pos, K::UnknownType);
            ++pos;
            continue;
        }
        if (h[3] != expected) {
            mark_bad(base_ + pos, K::BadLength);
            ++pos;
            continue;
        }
        const std::size_t total = kHeaderSize + h[3] + kCrcSize;
        if (avail < total) {
            if (final) {
                mark_bad(base_ + pos, K::Truncated);
                pos = n;
            }
            break;
        }
        const auto crc = crc16_ccitt(std::span(buf_).subspan(pos + 2, h[3] + 2u));
        if (crc != get_u16(h + kHeaderSize + h[3])) {
            mark_bad(base_ + pos, K::CrcMismatch);
            ++pos;
            continue;
        }
        Frame frame;
        if (!parse_payload(h[2], h + kHeaderSize, frame)) {
            mark_bad(base_ + pos, K::InvalidField);
            ++pos;
            continue;
        }
        flush_bad(base_ + pos);
        frames.push_back(frame);
        pos += total;
    }

    if (final)
        flush_bad(base_ + pos);
    buf_.erase(buf_.begin(), buf_.begin() + static_cast<std::ptrdiff_t>(pos));
    base_ += pos;
    return frames;
}

std::vector<Frame> Decoder::feed(std::span<const std::uint8_t> bytes)
{
    buf_.insert(buf_.end(), bytes.begin(), bytes.end());
    return drain(false);
}

std::vector<Frame> Decoder::finish()
{
    return drain(true);
}

std::vector<DecodeDiagnostic> Decoder::take_diagnostics()
{
    return std::exchange(diagnostics_, {});
}

DecodeResult decode(std::span<const std::uint8_t> stream)
{
    Decoder decoder;
    DecodeResult result;
    result.frames = decoder.feed(stream);
    auto tail = decoder.finish();
    result.frames.insert(result.frames.end(), tail.begin(), tail.end());
    result.diagnostics = decoder.take_diagnostics();
    return result;
}

} // namespace phtwin
