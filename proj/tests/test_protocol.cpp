#include "phtwin/errors.hpp"
#include "phtwin/protocol.hpp"

#include <doctest.h>

#include <random>
#include <string_view>

using namespace phtwin;

namespace {

// Bit-at-a-time CRC16-CCITT used as an independent oracle for the table.
std::uint16_t crc_bitwise(std::span<const std::uint8_t> bytes)
{
    std::uint16_t crc = 0xFFFF;
    for (auto b : bytes) {
        crc ^= static_cast<std::uint16_t>(b << 8);
        for (int i = 0; i < 8; ++i)
            crc = (crc & 0x8000) ? static_cast<std::uint16_t>((crc << 1) ^ 0x1021) : static_cast<std::uint16_t>(crc << 1);
    }
    return crc;
}

Frame random_frame(std::mt19937_64& rng)
{
    std::uniform_int_distribution<int> kind(0, 5);
    std::uniform_int_distribution<std::uint32_t> u32;
    std::uniform_int_distribution<int> u16(0, 0xFFFF), u8(0, 0xFF), raw(0, 4095);
    switch (kind(rng)) {
    case 0:
        return DataFrame{static_cast<std::uint16_t>(u16(rng)), u32(rng), static_cast<std::uint16_t>(raw(rng)),
                         static_cast<std::uint16_t>(raw(rng))};
    case 1: return StatusFrame{static_cast<std::uint16_t>(u16(rng)), static_cast<std::uint8_t>(u8(rng))};
    case 2: return CmdStart{};
    case 3: return CmdStop{};
    case 4:
        return CmdConfig{static_cast<std::uint16_t>(u16(rng)), static_cast<std::uint8_t>(u8(rng)),
                         static_cast<std::uint8_t>(u8(rng))};
    default: return Ack{static_cast<std::uint8_t>(u8(rng)), static_cast<std::uint8_t>(u8(rng))};
    }
}

std::vector<Frame> one_of_each()
{
    return {DataFrame{513, 123456789, 2048, 1050}, StatusFrame{3900, kStatusRecording | kStatusHydrated},
            CmdStart{}, CmdStop{}, CmdConfig{100, 10, 5}, Ack{0x10, kAckOk}};
}

} // namespace

TEST_CASE("CRC check value")
{
    constexpr std::string_view check = "123456789";
    const auto* p = reinterpret_cast<const std::uint8_t*>(check.data());
    CHECK(crc16_ccitt({p, check.size()}) == 0x29B1);
    CHECK(crc_bitwise({p, check.size()}) == 0x29B1);
    CHECK(crc16_ccitt({}) == 0xFFFF);
}

TEST_CASE("table CRC agrees with the bitwise oracle")
{
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<int> byte(0, 255), len(0, 300);
    for (int i = 0; i < 2000; ++i) {
        std::vector<std::uint8_t> v(static_cast<std::size_t>(len(rng)));
        for (auto& b : v)
            b = static_cast<std::uint8_t>(byte(rng));
        CHECK(crc16_ccitt(v) == crc_bitwise(v));
    }
}

TEST_CASE("data frame byte layout")
{
    const auto bytes = encode(DataFrame{0x0102, 0x03040506, 0x0ABC, 0x0123});
    REQUIRE(bytes.size() == 16);
    const std::vector<std::uint8_t> head{0xA5, 0x01, 0x01, 0x0A, 0x02, 0x01, 0x06, 0x05,
                                         0x04, 0x03, 0xBC, 0x0A, 0x23, 0x01};
    CHECK(std::equal(head.begin(), head.end(), bytes.begin()));
    const auto crc = crc_bitwise(std::span(bytes).subspan(2, 12));
    CHECK(bytes[14] == (crc & 0xFF));
    CHECK(bytes[15] == (crc >> 8));
}

TEST_CASE("frame lengths per type")
{
    CHECK(encode(StatusFrame{}).size() == 9);
    CHECK(encode(CmdStart{}).size() == 6);
    CHECK(encode(CmdStop{}).size() == 6);
    CHECK(encode(CmdConfig{}).size() == 10);
    CHECK(encode(Ack{}).size() == 8);
    CHECK(payload_length(0x7F) == -1);
}

TEST_CASE("encoding rejects counts above 12 bits")
{
    CHECK_THROWS_AS(encode(DataFrame{1, 1, 4096, 0}), ProtocolError);
    CHECK_THROWS_AS(encode(DataFrame{1, 1, 0, 0xFFFF}), ProtocolError);
    CHECK_NOTHROW(encode(DataFrame{1, 1, 4095, 4095}));
}

TEST_CASE("round trip over randomized frames")
{
    std::mt19937_64 rng(2026);
    std::vector<Frame> frames;
    std::vector<std::uint8_t> stream;
    for (int i = 0; i < 20000; ++i) {
        frames.push_back(random_frame(rng));
        encode_into(frames.back(), stream);
    }
    const auto result = decode(stream);
    CHECK(result.diagnostics.empty());
    REQUIRE(result.frames.size() == frames.size());
    CHECK(result.frames == frames);
}

TEST_CASE("incremental decoding is independent of chunking")
{
    std::mt19937_64 rng(11);
    std::vector<Frame> frames;
    std::vector<std::uint8_t> stream;
    for (int i = 0; i < 2000; ++i) {
        frames.push_back(random_frame(rng));
        encode_into(frames.back(), stream);
    }
    std::uniform_int_distribution<std::size_t> chunk(1, 40);
    Decoder dec;
    std::vector<Frame> out;
    for (std::size_t pos = 0; pos < stream.size();) {
        const auto n = std::min(chunk(rng), stream.size() - pos);
        auto got = dec.feed(std::span(stream).subspan(pos, n));
        out.insert(out.end(), got.begin(), got.end());
        pos += n;
    }
    auto tail = dec.finish();
    out.insert(out.end(), tail.begin(), tail.end());
    CHECK(out == frames);
    CHECK(dec.diagnostics().empty());
}

TEST_CASE("every single-bit flip is rejected")
{
    for (const auto& frame : one_of_each()) {
        const auto good = encode(frame);
        CAPTURE(frame_type_name(frame_type(frame)));
        for (std::size_t bit = 0; bit < good.size() * 8; ++bit) {
            auto bad = good;
            bad[bit / 8] ^= static_cast<std::uint8_t>(1u << (bit % 8));
            const auto r = decode(bad);
            CAPTURE(bit);
            CHECK(r.frames.empty());
            CHECK(r.diagnostics.size() >= 1);
        }
    }
}

TEST_CASE("sampled double-bit flips are rejected")
{
    std::mt19937_64 rng(8);
    for (const auto& frame : one_of_each()) {
        const auto good = encode(frame);
        std::uniform_int_distribution<std::size_t> bit(0, good.size() * 8 - 1);
        for (int i = 0; i < 500; ++i) {
            const auto a = bit(rng), b = bit(rng);
            if (a == b)
                continue;
            auto bad = good;
            bad[a / 8] ^= static_cast<std::uint8_t>(1u << (a % 8));
            bad[b / 8] ^= static_cast<std::uint8_t>(1u << (b % 8));
            const auto r = decode(bad);
            CHECK(r.frames.empty());
        }
    }
}

TEST_CASE("decoder resynchronizes after garbage and reports one region")
{
    std::vector<std::uint8_t> stream{0x00, 0x13, 0x37, 0xA5, 0xFF};
    const std::size_t garbage = stream.size();
    encode_into(DataFrame{1, 100, 2048, 1050}, stream);
    const auto r = decode(stream);
    REQUIRE(r.frames.size() == 1);
    REQUIRE(r.diagnostics.size() == 1);
    CHECK(r.diagnostics[0].offset == 0);
    CHECK(r.diagnostics[0].length == garbage);
}

TEST_CASE("corrupted frame between good ones costs only that frame")
{
    std::vector<std::uint8_t> stream;
    encode_into(DataFrame{1, 100, 10, 20}, stream);
    const std::size_t start = stream.size();
    encode_into(DataFrame{2, 200, 11, 21}, stream);
    const std::size_t end = stream.size();
    encode_into(DataFrame{3, 300, 12, 22}, stream);
    stream[start + 6] ^= 0x40;
    const auto r = decode(stream);
    REQUIRE(r.frames.size() == 2);
    CHECK(std::get<DataFrame>(r.frames[0]).seq == 1);
    CHECK(std::get<DataFrame>(r.frames[1]).seq == 3);
    REQUIRE(r.diagnostics.size() == 1);
    CHECK(r.diagnostics[0].kind == DecodeDiagnostic::Kind::CrcMismatch);
    CHECK(r.diagnostics[0].offset == start);
    CHECK(r.diagnostics[0].length == end - start);
}

TEST_CASE("truncated tail is reported on finish")
{
    auto bytes = encode(DataFrame{1, 100, 10, 20});
    bytes.resize(9);
    Decoder dec;
    CHECK(dec.feed(bytes).empty());
    CHECK(dec.diagnostics().empty());
    CHECK(dec.finish().empty());
    REQUIRE(dec.diagnostics().size() == 1);
    CHECK(dec.diagnostics()[0].kind == DecodeDiagnostic::Kind::Truncated);
    CHECK(dec.diagnostics()[0].length == 9);
}

TEST_CASE("header faults are classified")
{
    using K = DecodeDiagnostic::Kind;
    auto check_kind = [](std::vector<std::uint8_t> bytes, K kind) {
        const auto r = decode(bytes);
        CHECK(r.frames.empty());
        REQUIRE_FALSE(r.diagnostics.empty());
        CHECK(r.diagnostics[0].kind == kind);
    };
    auto base = encode(CmdStart{});
    auto v = base;
    v[1] = 0x02;
    check_kind(v, K::BadVersion);
    v = base;
    v[2] = 0x55;
    check_kind(v, K::UnknownType);
    v = base;
    v[3] = 0x01;
    check_kind(v, K::BadLength);
}

TEST_CASE("valid CRC with out-of-range counts is an invalid field")
{
    std::vector<std::uint8_t> b{0xA5, 0x01, 0x01, 0x0A, 1, 0, 100, 0, 0, 0, 0x00, 0x10, 0, 0};
    const auto crc = crc_bitwise(std::span(b).subspan(2));
    b.push_back(static_cast<std::uint8_t>(crc & 0xFF));
    b.push_back(static_cast<std::uint8_t>(crc >> 8));
    const auto r = decode(b);
    CHECK(r.frames.empty());
    REQUIRE(r.diagnostics.size() == 1);
    CHECK(r.diagnostics[0].kind == DecodeDiagnostic::Kind::InvalidField);
}

TEST_CASE("random noise never produces an exception")
{
    std::mt19937_64 rng(77);
    std::uniform_int_distribution<int> byte(0, 255);
    std::vector<std::uint8_t> noise(100000);
    for (auto& b : noise)
        b = static_cast<std::uint8_t>(byte(rng));
    DecodeResult r;
    CHECK_NOTHROW(r = decode(noise));
    std::size_t covered = 0;
    for (const auto& d : r.diagnostics)
        covered += d.length;
    CHECK(covered <= noise.size());
}
