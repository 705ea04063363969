#include "phtwin/errors.hpp"
#include "phtwin/link.hpp"

#include <doctest.h>

using namespace phtwin;

namespace {

Ack ok_responder(const Frame& f, double)
{
    return Ack{static_cast<std::uint8_t>(frame_type(f)), kAckOk};
}

} // namespace

TEST_CASE("lossless link delivers everything with latency")
{
    LinkSimulator link(LinkParams{0.0, 12.0, 0.0, 1, 0.0});
    for (int i = 0; i < 100; ++i) {
        auto d = link.transmit(DataFrame{static_cast<std::uint16_t>(i), 0, 0, 0}, i * 100.0);
        REQUIRE(d);
        CHECK(d->deliver_at_ms == doctest::Approx(i * 100.0 + 12.0));
    }
    CHECK(link.sent() == 100);
    CHECK(link.dropped() == 0);
}

TEST_CASE("jitter stays within bounds")
{
    LinkSimulator link(LinkParams{0.0, 5.0, 20.0, 9, 0.0});
    for (int i = 0; i < 1000; ++i) {
        auto d = link.transmit(StatusFrame{}, 0.0);
        REQUIRE(d);
        CHECK(d->deliver_at_ms >= 5.0);
        CHECK(d->deliver_at_ms <= 25.0);
    }
}

TEST_CASE("drop rate converges to drop_prob")
{
    LinkSimulator link(LinkParams{0.1, 0.0, 0.0, 1234, 0.0});
    for (int i = 0; i < 100000; ++i)
        link.transmit(DataFrame{}, 0.0);
    CHECK(static_cast<double>(link.dropped()) / link.sent() == doctest::Approx(0.1).epsilon(0.03));
}

TEST_CASE("same seed gives the same loss pattern")
{
    LinkSimulator a(LinkParams{0.3, 1.0, 4.0, 55, 0.0}), b(LinkParams{0.3, 1.0, 4.0, 55, 0.0});
    for (int i = 0; i < 5000; ++i) {
        auto x = a.transmit(DataFrame{}, i);
        auto y = b.transmit(DataFrame{}, i);
        REQUIRE(x.has_value() == y.has_value());
        if (x)
            CHECK(x->deliver_at_ms == y->deliver_at_ms);
    }
}

TEST_CASE("commands are not fire-and-forget")
{
    LinkSimulator link;
    CHECK_THROWS_AS(link.transmit(CmdStart{}, 0.0), ProtocolError);
    CHECK_THROWS_AS(link.request(DataFrame{}, 0.0, ok_responder), ProtocolError);
}

TEST_CASE("reliable command is acknowledged on the first attempt")
{
    LinkSimulator link(LinkParams{0.0, 10.0, 0.0, 1, 0.0});
    const auto r = link.request(CmdStart{}, 1000.0, ok_responder);
    CHECK(r.attempts == 1);
    CHECK(r.ack == Ack{0x10, kAckOk});
    CHECK(r.completed_at_ms == doctest::Approx(1020.0));
}

TEST_CASE("dead link fails after the initial attempt plus three retries")
{
    LinkSimulator link(LinkParams{0.0, 0.0, 0.0, 1, 1.0});
    int delivered = 0;
    CHECK_THROWS_AS(link.request(CmdStop{}, 0.0,
                                 [&](const Frame& f, double t) {
                                     ++delivered;
                                     return ok_responder(f, t);
                                 }),
                    LinkFailure);
    CHECK(delivered == 0);
}

TEST_CASE("ack arriving after the timeout counts as lost")
{
    LinkSimulator link(LinkParams{0.0, 150.0, 0.0, 1, 0.0});
    int calls = 0;
    CHECK_THROWS_AS(link.request(CmdStart{}, 0.0,
                                 [&](const Frame& f, double t) {
                                     ++calls;
                                     return ok_responder(f, t);
                                 }),
                    LinkFailure);
    CHECK(calls == 1 + LinkSimulator::kMaxRetries);
}

TEST_CASE("lossy command path retries until acknowledged")
{
    LinkSimulator link(LinkParams{0.0, 0.0, 0.0, 17, 0.5});
    int successes = 0, failures = 0, retried = 0;
    for (int i = 0; i < 2000; ++i) {
        try {
            const auto r = link.request(CmdStart{}, 0.0, ok_responder);
            ++successes;
            CHECK(r.attempts <= 1 + LinkSimulator::kMaxRetries);
            CHECK(r.completed_at_ms == doctest::Approx((r.attempts - 1) * LinkSimulator::kAckTimeoutMs));
            retried += r.attempts > 1;
        } catch (const LinkFailure&) {
            ++failures;
        }
    }
    // Each attempt succeeds with 0.25, so P(fail) = 0.75^4 ~ 0.316.
    CHECK(static_cast<double>(failures) / 2000 == doctest::Approx(0.316).epsilon(0.1));
    CHECK(retried > 0);
    CHECK(successes + failures == 2000);
}

TEST_CASE("link parameter validation")
{
    CHECK_THROWS_AS(LinkSimulator(LinkParams{1.0, 0, 0, 1, 0}), ValidationError);
    CHECK_THROWS_AS(LinkSimulator(LinkParams{-0.1, 0, 0, 1, 0}), ValidationError);
    CHECK_THROWS_AS(LinkSimulator(LinkParams{0.0, -1, 0, 1, 0}), ValidationError);
    CHECK_THROWS_AS(LinkSimulator(LinkParams{0.0, 0, 0, 1, 1.5}), ValidationError);
    CHECK_NOTHROW(LinkSimulator(LinkParams{0.0, 0, 0, 1, 1.0}));
}
