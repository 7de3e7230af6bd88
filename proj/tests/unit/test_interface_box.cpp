#include "doctest.h"

#include <random>

#include "hearth/error.hpp"
#include "hearth/interface_box.hpp"

using namespace hearth;
using namespace hearth::box;
using port::DataByte;
using port::kLpt1;
using port::kLpt2;

namespace {

const Instant kT0 = from_unix_millis(1'760'000'000'000);

}  // namespace

TEST_CASE("socket, LED, relay and bit agree for all 256 bytes with master on") {
    VirtualClock clock(kT0);
    InterfaceBox box({}, clock);
    for (int b = 0; b < 256; ++b) {
        const auto& s = box.apply_byte(DataByte{static_cast<std::uint8_t>(b)});
        CHECK(s.latch.value == b);
        int powered = 0;
        for (int i = 0; i < kRelayCount; ++i) {
            bool bit = (b >> i) & 1;
            REQUIRE(s.relays[i].coil_energized == bit);
            REQUIRE((s.relays[i].contact == Contact::NormallyOpenClosed) == bit);
            REQUIRE(s.sockets[i].powered == bit);
            REQUIRE(s.leds[i].lit == bit);
            powered += bit;
        }
        CHECK(s.powered_count() == powered);
    }
}

TEST_CASE("master off leaves every socket dead for all 256 bytes") {
    VirtualClock clock(kT0);
    InterfaceBox box({}, clock);
    box.set_master(false);
    for (int b = 0; b < 256; ++b) {
        const auto& s = box.apply_byte(DataByte{static_cast<std::uint8_t>(b)});
        CHECK(s.latch.value == b);
        for (int i = 0; i < kRelayCount; ++i) {
            REQUIRE_FALSE(s.sockets[i].powered);
            REQUIRE_FALSE(s.leds[i].lit);
        }
        CHECK(s.powered_count() == 0);
    }
    // switching mains back on restores the latch pattern
    const auto& s = box.set_master(true);
    CHECK(s.powered_count() == 8);
}

TEST_CASE("apply_byte is idempotent") {
    VirtualClock clock(kT0);
    InterfaceBox box({}, clock);
    for (int b = 0; b < 256; b += 7) {
        auto first = box.apply_byte(DataByte{static_cast<std::uint8_t>(b)});
        auto second = box.apply_byte(DataByte{static_cast<std::uint8_t>(b)});
        CHECK(first == second);
    }
}

TEST_CASE("switch delay elapses on the injected clock") {
    VirtualClock clock(kT0);
    InterfaceBoxConfig cfg;
    cfg.switch_delay = std::chrono::milliseconds{10};
    InterfaceBox box(cfg, clock);
    box.apply_byte(DataByte{1});
    box.apply_byte(DataByte{3});
    CHECK(clock.now() - kT0 == std::chrono::milliseconds{20});
}

TEST_CASE("box config validation") {
    InterfaceBoxConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.relay_count = 4;
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg = {};
    cfg.switch_delay = std::chrono::milliseconds{-1};
    CHECK_THROWS_AS(cfg.validate(), Error);
}

TEST_CASE("simulator backend records writes and replay reproduces the live state") {
    std::mt19937 rng(7);
    for (int round = 0; round < 20; ++round) {
        VirtualClock clock(kT0);
        std::vector<port::TraceRecord> trace;
        std::vector<port::PortAddress> addrs{kLpt1, kLpt2};
        SimulatorBackend sim(addrs, {}, clock, [&](const port::TraceRecord& r) { trace.push_back(r); });
        for (int i = 0; i < 100; ++i) {
            auto addr = addrs[rng() % 2];
            sim.out(addr, DataByte{static_cast<std::uint8_t>(rng() & 0xFF)});
            clock.advance(std::chrono::milliseconds{rng() % 50});
        }
        REQUIRE(trace.size() == 100);
        auto replayed = replay_trace(trace, addrs);
        CHECK(replayed == sim.box_states());
        CHECK(sim.in(kLpt1) == sim.box_state(kLpt1).latch);
    }
}

TEST_CASE("replay derives the box set from the records") {
    std::vector<port::TraceRecord> trace{{1, kLpt2, DataByte{0x81}}};
    auto states = replay_trace(trace);
    REQUIRE(states.size() == 1);
    CHECK(states.at(kLpt2).latch.value == 0x81);
    CHECK(states.at(kLpt2).powered_count() == 2);

    std::vector<port::PortAddress> only_lpt1{kLpt1};
    CHECK_THROWS_AS(replay_trace(trace, only_lpt1), Error);
}

TEST_CASE("per-port master switch") {
    VirtualClock clock(kT0);
    std::vector<port::PortAddress> addrs{kLpt1, kLpt2};
    SimulatorBackend sim(addrs, {}, clock);
    sim.out(kLpt1, DataByte{0xFF});
    sim.out(kLpt2, DataByte{0xFF});
    sim.set_master(kLpt2, false);
    CHECK(sim.box_state(kLpt1).powered_count() == 8);
    CHECK(sim.box_state(kLpt2).powered_count() == 0);
    sim.set_master(false);
    CHECK(sim.box_state(kLpt1).powered_count() == 0);
}
