#include "doctest.h"

#include <bitset>
#include <set>
#include <sstream>

#include "hearth/error.hpp"
#include "hearth/port_model.hpp"

using namespace hearth;
using namespace hearth::port;

namespace {

Errc code_of(auto&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected hearth::Error");
    return Errc::parse_error;
}

}  // namespace

TEST_CASE("set_pin and clear_pin match a bitset oracle for all 256x8 cases") {
    std::vector<PortAddress> addrs{kLpt1};
    LatchBackend backend(addrs);
    PortBank bank(addrs, backend);
    for (int b = 0; b < 256; ++b) {
        for (int i = 0; i < 8; ++i) {
            std::bitset<8> expect_set(static_cast<unsigned long>(b));
            expect_set.set(static_cast<std::size_t>(i));
            std::bitset<8> expect_clear(static_cast<unsigned long>(b));
            expect_clear.reset(static_cast<std::size_t>(i));

            bank.write_byte(kLpt1, DataByte{static_cast<std::uint8_t>(b)});
            auto s = bank.set_pin(kLpt1, i);
            REQUIRE(s.value == expect_set.to_ulong());
            REQUIRE(bank.read_byte(kLpt1).value == expect_set.to_ulong());
            // only bit i may differ
            REQUIRE(((s.value ^ b) & ~(1 << i)) == 0);

            bank.write_byte(kLpt1, DataByte{static_cast<std::uint8_t>(b)});
            auto c = bank.clear_pin(kLpt1, i);
            REQUIRE(c.value == expect_clear.to_ulong());
            REQUIRE(((c.value ^ b) & ~(1 << i)) == 0);

            // set then clear restores a byte whose bit was low; clear then set one whose bit was high
            bank.write_byte(kLpt1, DataByte{static_cast<std::uint8_t>(b)});
            if ((b >> i) & 1) {
                bank.clear_pin(kLpt1, i);
                bank.set_pin(kLpt1, i);
            } else {
                bank.set_pin(kLpt1, i);
                bank.clear_pin(kLpt1, i);
            }
            REQUIRE(bank.read_byte(kLpt1).value == b);
        }
    }
}

TEST_CASE("latch round trip and pin levels for every byte") {
    std::vector<PortAddress> addrs{kLpt1, kLpt2};
    LatchBackend backend(addrs);
    PortBank bank(addrs, backend);
    bank.write_byte(kLpt2, DataByte{0xA5});
    for (int b = 0; b < 256; ++b) {
        bank.write_byte(kLpt1, DataByte{static_cast<std::uint8_t>(b)});
        CHECK(bank.read_byte(kLpt1).value == b);
        for (int i = 0; i < 8; ++i) {
            bool high = (b & (1 << i)) != 0;
            CHECK((bank.level(kLpt1, i) == PinLevel::High) == high);
            CHECK((pin_level(DataByte{static_cast<std::uint8_t>(b)}, i) == PinLevel::High) == high);
        }
        CHECK(bank.read_byte(kLpt2).value == 0xA5);
    }
}

TEST_CASE("initial latch is zero") {
    std::vector<PortAddress> addrs{kLpt1, kLpt2, kLptMono};
    LatchBackend backend(addrs);
    PortBank bank(addrs, backend);
    for (auto a : addrs) CHECK(bank.read_byte(a).value == 0);
}

TEST_CASE("channel masks") {
    for (int i = 0; i < 8; ++i) CHECK(channel_mask(i).value == (1 << i));
    CHECK(code_of([] { channel_mask(8); }) == Errc::index_out_of_range);
    CHECK(code_of([] { channel_mask(-1); }) == Errc::index_out_of_range);
    CHECK(with_bit_set(DataByte{0x01}, 2).value == 0x05);
    CHECK(with_bit_cleared(DataByte{0x05}, 0).value == 0x04);
}

TEST_CASE("port bank rejects unknown, empty and duplicate address lists") {
    std::vector<PortAddress> good{kLpt1};
    LatchBackend backend(good);
    CHECK(code_of([&] { PortBank({PortAddress{0x300}}, backend); }) == Errc::unknown_port);
    CHECK(code_of([&] { PortBank({}, backend); }) == Errc::invalid_config);
    CHECK(code_of([&] { PortBank({kLpt1, kLpt1}, backend); }) == Errc::invalid_config);

    PortBank bank(good, backend);
    CHECK_FALSE(bank.configured(kLpt2));
    CHECK(code_of([&] { bank.write_byte(kLpt2, DataByte{1}); }) == Errc::unknown_port);
    CHECK(code_of([&] { bank.set_pin(kLpt1, 8); }) == Errc::index_out_of_range);
}

TEST_CASE("line groups are fixed size and disjoint") {
    const auto& g = standard_line_groups();
    std::set<int> all;
    for (int p : g.data) all.insert(p);
    for (int p : g.control) all.insert(p);
    for (int p : g.status) all.insert(p);
    for (int p : g.ground) all.insert(p);
    CHECK(all.size() == 25);
    CHECK(*all.begin() == 1);
    CHECK(*all.rbegin() == 25);
    CHECK(g.data.front() == 2);
    CHECK(g.data.back() == 9);
}

TEST_CASE("address and byte text forms") {
    CHECK(format_address(kLpt1) == "0x0378");
    CHECK(format_address(kLptMono) == "0x03BC");
    CHECK(format_byte(DataByte{5}) == "0x05");
    CHECK(format_byte(DataByte{0xFF}) == "0xFF");
    CHECK(parse_address("0x378") == kLpt1);
    CHECK(parse_address("278h") == kLpt2);
    CHECK(parse_address("956") == kLptMono);
    CHECK(parse_byte("0xa5").value == 0xA5);
    CHECK(code_of([] { parse_address("lpt1"); }) == Errc::parse_error);
    CHECK(code_of([] { parse_byte("0x100"); }) == Errc::parse_error);
    for (auto a : kKnownAddresses) CHECK(is_known_address(a));
    CHECK_FALSE(is_known_address(PortAddress{0x3F8}));
}

TEST_CASE("trace records round trip bit-exactly") {
    for (int b = 0; b < 256; ++b) {
        TraceRecord r{1760000000000 + b, b % 2 ? kLpt1 : kLpt2, DataByte{static_cast<std::uint8_t>(b)}};
        auto line = format_trace_record(r);
        CHECK(parse_trace_record(line) == r);
        CHECK(format_trace_record(parse_trace_record(line)) == line);
    }
    CHECK(format_trace_record({12, kLpt1, DataByte{0x0A}}) == "12 OUT 0x0378 0x0A");
}

TEST_CASE("malformed trace lines are rejected") {
    for (const char* bad : {"", "12 OUT 0x378 0x0A", "12 IN 0x0378 0x0A", "x OUT 0x0378 0x0A",
                            "12 OUT 0x0378 0x0a", "12 OUT 0x0378 0x0A extra", "12 OUT 0x0378"}) {
        CAPTURE(bad);
        CHECK(code_of([&] { parse_trace_record(bad); }) == Errc::parse_error);
    }
}

TEST_CASE("read_trace skips blank lines and reports the bad line number") {
    std::istringstream ok("1 OUT 0x0378 0x01\n\n2 OUT 0x0278 0xFF\n");
    auto recs = read_trace(ok);
    REQUIRE(recs.size() == 2);
    CHECK(recs[1].addr == kLpt2);

    std::istringstream bad("1 OUT 0x0378 0x01\n2 OUT 0x0378 zz\n");
    try {
        read_trace(bad);
        FAIL("expected parse error");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::parse_error);
        CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
}

TEST_CASE("data pin 0 drives device 1 and LPT2 latches independently") {
    std::vector<PortAddress> addrs{kLpt1, kLpt2};
    LatchBackend backend(addrs);
    PortBank bank(addrs, backend);
    bank.write_byte(kLpt1, DataByte{0x01});
    CHECK(bank.level(kLpt1, 0) == PinLevel::High);
    CHECK(bank.level(kLpt1, 1) == PinLevel::Low);
    bank.write_byte(kLpt2, DataByte{0xFF});
    CHECK(bank.read_byte(kLpt2).value == 0xFF);
    CHECK(bank.read_byte(kLpt1).value == 0x01);
}
