#include "doctest.h"

#include <filesystem>
#include <fstream>

#include "hearth/config.hpp"
#include "hearth/error.hpp"

using namespace hearth;
using namespace hearth::service;
using nlohmann::json;

namespace {

std::string error_of(const json& j) {
    try {
        parse_config(j);
    } catch (const Error& e) {
        CHECK(e.code() == Errc::invalid_config);
        return e.what();
    }
    FAIL("config accepted: " << j.dump());
    return {};
}

bool starts_with(const std::string& s, const std::string& prefix) { return s.rfind(prefix, 0) == 0; }

}  // namespace

TEST_CASE("defaults") {
    auto c = parse_config(json::object());
    REQUIRE(c.ports.size() == 1);
    CHECK(c.ports[0] == port::kLpt1);
    REQUIRE(c.appliances.size() == 8);
    CHECK(c.appliances[0].name == "Light");
    CHECK(c.appliances[3].name == "WashingMachine");
    CHECK(c.appliances[7].name == "Device8");
    CHECK(c.grace_window == std::chrono::seconds{60});
    CHECK(c.threshold == doctest::Approx(0.6));
    CHECK(c.bind_address == "127.0.0.1");
    CHECK(c.http_port == 8470);
    CHECK(c.snapshot_interval == std::chrono::seconds{30});
    CHECK(c.clock_mode == ClockMode::Real);
}

TEST_CASE("two ports give sixteen default appliances") {
    auto c = parse_config(json{{"ports", {"0x378", "0x278"}}});
    REQUIRE(c.appliances.size() == 16);
    CHECK(c.appliances[8].channel == 8);
    CHECK(c.appliances[8].name == "Device9");
}

TEST_CASE("full config parses") {
    auto c = parse_config(json::parse(R"({
        "ports": ["0x3BC"],
        "appliances": [{"channel": 0, "name": "Lamp", "kind": "light"}, {"channel": 4, "name": "Pump"}],
        "grace_window_s": 5, "threshold": 0.75, "timezone": "+05:30",
        "persistence_dir": "/tmp/x", "bind": "0.0.0.0", "http_port": 0,
        "switch_delay_ms": 0, "snapshot_interval_s": 2, "clock": "virtual",
        "virtual_start": "2026-01-01T00:00:00"
    })"));
    CHECK(c.ports[0] == port::kLptMono);
    CHECK(c.appliances.size() == 2);
    CHECK(c.appliances[1].kind == "generic");
    CHECK(c.timezone == UtcOffset{330});
    CHECK(c.clock_mode == ClockMode::Virtual);
    REQUIRE(c.virtual_start);
    CHECK(format_rfc3339(*c.virtual_start) == "2025-12-31T18:30:00Z");
    CHECK(c.box.switch_delay == std::chrono::milliseconds{0});
}

TEST_CASE("errors name the offending field") {
    CHECK(starts_with(error_of(json{{"colour", 1}}), "colour:"));
    CHECK(starts_with(error_of(json{{"ports", json::array()}}), "ports:"));
    CHECK(starts_with(error_of(json{{"ports", {"0x378", "0x300"}}}), "ports[1]:"));
    CHECK(starts_with(error_of(json{{"ports", {"0x378", "0x378"}}}), "ports[1]:"));
    CHECK(starts_with(error_of(json{{"appliances", {{{"channel", 0}, {"name", "A"}}, {{"channel", 9}, {"name", "B"}}}}}),
                      "appliances[1].channel:"));
    CHECK(starts_with(error_of(json{{"appliances", {{{"channel", 0}, {"name", "A"}}, {{"channel", 0}, {"name", "B"}}}}}),
                      "appliances[1].channel:"));
    CHECK(starts_with(error_of(json{{"appliances", {{{"channel", 0}, {"name", "A"}}, {{"channel", 1}, {"name", "a"}}}}}),
                      "appliances[1].name:"));
    CHECK(starts_with(error_of(json{{"appliances", {{{"name", "A"}}}}}), "appliances[0].channel:"));
    CHECK(starts_with(error_of(json{{"appliances", {{{"channel", 0}, {"name", "A"}, {"x", 1}}}}}),
                      "appliances[0].x:"));
    CHECK(starts_with(error_of(json{{"threshold", 1.5}}), "threshold:"));
    CHECK(starts_with(error_of(json{{"grace_window_s", -1}}), "grace_window_s:"));
    CHECK(starts_with(error_of(json{{"grace_window_s", "60"}}), "grace_window_s:"));
    CHECK(starts_with(error_of(json{{"timezone", "Mars/Olympus"}}), "timezone:"));
    CHECK(starts_with(error_of(json{{"clock", "fast"}}), "clock:"));
    CHECK(starts_with(error_of(json{{"http_port", 70000}}), "http_port:"));
    CHECK(starts_with(error_of(json{{"virtual_start", "soon"}}), "virtual_start:"));
    CHECK(starts_with(error_of(json::array()), "$:"));
}

TEST_CASE("load_config reports the file on syntax errors") {
    auto dir = std::filesystem::temp_directory_path() / "hearth_config_test";
    std::filesystem::create_directories(dir);
    auto file = dir / "bad.json";
    std::ofstream(file) << "{ \"ports\": [";
    try {
        load_config(file);
        FAIL("accepted");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::invalid_config);
        CHECK(std::string(e.what()).find("bad.json") != std::string::npos);
    }
    CHECK_THROWS_AS(load_config(dir / "missing.json"), Error);
    std::filesystem::remove_all(dir);
}

TEST_CASE("to_json round trips and the checksum tracks the channel map") {
    auto c = parse_config(json{{"ports", {"0x378", "0x278"}}, {"grace_window_s", 7}});
    auto again = parse_config(to_json(c));
    CHECK(to_json(again) == to_json(c));
    CHECK(config_checksum(again) == config_checksum(c));
    CHECK(config_checksum(c).rfind("fnv1a64:", 0) == 0);
    CHECK(config_checksum(c).size() == 8 + 16);
    auto renamed = c;
    renamed.appliances[0].name = "Lamp";
    CHECK(config_checksum(renamed) != config_checksum(c));
}
