#pragma once

#include <chrono>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "hearth/clock.hpp"
#include "hearth/datetime.hpp"
#include "hearth/interface_box.hpp"
#include "hearth/port_model.hpp"

namespace hearth::service {

enum class ClockMode { Real, Virtual };

struct ApplianceSpec {
    int channel = 0;
    std::string name;
    std::string kind;
};

/// Service configuration file (JSON). Every key is optional:
///
///   ports               ["0x378", ...]        default ["0x378"]
///   appliances          [{channel,name,kind}]  default: 8 per port
///   grace_window_s      int >= 0               default 60
///   threshold           0..1                   default 0.6
///   timezone            "UTC" | "+HH:MM"       default UTC
///   persistence_dir     path                   default: no persistence
///   bind, http_port     listen address         default 127.0.0.1:8470
///   switch_delay_ms     int >= 0               default 10
///   snapshot_interval_s int > 0                default 30
///   lexicon             path                   default: built-in lexicon
///   trace_file          path                   default: no trace
///   clock               "real" | "virtual"     default real
///   virtual_start       RFC 3339               default: wall clock at start
///   ui_dir              path of static files served at /
struct Config {
    std::vector<port::PortAddress> ports{port::kLpt1};
    std::vector<ApplianceSpec> appliances;
    std::chrono::seconds grace_window{60};
    double threshold = 0.6;
    UtcOffset timezone;
    std::optional<std::filesystem::path> persistence_dir;
    std::string bind_address = "127.0.0.1";
    int http_port = 8470;
    box::InterfaceBoxConfig box{220, 50, 6, box::kRelayCount, std::chrono::milliseconds{10}};
    std::chrono::seconds snapshot_interval{30};
    std::optional<std::filesystem::path> lexicon_path;
    std::optional<std::filesystem::path> trace_file;
    ClockMode clock_mode = ClockMode::Real;
    std::optional<Instant> virtual_start;
    std::optional<std::filesystem::path> ui_dir;
};

/// Appliance names used when the config lists none.
std::vector<ApplianceSpec> default_appliances(std::size_t port_count);

/// Default config with its appliance list filled in.
Config default_config();

/// Throws Errc::invalid_config; the message starts with the offending field
/// path, e.g. "appliances[2].channel: ...".
Config parse_config(const nlohmann::json& j);
Config load_config(const std::filesystem::path& path);
nlohmann::json to_json(const Config& c);

/// FNV-1a 64 over the canonical JSON form, as "fnv1a64:<16 hex>".
std::string config_checksum(const Config& c);

}  // namespace hearth::service
