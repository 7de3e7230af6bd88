#include "hearth/config.hpp"

#include <cctype>
#include <cstdio>
#include <fstream>
#include <set>

#include "hearth/error.hpp"

namespace hearth::service {

using nlohmann::json;

namespace {

[[noreturn]] void invalid(const std::string& path, const std::string& what) {
    throw Error(Errc::invalid_config, path + ": " + what);
}

std::int64_t get_int(const json& j, const std::string& path) {
    if (!j.is_number_integer()) invalid(path, "must be an integer");
    return j.get<std::int64_t>();
}

std::string get_string(const json& j, const std::string& path) {
    if (!j.is_string()) invalid(path, "must be a string");
    return j.get<std::string>();
}

port::PortAddress get_port(const json& j, const std::string& path) {
    port::PortAddress a;
    try {
        if (j.is_number_unsigned()) {
            auto v = j.get<std::uint64_t>();
            if (v > 0xFFFF) invalid(path, "address out of range");
            a = port::PortAddress{static_cast<std::uint16_t>(v)};
        } else {
            a = port::parse_address(get_string(j, path));
        }
    } catch (const Error& e) {
        if (e.code() == Errc::invalid_config) throw;
        invalid(path, e.what());
    }
    if (!port::is_known_address(a)) {
        invalid(path, "unsupported address " + port::format_address(a) +
                          " (use 0x378, 0x278 or 0x3BC)");
    }
    return a;
}

const std::set<std::string>& known_keys() {
    static const std::set<std::string> keys{
        "ports",        "appliances", "grace_window_s",      "threshold", "timezone",
        "persistence_dir", "bind",    "http_port",           "switch_delay_ms",
        "snapshot_interval_s", "lexicon", "trace_file",      "clock",     "virtual_start",
        "ui_dir",
    };
    return keys;
}

}  // namespace

std::vector<ApplianceSpec> default_appliances(std::size_t port_count) {
    static const ApplianceSpec first_box[] = {
        {0, "Light", "light"},   {1, "Fan", "fan"},          {2, "Heater", "heater"},
        {3, "WashingMachine", "washing-machine"},          {4, "Motor", "motor"},
        {5, "TV", "tv"},         {6, "Device7", "generic"},  {7, "Device8", "generic"},
    };
    std::vector<ApplianceSpec> out(std::begin(first_box), std::end(first_box));
    for (int ch = port::kDataLines; ch < static_cast<int>(port_count) * port::kDataLines; ++ch) {
        out.push_back({ch, "Device" + std::to_string(ch + 1), "generic"});
    }
    return out;
}

Config default_config() {
    Config c;
    c.appliances = default_appliances(c.ports.size());
    return c;
}

Config parse_config(const json& j) {
    if (!j.is_object()) invalid("$", "config must be a JSON object");
    for (const auto& [key, _] : j.items()) {
        if (!known_keys().contains(key)) invalid(key, "unknown key");
    }

    Config c;
    if (j.contains("ports")) {
        const auto& ports = j.at("ports");
        if (!ports.is_array() || ports.empty()) invalid("ports", "must be a non-empty array");
        if (ports.size() > port::kKnownAddresses.size()) invalid("ports", "at most 3 ports");
        c.ports.clear();
        std::set<port::PortAddress> seen;
        for (std::size_t i = 0; i < ports.size(); ++i) {
            auto path = "ports[" + std::to_string(i) + "]";
            auto a = get_port(ports[i], path);
            if (!seen.insert(a).second) invalid(path, "duplicate port " + port::format_address(a));
            c.ports.push_back(a);
        }
    }

    const int capacity = static_cast<int>(c.ports.size()) * port::kDataLines;
    if (j.contains("appliances")) {
        const auto& list = j.at("appliances");
        if (!list.is_array()) invalid("appliances", "must be an array");
        std::set<int> channels;
        std::set<std::string> names;
        for (std::size_t i = 0; i < list.size(); ++i) {
            auto path = "appliances[" + std::to_string(i) + "]";
            const auto& a = list[i];
            if (!a.is_object()) invalid(path, "must be an object");
            for (const auto& [key, _] : a.items()) {
                if (key != "channel" && key != "name" && key != "kind") invalid(path + "." + key, "unknown key");
            }
            if (!a.contains("channel")) invalid(path + ".channel", "required");
            if (!a.contains("name")) invalid(path + ".name", "required");
            ApplianceSpec spec;
            auto ch = get_int(a.at("channel"), path + ".channel");
            if (ch < 0 || ch >= capacity) {
                invalid(path + ".channel", "must be in [0," + std::to_string(capacity - 1) + "]");
            }
            spec.channel = static_cast<int>(ch);
            spec.name = get_string(a.at("name"), path + ".name");
            if (spec.name.empty()) invalid(path + ".name", "must not be empty");
            spec.kind = a.contains("kind") ? get_string(a.at("kind"), path + ".kind") : "generic";
            if (!channels.insert(spec.channel).second) invalid(path + ".channel", "duplicate channel");
            std::string lower;
            for (char ch2 : spec.name) lower += static_cast<char>(std::tolower(static_cast<unsigned char>(ch2)));
            if (!names.insert(lower).second) invalid(path + ".name", "duplicate name");
            c.appliances.push_back(std::move(spec));
        }
    } else {
        c.appliances = default_appliances(c.ports.size());
    }

    if (j.contains("grace_window_s")) {
        auto v = get_int(j.at("grace_window_s"), "grace_window_s");
        if (v < 0) invalid("grace_window_s", "must be >= 0");
        c.grace_window = std::chrono::seconds{v};
    }
    if (j.contains("threshold")) {
        const auto& t = j.at("threshold");
        if (!t.is_number()) invalid("threshold", "must be a number");
        c.threshold = t.get<double>();
        if (c.threshold < 0.0 || c.threshold > 1.0) invalid("threshold", "must be in [0,1]");
    }
    if (j.contains("timezone")) {
        try {
            c.timezone = parse_utc_offset(get_string(j.at("timezone"), "timezone"));
        } catch (const Error& e) {
            if (e.code() == Errc::invalid_config) throw;
            invalid("timezone", e.what());
        }
    }
    if (j.contains("persistence_dir")) {
        c.persistence_dir = get_string(j.at("persistence_dir"), "persistence_dir");
        if (c.persistence_dir->empty()) invalid("persistence_dir", "must not be empty");
    }
    if (j.contains("bind")) c.bind_address = get_string(j.at("bind"), "bind");
    if (j.contains("http_port")) {
        auto v = get_int(j.at("http_port"), "http_port");
        if (v < 0 || v > 65535) invalid("http_port", "must be in [0,65535]");
        c.http_port = static_cast<int>(v);
    }
    if (j.contains("switch_delay_ms")) {
        auto v = get_int(j.at("switch_delay_ms"), "switch_delay_ms");
        if (v < 0) invalid("switch_delay_ms", "must be >= 0");
        c.box.switch_delay = std::chrono::milliseconds{v};
    }
    if (j.contains("snapshot_interval_s")) {
        auto v = get_int(j.at("snapshot_interval_s"), "snapshot_interval_s");
        if (v <= 0) invalid("snapshot_interval_s", "must be > 0");
        c.snapshot_interval = std::chrono::seconds{v};
    }
    if (j.contains("lexicon")) c.lexicon_path = get_string(j.at("lexicon"), "lexicon");
    if (j.contains("trace_file")) c.trace_file = get_string(j.at("trace_file"), "trace_file");
    if (j.contains("clock")) {
        auto mode = get_string(j.at("clock"), "clock");
        if (mode == "real") {
            c.clock_mode = ClockMode::Real;
        } else if (mode == "virtual") {
            c.clock_mode = ClockMode::Virtual;
        } else {
            invalid("clock", "must be \"real\" or \"virtual\"");
        }
    }
    if (j.contains("virtual_start")) {
        try {
            c.virtual_start = parse_datetime(get_string(j.at("virtual_start"), "virtual_start"), c.timezone).instant;
        } catch (const Error& e) {
            if (e.code() == Errc::invalid_config) throw;
            invalid("virtual_start", e.what());
        }
    }
    if (j.contains("ui_dir")) c.ui_dir = get_string(j.at("ui_dir"), "ui_dir");
    return c;
}

Config load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::invalid_config, path.string() + ": cannot open config file");
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw Error(Errc::invalid_config, path.string() + ": " + e.what());
    }
    return parse_config(j);
}

json to_json(const Config& c) {
    json j;
    j["ports"] = json::array();
    for (auto a : c.ports) j["ports"].push_back(port::format_address(a));
    j["appliances"] = json::array();
    for (const auto& a : c.appliances) {
        j["appliances"].push_back({{"channel", a.channel}, {"name", a.name}, {"kind", a.kind}});
    }
    j["grace_window_s"] = c.grace_window.count();
    j["threshold"] = c.threshold;
    j["timezone"] = format_utc_offset(c.timezone);
    if (c.persistence_dir) j["persistence_dir"] = c.persistence_dir->string();
    j["bind"] = c.bind_address;
    j["http_port"] = c.http_port;
    j["switch_delay_ms"] = c.box.switch_delay.count();
    j["snapshot_interval_s"] = c.snapshot_interval.count();
    if (c.lexicon_path) j["lexicon"] = c.lexicon_path->string();
    if (c.trace_file) j["trace_file"] = c.trace_file->string();
    j["clock"] = c.clock_mode == ClockMode::Virtual ? "virtual" : "real";
    if (c.virtual_start) j["virtual_start"] = format_rfc3339(*c.virtual_start);
    if (c.ui_dir) j["ui_dir"] = c.ui_dir->string();
    return j;
}

std::string config_checksum(const Config& c) {
    // Only the parts that shape observable state.
    json j{{"ports", to_json(c).at("ports")}, {"appliances", to_json(c).at("appliances")}};
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : j.dump()) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "fnv1a64:%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace hearth::service
