#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hearth/port_model.hpp"

namespace hearth {

enum class PowerState { Off, On };
enum class Source { Manual, Timer, Voice, System };

std::string_view to_string(PowerState s);
std::string_view to_string(Source s);
/// "on"/"off", case-insensitive. Throws Errc::invalid_request.
PowerState parse_power_state(std::string_view text);

struct Appliance {
    int channel = 0;
    std::string name;
    std::string kind;
    PowerState state = PowerState::Off;

    friend bool operator==(const Appliance&, const Appliance&) = default;
};

/// Where a global channel number lands: ports are laid out 8 channels each,
/// in configuration order.
struct ChannelLocation {
    port::PortAddress port;
    int bit = 0;
};

struct StateChange {
    Appliance appliance;
    PowerState previous = PowerState::Off;
    port::PortAddress port;
    port::DataByte latch;
    Source source = Source::Manual;
};

struct SelectorMatch {
    int channel = 0;
    std::optional<std::string> warning;
};

bool iequals(std::string_view a, std::string_view b);

/// Appliance names and channel bindings. The only path from "turn X on" to a
/// port write: after every call the port latch equals the OR of the masks of
/// the appliances that are On.
class ApplianceRegistry {
public:
    explicit ApplianceRegistry(port::PortBank& port);

    int channel_capacity() const;
    ChannelLocation locate(int channel) const;

    const Appliance& register_appliance(int channel, std::string name, std::string kind);
    void rename(std::string_view selector, std::string new_name);
    /// Unbinds the channel; clears its bit if it was on.
    void remove(std::string_view selector);

    bool has_channel(int channel) const { return appliances_.contains(channel); }
    std::size_t size() const { return appliances_.size(); }

    /// Name (case-insensitive) or channel number. A name match wins over a
    /// channel match and the result carries a warning.
    SelectorMatch resolve(std::string_view selector) const;

    StateChange set_state(std::string_view selector, PowerState s, Source source);
    StateChange set_state(int channel, PowerState s, Source source);

    const Appliance& get(int channel) const;
    std::vector<Appliance> states() const;

    /// Byte the port at `addr` must hold given current appliance states.
    port::DataByte expected_latch(port::PortAddress addr) const;
    /// Rewrites every port latch from appliance states.
    void sync_latches();
    /// Sets states without producing StateChange records (recovery path).
    void restore_state(int channel, PowerState s);

private:
    Appliance& find_channel(int channel);
    void check_name(std::string_view name, std::optional<int> except_channel) const;

    port::PortBank& port_;
    std::map<int, Appliance> appliances_;
};

}  // namespace hearth
