#include "hearth/appliance_registry.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>

#include "hearth/error.hpp"

namespace hearth {

using port::DataByte;
using port::PortAddress;

std::string_view to_string(PowerState s) { return s == PowerState::On ? "on" : "off"; }

std::string_view to_string(Source s) {
    switch (s) {
        case Source::Manual: return "manual";
        case Source::Timer: return "timer";
        case Source::Voice: return "voice";
        case Source::System: return "system";
    }
    return "system";
}

bool iequals(std::string_view a, std::string_view b) {
    return a.size() == b.size() &&
           std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
               return std::tolower(static_cast<unsigned char>(x)) ==
                      std::tolower(static_cast<unsigned char>(y));
           });
}

PowerState parse_power_state(std::string_view text) {
    if (iequals(text, "on")) return PowerState::On;
    if (iequals(text, "off")) return PowerState::Off;
    throw Error(Errc::invalid_request, "state must be 'on' or 'off', got '" + std::string(text) + "'");
}

ApplianceRegistry::ApplianceRegistry(port::PortBank& port) : port_(port) {}

int ApplianceRegistry::channel_capacity() const {
    return static_cast<int>(port_.addresses().size()) * port::kDataLines;
}

ChannelLocation ApplianceRegistry::locate(int channel) const {
    if (channel < 0 || channel >= channel_capacity()) {
        throw Error(Errc::unknown_channel, "channel " + std::to_string(channel) + " outside [0," +
                                              std::to_string(channel_capacity() - 1) + "]");
    }
    return ChannelLocation{port_.addresses()[static_cast<std::size_t>(channel / port::kDataLines)],
                           channel % port::kDataLines};
}

void ApplianceRegistry::check_name(std::string_view name, std::optional<int> except_channel) const {
    if (name.empty()) throw Error(Errc::invalid_name, "appliance name must not be empty");
    for (const auto& [ch, a] : appliances_) {
        if (ch != except_channel && iequals(a.name, name)) {
            throw Error(Errc::duplicate_name, "name '" + std::string(name) + "' already used by channel " +
                                                  std::to_string(ch));
        }
    }
}

const Appliance& ApplianceRegistry::register_appliance(int channel, std::string name,
                                                       std::string kind) {
    locate(channel);
    if (appliances_.contains(channel)) {
        throw Error(Errc::duplicate_channel, "channel " + std::to_string(channel) + " already bound to '" +
                                                 appliances_.at(channel).name + "'");
    }
    check_name(name, std::nullopt);
    auto [it, _] = appliances_.emplace(
        channel, Appliance{channel, std::move(name), std::move(kind), PowerState::Off});
    // A stale high bit on a newly bound channel would break the latch invariant.
    auto loc = locate(channel);
    auto current = port_.read_byte(loc.port);
    if (current.test(loc.bit)) port_.write_byte(loc.port, expected_latch(loc.port));
    return it->second;
}

void ApplianceRegistry::rename(std::string_view selector, std::string new_name) {
    auto channel = resolve(selector).channel;
    check_name(new_name, channel);
    appliances_.at(channel).name = std::move(new_name);
}

void ApplianceRegistry::remove(std::string_view selector) {
    auto channel = resolve(selector).channel;
    auto loc = locate(channel);
    appliances_.erase(channel);
    port_.write_byte(loc.port, expected_latch(loc.port));
}

SelectorMatch ApplianceRegistry::resolve(std::string_view selector) const {
    std::optional<int> by_name;
    for (const auto& [ch, a] : appliances_) {
        if (iequals(a.name, selector)) {
            by_name = ch;
            break;
        }
    }

    std::optional<int> by_channel;
    int n = 0;
    auto [ptr, ec] = std::from_chars(selector.data(), selector.data() + selector.size(), n);
    if (!selector.empty() && ec == std::errc{} && ptr == selector.data() + selector.size() &&
        appliances_.contains(n)) {
        by_channel = n;
    }

    if (by_name) {
        SelectorMatch m{*by_name, std::nullopt};
        if (by_channel && *by_channel != *by_name) {
            m.warning = "selector '" + std::string(selector) + "' matches appliance name on channel " +
                        std::to_string(*by_name) + " and channel " + std::to_string(*by_channel) +
                        "; using the name";
        }
        return m;
    }
    if (by_channel) return SelectorMatch{*by_channel, std::nullopt};
    throw Error(Errc::unknown_appliance, "no appliance matches '" + std::string(selector) + "'");
}

Appliance& ApplianceRegistry::find_channel(int channel) {
    auto it = appliances_.find(channel);
    if (it == appliances_.end()) {
        throw Error(Errc::unknown_channel, "no appliance on channel " + std::to_string(channel));
    }
    return it->second;
}

StateChange ApplianceRegistry::set_state(std::string_view selector, PowerState s, Source source) {
    return set_state(resolve(selector).channel, s, source);
}

StateChange ApplianceRegistry::set_state(int channel, PowerState s, Source source) {
    auto& a = find_channel(channel);
    StateChange change;
    change.previous = a.state;
    a.state = s;
    auto loc = locate(channel);
    auto latch = expected_latch(loc.port);
    port_.write_byte(loc.port, latch);
    change.appliance = a;
    change.port = loc.port;
    change.latch = latch;
    change.source = source;
    return change;
}

const Appliance& ApplianceRegistry::get(int channel) const {
    return const_cast<ApplianceRegistry*>(this)->find_channel(channel);
}

std::vector<Appliance> ApplianceRegistry::states() const {
    std::vector<Appliance> out;
    out.reserve(appliances_.size());
    for (const auto& [ch, a] : appliances_) out.push_back(a);
    return out;
}

DataByte ApplianceRegistry::expected_latch(PortAddress addr) const {
    std::uint8_t v = 0;
    for (const auto& [ch, a] : appliances_) {
        if (a.state != PowerState::On) continue;
        auto loc = locate(ch);
        if (loc.port == addr) v |= port::channel_mask(loc.bit).value;
    }
    return DataByte{v};
}

void ApplianceRegistry::sync_latches() {
    for (auto addr : port_.addresses()) port_.write_byte(addr, expected_latch(addr));
}

void ApplianceRegistry::restore_state(int channel, PowerState s) { find_channel(channel).state = s; }

}  // namespace hearth
