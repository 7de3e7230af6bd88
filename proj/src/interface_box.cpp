#include "hearth/interface_box.hpp"

#include <algorithm>
#include <set>

#include "hearth/error.hpp"

namespace hearth::box {

using port::DataByte;
using port::PortAddress;

void InterfaceBoxConfig::validate() const {
    if (relay_count != kRelayCount) {
        throw Error(Errc::invalid_config, "relay_count must be 8");
    }
    if (switch_delay.count() < 0) {
        throw Error(Errc::invalid_config, "switch_delay must be >= 0");
    }
    if (mains_voltage <= 0 || mains_freq_hz <= 0 || coil_supply_vdc <= 0) {
        throw Error(Errc::invalid_config, "supply ratings must be positive");
    }
}

int BoxState::powered_count() const {
    return static_cast<int>(
        std::count_if(sockets.begin(), sockets.end(), [](const Socket& s) { return s.powered; }));
}

InterfaceBox::InterfaceBox(InterfaceBoxConfig config, Clock& clock)
    : config_(config), clock_(clock) {
    config_.validate();
    recompute();
}

const BoxState& InterfaceBox::apply_byte(DataByte b) {
    state_.latch = b;
    recompute();
    clock_.sleep_for(config_.switch_delay);
    return state_;
}

const BoxState& InterfaceBox::set_master(bool on) {
    state_.master_on = on;
    recompute();
    return state_;
}

void InterfaceBox::recompute() {
    // The 6V coil supply is behind the mains switch, so master off drops every coil.
    for (int i = 0; i < kRelayCount; ++i) {
        bool energized = state_.master_on && state_.latch.test(i);
        auto& relay = state_.relays[i];
        relay.coil_energized = energized;
        relay.contact = energized ? Contact::NormallyOpenClosed : Contact::NormallyClosedClosed;
        state_.sockets[i].powered = state_.master_on && relay.contact == Contact::NormallyOpenClosed;
        state_.leds[i].lit = state_.sockets[i].powered;
    }
}

SimulatorBackend::SimulatorBackend(std::span<const PortAddress> addresses,
                                   InterfaceBoxConfig config, Clock& clock,
                                   port::TraceSink trace)
    : clock_(clock), trace_(std::move(trace)) {
    for (auto a : addresses) {
        boxes_.try_emplace(a, config, clock);
    }
}

InterfaceBox& SimulatorBackend::box(PortAddress addr) {
    auto it = boxes_.find(addr);
    if (it == boxes_.end()) {
        throw Error(Errc::unknown_port, "no interface box at " + port::format_address(addr));
    }
    return it->second;
}

const InterfaceBox& SimulatorBackend::box(PortAddress addr) const {
    return const_cast<SimulatorBackend*>(this)->box(addr);
}

void SimulatorBackend::out(PortAddress addr, DataByte b) {
    auto& target = box(addr);
    if (trace_) trace_(port::TraceRecord{to_unix_millis(clock_.now()), addr, b});
    target.apply_byte(b);
}

DataByte SimulatorBackend::in(PortAddress addr) const { return box(addr).state().latch; }

void SimulatorBackend::set_master(bool on) {
    for (auto& [addr, b] : boxes_) b.set_master(on);
}

void SimulatorBackend::set_master(PortAddress addr, bool on) { box(addr).set_master(on); }

const BoxState& SimulatorBackend::box_state(PortAddress addr) const { return box(addr).state(); }

std::map<PortAddress, BoxState> SimulatorBackend::box_states() const {
    std::map<PortAddress, BoxState> out;
    for (const auto& [addr, b] : boxes_) out.emplace(addr, b.state());
    return out;
}

std::map<PortAddress, BoxState> replay_trace(std::span<const port::TraceRecord> records,
                                             std::span<const PortAddress> addresses,
                                             const InterfaceBoxConfig& config) {
    // Replay is about final state, not timing.
    auto instant = config;
    instant.switch_delay = std::chrono::milliseconds{0};
    VirtualClock clock{Instant{}};
    SimulatorBackend sim(addresses, instant, clock);
    for (const auto& r : records) sim.out(r.addr, r.value);
    return sim.box_states();
}

std::map<PortAddress, BoxState> replay_trace(std::span<const port::TraceRecord> records,
                                             const InterfaceBoxConfig& config) {
    std::set<PortAddress> seen;
    for (const auto& r : records) {
        if (!port::is_known_address(r.addr)) {
            throw Error(Errc::unknown_port,
                        "trace writes to unsupported address " + port::format_address(r.addr));
        }
        seen.insert(r.addr);
    }
    std::vector<PortAddress> addresses(seen.begin(), seen.end());
    return replay_trace(records, addresses, config);
}

}  // namespace hearth::box
