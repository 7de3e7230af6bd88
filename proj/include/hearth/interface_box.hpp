#pragma once

#include <array>
#include <chrono>
#include <map>
#include <span>
#include <vector>

#include "hearth/clock.hpp"
#include "hearth/port_model.hpp"

namespace hearth::box {

inline constexpr int kRelayCount = 8;

enum class Contact {
    NormallyClosedClosed,  // coil off: NC side (dummy load) connected
    NormallyOpenClosed,    // coil on: NO side connected, socket live
};

struct Relay {
    bool coil_energized = false;
    Contact contact = Contact::NormallyClosedClosed;

    friend bool operator==(const Relay&, const Relay&) = default;
};

struct Socket {
    bool powered = false;

    friend bool operator==(const Socket&, const Socket&) = default;
};

struct Led {
    bool lit = false;

    friend bool operator==(const Led&, const Led&) = default;
};

struct InterfaceBoxConfig {
    int mains_voltage = 220;
    int mains_freq_hz = 50;
    int coil_supply_vdc = 6;
    int relay_count = kRelayCount;
    std::chrono::milliseconds switch_delay{0};

    /// Throws Errc::invalid_config.
    void validate() const;
};

struct BoxState {
    std::array<Relay, kRelayCount> relays{};
    std::array<Socket, kRelayCount> sockets{};
    std::array<Led, kRelayCount> leds{};
    bool master_on = true;
    port::DataByte latch;

    int powered_count() const;

    friend bool operator==(const BoxState&, const BoxState&) = default;
};

/// One box: driver -> relay coil -> NO contact -> socket -> LED, per channel.
class InterfaceBox {
public:
    InterfaceBox(InterfaceBoxConfig config, Clock& clock);

    /// Latches `b` and drives the relays. Returns once switch_delay has elapsed.
    const BoxState& apply_byte(port::DataByte b);
    const BoxState& set_master(bool on);

    const BoxState& state() const { return state_; }
    const InterfaceBoxConfig& config() const { return config_; }

private:
    void recompute();

    InterfaceBoxConfig config_;
    Clock& clock_;
    BoxState state_;
};

/// Simulator backend: one InterfaceBox per configured address.
class SimulatorBackend final : public port::PortBackend {
public:
    SimulatorBackend(std::span<const port::PortAddress> addresses, InterfaceBoxConfig config,
                     Clock& clock, port::TraceSink trace = {});

    void out(port::PortAddress addr, port::DataByte b) override;
    port::DataByte in(port::PortAddress addr) const override;

    void set_master(bool on);
    void set_master(port::PortAddress addr, bool on);

    const BoxState& box_state(port::PortAddress addr) const;
    std::map<port::PortAddress, BoxState> box_states() const;
    void set_trace_sink(port::TraceSink trace) { trace_ = std::move(trace); }

private:
    InterfaceBox& box(port::PortAddress addr);
    const InterfaceBox& box(port::PortAddress addr) const;

    Clock& clock_;
    std::map<port::PortAddress, InterfaceBox> boxes_;
    port::TraceSink trace_;
};

/// Replays `records` against fresh boxes (master on) and returns their final state.
/// Every record address must be in `addresses`.
std::map<port::PortAddress, BoxState> replay_trace(std::span<const port::TraceRecord> records,
                                                   std::span<const port::PortAddress> addresses,
                                                   const InterfaceBoxConfig& config = {});

/// Same, with the box set taken from the distinct record addresses.
std::map<port::PortAddress, BoxState> replay_trace(std::span<const port::TraceRecord> records,
                                                   const InterfaceBoxConfig& config = {});

}  // namespace hearth::box
