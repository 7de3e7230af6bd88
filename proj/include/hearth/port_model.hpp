#pragma once

// Parallel-port data register model.
//
// Only the eight data lines (DB-25 pins 2-9) carry behavior. Bit i of the
// data byte drives data line i, which switches channel i (device i+1).
// Logic 1 is TTL high (~5V) and turns the appliance on.

#include <array>
#include <compare>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace hearth::port {

inline constexpr int kDataLines = 8;

struct PortAddress {
    std::uint16_t base = 0;

    friend constexpr auto operator<=>(PortAddress, PortAddress) = default;
};

inline constexpr PortAddress kLpt1{0x378};
inline constexpr PortAddress kLpt2{0x278};
inline constexpr PortAddress kLptMono{0x3BC};

/// The conventional base addresses; a PortBank may only be configured from these.
inline constexpr std::array<PortAddress, 3> kKnownAddresses{kLpt1, kLpt2, kLptMono};

struct DataByte {
    std::uint8_t value = 0;

    constexpr bool test(int bit) const { return ((value >> bit) & 1U) != 0; }

    friend constexpr auto operator<=>(DataByte, DataByte) = default;
};

enum class PinLevel { Low, High };

/// DB-25 pin numbers of each line group.
struct LineGroups {
    std::array<int, 8> data;
    std::array<int, 4> control;
    std::array<int, 5> status;
    std::array<int, 8> ground;
};

const LineGroups& standard_line_groups();

/// One-hot mask for a channel. Throws Errc::index_out_of_range outside [0,7].
DataByte channel_mask(int idx);
DataByte with_bit_set(DataByte b, int idx);
DataByte with_bit_cleared(DataByte b, int idx);
PinLevel pin_level(DataByte b, int idx);

std::string format_address(PortAddress a);  // 0x0378
std::string format_byte(DataByte b);         // 0x05
/// Accepts "0x378", "378h" and plain decimal. Does not check the known set.
PortAddress parse_address(std::string_view text);
DataByte parse_byte(std::string_view text);
bool is_known_address(PortAddress a);

/// Device-driver indirection: the out/in pair every backend provides.
class PortBackend {
public:
    virtual ~PortBackend() = default;

    virtual void out(PortAddress addr, DataByte b) = 0;
    virtual DataByte in(PortAddress addr) const = 0;
};

/// Backend that only remembers latches. Useful where no box is attached.
class LatchBackend final : public PortBackend {
public:
    explicit LatchBackend(std::span<const PortAddress> addresses);

    void out(PortAddress addr, DataByte b) override;
    DataByte in(PortAddress addr) const override;

private:
    std::map<PortAddress, DataByte> latches_;
};

/// The configured ports and the byte-level operations on them.
class PortBank {
public:
    /// Throws Errc::unknown_port for addresses outside the known set and
    /// Errc::invalid_config for an empty or duplicated list.
    PortBank(std::vector<PortAddress> addresses, PortBackend& backend);

    const std::vector<PortAddress>& addresses() const { return addresses_; }
    bool configured(PortAddress addr) const;

    void write_byte(PortAddress addr, DataByte b);
    DataByte read_byte(PortAddress addr) const;
    DataByte set_pin(PortAddress addr, int idx);
    DataByte clear_pin(PortAddress addr, int idx);
    PinLevel level(PortAddress addr, int idx) const;

private:
    void require(PortAddress addr) const;

    std::vector<PortAddress> addresses_;
    PortBackend& backend_;
};

// Port trace: one line per write, `<unix_millis> OUT <0xHHHH> <0xHH>`.

struct TraceRecord {
    std::int64_t unix_millis = 0;
    PortAddress addr;
    DataByte value;

    friend bool operator==(const TraceRecord&, const TraceRecord&) = default;
};

std::string format_trace_record(const TraceRecord& r);
/// Throws Errc::parse_error on malformed input.
TraceRecord parse_trace_record(std::string_view line);
/// Blank lines are skipped; errors carry the 1-based line number.
std::vector<TraceRecord> read_trace(std::istream& in);

using TraceSink = std::function<void(const TraceRecord&)>;

}  // namespace hearth::port
