#include "hearth/port_model.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <istream>
#include <set>

#include "hearth/error.hpp"

namespace hearth::port {

namespace {

void check_index(int idx) {
    if (idx < 0 || idx >= kDataLines) {
        throw Error(Errc::index_out_of_range,
                    "channel index " + std::to_string(idx) + " outside [0,7]");
    }
}

bool parse_uint(std::string_view text, int base, unsigned& out) {
    if (text.empty()) return false;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out, base);
    return ec == std::errc{} && ptr == text.data() + text.size();
}

std::string hex(unsigned v, int width) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "0x%0*X", width, v);
    return buf;
}

}  // namespace

const LineGroups& standard_line_groups() {
    static const LineGroups groups{
        {2, 3, 4, 5, 6, 7, 8, 9},
        {1, 14, 16, 17},
        {10, 11, 12, 13, 15},
        {18, 19, 20, 21, 22, 23, 24, 25},
    };
    return groups;
}

DataByte channel_mask(int idx) {
    check_index(idx);
    return DataByte{static_cast<std::uint8_t>(1U << idx)};
}

DataByte with_bit_set(DataByte b, int idx) {
    return DataByte{static_cast<std::uint8_t>(b.value | channel_mask(idx).value)};
}

DataByte with_bit_cleared(DataByte b, int idx) {
    return DataByte{static_cast<std::uint8_t>(b.value & ~channel_mask(idx).value)};
}

PinLevel pin_level(DataByte b, int idx) {
    check_index(idx);
    return b.test(idx) ? PinLevel::High : PinLevel::Low;
}

std::string format_address(PortAddress a) { return hex(a.base, 4); }

std::string format_byte(DataByte b) { return hex(b.value, 2); }

PortAddress parse_address(std::string_view text) {
    unsigned v = 0;
    bool ok = false;
    if (text.starts_with("0x") || text.starts_with("0X")) {
        ok = parse_uint(text.substr(2), 16, v);
    } else if (text.ends_with('h') || text.ends_with('H')) {
        ok = parse_uint(text.substr(0, text.size() - 1), 16, v);
    } else {
        ok = parse_uint(text, 10, v);
    }
    if (!ok || v > 0xFFFF) {
        throw Error(Errc::parse_error, "bad port address '" + std::string(text) + "'");
    }
    return PortAddress{static_cast<std::uint16_t>(v)};
}

DataByte parse_byte(std::string_view text) {
    unsigned v = 0;
    bool ok = false;
    if (text.starts_with("0x") || text.starts_with("0X")) {
        ok = parse_uint(text.substr(2), 16, v);
    } else {
        ok = parse_uint(text, 10, v);
    }
    if (!ok || v > 0xFF) {
        throw Error(Errc::parse_error, "bad data byte '" + std::string(text) + "'");
    }
    return DataByte{static_cast<std::uint8_t>(v)};
}

bool is_known_address(PortAddress a) {
    return std::find(kKnownAddresses.begin(), kKnownAddresses.end(), a) != kKnownAddresses.end();
}

LatchBackend::LatchBackend(std::span<const PortAddress> addresses) {
    for (auto a : addresses) latches_[a] = DataByte{};
}

void LatchBackend::out(PortAddress addr, DataByte b) {
    auto it = latches_.find(addr);
    if (it == latches_.end()) {
        throw Error(Errc::unknown_port, "no latch at " + format_address(addr));
    }
    it->second = b;
}

DataByte LatchBackend::in(PortAddress addr) const {
    auto it = latches_.find(addr);
    if (it == latches_.end()) {
        throw Error(Errc::unknown_port, "no latch at " + format_address(addr));
    }
    return it->second;
}

PortBank::PortBank(std::vector<PortAddress> addresses, PortBackend& backend)
    : addresses_(std::move(addresses)), backend_(backend) {
    if (addresses_.empty()) {
        throw Error(Errc::invalid_config, "at least one port address is required");
    }
    std::set<PortAddress> seen;
    for (auto a : addresses_) {
        if (!is_known_address(a)) {
            throw Error(Errc::unknown_port, "unsupported port address " + format_address(a));
        }
        if (!seen.insert(a).second) {
            throw Error(Errc::invalid_config, "port " + format_address(a) + " listed twice");
        }
    }
}

bool PortBank::configured(PortAddress addr) const {
    return std::find(addresses_.begin(), addresses_.end(), addr) != addresses_.end();
}

void PortBank::require(PortAddress addr) const {
    if (!configured(addr)) {
        throw Error(Errc::unknown_port, "port " + format_address(addr) + " is not configured");
    }
}

void PortBank::write_byte(PortAddress addr, DataByte b) {
    require(addr);
    backend_.out(addr, b);
}

DataByte PortBank::read_byte(PortAddress addr) const {
    require(addr);
    return backend_.in(addr);
}

DataByte PortBank::set_pin(PortAddress addr, int idx) {
    auto next = with_bit_set(read_byte(addr), idx);
    backend_.out(addr, next);
    return next;
}

DataByte PortBank::clear_pin(PortAddress addr, int idx) {
    auto next = with_bit_cleared(read_byte(addr), idx);
    backend_.out(addr, next);
    return next;
}

PinLevel PortBank::level(PortAddress addr, int idx) const {
    return pin_level(read_byte(addr), idx);
}

std::string format_trace_record(const TraceRecord& r) {
    return std::to_string(r.unix_millis) + " OUT " + format_address(r.addr) + " " +
           format_byte(r.value);
}

TraceRecord parse_trace_record(std::string_view line) {
    auto fail = [&](const char* what) -> TraceRecord {
        throw Error(Errc::parse_error,
                    std::string(what) + " in trace record '" + std::string(line) + "'");
    };

    std::vector<std::string_view> fields;
    std::size_t pos = 0;
    while (pos <= line.size()) {
        auto sp = line.find(' ', pos);
        if (sp == std::string_view::npos) sp = line.size();
        fields.push_back(line.substr(pos, sp - pos));
        pos = sp + 1;
    }
    if (fields.size() != 4) return fail("expected 4 fields");

    TraceRecord r;
    auto ts = fields[0];
    auto [ptr, ec] = std::from_chars(ts.data(), ts.data() + ts.size(), r.unix_millis);
    if (ts.empty() || ec != std::errc{} || ptr != ts.data() + ts.size() || r.unix_millis < 0) {
        return fail("bad timestamp");
    }
    if (fields[1] != "OUT") return fail("unknown direction");

    // Bit-exact form only: 0x + 4 hex digits, 0x + 2 hex digits.
    auto is_hex_field = [](std::string_view f, std::size_t digits) {
        if (f.size() != digits + 2 || !f.starts_with("0x")) return false;
        return std::all_of(f.begin() + 2, f.end(), [](char c) {
            return (c >= '0' && c <= '9') || (c >= 'A' && c <= 'F');
        });
    };
    if (!is_hex_field(fields[2], 4)) return fail("bad address");
    if (!is_hex_field(fields[3], 2)) return fail("bad data byte");
    r.addr = parse_address(fields[2]);
    r.value = parse_byte(fields[3]);
    return r;
}

std::vector<TraceRecord> read_trace(std::istream& in) {
    std::vector<TraceRecord> records;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        try {
            records.push_back(parse_trace_record(line));
        } catch (const Error& e) {
            throw Error(Errc::parse_error, "line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return records;
}

}  // namespace hearth::port
