#pragma once

#include <string>
#include <string_view>

#include "hearth/clock.hpp"

namespace hearth {

/// Fixed offset from UTC, in minutes east.
struct UtcOffset {
    int minutes = 0;

    friend bool operator==(UtcOffset, UtcOffset) = default;
};

/// Accepts "UTC", "Z", "+HH:MM", "-HH:MM", "+HHMM". Throws Errc::parse_error.
UtcOffset parse_utc_offset(std::string_view text);
std::string format_utc_offset(UtcOffset offset);  // "Z" or "+05:30"

/// An instant together with the offset it was written in.
struct ZonedTime {
    Instant instant;
    UtcOffset offset;
};

/// RFC 3339 date-time. A missing offset ("2026-10-15T07:30:00", also with a
/// space separator and optional seconds) is read in `naive_zone`.
/// Throws Errc::unparseable_datetime.
ZonedTime parse_datetime(std::string_view text, UtcOffset naive_zone);

/// Second precision unless the instant carries milliseconds.
std::string format_rfc3339(Instant t, UtcOffset offset = {});
inline std::string format_rfc3339(const ZonedTime& z) { return format_rfc3339(z.instant, z.offset); }

}  // namespace hearth
