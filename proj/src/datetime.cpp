#include "hearth/datetime.hpp"

#include <cctype>
#include <charconv>
#include <cstdio>

#include "hearth/error.hpp"

namespace hearth {

namespace {

using namespace std::chrono;

// Reads exactly `n` digits at `pos`.
bool digits(std::string_view s, std::size_t& pos, std::size_t n, int& out) {
    if (pos + n > s.size()) return false;
    int v = 0;
    for (std::size_t i = 0; i < n; ++i) {
        char c = s[pos + i];
        if (!std::isdigit(static_cast<unsigned char>(c))) return false;
        v = v * 10 + (c - '0');
    }
    pos += n;
    out = v;
    return true;
}

bool expect(std::string_view s, std::size_t& pos, char c) {
    if (pos < s.size() && s[pos] == c) {
        ++pos;
        return true;
    }
    return false;
}

bool parse_offset_at(std::string_view s, std::size_t& pos, UtcOffset& out) {
    if (pos >= s.size()) return false;
    char sign = s[pos];
    if (sign == 'Z' || sign == 'z') {
        ++pos;
        out = UtcOffset{0};
        return true;
    }
    if (sign != '+' && sign != '-') return false;
    ++pos;
    int hh = 0, mm = 0;
    if (!digits(s, pos, 2, hh)) return false;
    expect(s, pos, ':');
    if (!digits(s, pos, 2, mm)) return false;
    if (hh > 23 || mm > 59) return false;
    int total = hh * 60 + mm;
    out = UtcOffset{sign == '-' ? -total : total};
    return true;
}

}  // namespace

UtcOffset parse_utc_offset(std::string_view text) {
    if (text == "UTC" || text == "utc") return UtcOffset{0};
    std::size_t pos = 0;
    UtcOffset out;
    if (!parse_offset_at(text, pos, out) || pos != text.size()) {
        throw Error(Errc::parse_error, "bad UTC offset '" + std::string(text) +
                                           "' (expected UTC or +HH:MM)");
    }
    return out;
}

std::string format_utc_offset(UtcOffset offset) {
    if (offset.minutes == 0) return "Z";
    int m = offset.minutes < 0 ? -offset.minutes : offset.minutes;
    char buf[8];
    std::snprintf(buf, sizeof buf, "%c%02d:%02d", offset.minutes < 0 ? '-' : '+', m / 60, m % 60);
    return buf;
}

ZonedTime parse_datetime(std::string_view s, UtcOffset naive_zone) {
    auto fail = [&]() -> ZonedTime {
        throw Error(Errc::unparseable_datetime, "cannot parse date-time '" + std::string(s) +
                                                   "' (expected RFC 3339)");
    };

    std::size_t pos = 0;
    int y = 0, mo = 0, d = 0, h = 0, mi = 0, sec = 0, ms = 0;
    if (!digits(s, pos, 4, y) || !expect(s, pos, '-') || !digits(s, pos, 2, mo) ||
        !expect(s, pos, '-') || !digits(s, pos, 2, d)) {
        return fail();
    }
    if (!(expect(s, pos, 'T') || expect(s, pos, 't') || expect(s, pos, ' '))) return fail();
    if (!digits(s, pos, 2, h) || !expect(s, pos, ':') || !digits(s, pos, 2, mi)) return fail();
    if (expect(s, pos, ':')) {
        if (!digits(s, pos, 2, sec)) return fail();
        if (expect(s, pos, '.')) {
            // Keep milliseconds, drop anything finer.
            int n = 0;
            while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) {
                if (n < 3) ms = ms * 10 + (s[pos] - '0');
                ++n;
                ++pos;
            }
            if (n == 0) return fail();
            for (; n < 3; ++n) ms *= 10;
        }
    }

    UtcOffset offset = naive_zone;
    if (pos < s.size()) {
        if (!parse_offset_at(s, pos, offset) || pos != s.size()) return fail();
    }

    year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
    if (!ymd.ok() || h > 23 || mi > 59 || sec > 59) return fail();

    auto local = sys_days{ymd} + hours{h} + minutes{mi} + seconds{sec} + milliseconds{ms};
    return ZonedTime{Instant{local - minutes{offset.minutes}}, offset};
}

std::string format_rfc3339(Instant t, UtcOffset offset) {
    auto local = t + minutes{offset.minutes};
    auto day_point = floor<days>(local);
    year_month_day ymd{day_point};
    hh_mm_ss tod{local - day_point};
    char buf[40];
    int n = std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02d", int(ymd.year()),
                          unsigned(ymd.month()), unsigned(ymd.day()),
                          static_cast<int>(tod.hours().count()),
                          static_cast<int>(tod.minutes().count()),
                          static_cast<int>(tod.seconds().count()));
    std::string out(buf, static_cast<std::size_t>(n));
    if (auto ms = tod.subseconds().count(); ms != 0) {
        std::snprintf(buf, sizeof buf, ".%03d", static_cast<int>(ms));
        out += buf;
    }
    return out + format_utc_offset(offset);
}

}  // namespace hearth
