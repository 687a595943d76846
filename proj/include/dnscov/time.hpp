#pragma once

#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>

namespace dnscov {

/// UTC instant with millisecond precision (milliseconds since the Unix epoch).
using TimestampMs = std::int64_t;

/// Duration in milliseconds.
using DurationMs = std::int64_t;

constexpr DurationMs kMillisPerSecond = 1000;
constexpr DurationMs kMillisPerMinute = 60 * kMillisPerSecond;
constexpr DurationMs kMillisPerHour = 60 * kMillisPerMinute;

namespace detail {

constexpr bool is_leap_year(int y) {
    return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
}

constexpr int days_in_month(int y, int m) {
    constexpr int tab[12] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    if (m == 2 && is_leap_year(y)) return 29;
    return tab[m - 1];
}

/// Days between 1970-01-01 and y-m-d (proleptic Gregorian).
constexpr std::int64_t days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153u * static_cast<unsigned>(m + (m > 2 ? -3 : 9)) + 2u) / 5u +
                         static_cast<unsigned>(d) - 1u;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

constexpr void civil_from_days(std::int64_t z, int& y, int& m, int& d) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t yy = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
    m = static_cast<int>(mp < 10 ? mp + 3 : mp - 9);
    y = static_cast<int>(yy + (m <= 2));
}

inline bool parse_fixed_uint(std::string_view s, std::size_t pos, std::size_t len, int& out) {
    if (pos + len > s.size()) return false;
    int v = 0;
    for (std::size_t i = pos; i < pos + len; ++i) {
        const char c = s[i];
        if (c < '0' || c > '9') return false;
        v = v * 10 + (c - '0');
    }
    out = v;
    return true;
}

}  // namespace detail

/// Parses an RFC 3339 timestamp ("2023-01-01T00:00:00.000Z", fractional part
/// and numeric offsets optional). Returns nullopt on malformed input.
inline std::optional<TimestampMs> parse_rfc3339(std::string_view s) {
    using namespace detail;
    int year, mon, day, hour, min, sec;
    if (!parse_fixed_uint(s, 0, 4, year) || s.size() < 20) return std::nullopt;
    if (s[4] != '-' || !parse_fixed_uint(s, 5, 2, mon)) return std::nullopt;
    if (s[7] != '-' || !parse_fixed_uint(s, 8, 2, day)) return std::nullopt;
    if (s[10] != 'T' && s[10] != 't' && s[10] != ' ') return std::nullopt;
    if (!parse_fixed_uint(s, 11, 2, hour) || s[13] != ':') return std::nullopt;
    if (!parse_fixed_uint(s, 14, 2, min) || s[16] != ':') return std::nullopt;
    if (!parse_fixed_uint(s, 17, 2, sec)) return std::nullopt;
    if (mon < 1 || mon > 12 || day < 1 || day > days_in_month(year, mon)) return std::nullopt;
    if (hour > 23 || min > 59 || sec > 60) return std::nullopt;
    if (sec == 60) sec = 59;  // fold leap seconds

    std::size_t pos = 19;
    std::int64_t millis = 0;
    if (pos < s.size() && s[pos] == '.') {
        ++pos;
        std::size_t digits = 0;
        std::int64_t frac = 0;
        while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') {
            if (digits < 3) frac = frac * 10 + (s[pos] - '0');
            ++digits;
            ++pos;
        }
        if (digits == 0) return std::nullopt;
        while (digits < 3) {
            frac *= 10;
            ++digits;
        }
        millis = frac;
    }

    std::int64_t offset_min = 0;
    if (pos >= s.size()) return std::nullopt;
    if (s[pos] == 'Z' || s[pos] == 'z') {
        ++pos;
    } else if (s[pos] == '+' || s[pos] == '-') {
        const bool neg = s[pos] == '-';
        int oh, om;
        if (!parse_fixed_uint(s, pos + 1, 2, oh)) return std::nullopt;
        if (pos + 3 >= s.size() || s[pos + 3] != ':') return std::nullopt;
        if (!parse_fixed_uint(s, pos + 4, 2, om)) return std::nullopt;
        if (oh > 23 || om > 59) return std::nullopt;
        offset_min = (neg ? -1 : 1) * (oh * 60 + om);
        pos += 6;
    } else {
        return std::nullopt;
    }
    if (pos != s.size()) return std::nullopt;

    const std::int64_t days = days_from_civil(year, mon, day);
    std::int64_t secs = days * 86400 + hour * 3600 + min * 60 + sec;
    secs -= offset_min * 60;
    return secs * 1000 + millis;
}

/// Formats a timestamp as "YYYY-MM-DDTHH:MM:SS.mmmZ".
inline std::string format_rfc3339(TimestampMs ts) {
    std::int64_t ms = ts % 1000;
    std::int64_t secs = ts / 1000;
    if (ms < 0) {
        ms += 1000;
        secs -= 1;
    }
    std::int64_t days = secs / 86400;
    std::int64_t sod = secs % 86400;
    if (sod < 0) {
        sod += 86400;
        days -= 1;
    }
    int y, m, d;
    detail::civil_from_days(days, y, m, d);
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02d.%03dZ", y, m, d,
                  static_cast<int>(sod / 3600), static_cast<int>((sod / 60) % 60),
                  static_cast<int>(sod % 60), static_cast<int>(ms));
    return buf;
}

/// Largest window boundary <= ts for windows of the given length anchored at
/// the epoch (wall-clock aligned for divisors of one hour).
inline TimestampMs align_down(TimestampMs ts, DurationMs window) {
    TimestampMs r = ts % window;
    if (r < 0) r += window;
    return ts - r;
}

}  // namespace dnscov
