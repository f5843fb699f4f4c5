// Copyright 2026 The ubirisk Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>

// Naive local calendar time. Trip data carries no timezone, so timestamps are
// plain seconds since 1970-01-01 00:00:00 with no DST adjustment.

namespace ubirisk {

constexpr std::int64_t kSecondsPerDay = 86400;
constexpr double kDaysPerYear = 365.25;
constexpr double kDaysPerMonth = 365.25 / 12.0;

// Howard Hinnant's civil date algorithms.
inline std::int64_t days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

inline void civil_from_days(std::int64_t z, int& y, int& m, int& d) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t yy = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
    m = static_cast<int>(mp + (mp < 10 ? 3 : -9));
    y = static_cast<int>(yy + (m <= 2));
}

/// Day-of-week with Monday = 0 .. Sunday = 6.
inline int weekday_from_days(std::int64_t days) {
    return static_cast<int>(days >= -3 ? (days + 3) % 7 : (days + 4) % 7 + 6);
}

inline bool is_leap_year(int y) {
    return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
}

inline int days_in_month(int y, int m) {
    static constexpr int lengths[12] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    if (m == 2 && is_leap_year(y)) return 29;
    return lengths[m - 1];
}

namespace detail {
inline bool read_digits(std::string_view s, size_t pos, size_t n, int& out) {
    if (pos + n > s.size()) return false;
    int v = 0;
    for (size_t i = 0; i < n; ++i) {
        char c = s[pos + i];
        if (c < '0' || c > '9') return false;
        v = v * 10 + (c - '0');
    }
    out = v;
    return true;
}
}  // namespace detail

/// Parse "yyyy-mm-dd" to days since epoch. Validates the calendar.
inline std::optional<std::int64_t> parse_date(std::string_view s) {
    int y, m, d;
    if (s.size() != 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
    if (!detail::read_digits(s, 0, 4, y) || !detail::read_digits(s, 5, 2, m) ||
        !detail::read_digits(s, 8, 2, d))
        return std::nullopt;
    if (m < 1 || m > 12 || d < 1 || d > days_in_month(y, m)) return std::nullopt;
    return days_from_civil(y, m, d);
}

/// Parse "yyyy-mm-dd HH:MM:SS" to seconds since epoch.
inline std::optional<std::int64_t> parse_datetime(std::string_view s) {
    if (s.size() != 19 || s[10] != ' ' || s[13] != ':' || s[16] != ':') return std::nullopt;
    auto day = parse_date(s.substr(0, 10));
    if (!day) return std::nullopt;
    int hh, mm, ss;
    if (!detail::read_digits(s, 11, 2, hh) || !detail::read_digits(s, 14, 2, mm) ||
        !detail::read_digits(s, 17, 2, ss))
        return std::nullopt;
    if (hh > 23 || mm > 59 || ss > 59) return std::nullopt;
    return *day * kSecondsPerDay + hh * 3600 + mm * 60 + ss;
}

inline std::string format_date(std::int64_t days) {
    int y, m, d;
    civil_from_days(days, y, m, d);
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", y, m, d);
    return buf;
}

inline std::string format_datetime(std::int64_t sec) {
    std::int64_t day = sec >= 0 ? sec / kSecondsPerDay : (sec - kSecondsPerDay + 1) / kSecondsPerDay;
    int rem = static_cast<int>(sec - day * kSecondsPerDay);
    char buf[32];
    std::snprintf(buf, sizeof buf, "%s %02d:%02d:%02d", format_date(day).c_str(), rem / 3600,
                  (rem / 60) % 60, rem % 60);
    return buf;
}

inline std::int64_t day_of_timestamp(std::int64_t sec) {
    return sec >= 0 ? sec / kSecondsPerDay : (sec - kSecondsPerDay + 1) / kSecondsPerDay;
}

inline int second_of_day(std::int64_t sec) {
    return static_cast<int>(sec - day_of_timestamp(sec) * kSecondsPerDay);
}

}  // namespace ubirisk
