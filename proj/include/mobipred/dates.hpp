#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace mobipred {

// Calendar days are stored as days since 1970-01-01; instants as UTC epoch
// seconds. Local-time rules (night windows, weekdays) are evaluated through a
// fixed per-user UTC offset.

using EpochSeconds = std::int64_t;
using EpochDay = std::int32_t;

constexpr std::int64_t kSecondsPerDay = 86400;
constexpr std::int64_t kSecondsPerMinute = 60;

// Floor division, correct for negative numerators.
constexpr std::int64_t floor_div(std::int64_t a, std::int64_t b) {
    std::int64_t q = a / b;
    return (a % b != 0 && (a < 0) != (b < 0)) ? q - 1 : q;
}

constexpr std::int64_t floor_mod(std::int64_t a, std::int64_t b) {
    return a - floor_div(a, b) * b;
}

EpochDay days_from_civil(int year, int month, int day);
void civil_from_days(EpochDay days, int& year, int& month, int& day);

// "YYYY-MM-DD" only.
std::optional<EpochDay> parse_iso_date(const std::string& text);
std::string format_iso_date(EpochDay day);

// Fixed UTC offset. Accepts "UTC", "UTC+HH:MM", "UTC-HH:MM", "+HH:MM",
// "-HH:MM", "+HHMM" and bare signed hours such as "-5".
std::optional<int> parse_utc_offset_seconds(const std::string& text);
std::string format_utc_offset(int offset_seconds);

inline EpochDay local_day(EpochSeconds utc, int tz_offset_s) {
    return static_cast<EpochDay>(floor_div(utc + tz_offset_s, kSecondsPerDay));
}

// Minutes past local midnight, in [0, 1440).
inline int local_minute_of_day(EpochSeconds utc, int tz_offset_s) {
    return static_cast<int>(floor_mod(utc + tz_offset_s, kSecondsPerDay) / kSecondsPerMinute);
}

// 0 = Monday ... 6 = Sunday.
inline int day_of_week(EpochDay day) {
    return static_cast<int>(floor_mod(static_cast<std::int64_t>(day) + 3, 7));
}

inline bool is_weekend(EpochDay day) {
    return day_of_week(day) >= 5;
}

}  // namespace mobipred
