#include "mobipred/dates.hpp"

#include <cctype>
#include <cstdio>
#include <cstdlib>

namespace mobipred {

// Howard Hinnant's civil-days algorithm.
EpochDay days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    const int era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2u) / 5u + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return static_cast<EpochDay>(era * 146097 + static_cast<int>(doe) - 719468);
}

void civil_from_days(EpochDay days, int& year, int& month, int& day) {
    std::int64_t z = static_cast<std::int64_t>(days) + 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    day = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
    month = static_cast<int>(mp + (mp < 10 ? 3 : -9));
    year = static_cast<int>(y + (month <= 2));
}

std::optional<EpochDay> parse_iso_date(const std::string& text) {
    // Fixed-width YYYY-MM-DD only; sscanf-style leniency would let
    // "2022-3-7" or " 2022-03-07" slip through ingest validation.
    if (text.size() != 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
    for (std::size_t i : {0u, 1u, 2u, 3u, 5u, 6u, 8u, 9u})
        if (text[i] < '0' || text[i] > '9') return std::nullopt;
    const int y = (text[0] - '0') * 1000 + (text[1] - '0') * 100 + (text[2] - '0') * 10 + (text[3] - '0');
    const int m = (text[5] - '0') * 10 + (text[6] - '0');
    const int d = (text[8] - '0') * 10 + (text[9] - '0');
    if (m < 1 || m > 12 || d < 1 || d > 31) return std::nullopt;
    EpochDay days = days_from_civil(y, m, d);
    int ry, rm, rd;
    civil_from_days(days, ry, rm, rd);
    if (ry != y || rm != m || rd != d) return std::nullopt;
    return days;
}

std::string format_iso_date(EpochDay day) {
    int y, m, d;
    civil_from_days(day, y, m, d);
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", y, m, d);
    return buf;
}

std::optional<int> parse_utc_offset_seconds(const std::string& text) {
    if (text.empty()) return std::nullopt;
    std::string s = text;
    if (s.rfind("UTC", 0) == 0 || s.rfind("utc", 0) == 0) s = s.substr(3);
    if (s.empty()) return 0;

    int sign = 1;
    size_t i = 0;
    if (s[i] == '+') {
        ++i;
    } else if (s[i] == '-') {
        sign = -1;
        ++i;
    }
    if (i >= s.size() || !std::isdigit(static_cast<unsigned char>(s[i]))) return std::nullopt;

    int hours = 0;
    while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) {
        hours = hours * 10 + (s[i] - '0');
        ++i;
    }
    int minutes = 0;
    if (i < s.size() && s[i] == ':') ++i;
    if (i < s.size()) {
        if (!std::isdigit(static_cast<unsigned char>(s[i]))) return std::nullopt;
        while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) {
            minutes = minutes * 10 + (s[i] - '0');
            ++i;
        }
    }
    // "+0530" style: four digits with no separator.
    if (minutes == 0 && hours >= 100) {
        minutes = hours % 100;
        hours /= 100;
    }
    if (hours > 18 || minutes > 59) return std::nullopt;
    return sign * (hours * 3600 + minutes * 60);
}

std::string format_utc_offset(int offset_seconds) {
    char sign = offset_seconds < 0 ? '-' : '+';
    int abs_s = std::abs(offset_seconds);
    char buf[24];
    std::snprintf(buf, sizeof(buf), "UTC%c%02d:%02d", sign, abs_s / 3600, (abs_s % 3600) / 60);
    return buf;
}

}  // namespace mobipred
