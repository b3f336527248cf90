#pragma once

#include <chrono>
#include <cstdio>
#include <string>
#include <string_view>

#include "sunbroker/errors.hpp"

namespace sunbroker {

// All timestamps in the library are UTC with second resolution.
using UtcTime = std::chrono::sys_seconds;

struct CivilTime {
    int year;
    unsigned month;  // 1..12
    unsigned day;    // 1..31
    unsigned hour;   // 0..23
    unsigned minute; // 0..59
    unsigned second; // 0..59
};

inline UtcTime make_utc(int year, unsigned month, unsigned day,
                        unsigned hour = 0, unsigned minute = 0, unsigned second = 0) {
    using namespace std::chrono;
    year_month_day ymd{std::chrono::year{year}, std::chrono::month{month}, std::chrono::day{day}};
    if (!ymd.ok())
        throw DomainError("invalid calendar date " + std::to_string(year) + "-" +
                          std::to_string(month) + "-" + std::to_string(day));
    return sys_days{ymd} + hours{hour} + minutes{minute} + seconds{second};
}

inline CivilTime civil(UtcTime t) {
    using namespace std::chrono;
    auto d = floor<days>(t);
    year_month_day ymd{d};
    hh_mm_ss hms{t - d};
    return CivilTime{int(ymd.year()), unsigned(ymd.month()), unsigned(ymd.day()),
                     unsigned(hms.hours().count()), unsigned(hms.minutes().count()),
                     unsigned(hms.seconds().count())};
}

inline UtcTime truncate_to_hour(UtcTime t) {
    return std::chrono::floor<std::chrono::hours>(t);
}

inline bool is_hour_aligned(UtcTime t) {
    return truncate_to_hour(t) == t;
}

// Fractional hour of day, e.g. 12:30:00 -> 12.5.
inline double hour_of_day(UtcTime t) {
    auto d = std::chrono::floor<std::chrono::days>(t);
    return std::chrono::duration<double, std::ratio<3600>>(t - d).count();
}

inline std::string format_iso8601(UtcTime t) {
    CivilTime c = civil(t);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02uT%02u:%02u:%02uZ",
                  c.year, c.month, c.day, c.hour, c.minute, c.second);
    return buf;
}

// Accepts YYYY-MM-DDTHH:MM:SSZ and the seconds-less YYYY-MM-DDTHH:MMZ form.
inline UtcTime parse_iso8601(std::string_view s) {
    int y = 0;
    unsigned mo = 0, d = 0, h = 0, mi = 0, sec = 0;
    int n = std::sscanf(std::string(s).c_str(), "%d-%u-%uT%u:%u:%u", &y, &mo, &d, &h, &mi, &sec);
    if (n < 5)
        throw FormatError("unparseable ISO-8601 timestamp '" + std::string(s) + "'");
    if (h > 23 || mi > 59 || sec > 59)
        throw FormatError("out-of-range time in '" + std::string(s) + "'");
    return make_utc(y, mo, d, h, mi, sec);
}

} // namespace sunbroker
