#pragma once

#include <cmath>
#include <cstdint>
#include <string>

namespace driveframe {

// All helpers work on "local time" obtained as utc_ts + tz_offset_hours*3600.
// Local days are counted from the Unix epoch day (1970-01-01).

inline std::int64_t local_day(double utc_ts, double tz_offset_hours) {
    double local = utc_ts + tz_offset_hours * 3600.0;
    return static_cast<std::int64_t>(std::floor(local / 86400.0));
}

// Fractional hour of day in [0, 24).
inline double local_hour(double utc_ts, double tz_offset_hours) {
    double local = utc_ts + tz_offset_hours * 3600.0;
    double sec = std::fmod(local, 86400.0);
    if (sec < 0.0) sec += 86400.0;
    return sec / 3600.0;
}

// Day of week with Monday = 0. 1970-01-01 was a Thursday (index 3).
inline int day_of_week(std::int64_t day) {
    std::int64_t d = (day + 3) % 7;
    if (d < 0) d += 7;
    return static_cast<int>(d);
}

// Monday (local day number) of the week containing `day`.
inline std::int64_t week_monday(std::int64_t day) {
    return day - day_of_week(day);
}

// Days-from-civil / civil-from-days (Howard Hinnant's algorithms).
std::int64_t days_from_civil(int y, unsigned m, unsigned d);
void civil_from_days(std::int64_t z, int& y, unsigned& m, unsigned& d);

// "YYYY-MM-DD" for a local day number.
std::string iso_date(std::int64_t day);

} // namespace driveframe
