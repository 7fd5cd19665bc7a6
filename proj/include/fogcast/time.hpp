/* Copyright 2026 The Fogcast Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
#ifndef FOGCAST_TIME_HPP
#define FOGCAST_TIME_HPP

#include <cstdint>
#include <cstdio>
#include <string>

#include "fogcast/common.hpp"

namespace fogcast {

// UTC instant with whole-second resolution. Parsing accepts ISO-8601 with a
// trailing Z or a +hh:mm / -hh:mm offset (normalized to UTC); formatting is
// always "YYYY-MM-DDThh:mm:ssZ".
class UtcTime {
  public:
    UtcTime() = default;
    explicit constexpr UtcTime(std::int64_t epoch_seconds) : seconds_(epoch_seconds) {}

    constexpr std::int64_t epoch_seconds() const { return seconds_; }

    constexpr UtcTime plus_seconds(std::int64_t s) const { return UtcTime(seconds_ + s); }
    constexpr UtcTime plus_hours(std::int64_t h) const { return UtcTime(seconds_ + h * 3600); }

    friend constexpr bool operator==(UtcTime a, UtcTime b) { return a.seconds_ == b.seconds_; }
    friend constexpr bool operator!=(UtcTime a, UtcTime b) { return a.seconds_ != b.seconds_; }
    friend constexpr bool operator<(UtcTime a, UtcTime b) { return a.seconds_ < b.seconds_; }
    friend constexpr bool operator<=(UtcTime a, UtcTime b) { return a.seconds_ <= b.seconds_; }
    friend constexpr bool operator>(UtcTime a, UtcTime b) { return a.seconds_ > b.seconds_; }
    friend constexpr bool operator>=(UtcTime a, UtcTime b) { return a.seconds_ >= b.seconds_; }

    struct Civil {
        int year;
        int month;   // 1..12
        int day;     // 1..31
        int hour;    // 0..23
        int minute;  // 0..59
        int second;  // 0..59
    };

    // Days since 1970-01-01 for a proleptic Gregorian date.
    static constexpr std::int64_t days_from_civil(int y, int m, int d) {
        y -= m <= 2;
        const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
        const unsigned yoe = static_cast<unsigned>(y - era * 400);
        const unsigned doy = (153u * static_cast<unsigned>(m + (m > 2 ? -3 : 9)) + 2u) / 5u +
                             static_cast<unsigned>(d) - 1u;
        const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
        return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
    }

    static constexpr Civil civil_from_days(std::int64_t z) {
        z += 719468;
        const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
        const unsigned doe = static_cast<unsigned>(z - era * 146097);
        const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
        const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
        const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
        const unsigned mp = (5 * doy + 2) / 153;
        const unsigned d = doy - (153 * mp + 2) / 5 + 1;
        const unsigned m = mp + (mp < 10 ? 3 : -9);
        return Civil{static_cast<int>(y + (m <= 2)), static_cast<int>(m), static_cast<int>(d),
                     0, 0, 0};
    }

    static UtcTime from_civil(int year, int month, int day, int hour, int minute, int second) {
        return UtcTime(days_from_civil(year, month, day) * 86400 + hour * 3600 + minute * 60 +
                       second);
    }

    Civil civil() const {
        std::int64_t days = seconds_ / 86400;
        std::int64_t rem = seconds_ % 86400;
        if (rem < 0) {
            rem += 86400;
            days -= 1;
        }
        Civil c = civil_from_days(days);
        c.hour = static_cast<int>(rem / 3600);
        c.minute = static_cast<int>((rem % 3600) / 60);
        c.second = static_cast<int>(rem % 60);
        return c;
    }

    int year() const { return civil().year; }
    int month() const { return civil().month; }

    std::string iso8601() const {
        const Civil c = civil();
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02dZ", c.year, c.month, c.day,
                      c.hour, c.minute, c.second);
        return buf;
    }

    static UtcTime parse(const std::string& text) {
        int y, mo, d, h, mi, s;
        int off_h = 0, off_m = 0;
        char sign = 'Z';
        // Fixed-position scan: date and time fields are mandatory.
        if (text.size() < 20 ||
            std::sscanf(text.c_str(), "%4d-%2d-%2dT%2d:%2d:%2d", &y, &mo, &d, &h, &mi, &s) != 6) {
            throw InputError("bad timestamp '" + text + "': expected YYYY-MM-DDThh:mm:ssZ");
        }
        const std::string tail = text.substr(19);
        if (tail == "Z") {
            sign = 'Z';
        } else if ((tail[0] == '+' || tail[0] == '-') && tail.size() == 6 && tail[3] == ':' &&
                   std::sscanf(tail.c_str() + 1, "%2d:%2d", &off_h, &off_m) == 2) {
            sign = tail[0];
        } else {
            throw InputError("bad timestamp '" + text + "': expected Z or +hh:mm offset");
        }
        validate_civil(y, mo, d, h, mi, s, text);
        std::int64_t secs = days_from_civil(y, mo, d) * 86400 + h * 3600 + mi * 60 + s;
        const std::int64_t offset = (off_h * 3600 + off_m * 60);
        if (sign == '+') secs -= offset;
        if (sign == '-') secs += offset;
        return UtcTime(secs);
    }

  private:
    static void validate_civil(int y, int mo, int d, int h, int mi, int s,
                               const std::string& text) {
        static const int mdays[12] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
        const bool leap = (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
        const int maxd = (mo == 2 && leap) ? 29 : (mo >= 1 && mo <= 12 ? mdays[mo - 1] : 0);
        if (mo < 1 || mo > 12 || d < 1 || d > maxd || h < 0 || h > 23 || mi < 0 || mi > 59 ||
            s < 0 || s > 59) {
            throw InputError("bad timestamp '" + text + "': field out of range");
        }
    }

    std::int64_t seconds_ = 0;
};

}  // namespace fogcast

#endif  // FOGCAST_TIME_HPP
