#pragma once

#include <cstdint>
#include <cstdio>
#include <string>
#include <string_view>

#include "phaselda/util.hpp"

namespace phaselda {

// Calendar date as a count of days since 1970-01-01 (proleptic Gregorian).
// All arithmetic is integer; there is no timezone here. The corpus layer
// decides which instant falls on which day.
class Date {
public:
    Date() = default;
    explicit Date(std::int32_t days_since_epoch) : days_(days_since_epoch) {}

    static Date from_ymd(int y, int m, int d) { return Date(days_from_civil(y, m, d)); }

    // Accepts YYYY-MM-DD only.
    static Date parse(std::string_view s) {
        int y = 0, m = 0, d = 0;
        if (s.size() != 10 || s[4] != '-' || s[7] != '-' ||
            std::sscanf(std::string(s).c_str(), "%d-%d-%d", &y, &m, &d) != 3)
            throw ConfigError("invalid date: '" + std::string(s) + "' (expected YYYY-MM-DD)");
        if (m < 1 || m > 12 || d < 1 || d > days_in_month(y, m))
            throw ConfigError("invalid date: '" + std::string(s) + "'");
        return from_ymd(y, m, d);
    }

    std::int32_t days() const { return days_; }

    std::string str() const {
        auto [y, m, d] = civil_from_days(days_);
        char buf[16];
        std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", y, m, d);
        return buf;
    }

    Date operator+(int n) const { return Date(days_ + n); }
    Date operator-(int n) const { return Date(days_ - n); }
    int operator-(Date o) const { return days_ - o.days_; }
    Date& operator++() { ++days_; return *this; }
    auto operator<=>(const Date&) const = default;

private:
    std::int32_t days_ = 0;

    static bool leap(int y) { return y % 4 == 0 && (y % 100 != 0 || y % 400 == 0); }

    static int days_in_month(int y, int m) {
        static const int n[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
        return m == 2 && leap(y) ? 29 : n[m - 1];
    }

    // Howard Hinnant's civil-day algorithms.
    static std::int32_t days_from_civil(int y, int m, int d) {
        y -= m <= 2;
        const int era = (y >= 0 ? y : y - 399) / 400;
        const unsigned yoe = static_cast<unsigned>(y - era * 400);
        const unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
        const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
        return era * 146097 + static_cast<int>(doe) - 719468;
    }

    struct Ymd { int y, m, d; };

    static Ymd civil_from_days(std::int32_t z) {
        z += 719468;
        const int era = (z >= 0 ? z : z - 146096) / 146097;
        const unsigned doe = static_cast<unsigned>(z - era * 146097);
        const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
        const int y = static_cast<int>(yoe) + era * 400;
        const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
        const unsigned mp = (5 * doy + 2) / 153;
        const unsigned d = doy - (153 * mp + 2) / 5 + 1;
        const unsigned m = mp + (mp < 10 ? 3 : -9);
        return {y + (m <= 2), static_cast<int>(m), static_cast<int>(d)};
    }
};

// Inclusive calendar interval.
struct DateRange {
    Date start;
    Date end;

    int days() const { return end - start + 1; }
    bool contains(Date d) const { return d >= start && d <= end; }
};

// ISO-8601 timestamp (or raw epoch seconds) -> seconds since the Unix epoch.
// Accepted forms: epoch integer, YYYY-MM-DD, YYYY-MM-DD[T ]hh:mm:ss with an
// optional fractional part (truncated) and optional Z / +hh:mm / -hhmm offset.
inline std::int64_t parse_timestamp(std::string_view s) {
    if (s.empty()) throw ConfigError("empty timestamp");

    bool numeric = true;
    for (std::size_t i = 0; i < s.size(); ++i) {
        char c = s[i];
        if (!(c >= '0' && c <= '9') && !(i == 0 && c == '-')) { numeric = false; break; }
    }
    if (numeric) {
        std::int64_t v = 0;
        auto res = std::from_chars(s.data(), s.data() + s.size(), v);
        if (res.ec != std::errc() || res.ptr != s.data() + s.size())
            throw ConfigError("invalid epoch timestamp: '" + std::string(s) + "'");
        return v;
    }

    if (s.size() < 10) throw ConfigError("invalid timestamp: '" + std::string(s) + "'");
    Date day = Date::parse(s.substr(0, 10));
    std::int64_t secs = std::int64_t(day.days()) * 86400;
    std::size_t pos = 10;
    if (pos < s.size() && (s[pos] == 'T' || s[pos] == ' ')) {
        if (s.size() < pos + 9) throw ConfigError("invalid timestamp: '" + std::string(s) + "'");
        int hh = 0, mm = 0, ss = 0;
        if (std::sscanf(std::string(s.substr(pos + 1, 8)).c_str(), "%d:%d:%d", &hh, &mm, &ss) != 3 ||
            hh < 0 || hh > 23 || mm < 0 || mm > 59 || ss < 0 || ss > 60)
            throw ConfigError("invalid timestamp: '" + std::string(s) + "'");
        secs += hh * 3600 + mm * 60 + ss;
        pos += 9;
        if (pos < s.size() && s[pos] == '.') {  // fractional seconds: truncate
            ++pos;
            while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') ++pos;
        }
    }
    if (pos < s.size()) {
        char c = s[pos];
        if (c == 'Z' && pos + 1 == s.size()) return secs;
        if (c == '+' || c == '-') {
            int oh = 0, om = 0;
            std::string rest(s.substr(pos + 1));
            if (std::sscanf(rest.c_str(), "%2d:%2d", &oh, &om) == 2 ||
                std::sscanf(rest.c_str(), "%2d%2d", &oh, &om) == 2 ||
                (std::sscanf(rest.c_str(), "%2d", &oh) == 1 && rest.size() == 2)) {
                std::int64_t off = oh * 3600 + om * 60;
                return c == '+' ? secs - off : secs + off;
            }
        }
        throw ConfigError("invalid timestamp suffix: '" + std::string(s) + "'");
    }
    return secs;
}

// Day a given instant falls on; offset_seconds shifts the day boundary
// (default 0 = UTC midnight).
inline Date day_of(std::int64_t epoch_seconds, std::int64_t offset_seconds = 0) {
    std::int64_t t = epoch_seconds + offset_seconds;
    std::int64_t d = t >= 0 ? t / 86400 : -((-t + 86399) / 86400);
    return Date(static_cast<std::int32_t>(d));
}

}  // namespace phaselda
