#pragma once

#include <array>
#include <charconv>
#include <compare>
#include <cstdint>
#include <cstdio>
#include <string>
#include <string_view>

#include "epf/core/error.hpp"

namespace epf {

// Calendar date stored as days since 1970-01-01 (proleptic Gregorian).
class Date {
public:
    Date() : serial_(0) {}
    explicit Date(std::int32_t serial) : serial_(serial) {}

    static Date from_ymd(int y, int m, int d) {
        if (m < 1 || m > 12 || d < 1 || d > days_in_month(y, m))
            throw ValidationError("invalid calendar date " + std::to_string(y) + "-" +
                                  std::to_string(m) + "-" + std::to_string(d));
        return Date(days_from_civil(y, m, d));
    }

    // Accepts strict ISO "YYYY-MM-DD".
    static Date parse(std::string_view s) {
        int y = 0, m = 0, d = 0;
        if (s.size() != 10 || s[4] != '-' || s[7] != '-' || !parse_int(s.substr(0, 4), y) ||
            !parse_int(s.substr(5, 2), m) || !parse_int(s.substr(8, 2), d))
            throw ValidationError("unparseable date '" + std::string(s) + "' (expected YYYY-MM-DD)");
        return from_ymd(y, m, d);
    }

    std::int32_t serial() const { return serial_; }

    struct Ymd {
        int year, month, day;
    };

    Ymd ymd() const { return civil_from_days(serial_); }
    int year() const { return ymd().year; }
    int month() const { return ymd().month; }
    int day() const { return ymd().day; }

    // 0 = Monday .. 6 = Sunday.
    int weekday() const {
        std::int32_t z = serial_ + 3;  // 1970-01-01 was a Thursday
        return static_cast<int>(z >= 0 ? z % 7 : (z % 7 + 7) % 7);
    }

    struct IsoWeek {
        int year, week;
    };

    IsoWeek iso_week() const {
        // Week containing the Thursday determines the ISO year.
        Date thursday(serial_ - weekday() + 3);
        int iso_year = thursday.year();
        Date jan4 = from_ymd(iso_year, 1, 4);
        Date week1_monday(jan4.serial() - jan4.weekday());
        int week = static_cast<int>((thursday.serial() - week1_monday.serial()) / 7) + 1;
        return {iso_year, week};
    }

    std::string str() const {
        auto [y, m, d] = ymd();
        char buf[16];
        std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", y, m, d);
        return buf;
    }

    Date operator+(int days) const { return Date(serial_ + days); }
    Date operator-(int days) const { return Date(serial_ - days); }
    std::int32_t operator-(Date other) const { return serial_ - other.serial_; }
    Date& operator++() {
        ++serial_;
        return *this;
    }
    auto operator<=>(const Date&) const = default;

    static bool is_leap(int y) { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; }

    static int days_in_month(int y, int m) {
        static constexpr std::array<int, 12> dm{31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
        return m == 2 && is_leap(y) ? 29 : dm[static_cast<std::size_t>(m - 1)];
    }

private:
    static bool parse_int(std::string_view s, int& out) {
        auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
        return ec == std::errc() && p == s.data() + s.size();
    }

    // Howard Hinnant's civil calendar algorithms.
    static std::int32_t days_from_civil(int y, int m, int d) {
        y -= m <= 2;
        const int era = (y >= 0 ? y : y - 399) / 400;
        const unsigned yoe = static_cast<unsigned>(y - era * 400);
        const unsigned doy = static_cast<unsigned>((153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1);
        const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
        return era * 146097 + static_cast<std::int32_t>(doe) - 719468;
    }

    static Ymd civil_from_days(std::int32_t z) {
        z += 719468;
        const std::int32_t era = (z >= 0 ? z : z - 146096) / 146097;
        const unsigned doe = static_cast<unsigned>(z - era * 146097);
        const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
        const int y = static_cast<int>(yoe) + era * 400;
        const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
        const unsigned mp = (5 * doy + 2) / 153;
        const unsigned d = doy - (153 * mp + 2) / 5 + 1;
        const unsigned m = mp + (mp < 10 ? 3 : -9);
        return {y + (m <= 2), static_cast<int>(m), static_cast<int>(d)};
    }

    std::int32_t serial_;
};

}  // namespace epf
