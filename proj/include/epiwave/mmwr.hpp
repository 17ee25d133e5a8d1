#pragma once

#include <chrono>
#include <string>
#include <string_view>

namespace epiwave {

/// One CDC epidemiological week (Sunday through Saturday), identified by its
/// Saturday end date. Week 1 of an MMWR year is the week containing at least
/// four days of January, i.e. the week whose Wednesday falls in January.
struct MmwrWeek {
    int year = 0;
    int week = 0;                      // 1..53
    std::chrono::sys_days end_date{};  // always a Saturday

    friend bool operator==(const MmwrWeek& a, const MmwrWeek& b) {
        return a.end_date == b.end_date;
    }
    friend auto operator<=>(const MmwrWeek& a, const MmwrWeek& b) {
        return a.end_date <=> b.end_date;
    }
};

/// MMWR week containing `date`. Supported range: [1900-01-01, 2100-12-31].
MmwrWeek mmwr_week_of(std::chrono::sys_days date);

MmwrWeek plus_weeks(const MmwrWeek& w, long n);

/// to - from, in whole weeks.
long weeks_between(const MmwrWeek& from, const MmwrWeek& to);

bool is_saturday(std::chrono::sys_days d);

/// Parses YYYY-MM-DD; throws FormatError on anything else.
std::chrono::sys_days parse_iso_date(std::string_view s);
std::string format_iso_date(std::chrono::sys_days d);

} // namespace epiwave
