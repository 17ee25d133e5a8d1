#include "epiwave/mmwr.hpp"

#include <cstdio>

#include "epiwave/util.hpp"

namespace epiwave {

namespace {

using std::chrono::days;
using std::chrono::sys_days;
using std::chrono::weekday;
using std::chrono::year;
using std::chrono::year_month_day;

constexpr sys_days kMinDate = sys_days{year{1900} / 1 / 1};
constexpr sys_days kMaxDate = sys_days{year{2100} / 12 / 31};

sys_days saturday_of_week(sys_days d) {
    unsigned dow = weekday{d}.c_encoding();  // Sunday = 0 .. Saturday = 6
    return d + days{6 - static_cast<int>(dow)};
}

sys_days first_wednesday_of_january(int y) {
    sys_days d = sys_days{year{y} / 1 / 1};
    while (weekday{d} != std::chrono::Wednesday) d += days{1};
    return d;
}

} // namespace

MmwrWeek mmwr_week_of(sys_days date) {
    if (date < kMinDate || date > kMaxDate)
        throw RangeError("mmwr_week_of: date outside supported range [1900, 2100]: " +
                         format_iso_date(date));
    sys_days end = saturday_of_week(date);
    sys_days wed = end - days{3};
    int mmwr_year = static_cast<int>(year_month_day{wed}.year());
    sys_days wk1_wed = first_wednesday_of_january(mmwr_year);
    int week = static_cast<int>((wed - wk1_wed).count() / 7) + 1;
    return MmwrWeek{mmwr_year, week, end};
}

MmwrWeek plus_weeks(const MmwrWeek& w, long n) {
    return mmwr_week_of(w.end_date + days{7 * n});
}

long weeks_between(const MmwrWeek& from, const MmwrWeek& to) {
    return (to.end_date - from.end_date).count() / 7;
}

bool is_saturday(std::chrono::sys_days d) {
    return weekday{d} == std::chrono::Saturday;
}

std::chrono::sys_days parse_iso_date(std::string_view s) {
    if (s.size() != 10 || s[4] != '-' || s[7] != '-')
        throw FormatError("bad ISO date: '" + std::string(s) + "'");
    auto y = parse_long(s.substr(0, 4));
    auto m = parse_long(s.substr(5, 2));
    auto d = parse_long(s.substr(8, 2));
    if (!y || !m || !d) throw FormatError("bad ISO date: '" + std::string(s) + "'");
    year_month_day ymd{year{static_cast<int>(*y)}, std::chrono::month{static_cast<unsigned>(*m)},
                       std::chrono::day{static_cast<unsigned>(*d)}};
    if (!ymd.ok()) throw FormatError("invalid calendar date: '" + std::string(s) + "'");
    return sys_days{ymd};
}

std::string format_iso_date(std::chrono::sys_days d) {
    year_month_day ymd{d};
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
    return std::string(buf);
}

} // namespace epiwave
