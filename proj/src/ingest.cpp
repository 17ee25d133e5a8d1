#include "epiwave/ingest.hpp"

#include <cmath>

#include "epiwave/util.hpp"

namespace epiwave {

using std::chrono::days;
using std::chrono::sys_days;

std::optional<Resolution> parse_resolution(std::string_view s) {
    if (s == "daily") return Resolution::daily;
    if (s == "weekly") return Resolution::weekly;
    return std::nullopt;
}

std::string_view resolution_name(Resolution r) {
    return r == Resolution::daily ? "daily" : "weekly";
}

WeeklySeries aggregate_daily_to_weekly(const RawSeries& r) {
    if (r.resolution != Resolution::daily)
        throw ConfigError("aggregate_daily_to_weekly: series resolution is not daily");
    if (r.observations.empty())
        throw EmptySeriesError("aggregate_daily_to_weekly: empty input series");

    sys_days first_date = r.observations.front().date;
    sys_days last_date = r.observations.back().date;
    MmwrWeek first_week = mmwr_week_of(first_date);
    MmwrWeek last_week = mmwr_week_of(last_date);

    // Drop edge weeks whose Sunday..Saturday span is not fully inside the
    // observed date range.
    if (first_week.end_date - days{6} < first_date) first_week = plus_weeks(first_week, 1);
    if (last_week.end_date > last_date) last_week = plus_weeks(last_week, -1);
    long n_weeks = weeks_between(first_week, last_week) + 1;
    if (n_weeks <= 0)
        throw EmptySeriesError("aggregate_daily_to_weekly: no complete Sunday-Saturday week");

    WeeklySeries out;
    out.key = r.key;
    out.start_week = first_week;
    out.values.assign(static_cast<std::size_t>(n_weeks), std::nullopt);

    std::vector<int> days_seen(static_cast<std::size_t>(n_weeks), 0);
    std::vector<double> sums(static_cast<std::size_t>(n_weeks), 0.0);
    std::vector<bool> has_missing(static_cast<std::size_t>(n_weeks), false);

    sys_days range_begin = first_week.end_date - days{6};
    for (const auto& obs : r.observations) {
        long offset = (obs.date - range_begin).count();
        if (offset < 0) continue;
        long w = offset / 7;
        if (w >= n_weeks) continue;
        auto wi = static_cast<std::size_t>(w);
        ++days_seen[wi];
        if (obs.value) {
            if (!std::isfinite(*obs.value) || *obs.value < 0)
                throw FormatError("aggregate_daily_to_weekly: value not finite and >= 0 on " +
                                  format_iso_date(obs.date));
            sums[wi] += *obs.value;
        } else {
            has_missing[wi] = true;
        }
    }

    for (std::size_t w = 0; w < out.values.size(); ++w) {
        if (days_seen[w] == 7 && !has_missing[w]) out.values[w] = sums[w];
    }
    return out;
}

WeeklySeries align_weekly(const RawSeries& r) {
    if (r.observations.empty())
        throw EmptySeriesError("align_weekly: empty input series");

    MmwrWeek first_week = mmwr_week_of(r.observations.front().date);
    MmwrWeek last_week = mmwr_week_of(r.observations.back().date);
    long n_weeks = weeks_between(first_week, last_week) + 1;

    WeeklySeries out;
    out.key = r.key;
    out.start_week = first_week;
    out.values.assign(static_cast<std::size_t>(n_weeks), std::nullopt);

    std::vector<bool> seen(static_cast<std::size_t>(n_weeks), false);
    for (const auto& obs : r.observations) {
        long w = weeks_between(first_week, mmwr_week_of(obs.date));
        auto wi = static_cast<std::size_t>(w);
        if (seen[wi])
            throw FormatError("align_weekly: two observations in MMWR week ending " +
                              format_iso_date(plus_weeks(first_week, w).end_date));
        seen[wi] = true;
        if (obs.value) {
            if (!std::isfinite(*obs.value) || *obs.value < 0)
                throw FormatError("align_weekly: value not finite and >= 0 on " +
                                  format_iso_date(obs.date));
            out.values[wi] = *obs.value;
        }
    }
    return out;
}

WeeklySeries to_weekly(const RawSeries& r) {
    return r.resolution == Resolution::daily ? aggregate_daily_to_weekly(r) : align_weekly(r);
}

WeeklySeries impute_linear(const WeeklySeries& s) {
    long first = -1, last = -1;
    long present = 0;
    for (std::size_t i = 0; i < s.values.size(); ++i) {
        if (s.values[i]) {
            if (first < 0) first = static_cast<long>(i);
            last = static_cast<long>(i);
            ++present;
        }
    }
    if (present < 2)
        throw InsufficientDataError("impute_linear: need at least 2 present values, have " +
                                    std::to_string(present));

    WeeklySeries out;
    out.key = s.key;
    out.start_week = plus_weeks(s.start_week, first);
    out.values.reserve(static_cast<std::size_t>(last - first + 1));

    long prev = first;
    for (long i = first; i <= last; ++i) {
        if (s.values[static_cast<std::size_t>(i)]) {
            prev = i;
            out.values.push_back(s.values[static_cast<std::size_t>(i)]);
            continue;
        }
        long next = i + 1;
        while (!s.values[static_cast<std::size_t>(next)]) ++next;
        double lo = *s.values[static_cast<std::size_t>(prev)];
        double hi = *s.values[static_cast<std::size_t>(next)];
        double frac = static_cast<double>(i - prev) / static_cast<double>(next - prev);
        out.values.push_back(lo + (hi - lo) * frac);
    }
    return out;
}

SparseFilterDecision filter_sparse(const WeeklySeries& s, double max_missing_fraction) {
    if (max_missing_fraction < 0 || max_missing_fraction > 1)
        throw RangeError("filter_sparse: threshold must lie in [0, 1]");
    SparseFilterDecision d;
    if (s.values.empty()) {
        d.keep = false;
        d.missing_fraction = 1.0;
        d.reason = "series is empty";
        return d;
    }
    d.missing_fraction =
        static_cast<double>(s.missing_count()) / static_cast<double>(s.values.size());
    if (d.missing_fraction > max_missing_fraction) {
        d.keep = false;
        d.reason = "missing fraction " + format_double(d.missing_fraction) + " exceeds threshold " +
                   format_double(max_missing_fraction);
    }
    return d;
}

} // namespace epiwave
