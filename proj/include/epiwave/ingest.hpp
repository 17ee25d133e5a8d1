#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <vector>

#include "epiwave/types.hpp"

namespace epiwave {

enum class Resolution { daily, weekly };

std::optional<Resolution> parse_resolution(std::string_view s);
std::string_view resolution_name(Resolution r);

struct RawObservation {
    std::chrono::sys_days date;
    std::optional<double> value;  // nullopt = missing report
};

/// Raw surveillance export for one series, before weekly alignment.
/// Dates must be strictly increasing; present values finite and >= 0.
struct RawSeries {
    SeriesKey key;
    Resolution resolution = Resolution::weekly;
    std::vector<RawObservation> observations;
};

/// Sums daily values over Sunday-Saturday windows. Weeks with any absent or
/// missing day become missing; leading/trailing weeks not fully covered by
/// the input date range are dropped. Throws EmptySeriesError when no complete
/// week remains.
WeeklySeries aggregate_daily_to_weekly(const RawSeries& r);

/// Weekly input passthrough: each observation lands in its MMWR week, gap
/// weeks become missing. Values are never summed.
WeeklySeries align_weekly(const RawSeries& r);

/// Dispatch on r.resolution.
WeeklySeries to_weekly(const RawSeries& r);

/// Replaces interior missing runs by linear interpolation between the nearest
/// present neighbors and trims missing edges (start_week shifts). Throws
/// InsufficientDataError with fewer than 2 present values.
WeeklySeries impute_linear(const WeeklySeries& s);

struct SparseFilterDecision {
    bool keep = true;
    double missing_fraction = 0.0;
    std::string reason;
};

/// Drop iff the missing fraction (before imputation) exceeds the threshold;
/// a fraction exactly at the threshold is kept.
SparseFilterDecision filter_sparse(const WeeklySeries& s, double max_missing_fraction);

} // namespace epiwave
