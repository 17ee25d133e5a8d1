#pragma once

// Shared helpers for the test suites: deterministic random streams (raw
// mt19937_64 bits only, so every platform sees the same draws) and small
// builders for domain objects.

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "epiwave/mmwr.hpp"
#include "epiwave/types.hpp"

namespace testutil {

inline double uniform01(std::mt19937_64& gen) {
    return static_cast<double>(gen() >> 11) * (1.0 / 9007199254740992.0);
}

inline double uniform(std::mt19937_64& gen, double lo, double hi) {
    return lo + (hi - lo) * uniform01(gen);
}

inline std::int64_t uniform_int(std::mt19937_64& gen, std::int64_t lo, std::int64_t hi) {
    return lo + static_cast<std::int64_t>(gen() % static_cast<std::uint64_t>(hi - lo + 1));
}

// Box-Muller from raw bits; std::normal_distribution is not portable.
inline double standard_normal(std::mt19937_64& gen) {
    double u1 = uniform01(gen);
    double u2 = uniform01(gen);
    while (u1 <= 0.0) u1 = uniform01(gen);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
}

inline epiwave::MmwrWeek week_of(const std::string& iso_date) {
    return epiwave::mmwr_week_of(epiwave::parse_iso_date(iso_date));
}

// A structurally valid outbreak whose padding is even on both sides, so it
// also survives the outbreak-file core inference untouched.
inline epiwave::Outbreak make_outbreak(const std::string& id, std::vector<double> values,
                                       int pad_left, int pad_right,
                                       const std::string& start_date = "2020-03-21") {
    epiwave::Outbreak o;
    o.unique_id = id;
    o.key = epiwave::SeriesKey{"TESTPOX", "Testland", "CASES"};
    o.start_week = week_of(start_date);
    o.duration = static_cast<int>(values.size());
    o.end_week = epiwave::plus_weeks(o.start_week, o.duration - 1);
    o.values = std::move(values);
    o.core_start_offset = pad_left;
    o.core_end_offset = o.duration - 1 - pad_right;
    return o;
}

// Random outbreak with core length in [8, 52], at least one positive value.
inline epiwave::Outbreak random_outbreak(std::mt19937_64& gen, const std::string& id) {
    int core = static_cast<int>(uniform_int(gen, 8, 52));
    int total_pad = std::min(8, static_cast<int>(uniform_int(gen, 0, 8)));
    int pad_right = total_pad / 2;
    int pad_left = total_pad - pad_right;
    std::vector<double> values(static_cast<std::size_t>(core + pad_left + pad_right));
    for (double& v : values) v = std::floor(uniform(gen, 0.0, 200.0));
    values[static_cast<std::size_t>(pad_left + core / 2)] += 10.0;  // ensure mass
    return make_outbreak(id, std::move(values), pad_left, pad_right);
}

// Two well-separated Gaussian bumps; the analytic trough sits at `trough`.
inline std::vector<double> two_bump_signal(int length = 41, double center1 = 10.0,
                                           double center2 = 30.0, double width = 4.0,
                                           double amplitude = 100.0) {
    std::vector<double> x(static_cast<std::size_t>(length));
    for (int t = 0; t < length; ++t) {
        double d1 = (t - center1) / width;
        double d2 = (t - center2) / width;
        x[static_cast<std::size_t>(t)] =
            amplitude * (std::exp(-0.5 * d1 * d1) + std::exp(-0.5 * d2 * d2));
    }
    return x;
}

inline epiwave::WeeklySeries series_from(const std::vector<double>& values,
                                         const std::string& start_date = "2015-01-10",
                                         const epiwave::SeriesKey& key = {"TESTPOX", "Testland",
                                                                          "CASES"}) {
    epiwave::WeeklySeries s;
    s.key = key;
    s.start_week = week_of(start_date);
    s.values.assign(values.begin(), values.end());
    return s;
}

} // namespace testutil
