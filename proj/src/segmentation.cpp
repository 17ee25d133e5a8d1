#include "epiwave/segmentation.hpp"

#include <cmath>

#include "epiwave/util.hpp"

namespace epiwave {

namespace {

// Symmetric reflection into [0, n): ... x1 x0 | x0 x1 ... x_{n-1} | x_{n-1} ...
std::size_t reflect_index(long i, long n) {
    long period = 2 * n;
    long m = i % period;
    if (m < 0) m += period;
    if (m >= n) m = period - 1 - m;
    return static_cast<std::size_t>(m);
}

void check_config(const SegmentationConfig& cfg) {
    if (!(cfg.kernel_bandwidth_weeks > 0))
        throw ConfigError("segmentation: kernel bandwidth must be positive");
    if (cfg.min_core_weeks <= 0 || cfg.min_core_weeks > cfg.max_core_weeks)
        throw ConfigError("segmentation: need 0 < min_core_weeks <= max_core_weeks");
    if (cfg.pad_weeks < 0) throw ConfigError("segmentation: pad_weeks must be >= 0");
}

} // namespace

std::vector<double> gaussian_smooth(std::span<const double> x, double sigma) {
    if (x.empty()) throw EmptySeriesError("gaussian_smooth: empty input");
    if (!(sigma > 0)) throw ConfigError("gaussian_smooth: sigma must be positive");

    long radius = std::max(1L, std::lround(4.0 * sigma));
    std::vector<double> kernel(static_cast<std::size_t>(2 * radius + 1));
    double kernel_sum = 0.0;
    for (long j = -radius; j <= radius; ++j) {
        double w = std::exp(-0.5 * (static_cast<double>(j) / sigma) * (static_cast<double>(j) / sigma));
        kernel[static_cast<std::size_t>(j + radius)] = w;
        kernel_sum += w;
    }

    long n = static_cast<long>(x.size());
    std::vector<double> out(x.size());
    for (long t = 0; t < n; ++t) {
        // Accumulate weighted deviations from x[t] so a constant series maps
        // to itself exactly.
        double num = 0.0;
        for (long j = -radius; j <= radius; ++j) {
            double w = kernel[static_cast<std::size_t>(j + radius)];
            num += w * (x[reflect_index(t + j, n)] - x[static_cast<std::size_t>(t)]);
        }
        out[static_cast<std::size_t>(t)] = x[static_cast<std::size_t>(t)] + num / kernel_sum;
    }
    return out;
}

DerivativePair derivatives(std::span<const double> x) {
    std::size_t n = x.size();
    if (n < 3)
        throw InsufficientDataError("derivatives: need at least 3 points, have " +
                                    std::to_string(n));
    auto diff = [](std::span<const double> v) {
        std::size_t m = v.size();
        std::vector<double> d(m);
        d[0] = v[1] - v[0];
        for (std::size_t t = 1; t + 1 < m; ++t) d[t] = (v[t + 1] - v[t - 1]) / 2.0;
        d[m - 1] = v[m - 1] - v[m - 2];
        return d;
    };
    DerivativePair out;
    out.first = diff(x);
    out.second = diff(out.first);
    return out;
}

CutPointReport detect_cutpoints(std::span<const double> x, const SegmentationConfig& cfg) {
    check_config(cfg);
    CutPointReport report;
    report.smoothed = gaussian_smooth(x, cfg.kernel_bandwidth_weeks);
    auto deriv = derivatives(report.smoothed);
    report.first_derivative = std::move(deriv.first);
    report.second_derivative = std::move(deriv.second);

    const auto& f1 = report.first_derivative;
    for (std::size_t t = 1; t < f1.size(); ++t) {
        if (f1[t - 1] < 0.0 && f1[t] >= 0.0) {
            report.raw_candidates.push_back(static_cast<int>(t));
            if (report.second_derivative[t] < cfg.second_derivative_threshold)
                report.accepted.push_back(static_cast<int>(t));
        }
    }
    return report;
}

std::vector<Outbreak> segment(const WeeklySeries& s, const SegmentationConfig& cfg,
                              CutPointReport* report) {
    check_config(cfg);
    if (s.missing_count() > 0)
        throw InsufficientDataError("segment: series still has missing values");

    std::vector<double> x(s.values.size());
    for (std::size_t i = 0; i < s.values.size(); ++i) x[i] = *s.values[i];

    int n = static_cast<int>(x.size());
    std::vector<Outbreak> outbreaks;
    if (n < std::max(3, cfg.min_core_weeks)) {
        if (report) *report = CutPointReport{s.key, {}, {}, {}, {}, {}};
        return outbreaks;
    }

    CutPointReport local = detect_cutpoints(x, cfg);
    local.key = s.key;

    std::vector<int> boundaries;
    boundaries.push_back(0);
    for (int c : local.accepted) boundaries.push_back(c);
    boundaries.push_back(n);

    int counter = 0;
    for (std::size_t b = 0; b + 1 < boundaries.size(); ++b) {
        int core_begin = boundaries[b];
        int core_end = boundaries[b + 1] - 1;  // inclusive
        int core_len = core_end - core_begin + 1;
        if (core_len < cfg.min_core_weeks || core_len > cfg.max_core_weeks) continue;

        int start = std::max(0, core_begin - cfg.pad_weeks);
        int end = std::min(n - 1, core_end + cfg.pad_weeks);

        Outbreak o;
        o.key = s.key;
        o.unique_id = s.key.disease + "_" + s.key.location + "_" + s.key.outcome + "_" +
                      std::to_string(counter++);
        o.start_week = plus_weeks(s.start_week, start);
        o.end_week = plus_weeks(s.start_week, end);
        o.duration = end - start + 1;
        o.values.assign(x.begin() + start, x.begin() + end + 1);
        o.core_start_offset = core_begin - start;
        o.core_end_offset = core_end - start;
        outbreaks.push_back(std::move(o));
    }

    if (report) *report = std::move(local);
    return outbreaks;
}

} // namespace epiwave
