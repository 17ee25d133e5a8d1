#pragma once

#include <limits>
#include <span>
#include <vector>

#include "epiwave/types.hpp"

namespace epiwave {

struct SegmentationConfig {
    double kernel_bandwidth_weeks = 2.0;  // Gaussian sigma
    // Signed upper bound on the second derivative at a candidate cut;
    // +inf accepts every negative-to-positive crossing.
    double second_derivative_threshold = std::numeric_limits<double>::infinity();
    int min_core_weeks = 8;
    int max_core_weeks = 52;
    int pad_weeks = 4;
};

/// Convolution with a normalized Gaussian kernel truncated at +-4 sigma.
/// Boundaries are handled by symmetric reflection and weights renormalized
/// per position, so constant inputs come back bit-identical.
std::vector<double> gaussian_smooth(std::span<const double> x, double sigma);

struct DerivativePair {
    std::vector<double> first;
    std::vector<double> second;
};

/// Central differences at interior points, one-sided at the ends; the second
/// derivative applies the same scheme to the first. Needs length >= 3.
DerivativePair derivatives(std::span<const double> x);

struct CutPointReport {
    SeriesKey key;
    std::vector<double> smoothed;
    std::vector<double> first_derivative;
    std::vector<double> second_derivative;
    std::vector<int> raw_candidates;  // negative-to-positive crossings of f'
    std::vector<int> accepted;        // candidates passing the f'' threshold
};

/// Cut candidates are indices t with f'(t-1) < 0 and f'(t) >= 0 on the
/// smoothed series; a candidate is accepted iff f''(t) is below the
/// configured threshold.
CutPointReport detect_cutpoints(std::span<const double> x, const SegmentationConfig& cfg);

/// Splits a gap-free series into outbreaks delimited by accepted cut points
/// and the series endpoints. Segments outside the core-length bounds are
/// discarded; survivors are padded with real neighboring data, clipped at the
/// series boundaries, and receive ids "<disease>_<location>_<outcome>_<n>"
/// in temporal order. Pass `report` to capture the cut-point diagnostics.
std::vector<Outbreak> segment(const WeeklySeries& s, const SegmentationConfig& cfg,
                              CutPointReport* report = nullptr);

} // namespace epiwave
