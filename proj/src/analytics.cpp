#include "epiwave/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "epiwave/util.hpp"

namespace epiwave {

std::vector<double> incidence_distribution(std::span<const double> x) {
    double total = 0.0;
    for (double v : x) {
        if (!std::isfinite(v) || v < 0)
            throw DegenerateDistributionError("incidence_distribution: values must be finite and >= 0");
        total += v;
    }
    if (total <= 0)
        throw DegenerateDistributionError("incidence_distribution: all-zero outbreak");
    std::vector<double> p(x.size());
    for (std::size_t t = 0; t < x.size(); ++t) p[t] = x[t] / total;
    return p;
}

std::vector<double> incidence_distribution(const Outbreak& o) {
    return incidence_distribution(o.core_values());
}

double shannon_entropy(std::span<const double> p) {
    double h = 0.0;
    for (double q : p) {
        if (q > 0) h -= q * std::log2(q);
    }
    return h;
}

double permutation_entropy(std::span<const double> x, int order, int delay, bool normalized) {
    if (order < 2) throw ConfigError("permutation_entropy: order must be >= 2");
    if (order > 12) throw ConfigError("permutation_entropy: order too large");
    if (delay < 1) throw ConfigError("permutation_entropy: delay must be >= 1");
    long n = static_cast<long>(x.size());
    long span = static_cast<long>(order) * delay + 1;
    if (n < span)
        throw InsufficientDataError("permutation_entropy: need length >= " + std::to_string(span) +
                                    ", have " + std::to_string(n));

    long n_vectors = n - static_cast<long>(order - 1) * delay;
    std::vector<int> ranks(static_cast<std::size_t>(order));
    std::map<std::uint64_t, long> counts;
    for (long t = 0; t < n_vectors; ++t) {
        std::iota(ranks.begin(), ranks.end(), 0);
        std::sort(ranks.begin(), ranks.end(), [&](int a, int b) {
            double va = x[static_cast<std::size_t>(t + a * delay)];
            double vb = x[static_cast<std::size_t>(t + b * delay)];
            if (va != vb) return va < vb;
            return a < b;  // stable tie rule: earlier index ranks lower
        });
        std::uint64_t code = 0;
        for (int r : ranks) code = code * static_cast<std::uint64_t>(order) + static_cast<std::uint64_t>(r);
        ++counts[code];
    }

    double h = 0.0;
    for (const auto& [code, c] : counts) {
        double q = static_cast<double>(c) / static_cast<double>(n_vectors);
        h -= q * std::log2(q);
    }
    if (normalized) {
        double log2_fact = 0.0;
        for (int i = 2; i <= order; ++i) log2_fact += std::log2(static_cast<double>(i));
        h /= log2_fact;
    }
    return h;
}

ShapeMoments shape_moments(std::span<const double> p) {
    double mean = 0.0;
    for (std::size_t t = 0; t < p.size(); ++t) mean += static_cast<double>(t) * p[t];
    double m2 = 0.0, m3 = 0.0, m4 = 0.0;
    for (std::size_t t = 0; t < p.size(); ++t) {
        double d = static_cast<double>(t) - mean;
        m2 += d * d * p[t];
        m3 += d * d * d * p[t];
        m4 += d * d * d * d * p[t];
    }
    if (m2 <= 0)
        throw DegenerateShapeError("shape_moments: zero variance (single-spike outbreak)");
    double sd = std::sqrt(m2);
    return ShapeMoments{m3 / (sd * sd * sd), m4 / (m2 * m2) - 3.0};
}

ShapeMoments shape_moments(const Outbreak& o) {
    auto p = incidence_distribution(o);
    return shape_moments(p);
}

OutbreakMeasures compute_measures(const Outbreak& o) {
    OutbreakMeasures m;
    m.unique_id = o.unique_id;
    auto p = incidence_distribution(o);
    m.shannon_entropy_bits = shannon_entropy(p);
    m.permutation_entropy_bits = permutation_entropy(o.core_values(), 3, 1, false);
    m.permutation_entropy_normalized = permutation_entropy(o.core_values(), 3, 1, true);
    auto moments = shape_moments(p);
    m.skewness = moments.skewness;
    m.excess_kurtosis = moments.excess_kurtosis;
    return m;
}

} // namespace epiwave
