#pragma once

#include <span>
#include <string>
#include <vector>

#include "epiwave/types.hpp"

namespace epiwave {

struct OutbreakMeasures {
    std::string unique_id;
    double shannon_entropy_bits = 0;
    double permutation_entropy_normalized = 0;
    double permutation_entropy_bits = 0;
    double skewness = 0;
    double excess_kurtosis = 0;
};

/// p(t) = x(t) / sum(x). Throws DegenerateDistributionError on an all-zero
/// input.
std::vector<double> incidence_distribution(std::span<const double> x);

/// Incidence distribution of the core (unpadded) segment.
std::vector<double> incidence_distribution(const Outbreak& o);

/// H = -sum p log2 p, in bits; zero-probability terms contribute nothing.
double shannon_entropy(std::span<const double> p);

/// Bandt-Pompe permutation entropy over ordinal patterns of the embedding
/// vectors. Ties rank by temporal index (earlier index ranks lower). When
/// normalized, the result is divided by log2(order!).
double permutation_entropy(std::span<const double> x, int order = 3, int delay = 1,
                           bool normalized = true);

struct ShapeMoments {
    double skewness = 0;
    double excess_kurtosis = 0;
};

/// Third and fourth standardized moments of the week index t distributed as
/// p(t). Throws DegenerateShapeError when the index variance is zero.
ShapeMoments shape_moments(std::span<const double> p);
ShapeMoments shape_moments(const Outbreak& o);

/// All measures for one outbreak, computed on its core segment.
OutbreakMeasures compute_measures(const Outbreak& o);

} // namespace epiwave
