#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "epiwave/segmentation.hpp"
#include "epiwave/util.hpp"
#include "testutil.hpp"

using namespace epiwave;

namespace {

// Independent convolution oracle: direct normalized sum with symmetric
// reflection, written without reusing the library's index folding.
std::vector<double> smooth_oracle(const std::vector<double>& x, double sigma) {
    long n = static_cast<long>(x.size());
    long radius = std::max(1L, std::lround(4.0 * sigma));
    std::vector<double> out(x.size());
    for (long t = 0; t < n; ++t) {
        double num = 0, den = 0;
        for (long j = -radius; j <= radius; ++j) {
            long i = t + j;
            while (i < 0 || i >= n) {
                if (i < 0) i = -i - 1;
                if (i >= n) i = 2 * n - 1 - i;
            }
            double w = std::exp(-0.5 * (j / sigma) * (j / sigma));
            num += w * x[static_cast<std::size_t>(i)];
            den += w;
        }
        out[static_cast<std::size_t>(t)] = num / den;
    }
    return out;
}

} // namespace

TEST_CASE("smoothing a constant series returns it bit-identically") {
    std::vector<double> x(30, 5.0);
    for (double sigma : {0.5, 2.0, 5.0}) {
        auto s = gaussian_smooth(x, sigma);
        for (double v : s) CHECK(v == 5.0);
    }
}

TEST_CASE("smoothing a centered unit impulse reproduces the truncated kernel") {
    std::vector<double> x(21, 0.0);
    x[10] = 1.0;
    auto s = gaussian_smooth(x, 2.0);
    // Oracle: evaluate the normalized kernel directly.
    long radius = 8;  // lround(4 * sigma)
    double den = 0;
    for (long j = -radius; j <= radius; ++j) den += std::exp(-j * j / 8.0);
    for (long j = -radius; j <= radius; ++j) {
        double expected = std::exp(-j * j / 8.0) / den;
        CHECK(s[static_cast<std::size_t>(10 + j)] == doctest::Approx(expected).epsilon(1e-12));
    }
    CHECK(s[0] == doctest::Approx(0.0).scale(1).epsilon(1e-12));
}

TEST_CASE("smoothing preserves a linear ramp away from the boundary") {
    std::vector<double> x(41);
    for (int t = 0; t < 41; ++t) x[static_cast<std::size_t>(t)] = 3.0 + 2.0 * t;
    auto s = gaussian_smooth(x, 2.0);
    for (int t = 8; t <= 32; ++t)
        CHECK(s[static_cast<std::size_t>(t)] ==
              doctest::Approx(x[static_cast<std::size_t>(t)]).epsilon(1e-9));
}

TEST_CASE("smoothing matches the independent convolution oracle") {
    std::mt19937_64 gen(3);
    for (int rep = 0; rep < 10; ++rep) {
        std::vector<double> x(static_cast<std::size_t>(testutil::uniform_int(gen, 5, 80)));
        for (double& v : x) v = testutil::uniform(gen, 0, 100);
        for (double sigma : {1.0, 2.5}) {
            auto got = gaussian_smooth(x, sigma);
            auto expected = smooth_oracle(x, sigma);
            for (std::size_t i = 0; i < x.size(); ++i)
                CHECK(got[i] == doctest::Approx(expected[i]).epsilon(1e-9));
        }
    }
}

TEST_CASE("derivatives of a line and a parabola") {
    std::vector<double> line(20), parabola(20);
    for (int t = 0; t < 20; ++t) {
        line[static_cast<std::size_t>(t)] = 1.0 + 2.0 * t;
        parabola[static_cast<std::size_t>(t)] = static_cast<double>(t) * t;
    }
    auto dl = derivatives(line);
    for (double v : dl.first) CHECK(v == doctest::Approx(2.0).epsilon(1e-12));
    for (std::size_t t = 1; t + 1 < 20; ++t)
        CHECK(dl.second[t] == doctest::Approx(0.0).scale(1).epsilon(1e-12));

    auto dp = derivatives(parabola);
    for (std::size_t t = 2; t + 2 < 20; ++t)
        CHECK(dp.second[t] == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("derivatives match a brute-force finite-difference oracle") {
    std::mt19937_64 gen(5);
    std::vector<double> x(25);
    for (double& v : x) v = testutil::uniform(gen, 0, 10);
    auto d = derivatives(x);
    std::size_t n = x.size();
    // Oracle: explicit one-sided/central formulas.
    CHECK(d.first[0] == x[1] - x[0]);
    CHECK(d.first[n - 1] == x[n - 1] - x[n - 2]);
    for (std::size_t t = 1; t + 1 < n; ++t)
        CHECK(d.first[t] == doctest::Approx((x[t + 1] - x[t - 1]) / 2.0).epsilon(1e-12));
    for (std::size_t t = 1; t + 1 < n; ++t)
        CHECK(d.second[t] ==
              doctest::Approx((d.first[t + 1] - d.first[t - 1]) / 2.0).epsilon(1e-12));
    CHECK_THROWS_AS(derivatives(std::vector<double>{1.0, 2.0}), InsufficientDataError);
}

TEST_CASE("two-bump signal yields one cut at the trough for several bandwidths") {
    auto x = testutil::two_bump_signal();
    for (double sigma : {1.0, 2.0, 3.0}) {
        SegmentationConfig cfg;
        cfg.kernel_bandwidth_weeks = sigma;
        auto report = detect_cutpoints(x, cfg);
        REQUIRE(report.accepted.size() == 1);
        CHECK(std::abs(report.accepted[0] - 20) <= 1);  // analytic trough at 20
        CHECK(report.raw_candidates == report.accepted);
    }
}

TEST_CASE("monotone and constant series have no cut points") {
    std::vector<double> rising(40), flat(40, 3.0);
    for (int t = 0; t < 40; ++t) rising[static_cast<std::size_t>(t)] = t;
    SegmentationConfig cfg;
    CHECK(detect_cutpoints(rising, cfg).accepted.empty());
    CHECK(detect_cutpoints(flat, cfg).accepted.empty());
}

TEST_CASE("second-derivative threshold filters candidates") {
    auto x = testutil::two_bump_signal();
    SegmentationConfig cfg;
    cfg.second_derivative_threshold = -1.0;  // troughs curve upward, so none pass
    auto report = detect_cutpoints(x, cfg);
    CHECK(report.accepted.empty());
    CHECK(report.raw_candidates.size() == 1);
}

TEST_CASE("segment splits the two-bump series into two padded outbreaks") {
    auto s = testutil::series_from(testutil::two_bump_signal());
    SegmentationConfig cfg;
    CutPointReport report;
    auto outbreaks = segment(s, cfg, &report);
    REQUIRE(outbreaks.size() == 2);
    REQUIRE(report.accepted.size() == 1);
    int cut = report.accepted[0];

    const Outbreak& a = outbreaks[0];
    const Outbreak& b = outbreaks[1];
    CHECK(a.core_length() == cut);
    CHECK(b.core_length() == 41 - cut);
    CHECK(a.core_start_offset == 0);                    // clipped at the series start
    CHECK(a.duration == cut + 4);                       // …so only right padding
    CHECK(b.core_start_offset == 4);                    // full left padding
    CHECK(b.duration - 1 - b.core_end_offset == 0);     // clipped at the series end
    CHECK(a.unique_id == "TESTPOX_Testland_CASES_0");
    CHECK(b.unique_id == "TESTPOX_Testland_CASES_1");
    CHECK(validate_outbreak(a).pass);
    CHECK(validate_outbreak(b).pass);

    // Padding never fabricates: every value equals the source at that week.
    for (int i = 0; i < a.duration; ++i) {
        long src = weeks_between(s.start_week, a.start_week) + i;
        CHECK(a.values[static_cast<std::size_t>(i)] ==
              *s.values[static_cast<std::size_t>(src)]);
    }
    for (int i = 0; i < b.duration; ++i) {
        long src = weeks_between(s.start_week, b.start_week) + i;
        CHECK(b.values[static_cast<std::size_t>(i)] ==
              *s.values[static_cast<std::size_t>(src)]);
    }
}

TEST_CASE("a brief spike in a short flat series yields no outbreak") {
    auto s = testutil::series_from({0.0, 1.0, 4.0, 9.0, 4.0, 1.0, 0.0});  // 5-week spike, core 7
    CHECK(segment(s, SegmentationConfig{}).empty());
}

TEST_CASE("a 60-week monotone rise exceeds the core cap and is discarded") {
    std::vector<double> rise(60);
    for (int t = 0; t < 60; ++t) rise[static_cast<std::size_t>(t)] = 2.0 * t + 1.0;
    auto s = testutil::series_from(rise);
    CHECK(segment(s, SegmentationConfig{}).empty());
}

TEST_CASE("segment requires a gap-free series") {
    auto s = testutil::series_from(std::vector<double>(20, 1.0));
    s.values[4] = std::nullopt;
    CHECK_THROWS_AS(segment(s, SegmentationConfig{}), InsufficientDataError);
}

TEST_CASE("segment is deterministic and cores are disjoint and ordered") {
    std::mt19937_64 gen(17);
    for (int rep = 0; rep < 10; ++rep) {
        // Random sum of well-separated bumps.
        int n_bumps = static_cast<int>(testutil::uniform_int(gen, 2, 4));
        int length = 40 * n_bumps;
        std::vector<double> x(static_cast<std::size_t>(length), 0.0);
        for (int b = 0; b < n_bumps; ++b) {
            double center = 20.0 + 40.0 * b + testutil::uniform(gen, -5, 5);
            double width = testutil::uniform(gen, 3, 6);
            double amp = testutil::uniform(gen, 50, 300);
            for (int t = 0; t < length; ++t) {
                double d = (t - center) / width;
                x[static_cast<std::size_t>(t)] += amp * std::exp(-0.5 * d * d);
            }
        }
        auto s = testutil::series_from(x);
        SegmentationConfig cfg;
        CutPointReport report;
        auto first = segment(s, cfg, &report);
        auto second = segment(s, cfg);
        REQUIRE(first.size() == second.size());
        for (std::size_t i = 0; i < first.size(); ++i) {
            CHECK(first[i].unique_id == second[i].unique_id);
            CHECK(first[i].values == second[i].values);
            CHECK(first[i].start_week == second[i].start_week);
        }

        long prev_core_end = -1;
        for (const auto& o : first) {
            long core_begin = weeks_between(s.start_week, o.start_week) + o.core_start_offset;
            long core_end = core_begin + o.core_length() - 1;
            CHECK(core_begin > prev_core_end);
            prev_core_end = core_end;
            CHECK(validate_outbreak(o).pass);
        }

        // Every accepted cut is a local minimum of the smoothed series within
        // a +-1 window.
        const auto& sm = report.smoothed;
        for (int c : report.accepted) {
            std::size_t w = static_cast<std::size_t>(c);
            std::size_t best = w;
            for (std::size_t i = w - 1; i <= w + 1 && i < sm.size(); ++i)
                if (sm[i] < sm[best]) best = i;
            if (c >= 2) CHECK(sm[best] <= sm[static_cast<std::size_t>(c - 2)]);
            if (c + 2 < static_cast<int>(sm.size()))
                CHECK(sm[best] <= sm[static_cast<std::size_t>(c + 2)]);
        }
    }
}
