#include <doctest.h>

#include <cmath>
#include <random>

#include "epiwave/forecasters.hpp"
#include "epiwave/util.hpp"
#include "testutil.hpp"

using namespace epiwave;

namespace {

std::vector<double> ar1_path(std::mt19937_64& gen, double phi, int n, double intercept = 0.0) {
    std::vector<double> x(static_cast<std::size_t>(n));
    double v = intercept / (1.0 - phi);
    for (int t = 0; t < n; ++t) {
        v = intercept + phi * v + testutil::standard_normal(gen);
        x[static_cast<std::size_t>(t)] = v;
    }
    return x;
}

std::vector<double> random_walk(std::mt19937_64& gen, int n) {
    std::vector<double> x(static_cast<std::size_t>(n));
    double v = 100.0;
    for (int t = 0; t < n; ++t) {
        v += testutil::standard_normal(gen);
        x[static_cast<std::size_t>(t)] = v;
    }
    return x;
}

} // namespace

TEST_CASE("quantile level table is canonical") {
    CHECK(kQuantileLevels.size() == 23);
    for (std::size_t i = 1; i < kQuantileLevels.size(); ++i)
        CHECK(kQuantileLevels[i] > kQuantileLevels[i - 1]);
    for (std::size_t i = 0; i < kQuantileLevels.size(); ++i) {
        CHECK(kQuantileLevels[i] + kQuantileLevels[22 - i] == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(quantile_level_index(kQuantileLevels[i]) == static_cast<int>(i));
        CHECK(parse_double(quantile_level_text()[i]) == kQuantileLevels[i]);
    }
    CHECK(kQuantileLevels[11] == 0.5);
    CHECK(quantile_level_index(0.123) == -1);
}

TEST_CASE("flat model repeats the last value with sqrt(h) spread") {
    std::vector<double> history = {3, 5, 7, 9, 12};
    FittedModel m = fit_flat(history);
    auto points = point_forecasts(m, 4);
    for (double p : points) CHECK(p == 12.0);

    auto var = forecast_variances(m, 4);
    CHECK(var[1] / var[0] == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(var[3] / var[0] == doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("flat model on a constant history collapses to the floor width") {
    std::vector<double> history(10, 4.0);
    FittedModel m = fit_flat(history);
    CHECK(m.residual_variance == kVarianceFloor);
    auto fcs = forecast_quantiles(m, 2);
    for (const auto& f : fcs)
        for (double v : f.values) CHECK(v == doctest::Approx(4.0).epsilon(1e-2));
}

TEST_CASE("ets on a constant series forecasts the constant") {
    std::vector<double> history(20, 7.0);
    FittedModel m = fit_ets(history);
    for (double p : point_forecasts(m, 4)) CHECK(p == doctest::Approx(7.0).epsilon(1e-9));
    CHECK(m.residual_variance == kVarianceFloor);
}

TEST_CASE("ets on a noiseless ramp selects Holt and extrapolates the trend") {
    std::vector<double> history(30);
    for (int t = 0; t < 30; ++t) history[static_cast<std::size_t>(t)] = t + 1.0;
    FittedModel m = fit_ets(history);
    CHECK(m.family == ModelFamily::holt);
    auto points = point_forecasts(m, 2);
    // Closed form on the noiseless ramp: level 30, trend 1.
    CHECK(points[0] == doctest::Approx(31.0).epsilon(0.5 / 31.0));
    CHECK(points[1] == doctest::Approx(32.0).epsilon(1.0 / 32.0));
}

TEST_CASE("ets prefers SES on white noise in most seeded replications") {
    int ses_wins = 0;
    for (int seed = 0; seed < 100; ++seed) {
        std::mt19937_64 gen(static_cast<std::uint64_t>(seed) + 1000);
        std::vector<double> history(30);
        for (double& v : history) v = 10.0 + testutil::standard_normal(gen);
        if (fit_ets(history).family == ModelFamily::ses) ++ses_wins;
    }
    CHECK(ses_wins >= 80);
}

TEST_CASE("ar recovers a strong AR(1) coefficient") {
    std::mt19937_64 gen(2024);
    std::vector<double> x = ar1_path(gen, 0.8, 200);
    FittedModel m = fit_ar(x);
    CHECK(static_cast<int>(m.params[0]) == 0);  // no differencing
    REQUIRE(static_cast<int>(m.params[1]) >= 1);
    double phi_hat = m.params[3];
    CHECK(std::fabs(phi_hat - 0.8) <= 0.1);

    // Independent check: direct least squares on (x_{t-1}, x_t) pairs.
    double sxx = 0, sxy = 0, sx = 0, sy = 0;
    std::size_t n = x.size() - 1;
    for (std::size_t t = 1; t < x.size(); ++t) {
        sx += x[t - 1];
        sy += x[t];
        sxx += x[t - 1] * x[t - 1];
        sxy += x[t - 1] * x[t];
    }
    double slope = (sxy - sx * sy / static_cast<double>(n)) /
                   (sxx - sx * sx / static_cast<double>(n));
    CHECK(std::fabs(slope - 0.8) <= 0.1);
}

TEST_CASE("ar on a constant series forecasts the constant") {
    std::vector<double> history(15, 6.0);
    FittedModel m = fit_ar(history);
    for (double p : point_forecasts(m, 4)) CHECK(p == doctest::Approx(6.0).epsilon(1e-9));
}

TEST_CASE("ar variance grows roughly linearly on a random walk") {
    std::mt19937_64 gen(7);
    std::vector<double> x = random_walk(gen, 200);
    FittedModel m = fit_ar(x);
    auto var = forecast_variances(m, 4);
    CHECK(var[3] / var[0] == doctest::Approx(4.0).epsilon(0.25));
}

TEST_CASE("fits are deterministic") {
    std::mt19937_64 gen(99);
    std::vector<double> x(40);
    for (double& v : x) v = std::floor(testutil::uniform(gen, 0, 60));
    for (auto fit : {fit_flat, fit_ets, fit_ar}) {
        FittedModel a = fit(x);
        FittedModel b = fit(x);
        CHECK(a.family == b.family);
        CHECK(a.params == b.params);
        CHECK(a.state == b.state);
        CHECK(a.residual_variance == b.residual_variance);
    }
}

TEST_CASE("fitters reject short histories") {
    std::vector<double> tiny = {1.0};
    CHECK_THROWS_AS(fit_flat(tiny), InsufficientDataError);
    std::vector<double> seven(7, 2.0);
    CHECK_THROWS_AS(fit_ets(seven), InsufficientDataError);
    CHECK_THROWS_AS(fit_ar(seven), InsufficientDataError);
}

TEST_CASE("normal quantile values and symmetry") {
    CHECK(normal_quantile(0.5) == 0.0);
    // Frozen from standard normal tables.
    CHECK(normal_quantile(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-9));
    CHECK(normal_quantile(0.99) == doctest::Approx(2.3263478740408408).epsilon(1e-9));
    CHECK(normal_quantile(0.01) == doctest::Approx(-2.3263478740408408).epsilon(1e-9));
    CHECK(normal_quantile(0.025) == -normal_quantile(0.975));
    CHECK_THROWS_AS(normal_quantile(0.0), RangeError);
    CHECK_THROWS_AS(normal_quantile(1.0), RangeError);
}

TEST_CASE("a zero-variance model emits a point mass at every level") {
    FittedModel m;
    m.family = ModelFamily::flat;
    m.residual_variance = 0.0;
    m.state = {9.5};
    auto fcs = forecast_quantiles(m, 3);
    for (const auto& f : fcs)
        for (double v : f.values) CHECK(v == 9.5);
}

TEST_CASE("gaussian quantiles follow point + z * sigma") {
    FittedModel m;
    m.family = ModelFamily::flat;
    m.residual_variance = 4.0;  // sigma_1 = 2
    m.state = {10.0};
    auto fcs = forecast_quantiles(m, 1);
    REQUIRE(fcs.size() == 1);
    CHECK(fcs[0].values[21] == doctest::Approx(10.0 + 1.959963984540054 * 2.0).epsilon(1e-9));
    CHECK(fcs[0].values[11] == 10.0);  // median equals the point forecast
}

TEST_CASE("clipping keeps quantiles at zero and preserves monotonicity") {
    FittedModel m;
    m.family = ModelFamily::flat;
    m.residual_variance = 25.0;
    m.state = {1.0};
    auto fcs = forecast_quantiles(m, 1);
    CHECK(fcs[0].values[0] == 0.0);  // 1 - 2.33 * 5 clips
    for (std::size_t i = 1; i < 23; ++i) CHECK(fcs[0].values[i] >= fcs[0].values[i - 1]);

    auto raw = forecast_quantiles(m, 1, /*clip_at_zero=*/false);
    CHECK(raw[0].values[0] < 0.0);
}

TEST_CASE("quantiles are monotone and sigma never shrinks with horizon") {
    std::mt19937_64 gen(55);
    for (int rep = 0; rep < 20; ++rep) {
        std::vector<double> x(static_cast<std::size_t>(testutil::uniform_int(gen, 10, 50)));
        for (double& v : x) v = std::floor(testutil::uniform(gen, 0, 80));
        for (auto fit : {fit_flat, fit_ets, fit_ar}) {
            FittedModel m = fit(x);
            auto var = forecast_variances(m, 6);
            for (std::size_t k = 1; k < var.size(); ++k) CHECK(var[k] >= var[k - 1] - 1e-12);
            for (const auto& f : forecast_quantiles(m, 6))
                for (std::size_t i = 1; i < f.values.size(); ++i)
                    CHECK(f.values[i] >= f.values[i - 1]);
        }
    }
}
