#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "epiwave/scoring.hpp"
#include "epiwave/util.hpp"
#include "testutil.hpp"

using namespace epiwave;

namespace {

QuantileForecast forecast_at(double point, double sigma, const std::string& id = "f") {
    QuantileForecast f;
    f.unique_id = id;
    f.model = "manual";
    f.issuance_week_index = 7;
    f.horizon = 1;
    for (std::size_t i = 0; i < kQuantileLevels.size(); ++i)
        f.values[i] = point + sigma * normal_quantile(kQuantileLevels[i]);
    return f;
}

// The standard pinball/quantile score, doubled; averaging it over the 23
// quantiles is the known alternative route to the WIS.
double pinball2(double q, double x, double y) {
    if (y >= x) return 2.0 * q * (y - x);
    return 2.0 * (1.0 - q) * (x - y);
}

double wis_pinball_oracle(const QuantileForecast& f, double y) {
    double total = 0;
    for (std::size_t i = 0; i < kQuantileLevels.size(); ++i)
        total += pinball2(kQuantileLevels[i], f.values[i], y);
    return total / static_cast<double>(kQuantileLevels.size());
}

} // namespace

TEST_CASE("interval score arithmetic") {
    CHECK(interval_score(1, 3, 0.2, 2) == 2.0);           // inside: width only
    CHECK(interval_score(1, 3, 0.2, 0) == 12.0);          // 2 + (2/0.2) * 1
    CHECK(interval_score(1, 3, 0.2, 5) == 22.0);          // 2 + (2/0.2) * 2
    CHECK(interval_score(2, 2, 0.5, 2) == 0.0);           // degenerate, on target
    CHECK_THROWS_AS(interval_score(3, 1, 0.2, 2), MalformedIntervalError);
    CHECK_THROWS_AS(interval_score(1, 3, 0.0, 2), RangeError);
}

TEST_CASE("wis is zero only for a perfect point mass") {
    QuantileForecast perfect = forecast_at(4.0, 0.0);
    CHECK(wis(perfect, 4.0) == 0.0);
    CHECK(wis(perfect, 5.0) == doctest::Approx(1.0).epsilon(1e-12));  // |y - m|
}

TEST_CASE("wis of a point mass reduces to absolute error") {
    QuantileForecast f = forecast_at(10.0, 0.0);
    for (double y : {0.0, 3.0, 10.0, 18.5}) {
        // Oracle: every degenerate interval contributes (2/a)(a/2)|y-m| = |y-m|.
        CHECK(wis(f, y) == doctest::Approx(std::fabs(y - 10.0)).scale(1).epsilon(1e-12));
    }
}

TEST_CASE("wis of a hand-built forecast matches the per-interval summation") {
    QuantileForecast f = forecast_at(20.0, 3.0);
    for (double y : {12.0, 20.0, 26.5}) {
        // Independent oracle: explicit interval table, summed one by one.
        double total = 0.5 * std::fabs(y - f.values[11]);
        const int pairs[11][2] = {{0, 22}, {1, 21}, {2, 20}, {3, 19}, {4, 18}, {5, 17},
                                  {6, 16}, {7, 15}, {8, 14}, {9, 13}, {10, 12}};
        for (const auto& pr : pairs) {
            double lo = f.values[pr[0]];
            double hi = f.values[pr[1]];
            double alpha = 2.0 * kQuantileLevels[static_cast<std::size_t>(pr[0])];
            double is = (hi - lo);
            if (y < lo) is += (2.0 / alpha) * (lo - y);
            if (y > hi) is += (2.0 / alpha) * (y - hi);
            total += (alpha / 2.0) * is;
        }
        CHECK(wis(f, y) == doctest::Approx(total / 11.5).epsilon(1e-9));
    }
}

TEST_CASE("wis equals the mean doubled pinball loss over the quantiles") {
    std::mt19937_64 gen(71);
    for (int rep = 0; rep < 200; ++rep) {
        std::array<double, 23> raw{};
        for (double& v : raw) v = testutil::uniform(gen, 0, 100);
        std::sort(raw.begin(), raw.end());
        QuantileForecast f;
        f.values = raw;
        double y = testutil::uniform(gen, -10, 120);
        CHECK(wis(f, y) == doctest::Approx(wis_pinball_oracle(f, y)).epsilon(1e-9));
    }
}

TEST_CASE("wis rejects non-monotone quantiles") {
    QuantileForecast f = forecast_at(10.0, 2.0);
    std::swap(f.values[4], f.values[18]);
    CHECK_THROWS_AS(wis(f, 10.0), MalformedForecastError);
}

TEST_CASE("wis scales linearly, so nwis is scale-free") {
    QuantileForecast f = forecast_at(30.0, 5.0);
    double y = 24.0;
    double base = wis(f, y);
    for (double c : {2.0, 17.5, 0.25}) {
        QuantileForecast scaled = f;
        for (double& v : scaled.values) v *= c;
        CHECK(wis(scaled, c * y) == doctest::Approx(c * base).epsilon(1e-12));
        CHECK(*nwis(wis(scaled, c * y), c * y) == doctest::Approx(base / y).epsilon(1e-12));
    }
}

TEST_CASE("widening the intervals around a covered truth increases wis") {
    QuantileForecast f = forecast_at(10.0, 1.0);
    QuantileForecast wider = forecast_at(10.0, 2.0);
    CHECK(wis(wider, 10.0) > wis(f, 10.0));
}

TEST_CASE("nwis is undefined exactly at non-positive truth") {
    CHECK(*nwis(8.0, 2.0) == 4.0);
    CHECK_FALSE(nwis(8.0, 0.0).has_value());
    CHECK(*nwis(0.0, 3.0) == 0.0);
    CHECK_THROWS_AS(nwis(-1.0, 3.0), RangeError);
}

TEST_CASE("point metrics from the median quantile") {
    QuantileForecast f = forecast_at(9.0, 1.5);
    PointMetrics m = point_metrics(f, 10.0);
    CHECK(m.point == doctest::Approx(9.0).epsilon(1e-12));
    CHECK(*m.ape == doctest::Approx(10.0).epsilon(1e-9));
    CHECK(m.squared_error == doctest::Approx(1.0).epsilon(1e-9));

    PointMetrics exact = point_metrics(forecast_at(10.0, 1.0), 10.0);
    CHECK(*exact.ape == 0.0);
    CHECK(exact.squared_error == 0.0);

    PointMetrics over = point_metrics(forecast_at(15.0, 1.0), 10.0);
    CHECK(*over.ape == doctest::Approx(50.0).epsilon(1e-9));
    CHECK(over.squared_error == doctest::Approx(25.0).epsilon(1e-9));

    CHECK_FALSE(point_metrics(forecast_at(15.0, 1.0), 0.0).ape.has_value());
}

TEST_CASE("peak phase is keyed to the issuance week") {
    std::vector<double> rising = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12};
    Outbreak o = testutil::make_outbreak("id", rising, 0, 0);
    CHECK(peak_phase(o, 3) == Phase::pre_peak);
    CHECK(peak_phase(o, 10) == Phase::pre_peak);
    CHECK(peak_phase(o, 11) == Phase::post_peak);  // at the peak itself

    std::vector<double> twin = {1, 5, 9, 9, 5, 1, 1, 1, 1, 1};
    Outbreak t = testutil::make_outbreak("id", twin, 0, 0);
    CHECK(peak_phase(t, 1) == Phase::pre_peak);
    CHECK(peak_phase(t, 2) == Phase::post_peak);  // ties go to the first maximum
    CHECK(peak_phase(t, 3) == Phase::post_peak);
}

TEST_CASE("peak phase uses the core segment") {
    // Padding carries a larger neighboring wave; the core peak still rules.
    std::vector<double> values = {50, 40, 1, 2, 9, 8, 3, 2, 1, 1, 30, 60};
    Outbreak o = testutil::make_outbreak("id", values, 2, 2);
    CHECK(peak_phase(o, 3) == Phase::pre_peak);   // core peak at offset 4
    CHECK(peak_phase(o, 4) == Phase::post_peak);
}

TEST_CASE("score_forecasts joins forecasts to truth and flags strays") {
    std::vector<double> values(16);
    for (int t = 0; t < 16; ++t) values[static_cast<std::size_t>(t)] = 5.0 + t;
    Outbreak o = testutil::make_outbreak("TESTPOX_Testland_CASES_0", values, 4, 4);

    QuantileForecast good = forecast_at(12.0, 1.0, o.unique_id);
    QuantileForecast stray = forecast_at(12.0, 1.0, "nobody_home_0");
    QuantileForecast beyond = forecast_at(12.0, 1.0, o.unique_id);
    beyond.issuance_week_index = 14;  // target 15 + ... out of range
    beyond.horizon = 4;

    ScoringResult r = score_forecasts({good, stray, beyond}, {o});
    REQUIRE(r.records.size() == 1);
    CHECK(r.unmatched == 2);
    CHECK(r.warnings.size() == 2);
    const ScoreRecord& rec = r.records.front();
    CHECK(rec.observed == o.values[8]);  // u=7, k=1
    CHECK(rec.disease == "TESTPOX");
    CHECK(rec.phase == Phase::pre_peak);
    CHECK(rec.wis == doctest::Approx(wis(good, o.values[8])).epsilon(1e-12));
}

TEST_CASE("aggregate means, zero-truth exclusions and the NMSE definition") {
    ScoreRecord r1;
    r1.unique_id = "a";
    r1.model = "flat";
    r1.horizon = 1;
    r1.observed = 10.0;
    r1.point_forecast = 8.0;
    r1.wis = 2.0;
    r1.nwis = 0.2;
    r1.ape = 20.0;
    r1.squared_error = 4.0;
    r1.phase = Phase::pre_peak;

    SUBCASE("single record") {
        auto t = aggregate({r1}, {"model"});
        REQUIRE(t.rows.size() == 1);
        CHECK(t.rows[0].n_targets == 1);
        CHECK(*t.rows[0].nwis == doctest::Approx(0.2).epsilon(1e-12));
        CHECK(*t.rows[0].mape == doctest::Approx(20.0).epsilon(1e-12));
        CHECK(*t.rows[0].nmse == doctest::Approx(4.0 / (10.0 * 8.0)).epsilon(1e-12));
    }

    SUBCASE("two identical records equal one") {
        auto one = aggregate({r1}, {"model"});
        auto two = aggregate({r1, r1}, {"model"});
        CHECK(*two.rows[0].nwis == doctest::Approx(*one.rows[0].nwis).epsilon(1e-12));
        CHECK(*two.rows[0].nmse == doctest::Approx(*one.rows[0].nmse).epsilon(1e-12));
        CHECK(*two.rows[0].mape == doctest::Approx(*one.rows[0].mape).epsilon(1e-12));
        CHECK(two.rows[0].n_targets == 2);
    }

    SUBCASE("zero-truth records are excluded from nwis and mape only") {
        ScoreRecord r2 = r1;
        r2.observed = 0.0;
        r2.nwis.reset();
        r2.ape.reset();
        r2.squared_error = 64.0;
        auto t = aggregate({r1, r2}, {"model"});
        REQUIRE(t.rows.size() == 1);
        CHECK(t.rows[0].n_targets == 2);
        CHECK(t.rows[0].n_zero_truth == 1);
        // Oracle: recompute directly.
        CHECK(*t.rows[0].nwis == doctest::Approx(0.2).epsilon(1e-12));
        CHECK(*t.rows[0].mape == doctest::Approx(20.0).epsilon(1e-12));
        double mse = (4.0 + 64.0) / 2.0;
        double denom = ((10.0 + 0.0) / 2.0) * ((8.0 + 8.0) / 2.0);
        CHECK(*t.rows[0].nmse == doctest::Approx(mse / denom).epsilon(1e-12));
    }

    SUBCASE("aggregation is permutation invariant and sorted by group") {
        ScoreRecord r2 = r1;
        r2.model = "ar";
        r2.horizon = 2;
        ScoreRecord r3 = r1;
        r3.horizon = 2;
        auto a = aggregate({r1, r2, r3}, {"model", "horizon"});
        auto b = aggregate({r3, r1, r2}, {"model", "horizon"});
        REQUIRE(a.rows.size() == b.rows.size());
        for (std::size_t i = 0; i < a.rows.size(); ++i) {
            CHECK(a.rows[i].group == b.rows[i].group);
            CHECK(a.rows[i].n_targets == b.rows[i].n_targets);
        }
        CHECK(a.rows[0].group[0] == "ar");  // sorted
    }

    SUBCASE("unknown group keys are rejected") {
        CHECK_THROWS_AS(aggregate({r1}, {"color"}), ConfigError);
    }
}

TEST_CASE("minibatch metrics average equally over batches") {
    ScoreRecord a;
    a.unique_id = "a";
    a.model = "flat";
    a.observed = 10.0;
    a.point_forecast = 10.0;
    a.wis = 1.0;
    a.nwis = 0.1;
    a.ape = 0.0;
    a.squared_error = 0.0;
    ScoreRecord b = a;
    b.unique_id = "b";
    b.nwis = 0.3;

    MinibatchSummary s = minibatch_metrics({a, b}, {{"a"}, {"b"}, {"a", "b"}});
    CHECK(s.n_batches == 3);
    CHECK(*s.nwis == doctest::Approx((0.1 + 0.3 + 0.2) / 3.0).epsilon(1e-12));
}
