#include "epiwave/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "epiwave/util.hpp"

namespace epiwave {

namespace {

constexpr int kMedianIndex = 11;  // level 0.5
constexpr int kIntervals = 11;    // K

struct GroupAccumulator {
    std::size_t n = 0;
    std::size_t n_nwis = 0;
    std::size_t n_ape = 0;
    std::size_t n_zero_truth = 0;
    double sum_nwis = 0;
    double sum_ape = 0;
    double sum_se = 0;
    double sum_observed = 0;
    double sum_point = 0;
};

std::string record_key_value(const ScoreRecord& r, const std::string& key) {
    if (key == "model") return r.model;
    if (key == "horizon") return std::to_string(r.horizon);
    if (key == "phase") return std::string(phase_name(r.phase));
    if (key == "disease") return r.disease;
    if (key == "location") return r.location;
    if (key == "event") return r.event;
    if (key == "unique_id") return r.unique_id;
    throw ConfigError("aggregate: unknown group key '" + key + "'");
}

AggregateRow finish_group(std::vector<std::string> group, const GroupAccumulator& acc) {
    AggregateRow row;
    row.group = std::move(group);
    row.n_targets = acc.n;
    row.n_zero_truth = acc.n_zero_truth;
    if (acc.n_nwis > 0) row.nwis = acc.sum_nwis / static_cast<double>(acc.n_nwis);
    if (acc.n_ape > 0) row.mape = acc.sum_ape / static_cast<double>(acc.n_ape);
    if (acc.n > 0) {
        double mean_obs = acc.sum_observed / static_cast<double>(acc.n);
        double mean_point = acc.sum_point / static_cast<double>(acc.n);
        double denom = mean_obs * mean_point;
        if (denom > 0) row.nmse = (acc.sum_se / static_cast<double>(acc.n)) / denom;
    }
    return row;
}

} // namespace

double interval_score(double lower, double upper, double alpha, double y) {
    if (lower > upper)
        throw MalformedIntervalError("interval_score: lower bound exceeds upper bound");
    if (!(alpha > 0.0 && alpha < 1.0))
        throw RangeError("interval_score: alpha must lie strictly in (0, 1)");
    double score = upper - lower;
    if (y < lower) score += (2.0 / alpha) * (lower - y);
    if (y > upper) score += (2.0 / alpha) * (y - upper);
    return score;
}

double wis(const QuantileForecast& f, double y) {
    if (!std::isfinite(y)) throw RangeError("wis: observed value must be finite");
    for (std::size_t i = 1; i < f.values.size(); ++i)
        if (f.values[i] < f.values[i - 1])
            throw MalformedForecastError("wis: quantiles are not non-decreasing (levels " +
                                         quantile_level_text()[i - 1] + ", " +
                                         quantile_level_text()[i] + ")");

    double total = 0.5 * std::fabs(y - f.values[kMedianIndex]);
    for (int k = 0; k < kIntervals; ++k) {
        double alpha = 2.0 * kQuantileLevels[static_cast<std::size_t>(k)];
        double lower = f.values[static_cast<std::size_t>(k)];
        double upper = f.values[static_cast<std::size_t>(22 - k)];
        total += (alpha / 2.0) * interval_score(lower, upper, alpha, y);
    }
    return total / (kIntervals + 0.5);
}

std::optional<double> nwis(double wis_value, double y) {
    if (wis_value < 0) throw RangeError("nwis: wis must be >= 0");
    if (y > 0) return wis_value / y;
    return std::nullopt;
}

PointMetrics point_metrics(const QuantileForecast& f, double y) {
    PointMetrics m;
    m.point = f.values[kMedianIndex];
    double err = y - m.point;
    m.squared_error = err * err;
    if (y > 0) m.ape = 100.0 * std::fabs(err) / y;
    return m;
}

std::string_view phase_name(Phase p) {
    return p == Phase::pre_peak ? "pre_peak" : "post_peak";
}

Phase peak_phase(const Outbreak& o, int issuance_index) {
    auto core = o.core_values();
    std::size_t peak = 0;
    for (std::size_t i = 1; i < core.size(); ++i)
        if (core[i] > core[peak]) peak = i;  // first argmax wins ties
    int peak_index = o.core_start_offset + static_cast<int>(peak);
    return issuance_index < peak_index ? Phase::pre_peak : Phase::post_peak;
}

ScoringResult score_forecasts(const std::vector<QuantileForecast>& forecasts,
                              const std::vector<Outbreak>& outbreaks) {
    std::map<std::string, const Outbreak*> by_id;
    for (const auto& o : outbreaks) by_id[o.unique_id] = &o;

    ScoringResult result;
    for (const auto& f : forecasts) {
        auto it = by_id.find(f.unique_id);
        if (it == by_id.end()) {
            ++result.unmatched;
            result.warnings.push_back("no outbreak with unique_id '" + f.unique_id + "'");
            continue;
        }
        const Outbreak& o = *it->second;
        int target = f.issuance_week_index + f.horizon;
        if (f.issuance_week_index < 0 || target >= o.duration) {
            ++result.unmatched;
            result.warnings.push_back("target week " + std::to_string(target) +
                                      " outside outbreak '" + f.unique_id + "'");
            continue;
        }
        double y = o.values[static_cast<std::size_t>(target)];

        ScoreRecord r;
        r.unique_id = f.unique_id;
        r.model = f.model;
        r.disease = o.key.disease;
        r.location = o.key.location;
        r.event = o.key.outcome;
        r.issuance_week = f.issuance_week_index;
        r.horizon = f.horizon;
        r.observed = y;
        r.wis = wis(f, y);
        r.nwis = nwis(r.wis, y);
        PointMetrics pm = point_metrics(f, y);
        r.point_forecast = pm.point;
        r.ape = pm.ape;
        r.squared_error = pm.squared_error;
        r.phase = peak_phase(o, f.issuance_week_index);
        result.records.push_back(std::move(r));
    }
    return result;
}

const std::vector<std::string>& aggregate_keys() {
    static const std::vector<std::string> keys = {
        "model", "horizon", "phase", "disease", "location", "event", "unique_id"};
    return keys;
}

AggregateTable aggregate(const std::vector<ScoreRecord>& records,
                         const std::vector<std::string>& group_by) {
    if (records.empty()) throw EmptySeriesError("aggregate: no records");
    for (const auto& key : group_by)
        if (std::find(aggregate_keys().begin(), aggregate_keys().end(), key) ==
            aggregate_keys().end())
            throw ConfigError("aggregate: unknown group key '" + key + "'");

    std::map<std::vector<std::string>, GroupAccumulator> groups;
    for (const auto& r : records) {
        std::vector<std::string> group;
        group.reserve(group_by.size());
        for (const auto& key : group_by) group.push_back(record_key_value(r, key));
        GroupAccumulator& acc = groups[group];
        ++acc.n;
        acc.sum_se += r.squared_error;
        acc.sum_observed += r.observed;
        acc.sum_point += r.point_forecast;
        if (r.nwis) {
            ++acc.n_nwis;
            acc.sum_nwis += *r.nwis;
        }
        if (r.ape) {
            ++acc.n_ape;
            acc.sum_ape += *r.ape;
        }
        if (!r.nwis) ++acc.n_zero_truth;
    }

    AggregateTable table;
    table.group_by = group_by;
    for (const auto& [group, acc] : groups) table.rows.push_back(finish_group(group, acc));
    return table;
}

MinibatchSummary minibatch_metrics(const std::vector<ScoreRecord>& records,
                                   const std::vector<std::vector<std::string>>& batches) {
    MinibatchSummary summary;
    double sum_nwis = 0, sum_nmse = 0, sum_mape = 0;
    std::size_t n_nwis = 0, n_nmse = 0, n_mape = 0;

    for (const auto& batch : batches) {
        std::set<std::string> members(batch.begin(), batch.end());
        std::vector<ScoreRecord> subset;
        for (const auto& r : records)
            if (members.count(r.unique_id)) subset.push_back(r);
        if (subset.empty()) continue;
        AggregateTable t = aggregate(subset, {});
        const AggregateRow& row = t.rows.front();
        ++summary.n_batches;
        if (row.nwis) {
            sum_nwis += *row.nwis;
            ++n_nwis;
        }
        if (row.nmse) {
            sum_nmse += *row.nmse;
            ++n_nmse;
        }
        if (row.mape) {
            sum_mape += *row.mape;
            ++n_mape;
        }
    }
    if (n_nwis) summary.nwis = sum_nwis / static_cast<double>(n_nwis);
    if (n_nmse) summary.nmse = sum_nmse / static_cast<double>(n_nmse);
    if (n_mape) summary.mape = sum_mape / static_cast<double>(n_mape);
    return summary;
}

} // namespace epiwave
