#pragma once

#include <optional>
#include <string>
#include <vector>

#include "epiwave/forecasters.hpp"
#include "epiwave/types.hpp"

namespace epiwave {

/// Central (1-alpha) interval score: width plus out-of-interval penalties.
double interval_score(double lower, double upper, double alpha, double y);

/// Weighted interval score over the 23-quantile layout: median term weighted
/// 1/2 plus the 11 central intervals weighted alpha_k/2, normalized by
/// K + 0.5. Throws MalformedForecastError on non-monotone quantiles.
double wis(const QuantileForecast& f, double y);

/// wis / y for positive truth; nullopt (excluded from aggregates) otherwise.
std::optional<double> nwis(double wis_value, double y);

struct PointMetrics {
    double point = 0;  // median quantile
    std::optional<double> ape;
    double squared_error = 0;
};

PointMetrics point_metrics(const QuantileForecast& f, double y);

enum class Phase { pre_peak, post_peak };
std::string_view phase_name(Phase p);

/// pre_peak iff the issuance week strictly precedes the first argmax of the
/// core segment.
Phase peak_phase(const Outbreak& o, int issuance_index);

struct ScoreRecord {
    std::string unique_id;
    std::string model;
    std::string disease;
    std::string location;
    std::string event;
    int issuance_week = 0;  // u
    int horizon = 0;        // k
    double observed = 0;
    double point_forecast = 0;
    double wis = 0;
    std::optional<double> nwis;
    std::optional<double> ape;
    double squared_error = 0;
    Phase phase = Phase::pre_peak;
};

struct ScoringResult {
    std::vector<ScoreRecord> records;
    std::size_t unmatched = 0;  // forecasts with no usable truth
    std::vector<std::string> warnings;
};

/// Scores every forecast against the outbreak values at week u + k.
/// Unmatched ids or out-of-range targets are warned about and skipped.
ScoringResult score_forecasts(const std::vector<QuantileForecast>& forecasts,
                              const std::vector<Outbreak>& outbreaks);

/// Valid group_by keys for aggregate().
const std::vector<std::string>& aggregate_keys();

struct AggregateRow {
    std::vector<std::string> group;  // values aligned with the group_by keys
    std::size_t n_targets = 0;
    std::size_t n_zero_truth = 0;  // targets excluded from NWIS/MAPE means
    std::optional<double> nwis;
    std::optional<double> nmse;
    std::optional<double> mape;
};

struct AggregateTable {
    std::vector<std::string> group_by;
    std::vector<AggregateRow> rows;  // sorted by group values
};

/// Group means: NWIS and MAPE over defined targets; NMSE is the group MSE
/// divided by (mean observed * mean point forecast).
AggregateTable aggregate(const std::vector<ScoreRecord>& records,
                         const std::vector<std::string>& group_by);

struct MinibatchSummary {
    std::size_t n_batches = 0;
    std::optional<double> nwis;
    std::optional<double> nmse;
    std::optional<double> mape;
};

/// Mean over equally weighted batch means, one batch per id set.
MinibatchSummary minibatch_metrics(const std::vector<ScoreRecord>& records,
                                   const std::vector<std::vector<std::string>>& batches);

} // namespace epiwave
