#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "epiwave/forecasters.hpp"
#include "epiwave/types.hpp"

namespace epiwave {

struct HarnessConfig {
    int min_history_weeks = 8;
    int max_horizon = 4;
    double train_fraction = 0.6;
    double val_fraction = 0.2;
    double test_fraction = 0.2;
    std::uint64_t split_seed = 42;
    int minibatch_size = 100;
    int minibatch_repeats = 10;
    bool log1p_transform = false;  // fit on log1p scale, map quantiles back
};

struct IssuanceWindow {
    int issuance_index = 0;  // u: last observed index of the training prefix
    int max_horizon = 0;     // horizons 1..max_horizon all stay inside the outbreak
};

/// Every u with at least min_history_weeks observed points whose horizons
/// 1..max_horizon all land inside the outbreak. Too-short outbreaks yield an
/// empty list.
std::vector<IssuanceWindow> issuance_windows(const Outbreak& o, const HarnessConfig& cfg);

struct SplitSets {
    std::vector<std::string> train;
    std::vector<std::string> val;
    std::vector<std::string> test;
};

/// Seeded shuffle then a floor-rule partition (remainders go to train).
/// Membership depends only on the id set and the seed, never on input order.
SplitSets split_outbreaks(std::vector<std::string> ids, const HarnessConfig& cfg);

struct ModelSpec {
    std::string name;  // one of available_models()
};

const std::vector<std::string>& available_models();  // {"flat", "ets", "ar"}

/// Throws ConfigError listing the available models on an unknown name.
ModelSpec parse_model_name(const std::string& name);

/// Fit the named model on history and emit quantile forecasts for horizons
/// 1..max_horizon (applying the optional log1p transform).
std::vector<QuantileForecast> fit_and_forecast(const ModelSpec& model,
                                               std::span<const double> history, int max_horizon,
                                               bool log1p_transform);

struct BacktestResult {
    std::vector<QuantileForecast> forecasts;  // sorted by (unique_id, u, horizon)
    std::size_t skipped_windows = 0;          // fit failures, logged and skipped
};

/// Expanding-window backtest over every outbreak: fit on each training
/// prefix, forecast horizons 1..max_horizon. Deterministic for a fixed
/// config regardless of worker count.
BacktestResult run_backtest(const std::vector<Outbreak>& outbreaks, const ModelSpec& model,
                            const HarnessConfig& cfg, int workers = 1);

/// Seeded minibatches sampled without replacement within each batch; batch
/// size is clamped to the number of ids.
std::vector<std::vector<std::string>> sample_minibatches(std::vector<std::string> ids,
                                                         const HarnessConfig& cfg);

} // namespace epiwave
