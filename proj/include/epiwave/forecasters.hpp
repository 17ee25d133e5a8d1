#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

namespace epiwave {

/// The 23 quantile levels used by the FluSight and COVID-19 forecast hubs.
inline constexpr std::array<double, 23> kQuantileLevels = {
    0.01, 0.025, 0.05, 0.10, 0.15, 0.20, 0.25, 0.30, 0.35, 0.40, 0.45, 0.50,
    0.55, 0.60, 0.65, 0.70, 0.75, 0.80, 0.85, 0.90, 0.95, 0.975, 0.99};

/// Canonical trailing-zero-free decimal text for each level ("0.1", "0.975").
const std::array<std::string, 23>& quantile_level_text();

/// Index into kQuantileLevels, or -1 when the level is not canonical.
int quantile_level_index(double level);

/// Floor applied to every fitted residual variance so constant histories
/// still produce usable (hairline-width) predictive distributions.
inline constexpr double kVarianceFloor = 1e-6;

enum class ModelFamily { flat, ses, holt, damped_holt, ar };

std::string_view family_name(ModelFamily f);

/// A fitted statistical model with everything needed to produce point
/// forecasts and analytic per-horizon forecast variances.
struct FittedModel {
    ModelFamily family = ModelFamily::flat;
    std::vector<double> params;  // family-specific parameter vector
    double residual_variance = kVarianceFloor;
    std::vector<double> state;  // family-specific forecasting state
};

/// Last-value baseline: sigma_h = sd(one-step differences) * sqrt(h).
FittedModel fit_flat(std::span<const double> history);

/// Exponential smoothing: SES, Holt and damped Holt candidates fitted by
/// one-step squared error (grid plus local refinement), selected by AICc.
FittedModel fit_ets(std::span<const double> history);

/// Automatic AR selection over d in {0,1} and p in {0..5} with intercept,
/// least squares on the differenced series, AICc selection (ties go to the
/// smaller p, then smaller d). Forecast variance follows the psi weights.
FittedModel fit_ar(std::span<const double> history);

/// Point forecasts for horizons 1..h.
std::vector<double> point_forecasts(const FittedModel& m, int horizons);

/// Forecast error variances for horizons 1..h; non-decreasing in h.
std::vector<double> forecast_variances(const FittedModel& m, int horizons);

/// Multipliers such that variance_h = residual_variance * multiplier_h.
std::vector<double> forecast_variance_multipliers(const FittedModel& m, int horizons);

/// Standard normal quantile function; p must lie strictly in (0, 1).
double normal_quantile(double p);

/// One predictive distribution as 23 monotone quantiles. unique_id / model /
/// issuance index are filled by whoever runs the model.
struct QuantileForecast {
    std::string unique_id;
    std::string model;
    int issuance_week_index = -1;  // u, 0-based into the outbreak values
    int horizon = 0;               // k, weeks ahead of u
    std::array<double, 23> values{};
};

/// Gaussian quantiles point_k + z(level) * sigma_k for horizons 1..max_horizon,
/// clipped at zero for non-negative outcomes.
std::vector<QuantileForecast> forecast_quantiles(const FittedModel& m, int max_horizon,
                                                 bool clip_at_zero = true);

} // namespace epiwave
