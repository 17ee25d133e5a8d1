#include "epiwave/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "epiwave/util.hpp"

namespace epiwave {

namespace {

void check_config(const HarnessConfig& cfg) {
    if (cfg.min_history_weeks < 2) throw ConfigError("harness: min_history_weeks must be >= 2");
    if (cfg.max_horizon < 1) throw ConfigError("harness: max_horizon must be >= 1");
    double total = cfg.train_fraction + cfg.val_fraction + cfg.test_fraction;
    if (std::fabs(total - 1.0) > 1e-9)
        throw ConfigError("harness: split fractions must sum to 1");
    if (cfg.minibatch_size < 1) throw ConfigError("harness: minibatch_size must be >= 1");
}

FittedModel fit_named(const std::string& name, std::span<const double> history) {
    if (name == "flat") return fit_flat(history);
    if (name == "ets") return fit_ets(history);
    return fit_ar(history);
}

} // namespace

std::vector<IssuanceWindow> issuance_windows(const Outbreak& o, const HarnessConfig& cfg) {
    check_config(cfg);
    std::vector<IssuanceWindow> out;
    int first_u = cfg.min_history_weeks - 1;
    int last_u = o.duration - 1 - cfg.max_horizon;
    for (int u = first_u; u <= last_u; ++u) out.push_back({u, cfg.max_horizon});
    return out;
}

SplitSets split_outbreaks(std::vector<std::string> ids, const HarnessConfig& cfg) {
    check_config(cfg);
    if (ids.empty()) throw EmptySeriesError("split_outbreaks: no ids");
    std::sort(ids.begin(), ids.end());
    std::mt19937_64 gen(cfg.split_seed);
    deterministic_shuffle(ids, gen);

    std::size_t n = ids.size();
    auto floor_count = [n](double fraction) {
        return static_cast<std::size_t>(std::floor(static_cast<double>(n) * fraction + 1e-9));
    };
    std::size_t n_val = floor_count(cfg.val_fraction);
    std::size_t n_test = floor_count(cfg.test_fraction);
    std::size_t n_train = n - n_val - n_test;  // remainders land in train

    SplitSets s;
    s.train.assign(ids.begin(), ids.begin() + static_cast<long>(n_train));
    s.val.assign(ids.begin() + static_cast<long>(n_train),
                 ids.begin() + static_cast<long>(n_train + n_val));
    s.test.assign(ids.begin() + static_cast<long>(n_train + n_val), ids.end());
    std::sort(s.train.begin(), s.train.end());
    std::sort(s.val.begin(), s.val.end());
    std::sort(s.test.begin(), s.test.end());
    return s;
}

const std::vector<std::string>& available_models() {
    static const std::vector<std::string> models = {"flat", "ets", "ar"};
    return models;
}

ModelSpec parse_model_name(const std::string& name) {
    const auto& models = available_models();
    if (std::find(models.begin(), models.end(), name) == models.end()) {
        std::string list;
        for (const auto& m : models) {
            if (!list.empty()) list += ", ";
            list += m;
        }
        throw ConfigError("unknown model '" + name + "' (available: " + list + ")");
    }
    return ModelSpec{name};
}

std::vector<QuantileForecast> fit_and_forecast(const ModelSpec& model,
                                               std::span<const double> history, int max_horizon,
                                               bool log1p_transform) {
    std::vector<QuantileForecast> fcs;
    if (log1p_transform) {
        std::vector<double> transformed(history.size());
        for (std::size_t i = 0; i < history.size(); ++i) transformed[i] = std::log1p(history[i]);
        FittedModel fitted = fit_named(model.name, transformed);
        fcs = forecast_quantiles(fitted, max_horizon, /*clip_at_zero=*/false);
        for (auto& f : fcs)
            for (double& v : f.values) v = std::max(0.0, std::expm1(v));
    } else {
        FittedModel fitted = fit_named(model.name, history);
        fcs = forecast_quantiles(fitted, max_horizon);
    }
    for (auto& f : fcs) f.model = model.name;
    return fcs;
}

BacktestResult run_backtest(const std::vector<Outbreak>& outbreaks, const ModelSpec& model,
                            const HarnessConfig& cfg, int workers) {
    check_config(cfg);
    parse_model_name(model.name);
    if (workers < 1) workers = 1;

    std::vector<std::vector<QuantileForecast>> per_outbreak(outbreaks.size());
    std::vector<std::size_t> skipped(outbreaks.size(), 0);

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        while (true) {
            std::size_t i = next.fetch_add(1);
            if (i >= outbreaks.size()) break;
            const Outbreak& o = outbreaks[i];
            for (const IssuanceWindow& w : issuance_windows(o, cfg)) {
                std::span<const double> prefix(o.values.data(),
                                               static_cast<std::size_t>(w.issuance_index + 1));
                try {
                    auto fcs = fit_and_forecast(model, prefix, w.max_horizon, cfg.log1p_transform);
                    for (auto& f : fcs) {
                        f.unique_id = o.unique_id;
                        f.issuance_week_index = w.issuance_index;
                        per_outbreak[i].push_back(std::move(f));
                    }
                } catch (const Error&) {
                    ++skipped[i];
                }
            }
        }
    };

    if (workers == 1 || outbreaks.size() < 2) {
        worker();
    } else {
        std::vector<std::thread> pool;
        int n_threads = std::min<int>(workers, static_cast<int>(outbreaks.size()));
        pool.reserve(static_cast<std::size_t>(n_threads));
        for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    BacktestResult result;
    for (std::size_t i = 0; i < outbreaks.size(); ++i) {
        result.skipped_windows += skipped[i];
        for (auto& f : per_outbreak[i]) result.forecasts.push_back(std::move(f));
    }
    std::sort(result.forecasts.begin(), result.forecasts.end(),
              [](const QuantileForecast& a, const QuantileForecast& b) {
                  if (a.unique_id != b.unique_id) return a.unique_id < b.unique_id;
                  if (a.issuance_week_index != b.issuance_week_index)
                      return a.issuance_week_index < b.issuance_week_index;
                  return a.horizon < b.horizon;
              });
    return result;
}

std::vector<std::vector<std::string>> sample_minibatches(std::vector<std::string> ids,
                                                         const HarnessConfig& cfg) {
    check_config(cfg);
    if (ids.empty()) throw EmptySeriesError("sample_minibatches: no ids");
    std::sort(ids.begin(), ids.end());
    // Derived stream so minibatch draws never reuse the split's random values.
    std::mt19937_64 gen(cfg.split_seed ^ 0x9e3779b97f4a7c15ULL);

    std::size_t batch = std::min(ids.size(), static_cast<std::size_t>(cfg.minibatch_size));
    std::vector<std::vector<std::string>> out;
    for (int r = 0; r < std::max(1, cfg.minibatch_repeats); ++r) {
        std::vector<std::string> pool = ids;
        // Partial Fisher-Yates: the first `batch` slots end up sampled
        // without replacement.
        for (std::size_t i = 0; i < batch; ++i) {
            std::size_t j = i + static_cast<std::size_t>(bounded_uniform(gen, pool.size() - i));
            std::swap(pool[i], pool[j]);
        }
        pool.resize(batch);
        out.push_back(std::move(pool));
    }
    return out;
}

} // namespace epiwave
