#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "epiwave/analytics.hpp"
#include "epiwave/harness.hpp"
#include "epiwave/io.hpp"
#include "epiwave/scoring.hpp"
#include "epiwave/segmentation.hpp"
#include "epiwave/util.hpp"

namespace py = pybind11;
using namespace epiwave;

PYBIND11_MODULE(_epiwave, m) {
    m.doc() = "Outbreak segmentation, baseline forecasting and probabilistic scoring";

    py::register_exception<Error>(m, "EpiwaveError");

    // --- calendar and domain types -----------------------------------------
    py::class_<MmwrWeek>(m, "MmwrWeek")
        .def_readonly("year", &MmwrWeek::year)
        .def_readonly("week", &MmwrWeek::week)
        .def_property_readonly(
            "end_date", [](const MmwrWeek& w) { return format_iso_date(w.end_date); })
        .def("__repr__",
             [](const MmwrWeek& w) {
                 return "MmwrWeek(" + std::to_string(w.year) + "W" + std::to_string(w.week) +
                        " ending " + format_iso_date(w.end_date) + ")";
             })
        .def("__eq__", [](const MmwrWeek& a, const MmwrWeek& b) { return a == b; });

    m.def(
        "mmwr_week_of",
        [](const std::string& iso_date) { return mmwr_week_of(parse_iso_date(iso_date)); },
        py::arg("date"), "MMWR week containing an ISO date");
    m.def(
        "plus_weeks", [](const MmwrWeek& w, long n) { return plus_weeks(w, n); }, py::arg("week"),
        py::arg("n"));

    py::class_<SeriesKey>(m, "SeriesKey")
        .def(py::init([](std::string disease, std::string location, std::string outcome) {
                 return SeriesKey{std::move(disease), std::move(location), std::move(outcome)};
             }),
             py::arg("disease"), py::arg("location"), py::arg("outcome"))
        .def_readwrite("disease", &SeriesKey::disease)
        .def_readwrite("location", &SeriesKey::location)
        .def_readwrite("outcome", &SeriesKey::outcome);

    py::class_<WeeklySeries>(m, "WeeklySeries")
        .def(py::init([](const SeriesKey& key, const std::string& start_date,
                         const std::vector<std::optional<double>>& values) {
                 WeeklySeries s;
                 s.key = key;
                 s.start_week = mmwr_week_of(parse_iso_date(start_date));
                 s.values = values;
                 return s;
             }),
             py::arg("key"), py::arg("start_date"), py::arg("values"))
        .def_readonly("key", &WeeklySeries::key)
        .def_readonly("start_week", &WeeklySeries::start_week)
        .def_readonly("values", &WeeklySeries::values);

    py::class_<Outbreak>(m, "Outbreak")
        .def_readonly("unique_id", &Outbreak::unique_id)
        .def_readonly("key", &Outbreak::key)
        .def_readonly("start_week", &Outbreak::start_week)
        .def_readonly("end_week", &Outbreak::end_week)
        .def_readonly("duration", &Outbreak::duration)
        .def_readonly("values", &Outbreak::values)
        .def_readonly("core_start_offset", &Outbreak::core_start_offset)
        .def_readonly("core_end_offset", &Outbreak::core_end_offset)
        .def("core_values", [](const Outbreak& o) {
            auto core = o.core_values();
            return std::vector<double>(core.begin(), core.end());
        });

    py::class_<ValidationReport>(m, "ValidationReport")
        .def_readonly("ok", &ValidationReport::pass)
        .def_readonly("violations", &ValidationReport::violations);
    m.def("validate_outbreak", [](const Outbreak& o) { return validate_outbreak(o); });

    // --- ingest --------------------------------------------------------------
    py::enum_<Resolution>(m, "Resolution")
        .value("daily", Resolution::daily)
        .value("weekly", Resolution::weekly);

    py::class_<RawSeries>(m, "RawSeries")
        .def(py::init([](const SeriesKey& key, Resolution resolution,
                         const std::vector<std::pair<std::string, std::optional<double>>>& obs) {
                 RawSeries r;
                 r.key = key;
                 r.resolution = resolution;
                 for (const auto& [date, value] : obs)
                     r.observations.push_back({parse_iso_date(date), value});
                 return r;
             }),
             py::arg("key"), py::arg("resolution"), py::arg("observations"));

    m.def("aggregate_daily_to_weekly", &aggregate_daily_to_weekly);
    m.def("align_weekly", &align_weekly);
    m.def("impute_linear", &impute_linear);
    m.def(
        "filter_sparse",
        [](const WeeklySeries& s, double threshold) {
            auto d = filter_sparse(s, threshold);
            return py::make_tuple(d.keep, d.missing_fraction, d.reason);
        },
        py::arg("series"), py::arg("max_missing_fraction"));

    // --- segmentation ----------------------------------------------------------
    py::class_<SegmentationConfig>(m, "SegmentationConfig")
        .def(py::init<>())
        .def_readwrite("kernel_bandwidth_weeks", &SegmentationConfig::kernel_bandwidth_weeks)
        .def_readwrite("second_derivative_threshold",
                       &SegmentationConfig::second_derivative_threshold)
        .def_readwrite("min_core_weeks", &SegmentationConfig::min_core_weeks)
        .def_readwrite("max_core_weeks", &SegmentationConfig::max_core_weeks)
        .def_readwrite("pad_weeks", &SegmentationConfig::pad_weeks);

    py::class_<CutPointReport>(m, "CutPointReport")
        .def_readonly("smoothed", &CutPointReport::smoothed)
        .def_readonly("first_derivative", &CutPointReport::first_derivative)
        .def_readonly("second_derivative", &CutPointReport::second_derivative)
        .def_readonly("raw_candidates", &CutPointReport::raw_candidates)
        .def_readonly("accepted", &CutPointReport::accepted);

    m.def(
        "gaussian_smooth",
        [](const std::vector<double>& x, double sigma) { return gaussian_smooth(x, sigma); },
        py::arg("x"), py::arg("sigma"));
    m.def(
        "derivatives",
        [](const std::vector<double>& x) {
            auto d = derivatives(x);
            return py::make_tuple(d.first, d.second);
        },
        py::arg("x"));
    m.def(
        "detect_cutpoints",
        [](const std::vector<double>& x, const SegmentationConfig& cfg) {
            return detect_cutpoints(x, cfg);
        },
        py::arg("x"), py::arg("config") = SegmentationConfig{});
    m.def(
        "segment",
        [](const WeeklySeries& s, const SegmentationConfig& cfg) { return segment(s, cfg); },
        py::arg("series"), py::arg("config") = SegmentationConfig{});

    // --- analytics ----------------------------------------------------------------
    py::class_<OutbreakMeasures>(m, "OutbreakMeasures")
        .def_readonly("unique_id", &OutbreakMeasures::unique_id)
        .def_readonly("shannon_entropy_bits", &OutbreakMeasures::shannon_entropy_bits)
        .def_readonly("permutation_entropy_normalized",
                      &OutbreakMeasures::permutation_entropy_normalized)
        .def_readonly("permutation_entropy_bits", &OutbreakMeasures::permutation_entropy_bits)
        .def_readonly("skewness", &OutbreakMeasures::skewness)
        .def_readonly("excess_kurtosis", &OutbreakMeasures::excess_kurtosis);

    m.def(
        "incidence_distribution",
        [](const std::vector<double>& x) { return incidence_distribution(x); }, py::arg("x"));
    m.def(
        "shannon_entropy", [](const std::vector<double>& p) { return shannon_entropy(p); },
        py::arg("p"));
    m.def(
        "permutation_entropy",
        [](const std::vector<double>& x, int order, int delay, bool normalized) {
            return permutation_entropy(x, order, delay, normalized);
        },
        py::arg("x"), py::arg("order") = 3, py::arg("delay") = 1, py::arg("normalized") = true);
    m.def(
        "shape_moments",
        [](const std::vector<double>& p) {
            auto s = shape_moments(p);
            return py::make_tuple(s.skewness, s.excess_kurtosis);
        },
        py::arg("p"));
    m.def("compute_measures", &compute_measures, py::arg("outbreak"));

    // --- forecasters ------------------------------------------------------------------
    m.attr("QUANTILE_LEVELS") =
        std::vector<double>(kQuantileLevels.begin(), kQuantileLevels.end());

    py::class_<FittedModel>(m, "FittedModel")
        .def_property_readonly(
            "family", [](const FittedModel& f) { return std::string(family_name(f.family)); })
        .def_readonly("params", &FittedModel::params)
        .def_readonly("residual_variance", &FittedModel::residual_variance);

    m.def(
        "fit_flat", [](const std::vector<double>& h) { return fit_flat(h); }, py::arg("history"));
    m.def(
        "fit_ets", [](const std::vector<double>& h) { return fit_ets(h); }, py::arg("history"));
    m.def(
        "fit_ar", [](const std::vector<double>& h) { return fit_ar(h); }, py::arg("history"));
    m.def("point_forecasts", &point_forecasts, py::arg("model"), py::arg("horizons"));
    m.def("forecast_variances", &forecast_variances, py::arg("model"), py::arg("horizons"));
    m.def("normal_quantile", &normal_quantile, py::arg("p"));

    py::class_<QuantileForecast>(m, "QuantileForecast")
        .def(py::init([](std::string unique_id, std::string model, int issuance_week_index,
                         int horizon, const std::vector<double>& values) {
                 if (values.size() != kQuantileLevels.size())
                     throw MalformedForecastError("QuantileForecast needs exactly 23 values");
                 QuantileForecast f;
                 f.unique_id = std::move(unique_id);
                 f.model = std::move(model);
                 f.issuance_week_index = issuance_week_index;
                 f.horizon = horizon;
                 std::copy(values.begin(), values.end(), f.values.begin());
                 return f;
             }),
             py::arg("unique_id"), py::arg("model"), py::arg("issuance_week_index"),
             py::arg("horizon"), py::arg("values"))
        .def_readonly("unique_id", &QuantileForecast::unique_id)
        .def_readonly("model", &QuantileForecast::model)
        .def_readonly("issuance_week_index", &QuantileForecast::issuance_week_index)
        .def_readonly("horizon", &QuantileForecast::horizon)
        .def_property_readonly("values", [](const QuantileForecast& f) {
            return std::vector<double>(f.values.begin(), f.values.end());
        });

    m.def("forecast_quantiles", &forecast_quantiles, py::arg("model"), py::arg("max_horizon"),
          py::arg("clip_at_zero") = true);

    // --- harness ----------------------------------------------------------------------
    py::class_<HarnessConfig>(m, "HarnessConfig")
        .def(py::init<>())
        .def_readwrite("min_history_weeks", &HarnessConfig::min_history_weeks)
        .def_readwrite("max_horizon", &HarnessConfig::max_horizon)
        .def_readwrite("train_fraction", &HarnessConfig::train_fraction)
        .def_readwrite("val_fraction", &HarnessConfig::val_fraction)
        .def_readwrite("test_fraction", &HarnessConfig::test_fraction)
        .def_readwrite("split_seed", &HarnessConfig::split_seed)
        .def_readwrite("minibatch_size", &HarnessConfig::minibatch_size)
        .def_readwrite("minibatch_repeats", &HarnessConfig::minibatch_repeats)
        .def_readwrite("log1p_transform", &HarnessConfig::log1p_transform);

    m.def(
        "issuance_windows",
        [](const Outbreak& o, const HarnessConfig& cfg) {
            std::vector<std::pair<int, int>> out;
            for (const auto& w : issuance_windows(o, cfg))
                out.emplace_back(w.issuance_index, w.max_horizon);
            return out;
        },
        py::arg("outbreak"), py::arg("config") = HarnessConfig{});
    m.def(
        "split_outbreaks",
        [](const std::vector<std::string>& ids, const HarnessConfig& cfg) {
            SplitSets s = split_outbreaks(ids, cfg);
            return py::make_tuple(s.train, s.val, s.test);
        },
        py::arg("ids"), py::arg("config") = HarnessConfig{});
    m.def("available_models", [] { return available_models(); });
    m.def(
        "run_backtest",
        [](const std::vector<Outbreak>& outbreaks, const std::string& model,
           const HarnessConfig& cfg, int workers) {
            BacktestResult r = run_backtest(outbreaks, parse_model_name(model), cfg, workers);
            return py::make_tuple(r.forecasts, r.skipped_windows);
        },
        py::arg("outbreaks"), py::arg("model"), py::arg("config") = HarnessConfig{},
        py::arg("workers") = 1);
    m.def(
        "sample_minibatches",
        [](const std::vector<std::string>& ids, const HarnessConfig& cfg) {
            return sample_minibatches(ids, cfg);
        },
        py::arg("ids"), py::arg("config") = HarnessConfig{});

    // --- scoring -------------------------------------------------------------------------
    m.def("interval_score", &interval_score, py::arg("lower"), py::arg("upper"), py::arg("alpha"),
          py::arg("y"));
    m.def("wis", &wis, py::arg("forecast"), py::arg("y"));
    m.def("nwis", &nwis, py::arg("wis_value"), py::arg("y"));
    m.def(
        "point_metrics",
        [](const QuantileForecast& f, double y) {
            PointMetrics pm = point_metrics(f, y);
            return py::make_tuple(pm.point, pm.ape, pm.squared_error);
        },
        py::arg("forecast"), py::arg("y"));
    m.def(
        "peak_phase",
        [](const Outbreak& o, int u) { return std::string(phase_name(peak_phase(o, u))); },
        py::arg("outbreak"), py::arg("issuance_index"));

    py::class_<ScoreRecord>(m, "ScoreRecord")
        .def_readonly("unique_id", &ScoreRecord::unique_id)
        .def_readonly("model", &ScoreRecord::model)
        .def_readonly("disease", &ScoreRecord::disease)
        .def_readonly("location", &ScoreRecord::location)
        .def_readonly("event", &ScoreRecord::event)
        .def_readonly("issuance_week", &ScoreRecord::issuance_week)
        .def_readonly("horizon", &ScoreRecord::horizon)
        .def_readonly("observed", &ScoreRecord::observed)
        .def_readonly("point_forecast", &ScoreRecord::point_forecast)
        .def_readonly("wis", &ScoreRecord::wis)
        .def_readonly("nwis", &ScoreRecord::nwis)
        .def_readonly("ape", &ScoreRecord::ape)
        .def_readonly("squared_error", &ScoreRecord::squared_error)
        .def_property_readonly(
            "phase", [](const ScoreRecord& r) { return std::string(phase_name(r.phase)); });

    m.def(
        "score_forecasts",
        [](const std::vector<QuantileForecast>& forecasts, const std::vector<Outbreak>& outbreaks) {
            ScoringResult r = score_forecasts(forecasts, outbreaks);
            return py::make_tuple(r.records, r.unmatched, r.warnings);
        },
        py::arg("forecasts"), py::arg("outbreaks"));

    // --- file formats ----------------------------------------------------------------------
    m.def("write_outbreak_file", &io::write_outbreak_file, py::arg("path"), py::arg("outbreaks"));
    m.def(
        "read_outbreak_file",
        [](const std::string& path) {
            auto parsed = io::read_outbreak_file(path);
            std::vector<std::pair<std::size_t, std::string>> errors;
            for (const auto& e : parsed.errors) errors.emplace_back(e.line, e.message);
            return py::make_tuple(parsed.items, errors);
        },
        py::arg("path"));
    m.def("write_hubverse", &io::write_hubverse, py::arg("path"), py::arg("forecasts"),
          py::arg("outbreaks"));
    m.def(
        "read_hubverse",
        [](const std::string& path, const std::vector<Outbreak>& outbreaks) {
            auto parsed = io::read_hubverse(path, outbreaks);
            std::vector<std::pair<std::size_t, std::string>> errors;
            for (const auto& e : parsed.errors) errors.emplace_back(e.line, e.message);
            return py::make_tuple(parsed.items, errors);
        },
        py::arg("path"), py::arg("outbreaks"));
}
