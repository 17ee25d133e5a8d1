// epiwave command-line front end: ingest -> segment -> analyze -> backtest
// -> score, each stage reading and writing the documented file formats.

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "epiwave/analytics.hpp"
#include "epiwave/harness.hpp"
#include "epiwave/io.hpp"
#include "epiwave/scoring.hpp"
#include "epiwave/segmentation.hpp"
#include "epiwave/util.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace epiwave;

namespace {

int worker_count() {
    if (const char* env = std::getenv("EPIWAVE_WORKERS")) {
        auto n = parse_long(env);
        if (n && *n >= 1) return static_cast<int>(*n);
        std::cerr << "warning: ignoring bad EPIWAVE_WORKERS value '" << env << "'\n";
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw ? static_cast<int>(hw) : 1;
}

struct RunConfig {
    std::uint64_t seed = 42;
    double sparse_threshold = 0.4;
    SegmentationConfig segmentation;
    HarnessConfig harness;
    std::vector<std::string> models = {"flat", "ets", "ar"};

    json to_json() const {
        json seg = {{"bandwidth", segmentation.kernel_bandwidth_weeks},
                    {"min_core", segmentation.min_core_weeks},
                    {"max_core", segmentation.max_core_weeks},
                    {"pad", segmentation.pad_weeks}};
        if (std::isfinite(segmentation.second_derivative_threshold))
            seg["second_derivative_threshold"] = segmentation.second_derivative_threshold;
        else
            seg["second_derivative_threshold"] = nullptr;
        return json{{"seed", seed},
                    {"sparse_threshold", sparse_threshold},
                    {"segmentation", seg},
                    {"harness",
                     {{"min_history", harness.min_history_weeks},
                      {"max_horizon", harness.max_horizon},
                      {"train_fraction", harness.train_fraction},
                      {"val_fraction", harness.val_fraction},
                      {"test_fraction", harness.test_fraction},
                      {"minibatch_size", harness.minibatch_size},
                      {"minibatch_repeats", harness.minibatch_repeats},
                      {"log1p", harness.log1p_transform}}},
                    {"models", models}};
    }

    void load(const std::string& path) {
        json j = json::parse(io::read_text_file(path));
        seed = j.value("seed", seed);
        sparse_threshold = j.value("sparse_threshold", sparse_threshold);
        if (j.contains("segmentation")) {
            const json& s = j["segmentation"];
            segmentation.kernel_bandwidth_weeks =
                s.value("bandwidth", segmentation.kernel_bandwidth_weeks);
            segmentation.min_core_weeks = s.value("min_core", segmentation.min_core_weeks);
            segmentation.max_core_weeks = s.value("max_core", segmentation.max_core_weeks);
            segmentation.pad_weeks = s.value("pad", segmentation.pad_weeks);
            if (s.contains("second_derivative_threshold") &&
                !s["second_derivative_threshold"].is_null())
                segmentation.second_derivative_threshold =
                    s["second_derivative_threshold"].get<double>();
        }
        if (j.contains("harness")) {
            const json& h = j["harness"];
            harness.min_history_weeks = h.value("min_history", harness.min_history_weeks);
            harness.max_horizon = h.value("max_horizon", harness.max_horizon);
            harness.train_fraction = h.value("train_fraction", harness.train_fraction);
            harness.val_fraction = h.value("val_fraction", harness.val_fraction);
            harness.test_fraction = h.value("test_fraction", harness.test_fraction);
            harness.minibatch_size = h.value("minibatch_size", harness.minibatch_size);
            harness.minibatch_repeats = h.value("minibatch_repeats", harness.minibatch_repeats);
            harness.log1p_transform = h.value("log1p", harness.log1p_transform);
        }
        if (j.contains("models")) models = j["models"].get<std::vector<std::string>>();
        harness.split_seed = seed;
    }
};

void write_run_outputs(const fs::path& out_dir, const RunConfig& cfg, const std::string& command,
                       const json& counts, bool ok) {
    json summary = {{"command", command}, {"status", ok ? "ok" : "error"}, {"counts", counts}};
    io::write_text_file((out_dir / "run_summary.json").string(), summary.dump(2) + "\n");
    io::write_text_file((out_dir / "effective_config.json").string(),
                        cfg.to_json().dump(2) + "\n");
}

std::vector<Outbreak> load_outbreaks(const std::string& path, json& counts) {
    auto parsed = io::read_outbreak_file(path);
    for (const auto& e : parsed.errors)
        std::cerr << path << ":" << e.line << ": " << e.message << "\n";
    counts["outbreak_rows"] = parsed.data_rows;
    counts["outbreak_rows_rejected"] = parsed.rejected_rows;
    if (parsed.items.empty()) throw Error(path + ": no usable outbreaks");
    return std::move(parsed.items);
}

// --- subcommands -------------------------------------------------------------

int cmd_ingest(const RunConfig& cfg, const std::string& manifest_path,
               const std::string& out_dir) {
    fs::create_directories(out_dir);
    auto manifest = io::read_manifest(manifest_path);
    for (const auto& e : manifest.errors)
        std::cerr << manifest_path << ":" << e.line << ": " << e.message << "\n";
    if (manifest.items.empty()) throw Error(manifest_path + ": manifest lists no input files");

    fs::path base = fs::path(manifest_path).parent_path();
    std::size_t n_series = 0, kept = 0, dropped_sparse = 0, dropped_short = 0, row_errors = 0;
    for (const auto& entry : manifest.items) {
        fs::path raw_path = base / entry.path;
        auto raw = io::read_raw_file(raw_path.string(), entry.resolution);
        for (const auto& e : raw.errors)
            std::cerr << raw_path.string() << ":" << e.line << ": " << e.message << "\n";
        row_errors += raw.errors.size();
        for (const auto& series : raw.items) {
            ++n_series;
            WeeklySeries weekly = to_weekly(series);
            auto decision = filter_sparse(weekly, cfg.sparse_threshold);
            if (!decision.keep) {
                ++dropped_sparse;
                std::cerr << "dropping " << io::series_file_name(series.key) << ": "
                          << decision.reason << "\n";
                continue;
            }
            WeeklySeries imputed;
            try {
                imputed = impute_linear(weekly);
            } catch (const InsufficientDataError& e) {
                ++dropped_short;
                std::cerr << "dropping " << io::series_file_name(series.key) << ": " << e.what()
                          << "\n";
                continue;
            }
            io::write_series_file((fs::path(out_dir) / io::series_file_name(series.key)).string(),
                                  imputed);
            ++kept;
        }
    }
    json counts = {{"input_files", manifest.items.size()}, {"series", n_series},
                   {"series_kept", kept},                  {"dropped_sparse", dropped_sparse},
                   {"dropped_insufficient", dropped_short}, {"row_errors", row_errors}};
    std::cout << "ingest: " << kept << "/" << n_series << " series kept ("
              << dropped_sparse << " sparse, " << dropped_short << " too short, " << row_errors
              << " bad rows)\n";
    write_run_outputs(out_dir, cfg, "ingest", counts, true);
    return 0;
}

int cmd_segment(const RunConfig& cfg, const std::string& series_dir, const std::string& out_dir) {
    fs::create_directories(fs::path(out_dir) / "cutpoints");
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(series_dir))
        if (entry.is_regular_file() && entry.path().extension() == ".csv")
            files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    if (files.empty()) throw Error(series_dir + ": no series files");

    std::vector<Outbreak> outbreaks;
    std::size_t n_cuts = 0;
    for (const auto& f : files) {
        WeeklySeries s = io::read_series_file(f.string());
        CutPointReport report;
        auto segs = segment(s, cfg.segmentation, &report);
        n_cuts += report.accepted.size();
        std::vector<double> original(s.values.size());
        for (std::size_t i = 0; i < s.values.size(); ++i) original[i] = s.values[i].value_or(0.0);
        if (!report.smoothed.empty())
            io::write_cutpoint_report(
                (fs::path(out_dir) / "cutpoints" / f.filename()).string(), report, original);
        for (auto& o : segs) outbreaks.push_back(std::move(o));
    }
    io::write_outbreak_file((fs::path(out_dir) / "outbreaks.csv").string(), outbreaks);

    json counts = {{"series", files.size()}, {"cut_points", n_cuts},
                   {"outbreaks", outbreaks.size()}};
    std::cout << "segment: " << outbreaks.size() << " outbreaks from " << files.size()
              << " series (" << n_cuts << " cut points)\n";
    write_run_outputs(out_dir, cfg, "segment", counts, true);
    return 0;
}

int cmd_analyze(const RunConfig& cfg, const std::string& outbreak_file,
                const std::string& out_dir, bool plot_data) {
    fs::create_directories(out_dir);
    json counts;
    std::vector<Outbreak> outbreaks = load_outbreaks(outbreak_file, counts);

    std::vector<OutbreakMeasures> measures;
    std::size_t degenerate = 0;
    for (const auto& o : outbreaks) {
        try {
            measures.push_back(compute_measures(o));
        } catch (const Error& e) {
            ++degenerate;
            std::cerr << o.unique_id << ": " << e.what() << "\n";
        }
    }
    std::sort(measures.begin(), measures.end(),
              [](const OutbreakMeasures& a, const OutbreakMeasures& b) {
                  return a.unique_id < b.unique_id;
              });
    io::write_measures((fs::path(out_dir) / "measures.csv").string(), measures);

    if (plot_data) {
        // Fixed-width histogram bins per (disease, measure), one row per bin.
        std::map<std::string, const Outbreak*> by_id;
        for (const auto& o : outbreaks) by_id[o.unique_id] = &o;
        std::string text = "disease,measure,bin_start,bin_end,count\n";
        std::map<std::string, std::map<std::string, std::vector<double>>> data;
        for (const auto& m : measures) {
            const std::string& disease = by_id.at(m.unique_id)->key.disease;
            data[disease]["shannon_entropy_bits"].push_back(m.shannon_entropy_bits);
            data[disease]["permutation_entropy_normalized"].push_back(
                m.permutation_entropy_normalized);
            data[disease]["skewness"].push_back(m.skewness);
            data[disease]["excess_kurtosis"].push_back(m.excess_kurtosis);
        }
        constexpr int kBins = 20;
        for (const auto& [disease, per_measure] : data) {
            for (const auto& [measure, values] : per_measure) {
                double lo = *std::min_element(values.begin(), values.end());
                double hi = *std::max_element(values.begin(), values.end());
                if (hi <= lo) hi = lo + 1.0;
                std::vector<std::size_t> bins(kBins, 0);
                for (double v : values) {
                    int b = static_cast<int>((v - lo) / (hi - lo) * kBins);
                    bins[static_cast<std::size_t>(std::clamp(b, 0, kBins - 1))]++;
                }
                for (int b = 0; b < kBins; ++b) {
                    double w = (hi - lo) / kBins;
                    text += csv::join_row({disease, measure, format_double(lo + b * w),
                                           format_double(lo + (b + 1) * w),
                                           std::to_string(bins[static_cast<std::size_t>(b)])});
                    text += '\n';
                }
            }
        }
        io::write_text_file((fs::path(out_dir) / "measures_hist.csv").string(), text);
    }

    counts["measures"] = measures.size();
    counts["degenerate_outbreaks"] = degenerate;
    std::cout << "analyze: " << measures.size() << " measure rows (" << degenerate
              << " degenerate outbreaks skipped)\n";
    write_run_outputs(out_dir, cfg, "analyze", counts, true);
    return 0;
}

int cmd_backtest(const RunConfig& cfg, const std::string& outbreak_file,
                 const std::string& out_dir, const std::string& split) {
    fs::create_directories(out_dir);
    json counts;
    std::vector<Outbreak> outbreaks = load_outbreaks(outbreak_file, counts);

    if (split != "all") {
        std::vector<std::string> ids;
        for (const auto& o : outbreaks) ids.push_back(o.unique_id);
        SplitSets sets = split_outbreaks(ids, cfg.harness);
        const std::vector<std::string>* chosen = nullptr;
        if (split == "train") chosen = &sets.train;
        else if (split == "val") chosen = &sets.val;
        else if (split == "test") chosen = &sets.test;
        else throw ConfigError("unknown split '" + split + "' (use all, train, val or test)");
        std::set<std::string> keep(chosen->begin(), chosen->end());
        std::erase_if(outbreaks, [&](const Outbreak& o) { return !keep.count(o.unique_id); });
        counts["split"] = split;
    }
    counts["outbreaks"] = outbreaks.size();

    int workers = worker_count();
    for (const auto& name : cfg.models) {
        ModelSpec spec = parse_model_name(name);
        BacktestResult result = run_backtest(outbreaks, spec, cfg.harness, workers);
        io::write_hubverse((fs::path(out_dir) / ("forecasts_" + name + ".csv")).string(),
                           result.forecasts, outbreaks);
        counts["forecasts_" + name] = result.forecasts.size();
        counts["skipped_windows_" + name] = result.skipped_windows;
        std::cout << "backtest[" << name << "]: " << result.forecasts.size() << " forecasts, "
                  << result.skipped_windows << " windows skipped\n";
    }
    write_run_outputs(out_dir, cfg, "backtest", counts, true);
    return 0;
}

int cmd_score(const RunConfig& cfg, const std::string& outbreak_file,
              const std::vector<std::string>& forecast_files, const std::string& out_dir,
              const std::vector<std::string>& group_by, bool minibatch) {
    fs::create_directories(out_dir);
    json counts;
    std::vector<Outbreak> outbreaks = load_outbreaks(outbreak_file, counts);

    std::vector<QuantileForecast> forecasts;
    std::size_t rejected_targets = 0;
    for (const auto& path : forecast_files) {
        auto parsed = io::read_hubverse(path, outbreaks);
        for (const auto& e : parsed.errors)
            std::cerr << path << ":" << e.line << ": " << e.message << "\n";
        rejected_targets += parsed.errors.size();
        for (auto& f : parsed.items) forecasts.push_back(std::move(f));
    }
    if (forecasts.empty()) throw Error("no valid forecasts to score");

    ScoringResult scored = score_forecasts(forecasts, outbreaks);
    for (const auto& w : scored.warnings) std::cerr << "warning: " << w << "\n";
    io::write_scores((fs::path(out_dir) / "scores.csv").string(), scored.records);

    // Table-style grid: per-horizon rows plus pooled ("all") and
    // mean-over-horizon ("hmean") rows for every model.
    AggregateTable by_mh = aggregate(scored.records, {"model", "horizon"});
    AggregateTable pooled = aggregate(scored.records, {"model"});
    std::map<std::string, std::vector<const AggregateRow*>> rows_per_model;
    for (const auto& row : by_mh.rows) rows_per_model[row.group[0]].push_back(&row);
    for (const auto& row : pooled.rows) {
        AggregateRow all = row;
        all.group = {row.group[0], "all"};
        by_mh.rows.push_back(all);

        AggregateRow hmean;
        hmean.group = {row.group[0], "hmean"};
        hmean.n_targets = row.n_targets;
        hmean.n_zero_truth = row.n_zero_truth;
        double nwis_sum = 0, nmse_sum = 0, mape_sum = 0;
        std::size_t nwis_n = 0, nmse_n = 0, mape_n = 0;
        for (const AggregateRow* r : rows_per_model[row.group[0]]) {
            if (r->nwis) { nwis_sum += *r->nwis; ++nwis_n; }
            if (r->nmse) { nmse_sum += *r->nmse; ++nmse_n; }
            if (r->mape) { mape_sum += *r->mape; ++mape_n; }
        }
        if (nwis_n) hmean.nwis = nwis_sum / static_cast<double>(nwis_n);
        if (nmse_n) hmean.nmse = nmse_sum / static_cast<double>(nmse_n);
        if (mape_n) hmean.mape = mape_sum / static_cast<double>(mape_n);
        by_mh.rows.push_back(std::move(hmean));
    }
    std::sort(by_mh.rows.begin(), by_mh.rows.end(),
              [](const AggregateRow& a, const AggregateRow& b) { return a.group < b.group; });
    io::write_aggregate((fs::path(out_dir) / "agg_model_horizon.csv").string(), by_mh);
    io::write_aggregate((fs::path(out_dir) / "agg_model_phase.csv").string(),
                        aggregate(scored.records, {"model", "phase"}));
    io::write_aggregate((fs::path(out_dir) / "agg_disease_model.csv").string(),
                        aggregate(scored.records, {"disease", "model"}));
    if (!group_by.empty())
        io::write_aggregate((fs::path(out_dir) / "agg_custom.csv").string(),
                            aggregate(scored.records, group_by));

    if (minibatch) {
        std::set<std::string> id_set;
        for (const auto& r : scored.records) id_set.insert(r.unique_id);
        std::vector<std::string> ids(id_set.begin(), id_set.end());
        auto batches = sample_minibatches(ids, cfg.harness);
        std::set<std::string> models;
        for (const auto& r : scored.records) models.insert(r.model);
        std::string text = "model,n_batches,nwis,nmse,mape\n";
        for (const auto& model : models) {
            std::vector<ScoreRecord> subset;
            for (const auto& r : scored.records)
                if (r.model == model) subset.push_back(r);
            MinibatchSummary s = minibatch_metrics(subset, batches);
            auto opt = [](const std::optional<double>& v) {
                return v ? format_double(*v) : std::string();
            };
            text += csv::join_row({model, std::to_string(s.n_batches), opt(s.nwis), opt(s.nmse),
                                   opt(s.mape)});
            text += '\n';
        }
        io::write_text_file((fs::path(out_dir) / "minibatch.csv").string(), text);
    }

    counts["forecasts"] = forecasts.size();
    counts["targets_scored"] = scored.records.size();
    counts["targets_rejected_on_read"] = rejected_targets;
    counts["targets_unmatched"] = scored.unmatched;
    std::cout << "score: " << scored.records.size() << " targets scored, " << scored.unmatched
              << " unmatched, " << rejected_targets << " rejected on read\n";
    write_run_outputs(out_dir, cfg, "score", counts, true);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"epiwave: outbreak segmentation, baseline forecasting and scoring"};
    app.require_subcommand(1);

    RunConfig cfg;
    std::string config_path;
    app.add_option("--config", config_path, "JSON run configuration")
        ->check(CLI::ExistingFile);

    // Applied after --config so flags override the file.
    std::uint64_t seed_flag = cfg.seed;
    auto* seed_opt = app.add_option("--seed", seed_flag, "Seed for splits and minibatches");

    auto* ingest = app.add_subcommand("ingest", "Raw exports -> canonical weekly series");
    std::string manifest_path, out_dir;
    ingest->add_option("--manifest", manifest_path, "Manifest CSV (path,resolution)")
        ->required()
        ->check(CLI::ExistingFile);
    ingest->add_option("--out", out_dir, "Output directory")->required();
    double sparse_flag = cfg.sparse_threshold;
    auto* sparse_opt =
        ingest->add_option("--sparse-threshold", sparse_flag, "Max missing fraction");

    auto* segment_cmd = app.add_subcommand("segment", "Weekly series -> outbreak file");
    std::string series_dir;
    segment_cmd->add_option("--series", series_dir, "Directory of series files")
        ->required()
        ->check(CLI::ExistingDirectory);
    segment_cmd->add_option("--out", out_dir, "Output directory")->required();
    double bandwidth_flag = cfg.segmentation.kernel_bandwidth_weeks;
    auto* bw_opt = segment_cmd->add_option("--bandwidth", bandwidth_flag, "Gaussian sigma (weeks)");
    int min_core_flag = cfg.segmentation.min_core_weeks;
    int max_core_flag = cfg.segmentation.max_core_weeks;
    int pad_flag = cfg.segmentation.pad_weeks;
    auto* min_core_opt = segment_cmd->add_option("--min-core", min_core_flag, "Min core weeks");
    auto* max_core_opt = segment_cmd->add_option("--max-core", max_core_flag, "Max core weeks");
    auto* pad_opt = segment_cmd->add_option("--pad", pad_flag, "Context padding weeks");
    double d2_flag = 0.0;
    auto* d2_opt = segment_cmd->add_option("--d2-threshold", d2_flag,
                                           "Second-derivative acceptance threshold");

    auto* analyze = app.add_subcommand("analyze", "Outbreak file -> per-outbreak measures");
    std::string outbreak_file;
    analyze->add_option("--outbreaks", outbreak_file, "Outbreak CSV")
        ->required()
        ->check(CLI::ExistingFile);
    analyze->add_option("--out", out_dir, "Output directory")->required();
    bool plot_data = false;
    analyze->add_flag("--plot-data", plot_data, "Also emit histogram bin data");

    auto* backtest = app.add_subcommand("backtest", "Expanding-window forecasts per model");
    backtest->add_option("--outbreaks", outbreak_file, "Outbreak CSV")
        ->required()
        ->check(CLI::ExistingFile);
    backtest->add_option("--out", out_dir, "Output directory")->required();
    std::vector<std::string> models_flag;
    auto* models_opt = backtest->add_option("--models", models_flag, "Models to run")
                           ->delimiter(',');
    std::string split = "all";
    backtest->add_option("--split", split, "Restrict to a split: all, train, val, test");
    int min_history_flag = cfg.harness.min_history_weeks;
    int horizon_flag = cfg.harness.max_horizon;
    auto* min_hist_opt =
        backtest->add_option("--min-history", min_history_flag, "Min training weeks");
    auto* horizon_opt = backtest->add_option("--horizon", horizon_flag, "Max forecast horizon");
    bool log1p_flag = false;
    auto* log1p_opt = backtest->add_flag("--log1p", log1p_flag, "Fit on the log1p scale");

    auto* score = app.add_subcommand("score", "Score forecast files against outbreak truth");
    score->add_option("--outbreaks", outbreak_file, "Outbreak CSV")
        ->required()
        ->check(CLI::ExistingFile);
    std::vector<std::string> forecast_files;
    score->add_option("--forecasts", forecast_files, "Hubverse-style forecast files")
        ->required()
        ->check(CLI::ExistingFile);
    score->add_option("--out", out_dir, "Output directory")->required();
    std::vector<std::string> group_by;
    score->add_option("--group-by", group_by, "Extra aggregate grouping keys")->delimiter(',');
    bool minibatch = false;
    score->add_flag("--minibatch", minibatch, "Also report seeded minibatch metrics");
    int mb_size_flag = cfg.harness.minibatch_size;
    int mb_repeats_flag = cfg.harness.minibatch_repeats;
    auto* mb_size_opt = score->add_option("--minibatch-size", mb_size_flag, "Outbreaks per batch");
    auto* mb_repeats_opt =
        score->add_option("--minibatch-repeats", mb_repeats_flag, "Number of batches");

    CLI11_PARSE(app, argc, argv);

    try {
        if (!config_path.empty()) cfg.load(config_path);
        if (*seed_opt) cfg.seed = seed_flag;
        cfg.harness.split_seed = cfg.seed;
        if (*sparse_opt) cfg.sparse_threshold = sparse_flag;
        if (*bw_opt) cfg.segmentation.kernel_bandwidth_weeks = bandwidth_flag;
        if (*min_core_opt) cfg.segmentation.min_core_weeks = min_core_flag;
        if (*max_core_opt) cfg.segmentation.max_core_weeks = max_core_flag;
        if (*pad_opt) cfg.segmentation.pad_weeks = pad_flag;
        if (*d2_opt) cfg.segmentation.second_derivative_threshold = d2_flag;
        if (*models_opt) cfg.models = models_flag;
        if (*min_hist_opt) cfg.harness.min_history_weeks = min_history_flag;
        if (*horizon_opt) cfg.harness.max_horizon = horizon_flag;
        if (*log1p_opt) cfg.harness.log1p_transform = log1p_flag;
        if (*mb_size_opt) cfg.harness.minibatch_size = mb_size_flag;
        if (*mb_repeats_opt) cfg.harness.minibatch_repeats = mb_repeats_flag;

        if (ingest->parsed()) return cmd_ingest(cfg, manifest_path, out_dir);
        if (segment_cmd->parsed()) return cmd_segment(cfg, series_dir, out_dir);
        if (analyze->parsed()) return cmd_analyze(cfg, outbreak_file, out_dir, plot_data);
        if (backtest->parsed()) return cmd_backtest(cfg, outbreak_file, out_dir, split);
        if (score->parsed())
            return cmd_score(cfg, outbreak_file, forecast_files, out_dir, group_by, minibatch);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
