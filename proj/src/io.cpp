#include "epiwave/io.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <sstream>

#include "epiwave/util.hpp"

namespace epiwave {
namespace io {

namespace {

std::vector<std::string> read_lines(const std::string& path) {
    std::string text = read_text_file(path);
    std::vector<std::string> lines;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t pos = text.find('\n', start);
        if (pos == std::string::npos) {
            if (start < text.size()) lines.push_back(text.substr(start));
            break;
        }
        std::string line = text.substr(start, pos - start);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(std::move(line));
        start = pos + 1;
    }
    return lines;
}

void require_header(const std::vector<std::string>& lines, const std::string& expected,
                    const std::string& path) {
    if (lines.empty() || lines[0] != expected)
        throw FormatError(path + ": header mismatch, expected '" + expected + "'");
}

std::string outbreak_header() {
    std::string h = "unique_id,disease,location,event,start_date,end_date,duration";
    for (int i = 0; i < kOutbreakWeekColumns; ++i) h += "," + std::to_string(i);
    return h;
}

constexpr const char* kHubverseHeader =
    "unique_id,model,reference_date,target,horizon,location,output_type,output_type_id,value";
constexpr const char* kSeriesHeader = "disease,location,event,week_end_date,value";
constexpr const char* kRawHeader = "disease,location,event,date,value";
constexpr const char* kManifestHeader = "path,resolution";
constexpr const char* kMeasuresHeader =
    "unique_id,shannon_entropy_bits,permutation_entropy_normalized,permutation_entropy_bits,"
    "skewness,excess_kurtosis";
constexpr const char* kScoresHeader =
    "unique_id,model,disease,location,event,issuance_week,horizon,observed,point_forecast,wis,"
    "nwis,ape,squared_error,phase";

std::string hub_target_string(const SeriesKey& key) { return "wk inc " + to_lower(key.outcome); }

std::string opt_text(const std::optional<double>& v) { return v ? format_double(*v) : ""; }

} // namespace

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open file for reading: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open file for writing: " + path);
    out << content;
    if (!out) throw Error("write failed: " + path);
}

// --- manifest / raw ----------------------------------------------------------

Parsed<ManifestEntry> read_manifest(const std::string& path) {
    auto lines = read_lines(path);
    require_header(lines, kManifestHeader, path);
    Parsed<ManifestEntry> out;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        ++out.data_rows;
        auto fields = csv::split_line(lines[i]);
        if (fields.size() != 2) {
            out.errors.push_back({i + 1, "expected 2 fields"});
            continue;
        }
        auto res = parse_resolution(fields[1]);
        if (!res) {
            out.errors.push_back({i + 1, "unknown resolution '" + fields[1] + "'"});
            continue;
        }
        if (fields[0].empty()) {
            out.errors.push_back({i + 1, "empty path"});
            continue;
        }
        out.items.push_back({fields[0], *res});
    }
    out.rejected_rows = out.errors.size();
    return out;
}

Parsed<RawSeries> read_raw_file(const std::string& path, Resolution resolution) {
    auto lines = read_lines(path);
    require_header(lines, kRawHeader, path);

    Parsed<RawSeries> out;
    std::map<SeriesKey, std::vector<RawObservation>> grouped;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        ++out.data_rows;
        auto fields = csv::split_line(lines[i]);
        if (fields.size() != 5) {
            out.errors.push_back({i + 1, "expected 5 fields"});
            continue;
        }
        SeriesKey key{fields[0], fields[1], fields[2]};
        auto key_problems = validate_key(key);
        if (!key_problems.empty()) {
            out.errors.push_back({i + 1, key_problems.front()});
            continue;
        }
        std::chrono::sys_days date;
        try {
            date = parse_iso_date(fields[3]);
        } catch (const FormatError& e) {
            out.errors.push_back({i + 1, e.what()});
            continue;
        }
        std::optional<double> value;
        if (!fields[4].empty()) {
            value = parse_double(fields[4]);
            if (!value) {
                out.errors.push_back({i + 1, "bad value '" + fields[4] + "'"});
                continue;
            }
            if (!std::isfinite(*value) || *value < 0) {
                out.errors.push_back({i + 1, "value must be finite and >= 0"});
                continue;
            }
        }
        auto& obs = grouped[key];
        bool duplicate = false;
        for (const auto& o : obs)
            if (o.date == date) {
                out.errors.push_back({i + 1, "duplicate date " + fields[3]});
                duplicate = true;
                break;
            }
        if (!duplicate) obs.push_back({date, value});
    }

    for (auto& [key, obs] : grouped) {
        std::sort(obs.begin(), obs.end(),
                  [](const RawObservation& a, const RawObservation& b) { return a.date < b.date; });
        out.items.push_back(RawSeries{key, resolution, std::move(obs)});
    }
    out.rejected_rows = out.errors.size();
    return out;
}

// --- canonical series ----------------------------------------------------------

std::string series_file_name(const SeriesKey& key) {
    std::string name = key.disease + "__" + key.location + "__" + key.outcome;
    for (char& c : name) {
        bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                  c == '-' || c == '_' || c == '.';
        if (!ok) c = '_';
    }
    return name + ".csv";
}

void write_series_file(const std::string& path, const WeeklySeries& s) {
    std::string text = kSeriesHeader;
    text += '\n';
    for (std::size_t i = 0; i < s.values.size(); ++i) {
        text += csv::join_row({s.key.disease, s.key.location, s.key.outcome,
                               format_iso_date(s.week_at(i).end_date),
                               s.values[i] ? format_double(*s.values[i]) : std::string()});
        text += '\n';
    }
    write_text_file(path, text);
}

WeeklySeries read_series_file(const std::string& path) {
    auto lines = read_lines(path);
    require_header(lines, kSeriesHeader, path);

    WeeklySeries s;
    bool first = true;
    MmwrWeek prev;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        auto fields = csv::split_line(lines[i]);
        if (fields.size() != 5)
            throw FormatError(path + ":" + std::to_string(i + 1) + ": expected 5 fields");
        SeriesKey key{fields[0], fields[1], fields[2]};
        std::chrono::sys_days date = parse_iso_date(fields[3]);
        if (!is_saturday(date))
            throw FormatError(path + ":" + std::to_string(i + 1) + ": " + fields[3] +
                              " is not a Saturday");
        MmwrWeek week = mmwr_week_of(date);
        if (first) {
            s.key = key;
            s.start_week = week;
            first = false;
        } else {
            if (!(key == s.key))
                throw FormatError(path + ":" + std::to_string(i + 1) + ": mixed series keys");
            if (weeks_between(prev, week) != 1)
                throw FormatError(path + ":" + std::to_string(i + 1) + ": weeks not consecutive");
        }
        prev = week;
        if (fields[4].empty()) {
            s.values.push_back(std::nullopt);
        } else {
            auto v = parse_double(fields[4]);
            if (!v || !std::isfinite(*v) || *v < 0)
                throw FormatError(path + ":" + std::to_string(i + 1) + ": bad value '" +
                                  fields[4] + "'");
            s.values.push_back(*v);
        }
    }
    if (first) throw FormatError(path + ": series file has no rows");
    return s;
}

// --- outbreak files --------------------------------------------------------------

void write_outbreak_file(const std::string& path, std::vector<Outbreak> outbreaks) {
    std::sort(outbreaks.begin(), outbreaks.end(),
              [](const Outbreak& a, const Outbreak& b) { return a.unique_id < b.unique_id; });

    std::string text = outbreak_header();
    text += '\n';
    for (const Outbreak& o : outbreaks) {
        if (o.duration > kOutbreakWeekColumns)
            throw LayoutOverflowError("write_outbreak_file: outbreak '" + o.unique_id +
                                      "' duration " + std::to_string(o.duration) +
                                      " exceeds the " + std::to_string(kOutbreakWeekColumns) +
                                      "-week column layout");
        ValidationReport report = validate_outbreak(o);
        if (!report.pass)
            throw FormatError("write_outbreak_file: invalid outbreak '" + o.unique_id +
                              "': " + report.violations.front());
        std::vector<std::string> fields = {o.unique_id,
                                           o.key.disease,
                                           o.key.location,
                                           o.key.outcome,
                                           format_iso_date(o.start_week.end_date),
                                           format_iso_date(o.end_week.end_date),
                                           std::to_string(o.duration)};
        for (int i = 0; i < kOutbreakWeekColumns; ++i)
            fields.push_back(i < o.duration ? format_double(o.values[static_cast<std::size_t>(i)])
                                            : std::string());
        text += csv::join_row(fields);
        text += '\n';
    }
    write_text_file(path, text);
}

Parsed<Outbreak> read_outbreak_file(const std::string& path) {
    auto lines = read_lines(path);
    require_header(lines, outbreak_header(), path);

    Parsed<Outbreak> out;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        ++out.data_rows;
        std::size_t line_no = i + 1;
        auto fields = csv::split_line(lines[i]);
        if (fields.size() != 7 + kOutbreakWeekColumns) {
            out.errors.push_back({line_no, "expected " + std::to_string(7 + kOutbreakWeekColumns) +
                                               " fields, got " + std::to_string(fields.size())});
            continue;
        }
        try {
            Outbreak o;
            o.unique_id = fields[0];
            o.key = SeriesKey{fields[1], fields[2], fields[3]};
            std::chrono::sys_days start = parse_iso_date(fields[4]);
            std::chrono::sys_days end = parse_iso_date(fields[5]);
            if (!is_saturday(start)) throw FormatError("start_date is not a Saturday");
            if (!is_saturday(end)) throw FormatError("end_date is not a Saturday");
            o.start_week = mmwr_week_of(start);
            o.end_week = mmwr_week_of(end);
            auto duration = parse_long(fields[6]);
            if (!duration || *duration < 1 || *duration > kOutbreakWeekColumns)
                throw FormatError("bad duration '" + fields[6] + "'");
            o.duration = static_cast<int>(*duration);
            for (int w = 0; w < kOutbreakWeekColumns; ++w) {
                const std::string& cell = fields[static_cast<std::size_t>(7 + w)];
                if (w < o.duration) {
                    auto v = parse_double(cell);
                    if (!v) throw FormatError("bad value in week column " + std::to_string(w));
                    if (!std::isfinite(*v) || *v < 0)
                        throw FormatError("negative or non-finite value in week column " +
                                          std::to_string(w));
                    o.values.push_back(*v);
                } else if (!cell.empty()) {
                    throw FormatError("week column " + std::to_string(w) +
                                      " populated beyond the stated duration");
                }
            }
            // Core offsets are not stored in the Table-style layout; assume
            // even padding (at most 4 weeks per side).
            int total_pad = std::min(8, o.duration - 8);
            if (total_pad < 0) total_pad = 0;
            int pad_right = total_pad / 2;
            int pad_left = total_pad - pad_right;
            o.core_start_offset = pad_left;
            o.core_end_offset = o.duration - 1 - pad_right;

            ValidationReport report = validate_outbreak(o);
            if (!report.pass) throw FormatError(report.violations.front());
            out.items.push_back(std::move(o));
        } catch (const Error& e) {
            out.errors.push_back({line_no, e.what()});
        }
    }
    out.rejected_rows = out.errors.size();
    return out;
}

// --- Hubverse files ----------------------------------------------------------------

void write_hubverse(const std::string& path, const std::vector<QuantileForecast>& forecasts,
                    const std::vector<Outbreak>& outbreaks) {
    std::map<std::string, const Outbreak*> by_id;
    for (const auto& o : outbreaks) by_id[o.unique_id] = &o;

    std::vector<const QuantileForecast*> sorted;
    sorted.reserve(forecasts.size());
    for (const auto& f : forecasts) sorted.push_back(&f);
    std::sort(sorted.begin(), sorted.end(), [](const QuantileForecast* a, const QuantileForecast* b) {
        if (a->unique_id != b->unique_id) return a->unique_id < b->unique_id;
        if (a->issuance_week_index != b->issuance_week_index)
            return a->issuance_week_index < b->issuance_week_index;
        if (a->horizon != b->horizon) return a->horizon < b->horizon;
        return a->model < b->model;
    });

    std::string text = kHubverseHeader;
    text += '\n';
    for (const QuantileForecast* f : sorted) {
        auto it = by_id.find(f->unique_id);
        if (it == by_id.end())
            throw FormatError("write_hubverse: no outbreak with unique_id '" + f->unique_id + "'");
        const Outbreak& o = *it->second;
        for (std::size_t i = 1; i < f->values.size(); ++i)
            if (f->values[i] < f->values[i - 1])
                throw MalformedForecastError("write_hubverse: non-monotone quantiles for '" +
                                             f->unique_id + "'");
        std::string reference_date =
            format_iso_date(plus_weeks(o.start_week, f->issuance_week_index).end_date);
        std::string target = hub_target_string(o.key);
        for (std::size_t i = 0; i < kQuantileLevels.size(); ++i) {
            text += csv::join_row({f->unique_id, f->model, reference_date, target,
                                   std::to_string(f->horizon), o.key.location, "quantile",
                                   quantile_level_text()[i], format_double(f->values[i])});
            text += '\n';
        }
    }
    write_text_file(path, text);
}

Parsed<QuantileForecast> read_hubverse(const std::string& path,
                                       const std::vector<Outbreak>& outbreaks) {
    auto lines = read_lines(path);
    require_header(lines, kHubverseHeader, path);

    std::map<std::string, const Outbreak*> by_id;
    for (const auto& o : outbreaks) by_id[o.unique_id] = &o;

    struct GroupData {
        std::size_t first_line = 0;
        std::size_t rows = 0;
        std::vector<std::optional<double>> values;  // by level index
        std::vector<std::string> problems;
    };
    // Key: unique_id, model, reference_date, target, horizon text, location.
    std::map<std::array<std::string, 6>, GroupData> groups;

    Parsed<QuantileForecast> out;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        ++out.data_rows;
        std::size_t line_no = i + 1;
        auto fields = csv::split_line(lines[i]);
        if (fields.size() != 9) {
            out.errors.push_back({line_no, "expected 9 fields"});
            ++out.rejected_rows;
            continue;
        }
        std::array<std::string, 6> key = {fields[0], fields[1], fields[2],
                                          fields[3], fields[4], fields[5]};
        GroupData& g = groups[key];
        if (g.rows == 0) {
            g.first_line = line_no;
            g.values.assign(kQuantileLevels.size(), std::nullopt);
        }
        ++g.rows;

        if (fields[6] != "quantile") {
            g.problems.push_back("output_type must be 'quantile', got '" + fields[6] + "'");
            continue;
        }
        auto level = parse_double(fields[7]);
        int level_idx = level ? quantile_level_index(*level) : -1;
        if (level_idx < 0) {
            g.problems.push_back("'" + fields[7] + "' is not one of the 23 canonical levels");
            continue;
        }
        auto value = parse_double(fields[8]);
        if (!value || !std::isfinite(*value)) {
            g.problems.push_back("bad value '" + fields[8] + "'");
            continue;
        }
        if (*value < 0) {
            g.problems.push_back("negative value " + fields[8] + " at level " + fields[7]);
            continue;
        }
        if (g.values[static_cast<std::size_t>(level_idx)]) {
            g.problems.push_back("duplicate level " + fields[7]);
            continue;
        }
        g.values[static_cast<std::size_t>(level_idx)] = *value;
    }

    for (auto& [key, g] : groups) {
        auto reject = [&](const std::string& message) {
            out.errors.push_back({g.first_line, "target (" + key[0] + ", " + key[2] + ", horizon " +
                                                    key[4] + "): " + message});
            out.rejected_rows += g.rows;
        };
        if (!g.problems.empty()) {
            reject(g.problems.front());
            continue;
        }
        bool missing = false;
        for (std::size_t i = 0; i < g.values.size(); ++i) {
            if (!g.values[i]) {
                reject("missing quantile level " + quantile_level_text()[i]);
                missing = true;
                break;
            }
        }
        if (missing) continue;

        QuantileForecast f;
        f.unique_id = key[0];
        f.model = key[1];
        bool monotone = true;
        for (std::size_t i = 0; i < g.values.size(); ++i) {
            f.values[i] = *g.values[i];
            if (i > 0 && f.values[i] < f.values[i - 1]) monotone = false;
        }
        if (!monotone) {
            reject("quantile values are not non-decreasing in level");
            continue;
        }
        auto horizon = parse_long(key[4]);
        if (!horizon || *horizon < 1) {
            reject("bad horizon '" + key[4] + "'");
            continue;
        }
        f.horizon = static_cast<int>(*horizon);

        std::chrono::sys_days ref_date;
        try {
            ref_date = parse_iso_date(key[2]);
        } catch (const FormatError& e) {
            reject(e.what());
            continue;
        }
        if (!is_saturday(ref_date)) {
            reject("reference_date " + key[2] + " is not a Saturday");
            continue;
        }

        auto it = by_id.find(f.unique_id);
        if (it == by_id.end()) {
            reject("unknown unique_id '" + f.unique_id + "'");
            continue;
        }
        const Outbreak& o = *it->second;
        if (key[3] != hub_target_string(o.key)) {
            reject("target '" + key[3] + "' does not match '" + hub_target_string(o.key) + "'");
            continue;
        }
        if (key[5] != o.key.location) {
            reject("location '" + key[5] + "' does not match outbreak location '" +
                   o.key.location + "'");
            continue;
        }
        long u = weeks_between(o.start_week, mmwr_week_of(ref_date));
        if (u < 0 || u >= o.duration) {
            reject("reference_date " + key[2] + " lies outside the outbreak");
            continue;
        }
        f.issuance_week_index = static_cast<int>(u);
        out.items.push_back(std::move(f));
    }

    std::sort(out.items.begin(), out.items.end(),
              [](const QuantileForecast& a, const QuantileForecast& b) {
                  if (a.unique_id != b.unique_id) return a.unique_id < b.unique_id;
                  if (a.issuance_week_index != b.issuance_week_index)
                      return a.issuance_week_index < b.issuance_week_index;
                  if (a.horizon != b.horizon) return a.horizon < b.horizon;
                  return a.model < b.model;
              });
    return out;
}

// --- measures / scores -----------------------------------------------------------

void write_measures(const std::string& path, const std::vector<OutbreakMeasures>& measures) {
    std::string text = kMeasuresHeader;
    text += '\n';
    for (const auto& m : measures) {
        text += csv::join_row({m.unique_id, format_double(m.shannon_entropy_bits),
                               format_double(m.permutation_entropy_normalized),
                               format_double(m.permutation_entropy_bits),
                               format_double(m.skewness), format_double(m.excess_kurtosis)});
        text += '\n';
    }
    write_text_file(path, text);
}

void write_scores(const std::string& path, const std::vector<ScoreRecord>& records) {
    std::string text = kScoresHeader;
    text += '\n';
    for (const auto& r : records) {
        text += csv::join_row({r.unique_id, r.model, r.disease, r.location, r.event,
                               std::to_string(r.issuance_week), std::to_string(r.horizon),
                               format_double(r.observed), format_double(r.point_forecast),
                               format_double(r.wis), opt_text(r.nwis), opt_text(r.ape),
                               format_double(r.squared_error), std::string(phase_name(r.phase))});
        text += '\n';
    }
    write_text_file(path, text);
}

void write_aggregate(const std::string& path, const AggregateTable& table) {
    std::vector<std::string> header = table.group_by;
    for (const char* col : {"n_targets", "n_zero_truth", "nwis", "nmse", "mape"})
        header.push_back(col);
    std::string text = csv::join_row(header);
    text += '\n';
    for (const auto& row : table.rows) {
        std::vector<std::string> fields = row.group;
        fields.push_back(std::to_string(row.n_targets));
        fields.push_back(std::to_string(row.n_zero_truth));
        fields.push_back(opt_text(row.nwis));
        fields.push_back(opt_text(row.nmse));
        fields.push_back(opt_text(row.mape));
        text += csv::join_row(fields);
        text += '\n';
    }
    write_text_file(path, text);
}

void write_cutpoint_report(const std::string& path, const CutPointReport& report,
                           const std::vector<double>& original) {
    std::string text =
        "week_index,value,smoothed,first_derivative,second_derivative,is_raw_candidate,"
        "is_accepted_cut";
    text += '\n';
    auto contains = [](const std::vector<int>& v, int x) {
        return std::find(v.begin(), v.end(), x) != v.end();
    };
    for (std::size_t i = 0; i < report.smoothed.size(); ++i) {
        int idx = static_cast<int>(i);
        text += csv::join_row(
            {std::to_string(i), i < original.size() ? format_double(original[i]) : std::string(),
             format_double(report.smoothed[i]), format_double(report.first_derivative[i]),
             format_double(report.second_derivative[i]),
             contains(report.raw_candidates, idx) ? "1" : "0",
             contains(report.accepted, idx) ? "1" : "0"});
        text += '\n';
    }
    write_text_file(path, text);
}

} // namespace io
} // namespace epiwave
