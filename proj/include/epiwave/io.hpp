#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "epiwave/analytics.hpp"
#include "epiwave/forecasters.hpp"
#include "epiwave/ingest.hpp"
#include "epiwave/scoring.hpp"
#include "epiwave/segmentation.hpp"
#include "epiwave/types.hpp"

namespace epiwave {
namespace io {

struct RowError {
    std::size_t line = 0;  // 1-based line number in the file
    std::string message;
};

template <typename T>
struct Parsed {
    std::vector<T> items;
    std::vector<RowError> errors;
    std::size_t data_rows = 0;      // rows after the header
    std::size_t rejected_rows = 0;  // rows belonging to rejected items
};

// --- raw surveillance exports ------------------------------------------------

struct ManifestEntry {
    std::string path;  // relative to the manifest file
    Resolution resolution = Resolution::weekly;
};

/// Manifest header: path,resolution
Parsed<ManifestEntry> read_manifest(const std::string& path);

/// Raw observation header: disease,location,event,date,value
/// Rows are grouped by key and sorted by date; an empty value cell marks a
/// missing report.
Parsed<RawSeries> read_raw_file(const std::string& path, Resolution resolution);

// --- canonical weekly series -------------------------------------------------

/// Series header: disease,location,event,week_end_date,value. One file per
/// series, rows in consecutive MMWR weeks. Structural problems throw.
void write_series_file(const std::string& path, const WeeklySeries& s);
WeeklySeries read_series_file(const std::string& path);

std::string series_file_name(const SeriesKey& key);

// --- outbreak files ----------------------------------------------------------

inline constexpr int kOutbreakWeekColumns = 60;

/// Header: unique_id,disease,location,event,start_date,end_date,duration,0..59.
/// Rows sorted by unique_id, dates are end-of-week Saturdays, week cells past
/// the duration stay empty. Invalid outbreaks throw; duration beyond the
/// column layout throws LayoutOverflowError.
void write_outbreak_file(const std::string& path, std::vector<Outbreak> outbreaks);

/// Rows that fail parsing or outbreak validation are reported with their line
/// numbers and skipped. The file does not carry core offsets, so the core is
/// re-derived by assuming the padding was even (full 4-week pads when the
/// duration allows); boundary-clipped outbreaks come back with a shifted core.
Parsed<Outbreak> read_outbreak_file(const std::string& path);

// --- Hubverse quantile files ---------------------------------------------------

/// Header: unique_id,model,reference_date,target,horizon,location,output_type,
/// output_type_id,value — the public hub schema plus two identification
/// columns. reference_date is the Saturday of the issuance week, target is
/// "wk inc <outcome lowercased>", output_type is always "quantile".
void write_hubverse(const std::string& path, const std::vector<QuantileForecast>& forecasts,
                    const std::vector<Outbreak>& outbreaks);

/// Order-insensitive read: rows are grouped per target and validated (all 23
/// canonical levels exactly once, non-decreasing values, Saturday reference
/// date, matching target string and location). Groups that fail are reported
/// once with the line of their first row.
Parsed<QuantileForecast> read_hubverse(const std::string& path,
                                       const std::vector<Outbreak>& outbreaks);

// --- measure and score tables --------------------------------------------------

void write_measures(const std::string& path, const std::vector<OutbreakMeasures>& measures);
void write_scores(const std::string& path, const std::vector<ScoreRecord>& records);
void write_aggregate(const std::string& path, const AggregateTable& table);
void write_cutpoint_report(const std::string& path, const CutPointReport& report,
                           const std::vector<double>& original);

/// Whole-file helpers (binary mode, LF endings preserved).
std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

} // namespace io
} // namespace epiwave
