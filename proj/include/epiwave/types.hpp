#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "epiwave/mmwr.hpp"

namespace epiwave {

/// Identity of one surveillance series: (disease, location, outcome).
struct SeriesKey {
    std::string disease;
    std::string location;
    std::string outcome;  // e.g. CASES, HOSPITALIZATIONS, PERCENT UNWEIGHTED

    friend bool operator==(const SeriesKey&, const SeriesKey&) = default;
    friend auto operator<=>(const SeriesKey&, const SeriesKey&) = default;
};

const std::vector<std::string>& outcome_vocabulary();
bool is_known_outcome(std::string_view outcome);

/// Empty-field / unknown-outcome problems; empty result means the key is valid.
std::vector<std::string> validate_key(const SeriesKey& key);

/// Contiguous weekly series. values[t] belongs to MMWR week start_week + t;
/// nullopt marks a missing report.
struct WeeklySeries {
    SeriesKey key;
    MmwrWeek start_week;
    std::vector<std::optional<double>> values;

    MmwrWeek week_at(std::size_t index) const {
        return plus_weeks(start_week, static_cast<long>(index));
    }
    std::size_t missing_count() const;
};

/// One segmented outbreak: the padded value vector plus the location of the
/// core (unpadded) wave inside it.
struct Outbreak {
    std::string unique_id;
    SeriesKey key;
    MmwrWeek start_week;  // first padded week
    MmwrWeek end_week;    // last padded week
    int duration = 0;     // padded length == values.size()
    std::vector<double> values;
    int core_start_offset = 0;
    int core_end_offset = 0;

    int core_length() const { return core_end_offset - core_start_offset + 1; }
    std::span<const double> core_values() const {
        return std::span<const double>(values).subspan(
            static_cast<std::size_t>(core_start_offset), static_cast<std::size_t>(core_length()));
    }
};

struct OutbreakBounds {
    int min_core_weeks = 8;
    int max_core_weeks = 52;
    int max_pad_weeks = 4;
};

struct ValidationReport {
    bool pass = true;
    std::vector<std::string> violations;
};

/// Checks every stored-field invariant of Outbreak; purely diagnostic.
ValidationReport validate_outbreak(const Outbreak& o, const OutbreakBounds& bounds = {});

} // namespace epiwave
