#include "epiwave/types.hpp"

#include <algorithm>
#include <cmath>

namespace epiwave {

const std::vector<std::string>& outcome_vocabulary() {
    static const std::vector<std::string> vocab = {
        "CASES",
        "DEATHS",
        "HOSPITALIZATIONS",
        "PERCENT UNWEIGHTED",
        "PERCENT WEIGHTED",
    };
    return vocab;
}

bool is_known_outcome(std::string_view outcome) {
    const auto& vocab = outcome_vocabulary();
    return std::find(vocab.begin(), vocab.end(), outcome) != vocab.end();
}

std::vector<std::string> validate_key(const SeriesKey& key) {
    std::vector<std::string> problems;
    if (key.disease.empty()) problems.push_back("disease is empty");
    if (key.location.empty()) problems.push_back("location is empty");
    if (key.outcome.empty())
        problems.push_back("outcome is empty");
    else if (!is_known_outcome(key.outcome))
        problems.push_back("unknown outcome '" + key.outcome + "'");
    return problems;
}

std::size_t WeeklySeries::missing_count() const {
    return static_cast<std::size_t>(
        std::count_if(values.begin(), values.end(), [](const auto& v) { return !v.has_value(); }));
}

ValidationReport validate_outbreak(const Outbreak& o, const OutbreakBounds& bounds) {
    ValidationReport report;
    auto violation = [&](std::string msg) {
        report.pass = false;
        report.violations.push_back(std::move(msg));
    };

    for (const auto& p : validate_key(o.key)) violation("key: " + p);
    if (o.unique_id.empty()) violation("unique_id is empty");

    if (o.duration != static_cast<int>(o.values.size()))
        violation("duration does not equal number of values");
    int max_duration = bounds.max_core_weeks + 2 * bounds.max_pad_weeks;
    if (o.duration > max_duration)
        violation("duration " + std::to_string(o.duration) + " exceeds " +
                  std::to_string(max_duration));
    if (o.duration < 1) violation("duration must be positive");

    if (o.core_start_offset < 0 || o.core_start_offset > bounds.max_pad_weeks)
        violation("core_start_offset outside [0, " + std::to_string(bounds.max_pad_weeks) + "]");
    int trailing_pad = o.duration - 1 - o.core_end_offset;
    if (trailing_pad < 0 || trailing_pad > bounds.max_pad_weeks)
        violation("trailing padding outside [0, " + std::to_string(bounds.max_pad_weeks) + "]");
    int core_len = o.core_end_offset - o.core_start_offset + 1;
    if (core_len < bounds.min_core_weeks || core_len > bounds.max_core_weeks)
        violation("core length " + std::to_string(core_len) + " outside [" +
                  std::to_string(bounds.min_core_weeks) + ", " +
                  std::to_string(bounds.max_core_weeks) + "]");

    for (std::size_t i = 0; i < o.values.size(); ++i) {
        double v = o.values[i];
        if (!std::isfinite(v)) {
            violation("value at week " + std::to_string(i) + " is not finite");
            break;
        }
        if (v < 0) {
            violation("value at week " + std::to_string(i) + " is negative");
            break;
        }
    }

    if (!is_saturday(o.start_week.end_date)) violation("start_week end date is not a Saturday");
    if (!is_saturday(o.end_week.end_date)) violation("end_week end date is not a Saturday");
    if (weeks_between(o.start_week, o.end_week) != o.duration - 1)
        violation("start/end weeks inconsistent with duration");

    return report;
}

} // namespace epiwave
