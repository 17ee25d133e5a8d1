#pragma once

#include <charconv>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace epiwave {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RangeError : Error { using Error::Error; };
struct EmptySeriesError : Error { using Error::Error; };
struct InsufficientDataError : Error { using Error::Error; };
struct DegenerateDistributionError : Error { using Error::Error; };
struct DegenerateShapeError : Error { using Error::Error; };
struct MalformedIntervalError : Error { using Error::Error; };
struct MalformedForecastError : Error { using Error::Error; };
struct FormatError : Error { using Error::Error; };
struct LayoutOverflowError : Error { using Error::Error; };
struct ConfigError : Error { using Error::Error; };

/// Shortest decimal text that round-trips back to the same double.
std::string format_double(double v);

/// Strict full-string parse; nullopt on any trailing garbage or empty input.
std::optional<double> parse_double(std::string_view s);
std::optional<long> parse_long(std::string_view s);

std::string to_lower(std::string_view s);
std::string_view trim(std::string_view s);

/// Unbiased integer in [0, n). Uses only the mt19937_64 output stream, so
/// results are identical on every platform.
std::uint64_t bounded_uniform(std::mt19937_64& gen, std::uint64_t n);

template <typename T>
void deterministic_shuffle(std::vector<T>& v, std::mt19937_64& gen) {
    for (std::size_t i = v.size(); i > 1; --i) {
        std::size_t j = static_cast<std::size_t>(bounded_uniform(gen, i));
        std::swap(v[i - 1], v[j]);
    }
}

namespace csv {

/// Split one comma-delimited line. No quoting: fields must not contain
/// commas, CR or LF (join_row enforces this on the write side).
std::vector<std::string> split_line(std::string_view line);
std::string join_row(const std::vector<std::string>& fields);

} // namespace csv

} // namespace epiwave
