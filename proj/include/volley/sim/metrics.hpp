#pragma once

#include <map>
#include <string>
#include <string_view>

namespace volley::sim {

/// Named run measurements. Rates lie in [0, 1]; compute shares sum to at
/// most 1.
struct Metrics {
    std::map<std::string, double> values;

    void set(std::string key, double value) { values[std::move(key)] = value; }
    /// NaN when absent.
    double get(std::string_view key) const;
    bool has(std::string_view key) const;
    /// One `key value` line per metric, keys sorted, integers without a
    /// fractional part and other values at fixed precision.
    std::string text() const;
};

/// Parses the text form back; throws ValidationError on a malformed line.
Metrics parse_metrics(std::string_view text);

}  // namespace volley::sim
