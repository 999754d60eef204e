#include "volley/sim/metrics.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include <fmt/format.h>

#include "volley/core/error.hpp"
#include "volley/core/trace.hpp"

namespace volley::sim {

double Metrics::get(std::string_view key) const {
    auto it = values.find(std::string(key));
    return it == values.end() ? std::numeric_limits<double>::quiet_NaN() : it->second;
}

bool Metrics::has(std::string_view key) const {
    return values.contains(std::string(key));
}

std::string Metrics::text() const {
    std::string out;
    for (const auto& [k, v] : values) {
        const bool integral = std::isfinite(v) && std::abs(v) < 1e15 && v == std::floor(v);
        out += k;
        out += ' ';
        out += integral ? fmt::format("{}", static_cast<long long>(v)) : format_decimal(v);
        out += '\n';
    }
    return out;
}

Metrics parse_metrics(std::string_view text) {
    Metrics m;
    std::istringstream in{std::string(text)};
    std::string line;
    int n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (line.empty()) continue;
        const auto sp = line.find(' ');
        if (sp == std::string::npos) throw ValidationError(fmt::format("line {}", n), "expected 'key value'");
        const std::string key = line.substr(0, sp);
        const std::string val = line.substr(sp + 1);
        try {
            std::size_t used = 0;
            const double v = std::stod(val, &used);
            if (used != val.size()) throw std::invalid_argument(val);
            m.values[key] = v;
        } catch (const std::exception&) {
            if (val == "nan") {
                m.values[key] = std::numeric_limits<double>::quiet_NaN();
            } else {
                throw ValidationError(key, "not a number: " + val);
            }
        }
    }
    return m;
}

}  // namespace volley::sim
