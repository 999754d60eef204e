#include "volley/core/trace.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

namespace volley {

std::string format_decimal(double value) {
    if (!std::isfinite(value)) {
        return std::isnan(value) ? "nan" : (value > 0 ? "inf" : "-inf");
    }
    std::string s = fmt::format("{:.6f}", value);
    return s == "-0.000000" ? "0.000000" : s;
}

TraceRecord& TraceRecord::add(std::string_view key, std::string_view value) {
    fields_.emplace_back(std::string(key), std::string(value));
    return *this;
}

TraceRecord& TraceRecord::add(std::string_view key, std::int64_t value) {
    return add(key, std::string_view(fmt::format("{}", value)));
}

TraceRecord& TraceRecord::add(std::string_view key, std::uint64_t value) {
    return add(key, std::string_view(fmt::format("{}", value)));
}

TraceRecord& TraceRecord::add(std::string_view key, double value) {
    return add(key, std::string_view(format_decimal(value)));
}

TraceRecord& TraceRecord::add(std::string_view key, bool value) {
    return add(key, std::string_view(value ? "1" : "0"));
}

TraceRecord& TraceRecord::add(std::string_view key, InstanceId id) {
    return add(key, std::string_view(fmt::format("{}.{}", id.job.value, id.seq)));
}

std::string_view TraceRecord::get(std::string_view key) const {
    for (const auto& [k, v] : fields_) {
        if (k == key) return v;
    }
    return {};
}

std::string TraceRecord::str() const {
    auto sorted = fields_;
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    std::string line = fmt::format("t={} ev={}", t_, event_);
    for (const auto& [k, v] : sorted) {
        line += ' ';
        line += k;
        line += '=';
        line += v;
    }
    return line;
}

void StreamTrace::emit(const TraceRecord& record) {
    out_ << record.str() << '\n';
}

std::string MemoryTrace::text() const {
    std::string out;
    for (const auto& r : records_) {
        out += r.str();
        out += '\n';
    }
    return out;
}

}  // namespace volley
