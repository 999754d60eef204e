#pragma once

#include <cmath>
#include <cstdint>

namespace volley {

/// Simulated time in integer milliseconds.
using SimMs = std::int64_t;

inline constexpr SimMs kMsPerSecond = 1000;
inline constexpr SimMs kMsPerHour = 3600 * kMsPerSecond;
inline constexpr SimMs kMsPerDay = 24 * kMsPerHour;

inline SimMs seconds_to_ms(double seconds) {
    return static_cast<SimMs>(std::llround(seconds * 1000.0));
}

inline constexpr double ms_to_seconds(SimMs ms) {
    return static_cast<double>(ms) / 1000.0;
}

}  // namespace volley
