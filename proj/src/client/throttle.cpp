#include "volley/client/throttle.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace volley::client {

Throttle::Throttle(double duty_cycle, double granularity_seconds)
    : duty_(duty_cycle), on_(granularity_seconds), period_(granularity_seconds / duty_cycle) {
    if (!(duty_cycle > 0.0 && duty_cycle <= 1.0) || !(granularity_seconds > 0.0)) {
        throw std::invalid_argument("throttle: duty cycle must be in (0,1] and granularity > 0");
    }
}

bool Throttle::running_at(double t) const {
    return duty_ >= 1.0 || std::fmod(t, period_) < on_;
}

double Throttle::compute_before(double t) const {
    if (duty_ >= 1.0) {
        return t;
    }
    const double cycles = std::floor(t / period_);
    const double rem = t - cycles * period_;
    return cycles * on_ + std::min(rem, on_);
}

double Throttle::compute_time(double t0, double t1) const {
    return t1 <= t0 ? 0.0 : compute_before(t1) - compute_before(t0);
}

}  // namespace volley::client
