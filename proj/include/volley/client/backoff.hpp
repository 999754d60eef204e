#pragma once

#include "volley/core/random.hpp"
#include "volley/core/time.hpp"

namespace volley::client {

/// Exponential backoff with multiplicative jitter:
/// delay = min(cap, base * 2^(failures-1)) * uniform(1 - jitter, 1 + jitter).
struct BackoffPolicy {
    double base_seconds = 60.0;
    double cap_seconds = 86400.0;
    double jitter = 0.2;

    /// Unjittered delay after `failures` consecutive failures (>= 1).
    double nominal_delay(int failures) const;
    double delay(int failures, Rng& rng) const;
};

struct BackoffState {
    int failures = 0;
    SimMs next_allowed = 0;

    bool backed_off(SimMs now) const { return now < next_allowed; }
};

/// Success clears the backoff; failure extends it per `policy`.
void record_rpc_result(BackoffState& state, const BackoffPolicy& policy, bool success, SimMs now,
                       Rng& rng);

}  // namespace volley::client
