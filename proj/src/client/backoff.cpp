#include "volley/client/backoff.hpp"

#include <algorithm>
#include <cmath>

namespace volley::client {

double BackoffPolicy::nominal_delay(int failures) const {
    if (failures < 1) {
        return 0.0;
    }
    // 2^63 already dwarfs any sane cap.
    const int exponent = std::min(failures - 1, 62);
    return std::min(cap_seconds, base_seconds * std::ldexp(1.0, exponent));
}

double BackoffPolicy::delay(int failures, Rng& rng) const {
    return nominal_delay(failures) * rng.uniform(1.0 - jitter, 1.0 + jitter);
}

void record_rpc_result(BackoffState& state, const BackoffPolicy& policy, bool success, SimMs now,
                       Rng& rng) {
    if (success) {
        state = BackoffState{};
        return;
    }
    ++state.failures;
    state.next_allowed = now + seconds_to_ms(policy.delay(state.failures, rng));
}

}  // namespace volley::client
