#pragma once

namespace volley {

/// Default balance cap: one day of compute-seconds.
inline constexpr double kDefaultBalanceCap = 86400.0;

/// Linear-bounded allocation: a balance that accrues at `rate` up to `cap`
/// and is spent by usage. The entity with the highest balance has priority.
struct AllocationState {
    double balance = 0.0;
    double rate = 0.0;
    double cap = kDefaultBalanceCap;
};

/// balance' = clamp(balance + rate * elapsed * total_rate_base - usage, -cap, cap).
/// Negative elapsed or usage are treated as zero.
AllocationState linear_bounded_update(const AllocationState& state, double elapsed,
                                      double total_rate_base, double usage);

}  // namespace volley
