#include "volley/core/allocation.hpp"

#include <algorithm>

namespace volley {

AllocationState linear_bounded_update(const AllocationState& state, double elapsed,
                                      double total_rate_base, double usage) {
    AllocationState next = state;
    const double accrued = state.rate * std::max(elapsed, 0.0) * total_rate_base;
    next.balance = std::clamp(state.balance + accrued - std::max(usage, 0.0), -state.cap, state.cap);
    return next;
}

}  // namespace volley
