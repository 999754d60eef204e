#pragma once

#include <cstddef>
#include <optional>
#include <unordered_set>
#include <vector>

#include "volley/core/ids.hpp"
#include "volley/server/store.hpp"

namespace volley::server {

inline constexpr std::size_t kDefaultCacheSlots = 1000;

/// Fixed array of dispatchable instances shared by scheduler activities.
class JobCache {
public:
    struct Slot {
        std::optional<InstanceId> instance;
        /// Claimed by a scheduler activity between fast and slow checks.
        bool taken = false;
    };

    explicit JobCache(std::size_t slots = kDefaultCacheSlots) : slots_(slots) {}

    std::size_t size() const { return slots_.size(); }
    const Slot& slot(std::size_t i) const { return slots_[i]; }
    std::size_t occupied() const { return present_.size(); }
    bool contains(InstanceId id) const { return present_.contains(id); }

    /// Claims an occupied, untaken slot. False if another activity got it first.
    bool take(std::size_t i);
    /// Returns a taken slot to the pool with its instance intact.
    void release(std::size_t i);
    /// Empties a slot; the feeder refills it later.
    void clear(std::size_t i);
    void put(std::size_t i, InstanceId id);

private:
    std::vector<Slot> slots_;
    std::unordered_set<InstanceId> present_;
};

/// Fills vacant slots with unsent instances from the store, drawing from the
/// backlog's categories round-robin so each category is represented.
/// Returns the number of slots filled.
std::size_t feeder_fill(JobCache& cache, JobStore& store);

}  // namespace volley::server
