#include "volley/server/cache.hpp"

namespace volley::server {

bool JobCache::take(std::size_t i) {
    auto& s = slots_[i];
    if (!s.instance || s.taken) {
        return false;
    }
    s.taken = true;
    return true;
}

void JobCache::release(std::size_t i) {
    slots_[i].taken = false;
}

void JobCache::clear(std::size_t i) {
    auto& s = slots_[i];
    if (s.instance) {
        present_.erase(*s.instance);
    }
    s = Slot{};
}

void JobCache::put(std::size_t i, InstanceId id) {
    clear(i);
    slots_[i].instance = id;
    present_.insert(id);
}

std::size_t feeder_fill(JobCache& cache, JobStore& store) {
    std::size_t filled = 0;
    for (std::size_t i = 0; i < cache.size(); ++i) {
        if (cache.slot(i).instance) {
            continue;
        }
        std::optional<InstanceId> next;
        while ((next = store.next_unsent()) && cache.contains(*next)) {
        }
        if (!next) {
            break;
        }
        cache.put(i, *next);
        ++filled;
    }
    return filled;
}

}  // namespace volley::server
