#include "volley/validation/validation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "volley/core/error.hpp"

namespace volley::validation {

Comparator Comparator::fuzzy(double tolerance) {
    if (!(tolerance > 0.0)) {
        throw ValidationError("comparator.tolerance", "must be > 0 in fuzzy mode");
    }
    return Comparator{Mode::fuzzy, tolerance};
}

bool equivalent(const OutputDigest& a, const OutputDigest& b, const Comparator& c) {
    if (a.values.size() != b.values.size()) {
        return false;
    }
    if (c.mode == Comparator::Mode::bitwise) {
        return a.values == b.values;
    }
    for (std::size_t i = 0; i < a.values.size(); ++i) {
        const double x = a.values[i];
        const double y = b.values[i];
        if (x == y) {
            continue;
        }
        if (!(std::abs(x - y) <= c.tolerance * std::max(std::abs(x), std::abs(y)))) {
            return false;
        }
    }
    return true;
}

std::optional<QuorumResult> check_quorum(std::span<const QuorumEntry> successes,
                                         const Comparator& c, int min_quorum) {
    const std::size_t n = successes.size();
    if (n == 0 || n < static_cast<std::size_t>(std::max(min_quorum, 1))) {
        return std::nullopt;
    }

    std::vector<std::size_t> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&parent](std::size_t i) {
        while (parent[i] != i) {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        return i;
    };
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (equivalent(*successes[i].digest, *successes[j].digest, c)) {
                parent[find(i)] = find(j);
            }
        }
    }

    std::map<std::size_t, std::vector<InstanceId>> groups;
    for (std::size_t i = 0; i < n; ++i) {
        groups[find(i)].push_back(successes[i].instance);
    }
    // Two groups can't both be a strict majority, so picking any largest one is
    // order-independent whenever it matters.
    const std::vector<InstanceId>* best = nullptr;
    for (const auto& [root, members] : groups) {
        if (best == nullptr || members.size() > best->size()) {
            best = &members;
        }
    }
    if (2 * best->size() <= n) {
        return std::nullopt;
    }
    QuorumResult result;
    result.agreeing = *best;
    std::sort(result.agreeing.begin(), result.agreeing.end());
    result.canonical = result.agreeing.front();
    return result;
}

int ReplicationStats::consecutive_valid(HostId host, AppVersionId version) const {
    auto it = counts_.find({host, version});
    return it == counts_.end() ? 0 : it->second;
}

void ReplicationStats::record(HostId host, AppVersionId version, bool valid) {
    int& n = counts_[{host, version}];
    n = valid ? n + 1 : 0;
}

bool should_replicate(const ReplicationStats& stats, HostId host, AppVersionId version,
                      Rng& rng, int threshold) {
    const int n = stats.consecutive_valid(host, version);
    if (n <= threshold) {
        return true;
    }
    return rng.bernoulli(static_cast<double>(threshold) / static_cast<double>(n));
}

}  // namespace volley::validation
