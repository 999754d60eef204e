#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "volley/core/ids.hpp"
#include "volley/core/random.hpp"

namespace volley::validation {

/// Numeric payload standing in for a job's output files.
struct OutputDigest {
    std::vector<double> values;

    bool operator==(const OutputDigest&) const = default;
};

struct Comparator {
    enum class Mode : std::uint8_t { bitwise, fuzzy };
    Mode mode = Mode::bitwise;
    /// Relative tolerance, fuzzy mode only; must be > 0.
    double tolerance = 0.0;

    static Comparator bitwise() { return {}; }
    static Comparator fuzzy(double tolerance);
};

/// Bitwise: exact equality. Fuzzy: every component pair satisfies
/// |a - b| <= tolerance * max(|a|, |b|). Payloads of different length are
/// never equivalent.
bool equivalent(const OutputDigest& a, const OutputDigest& b, const Comparator& c);

struct QuorumEntry {
    InstanceId instance;
    const OutputDigest* digest = nullptr;
};

struct QuorumResult {
    InstanceId canonical;
    /// Members of the majority group, ascending.
    std::vector<InstanceId> agreeing;
};

/// Groups results by single-link closure of `equivalent`. When the largest
/// group is a strict majority, returns it with its lowest instance id as the
/// canonical result. Fewer than `min_quorum` entries yields nullopt.
std::optional<QuorumResult> check_quorum(std::span<const QuorumEntry> successes,
                                         const Comparator& c, int min_quorum);

/// Default number of consecutive validations after which a (host, version)
/// pair starts skipping replication.
inline constexpr int kDefaultReplicationThreshold = 10;

/// Per-(host, app version) count of consecutive jobs validated by
/// replication.
class ReplicationStats {
public:
    int consecutive_valid(HostId host, AppVersionId version) const;
    void record(HostId host, AppVersionId version, bool valid);

private:
    std::map<std::pair<HostId, AppVersionId>, int> counts_;
};

/// Always replicate while N <= threshold; beyond it replicate with
/// probability threshold / N.
bool should_replicate(const ReplicationStats& stats, HostId host, AppVersionId version,
                      Rng& rng, int threshold = kDefaultReplicationThreshold);

/// N += 1 on a valid result, N = 0 on an invalid one.
inline void record_validation(ReplicationStats& stats, HostId host, AppVersionId version,
                              bool valid) {
    stats.record(host, version, valid);
}

}  // namespace volley::validation
