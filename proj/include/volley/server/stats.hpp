#pragma once

#include <map>
#include <utility>

#include "volley/core/ids.hpp"
#include "volley/core/model.hpp"

namespace volley::server {

/// Running count, mean and sum of squared deviations (Welford).
struct Welford {
    long count = 0;
    double mean = 0.0;
    double m2 = 0.0;

    void add(double x);
    /// Sample variance; 0 with fewer than two samples.
    double variance() const { return count > 1 ? m2 / static_cast<double>(count - 1) : 0.0; }
};

/// Samples a count must exceed before its mean is trusted.
inline constexpr int kProjFlopsThreshold = 10;

/// Statistics of runtime / est_flop_count over validated successes, per
/// (host, app version) and per app version.
class RuntimeStats {
public:
    void update(HostId host, AppVersionId version, double est_flop_count, double runtime_seconds);

    Welford host_version(HostId host, AppVersionId version) const;
    Welford version(AppVersionId version) const;

private:
    std::map<std::pair<HostId, AppVersionId>, Welford> by_host_version_;
    std::map<AppVersionId, Welford> by_version_;
};

/// Projected FLOPS: 1 / mean(H,V) when its count exceeds the threshold, else
/// 1 / mean(V) likewise, else the peak FLOPS of the version on the host.
double proj_flops(const RuntimeStats& stats, const Host& host, const AppVersion& version,
                  int threshold = kProjFlopsThreshold);

/// est_flop_count / proj_flops, in raw seconds.
double est_runtime(const JobSpec& spec, const RuntimeStats& stats, const Host& host,
                   const AppVersion& version, int threshold = kProjFlopsThreshold);

}  // namespace volley::server
