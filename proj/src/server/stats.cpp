#include "volley/server/stats.hpp"

#include "volley/core/classify.hpp"

namespace volley::server {

void Welford::add(double x) {
    ++count;
    const double delta = x - mean;
    mean += delta / static_cast<double>(count);
    m2 += delta * (x - mean);
}

void RuntimeStats::update(HostId host, AppVersionId version, double est_flop_count,
                          double runtime_seconds) {
    const double ratio = runtime_seconds / est_flop_count;
    by_host_version_[{host, version}].add(ratio);
    by_version_[version].add(ratio);
}

Welford RuntimeStats::host_version(HostId host, AppVersionId version) const {
    auto it = by_host_version_.find({host, version});
    return it == by_host_version_.end() ? Welford{} : it->second;
}

Welford RuntimeStats::version(AppVersionId version) const {
    auto it = by_version_.find(version);
    return it == by_version_.end() ? Welford{} : it->second;
}

double proj_flops(const RuntimeStats& stats, const Host& host, const AppVersion& version,
                  int threshold) {
    const Welford hv = stats.host_version(host.id, version.id);
    if (hv.count > threshold && hv.mean > 0.0) {
        return 1.0 / hv.mean;
    }
    const Welford v = stats.version(version.id);
    if (v.count > threshold && v.mean > 0.0) {
        return 1.0 / v.mean;
    }
    return peak_flops_of(version, host);
}

double est_runtime(const JobSpec& spec, const RuntimeStats& stats, const Host& host,
                   const AppVersion& version, int threshold) {
    return spec.est_flop_count / proj_flops(stats, host, version, threshold);
}

}  // namespace volley::server
