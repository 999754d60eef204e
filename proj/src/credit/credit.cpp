#include "volley/credit/credit.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace volley::credit {

void PfcStats::record(HostId host, AppVersionId version, double pfc, double est_flop_count) {
    const double ratio = pfc / est_flop_count;
    by_version_[version].add(ratio);
    by_host_version_[{host, version}].add(ratio);
}

RunningMean PfcStats::version(AppVersionId v) const {
    auto it = by_version_.find(v);
    return it == by_version_.end() ? RunningMean{} : it->second;
}

RunningMean PfcStats::host_version(HostId h, AppVersionId v) const {
    auto it = by_host_version_.find({h, v});
    return it == by_host_version_.end() ? RunningMean{} : it->second;
}

PeakFlopCount pfc(double runtime_seconds, const AppVersion& version, const Host& host) {
    if (!(runtime_seconds > 0.0)) {
        return {0.0, true};
    }
    double total = 0.0;
    for (const auto& u : version.resource_usage) {
        const auto* r = host.resource(u.kind);
        if (r != nullptr) {
            total += runtime_seconds * u.amount * r->peak_flops_per_instance;
        }
    }
    return {total, false};
}

Normalization normalization(const PfcStats& stats, HostId host, AppVersionId version,
                            std::span<const AppVersionId> app_versions, int threshold) {
    Normalization norm;
    const RunningMean v = stats.version(version);
    if (v.count < threshold || !(v.mean > 0.0)) {
        return norm;
    }
    double lowest = v.mean;
    for (AppVersionId other : app_versions) {
        const RunningMean o = stats.version(other);
        if (o.count >= threshold && o.mean > 0.0) {
            lowest = std::min(lowest, o.mean);
        }
    }
    norm.version_norm = lowest / v.mean;

    const RunningMean hv = stats.host_version(host, version);
    if (hv.count >= threshold && hv.mean > 0.0) {
        norm.host_norm = v.mean / hv.mean;
    }
    return norm;
}

double claimed_credit(double pfc_flops, const Normalization& norm) {
    return pfc_flops * norm.version_norm * norm.host_norm / kCobblestone;
}

double granted_credit(std::span<const double> claims) {
    if (claims.empty()) {
        throw std::invalid_argument("granted_credit: no claims");
    }
    std::vector<double> sorted(claims.begin(), claims.end());
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = sorted.size();
    const double median = n % 2 == 1 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
    const double cap = 2.0 * median;
    double sum = 0.0;
    for (double c : sorted) {
        sum += std::min(c, cap);
    }
    return sum / static_cast<double>(n);
}

void RecentAverage::add(SimMs now, double credit) {
    value_ = value_at(now);
    // Scaled so a steady r credits/day converges to r.
    value_ += credit * std::numbers::ln2 / (half_life_ / 86400.0);
    total_ += credit;
    last_ = now;
    started_ = true;
}

double RecentAverage::value_at(SimMs now) const {
    if (!started_) {
        return 0.0;
    }
    const double dt = ms_to_seconds(std::max<SimMs>(now - last_, 0));
    return value_ * std::exp(-std::numbers::ln2 * dt / half_life_);
}

}  // namespace volley::credit
