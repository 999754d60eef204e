#pragma once

#include <map>
#include <span>
#include <utility>
#include <vector>

#include "volley/core/ids.hpp"
#include "volley/core/model.hpp"
#include "volley/core/time.hpp"

namespace volley::credit {

/// FLOPs per credit unit: one day of a 1 GFLOPS CPU.
inline constexpr double kCobblestone = 1e9 * 86400.0;

/// Minimum samples before a normalization factor is applied.
inline constexpr int kNormalizationThreshold = 10;

struct RunningMean {
    long count = 0;
    double mean = 0.0;

    void add(double x) {
        ++count;
        mean += (x - mean) / static_cast<double>(count);
    }
};

/// Statistics of PFC / est_flop_count over validated instances, per app
/// version and per (host, app version).
class PfcStats {
public:
    void record(HostId host, AppVersionId version, double pfc, double est_flop_count);

    RunningMean version(AppVersionId v) const;
    RunningMean host_version(HostId h, AppVersionId v) const;

private:
    std::map<AppVersionId, RunningMean> by_version_;
    std::map<std::pair<HostId, AppVersionId>, RunningMean> by_host_version_;
};

struct PeakFlopCount {
    double flops = 0.0;
    /// Zero runtime; the value carries no information.
    bool anomalous = false;
};

/// PFC = sum over used resources of runtime * usage * peak FLOPS.
PeakFlopCount pfc(double runtime_seconds, const AppVersion& version, const Host& host);

struct Normalization {
    double version_norm = 1.0;
    double host_norm = 1.0;
};

/// version_norm = lowest mean ratio among `app_versions` / mean ratio of
/// `version`; host_norm = mean ratio of `version` / mean ratio of (host,
/// version). Factors stay 1 until the samples behind them reach `threshold`.
Normalization normalization(const PfcStats& stats, HostId host, AppVersionId version,
                            std::span<const AppVersionId> app_versions,
                            int threshold = kNormalizationThreshold);

/// Claimed credit in credit units: PFC * version_norm * host_norm / kCobblestone.
double claimed_credit(double pfc_flops, const Normalization& norm);

/// Caps each claim at twice the median, then averages. Every validated
/// instance of the job is granted this value. Claims must be nonempty.
double granted_credit(std::span<const double> claims);

/// Exponentially decaying average of credit per day.
class RecentAverage {
public:
    explicit RecentAverage(double half_life_seconds = 7 * 86400.0) : half_life_(half_life_seconds) {}

    void add(SimMs now, double credit);
    /// Value decayed to `now`.
    double value_at(SimMs now) const;
    double total() const { return total_; }

private:
    double half_life_;
    double value_ = 0.0;
    double total_ = 0.0;
    SimMs last_ = 0;
    bool started_ = false;
};

}  // namespace volley::credit
