#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "volley/client/state.hpp"
#include "volley/core/allocation.hpp"
#include "volley/core/classify.hpp"
#include "volley/core/model.hpp"
#include "volley/core/random.hpp"
#include "volley/lifecycle/job.hpp"
#include "volley/server/cache.hpp"
#include "volley/server/stats.hpp"
#include "volley/server/store.hpp"
#include "volley/validation/validation.hpp"

namespace volley::server {

struct ScoreWeights {
    double keyword = 1.0;
    double allocation = 1.0;
    double skipped = 0.25;
    double locality = 2.0;
    double size = 0.5;
};

struct DispatchConfig {
    ScoreWeights weights;
    HrLevel hr_level = HrLevel::none;
    bool homogeneous_app_version = false;
    bool adaptive_replication = false;
    int replication_threshold = validation::kDefaultReplicationThreshold;
    /// A skip earns the skipped-job bonus for this long.
    double skip_bonus_age_seconds = 86400.0;
    /// Number of job size classes; 1 disables size matching.
    int size_classes = 1;
};

/// Boundaries splitting host speeds into equally populated classes.
class SpeedQuantiles {
public:
    SpeedQuantiles() = default;
    /// `classes` - 1 boundaries at the empirical quantiles of `speeds`.
    static SpeedQuantiles from(std::vector<double> speeds, int classes);

    int classes() const { return static_cast<int>(bounds_.size()) + 1; }
    /// Class index in [0, classes()) of a host with projected FLOPS `speed`.
    int index_of(double speed) const;

private:
    std::vector<double> bounds_;
};

struct ScoreContext {
    /// Submitter balance over its cap, in [-1, 1].
    double allocation_norm = 0.0;
    const SpeedQuantiles* quantiles = nullptr;
    int size_classes = 1;
    SimMs now = 0;
    double skip_bonus_age_seconds = 86400.0;
};

/// Value of sending `job` to `host`; nullopt when the job carries a keyword
/// the host said "no" to.
std::optional<double> score(const lifecycle::Job& job, const Host& host, double proj_flops,
                            const ScoreContext& ctx, const ScoreWeights& weights);

/// A scheduler RPC: host description (with availability fractions) and the
/// work request.
struct SchedulerRequest {
    Host host;
    client::WorkRequest work;
};

enum class SkipReason : std::uint8_t {
    no_version,
    disk,
    deadline,
    dup_in_reply,
    already_sent,
    terminal,
    hr_violation,
};

std::string_view to_string(SkipReason reason);

struct ReplyJob {
    InstanceId instance;
    AppVersionId version;
    ResourceKind resource = ResourceKind::cpu;
    double proj_flops = 0.0;
    double est_runtime_seconds = 0.0;
    double est_scaled_seconds = 0.0;
    double score = 0.0;
    SimMs deadline = 0;
};

struct Reply {
    std::vector<ReplyJob> jobs;
    std::vector<std::pair<InstanceId, SkipReason>> skips;
    /// Instances created by adaptive replication decisions.
    std::vector<InstanceId> created;
    std::vector<JobId> replication_skipped;
    std::optional<std::string> error;
};

/// Everything the dispatcher reads or updates.
struct DispatchState {
    const AppCatalog& catalog;
    JobStore& store;
    JobCache& cache;
    const RuntimeStats& runtime;
    validation::ReplicationStats& replication;
    const std::map<SubmitterId, AllocationState>& allocations;
    const SpeedQuantiles& quantiles;
    const DispatchConfig& config;
    const lifecycle::LifecycleConfig& lifecycle;
    const validation::Comparator& comparator;
    Rng& rng;
};

/// Best admissible version of `job` for `host` on `resource`: compatible,
/// primary resource matches, and equal to the job's app-version lock when
/// homogeneous app version is on; highest projected FLOPS wins. The
/// homogeneous redundancy lock is left to the slow check.
const AppVersion* select_version(const DispatchState& state, const lifecycle::Job& job,
                                 const Host& host, ResourceKind resource);

/// Handles a scheduler request: GPUs first, then CPU. For each requested
/// resource, scans the cache from a random slot, builds a candidate list
/// sorted by score, and admits candidates through the fast check (disk,
/// deadline, duplicate in reply) and slow check (already sent to this host,
/// terminal job, homogeneous redundancy) until the request is satisfied.
Reply handle_request(DispatchState& state, const SchedulerRequest& request, SimMs now);

}  // namespace volley::server
