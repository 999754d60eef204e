#pragma once

#include <optional>
#include <span>
#include <vector>

#include "volley/client/state.hpp"
#include "volley/client/wrr.hpp"
#include "volley/core/random.hpp"

namespace volley::client {

/// Estimated remaining runtime in scaled seconds. Unstarted jobs use the
/// static estimate; started jobs blend the dynamic estimate
/// elapsed*(1-f)/f with the static remainder, weighted by fraction done f.
/// Jobs flagged accurate_fraction use the dynamic estimate alone. Raw seconds
/// are divided by `scale` (availability times duty cycle).
double estimate_remaining(const ClientJob& job, double scale = 1.0);

/// Working-set estimate used for feasibility: the observed value when known,
/// else that of a running job with the same app version, else the project
/// estimate.
double effective_wss(const ClientJob& job, std::span<const ClientJob> queue);

/// Feasibility of running `jobs` together: per coprocessor, usage within
/// instance count; CPU usage of CPU-only jobs within n_usable_cpus and of all
/// jobs within n_usable_cpus + 1; working sets within RAM * max_ram_fraction.
bool feasible(std::span<const ClientJob* const> jobs, const Host& host, const ComputingPrefs& prefs,
              std::span<const ClientJob> queue);

struct ScheduleDecision {
    /// Jobs to run, in priority order.
    std::vector<InstanceId> run;
    /// Running jobs not selected.
    std::vector<InstanceId> preempt;
    /// Deadline misses predicted by the WRR simulation.
    std::vector<InstanceId> predicted_misses;
};

/// Orders queued jobs by: (a) predicted WRR deadline misses first, earliest
/// deadline first (when EDF is enabled); (b) GPU before CPU; (c) running jobs
/// mid-time-slice or not checkpointed since starting; (d) more CPUs;
/// (e) higher project scheduling priority; then FIFO. Adds jobs greedily
/// while the set stays feasible, giving a maximal set.
ScheduleDecision schedule(const ClientState& state, SimMs now);

/// Resource R is fetchable from project P: P is not suspended or backed off,
/// R is not backed off for P, P has app versions for R, and preferences
/// allow it.
bool fetchable(const ClientState& state, const ProjectState& project, ResourceKind kind, SimMs now);

struct WorkFetch {
    ProjectId project;
    WorkRequest request;
};

/// When some resource has an instance whose simulated busy time falls below
/// buffer_lo, picks the highest-priority project for which such a resource
/// is fetchable and requests work for every resource fetchable from it.
std::optional<WorkFetch> work_fetch(const ClientState& state, SimMs now);

/// Request parameters for `kind` taken from a WRR simulation.
ResourceRequest request_for(const ClientState& state, const WrrResult& wrr, ResourceKind kind);

/// Piggybacked request on an RPC to `project` made for another reason: covers
/// each resource for which `project` is the highest-priority fetchable
/// project. The RPC backoff of `project` itself is ignored.
WorkRequest piggyback_request(const ClientState& state, ProjectId project, SimMs now);

struct ReportBatch {
    ProjectId project;
    std::vector<InstanceId> instances;
};

/// Completed instances to report now. A project's pending reports all go out
/// when an RPC to it is being made anyway (`rpc_project`), when one of them
/// is within report_margin_fraction * delay_bound of its deadline, or when it
/// has report_batch or more pending.
std::vector<ReportBatch> report_policy(const ClientState& state, SimMs now,
                                       std::optional<ProjectId> rpc_project = std::nullopt);

/// Backoff bookkeeping for a scheduler RPC to `project`.
void on_rpc_result(ClientState& state, ProjectId project, bool success, SimMs now, Rng& rng);

/// Fraction of the host's peak FLOPS a job occupies while running.
double capacity_fraction(const ClientJob& job, const Host& host, int n_usable_cpus);

/// Advances every project's scheduling priority by `elapsed_seconds`, charging
/// `usage_seconds` (capacity fraction times run time) per project.
void advance_priorities(ClientState& state, double elapsed_seconds,
                        const std::map<ProjectId, double>& usage_seconds);

}  // namespace volley::client
