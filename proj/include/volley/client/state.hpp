#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "volley/client/backoff.hpp"
#include "volley/core/allocation.hpp"
#include "volley/core/ids.hpp"
#include "volley/core/model.hpp"
#include "volley/core/time.hpp"
#include "volley/validation/validation.hpp"

namespace volley::client {

enum class ClientJobState : std::uint8_t { unstarted, running, suspended_in_memory, preempted };

/// A job instance queued on the client.
struct ClientJob {
    InstanceId instance;
    ProjectId project;
    AppVersionId version;
    std::vector<ResourceUsage> usage;
    /// Project-supplied RAM working-set estimate.
    double est_wss_bytes = 0.0;
    /// Latest working set observed while running or preempted.
    std::optional<double> observed_wss_bytes;
    /// est_flop_count over the server-supplied FLOPS, unscaled.
    double static_estimate_seconds = 0.0;
    double fraction_done = 0.0;
    /// Raw compute time consumed so far.
    double elapsed_seconds = 0.0;
    SimMs deadline = 0;
    double delay_bound_seconds = 0.0;
    ClientJobState state = ClientJobState::unstarted;
    /// The app reports exact fraction done, so the dynamic estimate is used alone.
    bool accurate_fraction = false;
    /// Start of the current run (time slice).
    SimMs slice_start = 0;
    SimMs last_checkpoint = 0;
    double checkpoint_elapsed = 0.0;
    double checkpoint_fraction = 0.0;
    /// FIFO position within the client queue.
    std::uint64_t arrival_seq = 0;

    double usage_of(ResourceKind kind) const;
    /// The GPU kind when one is used, else CPU.
    ResourceKind primary_resource() const;
    bool uses_gpu() const { return primary_resource() != ResourceKind::cpu; }
    bool running() const { return state == ClientJobState::running; }
    bool started() const { return elapsed_seconds > 0.0 || fraction_done > 0.0; }
};

/// Per-resource request parameters sent to a scheduler.
struct ResourceRequest {
    double req_runtime_seconds = 0.0;
    double req_idle = 0.0;
    double queue_dur_seconds = 0.0;
};

struct WorkRequest {
    std::map<ResourceKind, ResourceRequest> resources;

    bool empty() const { return resources.empty(); }
    /// True when some resource asks for runtime or idle instances.
    bool wants_work() const;
};

/// A completed instance awaiting report.
struct PendingReport {
    InstanceId instance;
    ProjectId project;
    bool success = false;
    validation::OutputDigest digest;
    double runtime_seconds = 0.0;
    SimMs completed_at = 0;
    SimMs deadline = 0;
    double delay_bound_seconds = 0.0;
};

struct ProjectState {
    ProjectId id;
    double resource_share = 100.0;
    /// Scheduling priority (linear-bounded balance).
    AllocationState priority;
    BackoffState rpc_backoff;
    /// Backoff after a request for this resource returned no work.
    std::map<ResourceKind, BackoffState> resource_backoff;
    /// Resources the project has app versions for.
    std::set<ResourceKind> resources;
    /// Resources user preferences prohibit for this project.
    std::set<ResourceKind> prohibited;
    bool suspended = false;
};

struct ClientConfig {
    double time_slice_seconds = 3600.0;
    bool edf_enabled = true;
    /// Report immediately once a deadline is within this fraction of the delay bound.
    double report_margin_fraction = 0.1;
    std::size_t report_batch = 8;
    BackoffPolicy backoff;
};

struct ClientState {
    Host host;
    std::vector<ClientJob> queue;
    std::vector<ProjectState> projects;
    /// Exponentially averaged availability per resource, in [0,1].
    std::map<ResourceKind, double> availability;
    std::vector<PendingReport> pending_reports;
    ClientConfig config;
    std::uint64_t next_arrival_seq = 0;

    ProjectState* project(ProjectId id);
    const ProjectState* project(ProjectId id) const;
    ClientJob* job(InstanceId id);
    /// Resource share of `id` over the shares of non-suspended projects.
    double share_fraction(ProjectId id) const;
    /// Availability times throttle duty cycle for `kind`; divides raw runtime
    /// to give scaled runtime.
    double runtime_scale(ResourceKind kind) const;
    /// Instances the client may use: n_usable_cpus for CPU, instance count otherwise.
    int usable_instances(ResourceKind kind) const;
};

}  // namespace volley::client
