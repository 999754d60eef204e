#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "volley/core/ids.hpp"
#include "volley/core/model.hpp"
#include "volley/core/time.hpp"

namespace volley::client {

struct ClientState;

/// Usage is carried in thousandths of an instance so that busy-time integrals
/// are exact integers (instance-milli x ms).
inline constexpr std::int64_t kUsageScale = 1000;

struct WrrJob {
    InstanceId id;
    ProjectId project;
    ResourceKind resource = ResourceKind::cpu;
    std::int64_t usage_milli = kUsageScale;
    /// Estimated remaining scaled runtime.
    SimMs remaining = 0;
    /// Deadline relative to the simulation start.
    SimMs deadline = 0;
};

struct WrrProject {
    ProjectId id;
    double priority = 0.0;
    double share_fraction = 1.0;
};

struct WrrResource {
    ResourceKind kind = ResourceKind::cpu;
    int instances = 1;
};

struct WrrInput {
    /// FIFO order within each project is the order of this vector.
    std::vector<WrrJob> jobs;
    std::vector<WrrProject> projects;
    std::vector<WrrResource> resources;
    SimMs buffer_hi = 0;
    /// Simulation stops here; unfinished jobs with deadline <= horizon miss.
    SimMs horizon = 0;
};

struct WrrResourceResult {
    ResourceKind kind = ResourceKind::cpu;
    int instances = 1;
    /// Integral of idle instances over [0, buffer_hi), in instance-milli x ms.
    std::int64_t shortfall_milli_ms = 0;
    /// First time at which an instance is idle.
    SimMs idle_onset = 0;
    /// Busy usage at time 0, instance-milli.
    std::int64_t initial_busy_milli = 0;
    /// Busy time of instance k (instances filled lowest index first), ms.
    std::vector<double> instance_busy_ms;

    double shortfall_seconds() const {
        return static_cast<double>(shortfall_milli_ms) / (kUsageScale * 1000.0);
    }
    double idle_instances_now() const {
        return static_cast<double>(instances * kUsageScale - initial_busy_milli) / kUsageScale;
    }
};

struct WrrResult {
    std::vector<InstanceId> miss_set;
    /// Simulated completion time of each job that finished within the horizon.
    std::map<InstanceId, SimMs> completion;
    std::vector<WrrResourceResult> resources;

    const WrrResourceResult* resource(ResourceKind kind) const;
    bool misses(InstanceId id) const;
};

/// Ordering key of a project during simulation: its starting priority less the
/// share-normalized usage accrued so far. `used_milli_ms[i]` pairs with
/// `instances[i]`.
double wrr_project_key(double priority, double share_fraction,
                       std::span<const std::int64_t> used_milli_ms, std::span<const int> instances);

/// Event-driven simulation of weighted round robin. At time 0 and after every
/// job completion, projects are ordered by wrr_project_key (descending, ties by
/// id) and a maximal run set is filled greedily, FIFO within each project.
/// Running jobs progress at rate 1 in scaled time.
WrrResult simulate_wrr(const WrrInput& input);

/// Builds the input from client state (remaining scaled runtimes from
/// estimate_remaining, deadlines relative to `now`) and simulates it.
WrrResult wrr_simulate(const ClientState& state, SimMs now, SimMs horizon);

/// A horizon that covers every deadline in the queue and buffer_hi.
SimMs default_horizon(const ClientState& state, SimMs now);

}  // namespace volley::client
