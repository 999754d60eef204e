#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <vector>

#include "volley/core/allocation.hpp"
#include "volley/core/ids.hpp"
#include "volley/core/model.hpp"
#include "volley/core/random.hpp"
#include "volley/core/trace.hpp"
#include "volley/credit/credit.hpp"
#include "volley/lifecycle/job.hpp"
#include "volley/server/cache.hpp"
#include "volley/server/dispatch.hpp"
#include "volley/server/stats.hpp"
#include "volley/server/store.hpp"
#include "volley/validation/validation.hpp"

namespace volley::server {

struct ServerConfig {
    DispatchConfig dispatch;
    lifecycle::LifecycleConfig lifecycle;
    validation::Comparator comparator;
    std::size_t cache_slots = kDefaultCacheSlots;
    double purge_grace_seconds = lifecycle::kDefaultPurgeGraceSeconds;
};

struct CreditGrant {
    InstanceId instance;
    HostId host;
    double claimed = 0.0;
    double granted = 0.0;
};

/// What a report or deadline changed, for the caller's bookkeeping.
struct ServerUpdate {
    std::vector<JobId> succeeded;
    std::vector<JobId> failed;
    std::vector<InstanceId> created;
    std::vector<InstanceId> cancelled;
    std::vector<InstanceId> valid;
    std::vector<InstanceId> invalid;
    std::vector<CreditGrant> credited;
    bool ignored = false;
};

/// One project's server: job store, feeder and cache, dispatcher, validator
/// and transitioner, and the statistics they maintain.
class ProjectServer {
public:
    ProjectServer(ProjectId id, ServerConfig config, Rng rng, TraceSink* trace = nullptr);

    ProjectId id() const { return id_; }
    const ServerConfig& config() const { return config_; }
    AppCatalog& catalog() { return catalog_; }
    const AppCatalog& catalog() const { return catalog_; }
    JobStore& store() { return store_; }
    const JobStore& store() const { return store_; }
    const JobCache& cache() const { return cache_; }
    const RuntimeStats& runtime_stats() const { return runtime_; }
    const credit::PfcStats& pfc_stats() const { return pfc_; }
    const validation::ReplicationStats& replication_stats() const { return replication_; }
    const SpeedQuantiles& speed_quantiles() const { return quantiles_; }

    /// Creates a job and queues its instances for the feeder.
    const lifecycle::Job& submit(JobId id, const JobSpec& spec, SimMs now);

    /// Scheduler RPC. The host description is remembered for credit.
    Reply handle_request(const SchedulerRequest& request, SimMs now);
    ServerUpdate handle_report(InstanceId instance, const lifecycle::ReportOutcome& outcome,
                               SimMs now);
    ServerUpdate handle_deadline(InstanceId instance, SimMs now);

    /// Drops cache entries that are no longer dispatchable, then refills.
    std::size_t feeder_tick();
    /// Removes terminal, fully resolved jobs past the grace period.
    std::size_t purge(SimMs now);

    void set_submitter_rate(SubmitterId submitter, double rate);
    /// Accrues submitter balances over `elapsed_seconds` with the number of
    /// known hosts as the rate base, charging runtime reported since the
    /// previous call.
    void advance_allocations(double elapsed_seconds);
    const std::map<SubmitterId, AllocationState>& allocations() const { return allocations_; }

    /// Recomputes size-class boundaries from the projected speed of every
    /// known host on its best version.
    void update_speed_quantiles();
    void forget_host(HostId host);
    const Host* host(HostId id) const;

    /// Credit granted to a job's valid instances, once validated.
    std::optional<double> granted(JobId job) const;

private:
    ServerUpdate apply(lifecycle::Job& job, const lifecycle::Effects& fx, SimMs now);
    void emit(const TraceRecord& record);

    ProjectId id_;
    ServerConfig config_;
    Rng rng_;
    TraceSink* trace_;
    AppCatalog catalog_;
    JobStore store_;
    JobCache cache_;
    RuntimeStats runtime_;
    credit::PfcStats pfc_;
    validation::ReplicationStats replication_;
    SpeedQuantiles quantiles_;
    std::map<SubmitterId, AllocationState> allocations_;
    std::map<SubmitterId, double> pending_usage_;
    std::map<HostId, Host> hosts_;
    std::map<JobId, double> granted_;
};

}  // namespace volley::server
