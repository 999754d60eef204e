#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "volley/core/ids.hpp"
#include "volley/core/model.hpp"
#include "volley/lifecycle/job.hpp"

namespace volley::server {

/// App versions known to a project.
class AppCatalog {
public:
    void add(AppVersion version);
    const AppVersion* find(AppVersionId id) const;
    /// Versions of `app`, in insertion order.
    std::span<const AppVersionId> versions_of(AppId app) const;
    const std::vector<AppVersion>& all() const { return versions_; }
    /// Resource kinds some version uses as its primary resource.
    std::vector<ResourceKind> primary_resources() const;

private:
    std::vector<AppVersion> versions_;
    std::map<AppId, std::vector<AppVersionId>> by_app_;
};

/// Feeder category: jobs are kept represented in the cache per size class
/// and homogeneous-redundancy lock.
struct Category {
    int size_class = 0;
    std::uint64_t hr_lock = 0;

    auto operator<=>(const Category&) const = default;
};

/// Authoritative job table of one project: jobs, their instances, and the
/// queue of unsent instances not yet in the job cache.
class JobStore {
public:
    /// Inserts a job and queues its unsent instances.
    lifecycle::Job& insert(lifecycle::Job job);
    lifecycle::Job* find(JobId id);
    const lifecycle::Job* find(JobId id) const;
    lifecycle::JobInstance* instance(InstanceId id);
    void erase(JobId id);

    /// Queues a newly created unsent instance for the feeder.
    void enqueue_unsent(InstanceId id);
    /// Next queued instance of some category that is still unsent, visiting
    /// categories round-robin. Stale entries are dropped.
    std::optional<InstanceId> next_unsent();
    std::size_t queued() const { return queued_; }

    std::size_t size() const { return jobs_.size(); }
    const std::map<JobId, lifecycle::Job>& jobs() const { return jobs_; }
    std::map<JobId, lifecycle::Job>& jobs() { return jobs_; }

private:
    Category category_of(const lifecycle::Job& job) const;

    std::map<JobId, lifecycle::Job> jobs_;
    std::map<Category, std::deque<InstanceId>> unsent_;
    std::size_t queued_ = 0;
    /// Category the round-robin visits next.
    Category cursor_{};
};

}  // namespace volley::server
