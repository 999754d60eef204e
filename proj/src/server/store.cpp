#include "volley/server/store.hpp"

#include <algorithm>

namespace volley::server {

void AppCatalog::add(AppVersion version) {
    validate(version);
    by_app_[version.app_id].push_back(version.id);
    versions_.push_back(std::move(version));
}

const AppVersion* AppCatalog::find(AppVersionId id) const {
    for (const auto& v : versions_) {
        if (v.id == id) return &v;
    }
    return nullptr;
}

std::span<const AppVersionId> AppCatalog::versions_of(AppId app) const {
    auto it = by_app_.find(app);
    if (it == by_app_.end()) return {};
    return it->second;
}

std::vector<ResourceKind> AppCatalog::primary_resources() const {
    std::vector<ResourceKind> kinds;
    for (const auto& v : versions_) {
        const auto k = v.primary_resource();
        if (std::find(kinds.begin(), kinds.end(), k) == kinds.end()) {
            kinds.push_back(k);
        }
    }
    std::sort(kinds.begin(), kinds.end());
    return kinds;
}

lifecycle::Job& JobStore::insert(lifecycle::Job job) {
    const JobId id = job.id;
    auto [it, inserted] = jobs_.insert_or_assign(id, std::move(job));
    for (const auto& inst : it->second.instances) {
        if (inst.state == lifecycle::InstanceState::unsent) {
            enqueue_unsent(inst.id);
        }
    }
    return it->second;
}

lifecycle::Job* JobStore::find(JobId id) {
    auto it = jobs_.find(id);
    return it == jobs_.end() ? nullptr : &it->second;
}

const lifecycle::Job* JobStore::find(JobId id) const {
    auto it = jobs_.find(id);
    return it == jobs_.end() ? nullptr : &it->second;
}

lifecycle::JobInstance* JobStore::instance(InstanceId id) {
    auto* job = find(id.job);
    return job == nullptr ? nullptr : job->find(id.seq);
}

void JobStore::erase(JobId id) {
    jobs_.erase(id);
}

Category JobStore::category_of(const lifecycle::Job& job) const {
    return Category{job.spec.size_class, job.hr_class_lock.value_or(0)};
}

void JobStore::enqueue_unsent(InstanceId id) {
    const auto* job = find(id.job);
    if (job == nullptr) {
        return;
    }
    unsent_[category_of(*job)].push_back(id);
    ++queued_;
}

std::optional<InstanceId> JobStore::next_unsent() {
    while (!unsent_.empty()) {
        auto it = unsent_.lower_bound(cursor_);
        if (it == unsent_.end()) {
            it = unsent_.begin();
        }
        auto& queue = it->second;
        const InstanceId id = queue.front();
        queue.pop_front();
        --queued_;
        auto next = std::next(it);
        if (queue.empty()) {
            unsent_.erase(it);
        }
        if (next == unsent_.end()) {
            cursor_ = unsent_.empty() ? Category{} : unsent_.begin()->first;
        } else {
            cursor_ = next->first;
        }
        const auto* inst = instance(id);
        const auto* job = find(id.job);
        if (inst != nullptr && inst->state == lifecycle::InstanceState::unsent && !job->terminal()) {
            return id;
        }
    }
    return std::nullopt;
}

}  // namespace volley::server
