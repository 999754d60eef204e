#include "volley/client/state.hpp"

#include <algorithm>

namespace volley::client {

double ClientJob::usage_of(ResourceKind kind) const {
    for (const auto& u : usage) {
        if (u.kind == kind) {
            return u.amount;
        }
    }
    return 0.0;
}

ResourceKind ClientJob::primary_resource() const {
    for (const auto& u : usage) {
        if (is_gpu(u.kind)) {
            return u.kind;
        }
    }
    return ResourceKind::cpu;
}

bool WorkRequest::wants_work() const {
    return std::any_of(resources.begin(), resources.end(), [](const auto& kv) {
        return kv.second.req_runtime_seconds > 0.0 || kv.second.req_idle > 0.0;
    });
}

ProjectState* ClientState::project(ProjectId id) {
    for (auto& p : projects) {
        if (p.id == id) return &p;
    }
    return nullptr;
}

const ProjectState* ClientState::project(ProjectId id) const {
    for (const auto& p : projects) {
        if (p.id == id) return &p;
    }
    return nullptr;
}

ClientJob* ClientState::job(InstanceId id) {
    for (auto& j : queue) {
        if (j.instance == id) return &j;
    }
    return nullptr;
}

double ClientState::share_fraction(ProjectId id) const {
    double total = 0.0;
    double mine = 0.0;
    for (const auto& p : projects) {
        if (p.suspended) continue;
        total += p.resource_share;
        if (p.id == id) mine = p.resource_share;
    }
    return total > 0.0 ? mine / total : 0.0;
}

double ClientState::runtime_scale(ResourceKind kind) const {
    double avail = 1.0;
    if (auto it = availability.find(kind); it != availability.end()) {
        avail = it->second;
    } else if (const auto* r = host.resource(kind)) {
        avail = r->availability_fraction;
    }
    // A host that has never been seen available still gets finite estimates.
    return std::max(avail * host.prefs.throttle_duty_cycle, 1e-3);
}

int ClientState::usable_instances(ResourceKind kind) const {
    if (kind == ResourceKind::cpu) {
        return host.prefs.n_usable_cpus;
    }
    const auto* r = host.resource(kind);
    return r == nullptr ? 0 : r->instance_count;
}

}  // namespace volley::client
