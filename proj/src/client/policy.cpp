#include "volley/client/policy.hpp"

#include <algorithm>
#include <cmath>

namespace volley::client {

double estimate_remaining(const ClientJob& job, double scale) {
    double raw = job.static_estimate_seconds;
    const double f = std::clamp(job.fraction_done, 0.0, 1.0);
    if (job.started() && f > 0.0) {
        const double dynamic = job.elapsed_seconds * (1.0 - f) / f;
        if (job.accurate_fraction) {
            raw = dynamic;
        } else {
            const double static_remaining = job.static_estimate_seconds * (1.0 - f);
            raw = f * dynamic + (1.0 - f) * static_remaining;
        }
    }
    return std::max(raw, 0.0) / scale;
}

double effective_wss(const ClientJob& job, std::span<const ClientJob> queue) {
    if (job.observed_wss_bytes) {
        return *job.observed_wss_bytes;
    }
    if (job.state == ClientJobState::unstarted) {
        for (const auto& other : queue) {
            if (other.running() && other.version == job.version && other.observed_wss_bytes) {
                return *other.observed_wss_bytes;
            }
        }
    }
    return job.est_wss_bytes;
}

bool feasible(std::span<const ClientJob* const> jobs, const Host& host, const ComputingPrefs& prefs,
              std::span<const ClientJob> queue) {
    std::map<ResourceKind, double> coproc;
    double cpu_of_cpu_jobs = 0.0;
    double cpu_of_all = 0.0;
    double wss = 0.0;
    for (const ClientJob* j : jobs) {
        for (const auto& u : j->usage) {
            if (is_gpu(u.kind)) {
                coproc[u.kind] += u.amount;
            }
        }
        const double cpu = j->usage_of(ResourceKind::cpu);
        cpu_of_all += cpu;
        if (!j->uses_gpu()) {
            cpu_of_cpu_jobs += cpu;
        }
        wss += effective_wss(*j, queue);
    }
    // Usages are user-facing decimals (0.1, 0.3); absorb representation error.
    constexpr double eps = 1e-9;
    for (const auto& [kind, used] : coproc) {
        const auto* r = host.resource(kind);
        if (r == nullptr || used > r->instance_count + eps) {
            return false;
        }
    }
    const double usable = prefs.n_usable_cpus;
    if (cpu_of_cpu_jobs > usable + eps || cpu_of_all > usable + 1.0 + eps) {
        return false;
    }
    return wss <= host.ram_bytes * prefs.max_ram_fraction;
}

ScheduleDecision schedule(const ClientState& state, SimMs now) {
    ScheduleDecision decision;
    const WrrResult wrr = wrr_simulate(state, now, default_horizon(state, now));
    decision.predicted_misses = wrr.miss_set;
    const bool edf = state.config.edf_enabled;
    const SimMs slice = seconds_to_ms(state.config.time_slice_seconds);

    struct Ranked {
        const ClientJob* job;
        bool miss;
        bool gpu;
        bool protect;
        double cpus;
        double priority;
    };
    std::vector<Ranked> ranked;
    ranked.reserve(state.queue.size());
    for (const auto& j : state.queue) {
        const auto* p = state.project(j.project);
        if (p == nullptr || p->suspended) {
            continue;
        }
        const bool protect =
            j.running() && (now - j.slice_start < slice || j.last_checkpoint < j.slice_start);
        ranked.push_back({&j, edf && wrr.misses(j.instance), j.uses_gpu(), protect,
                          j.usage_of(ResourceKind::cpu), p->priority.balance});
    }
    std::sort(ranked.begin(), ranked.end(), [](const Ranked& a, const Ranked& b) {
        if (a.miss != b.miss) return a.miss;
        if (a.miss && a.job->deadline != b.job->deadline) return a.job->deadline < b.job->deadline;
        if (a.gpu != b.gpu) return a.gpu;
        if (a.protect != b.protect) return a.protect;
        if (a.cpus != b.cpus) return a.cpus > b.cpus;
        if (a.priority != b.priority) return a.priority > b.priority;
        return a.job->arrival_seq < b.job->arrival_seq;
    });

    std::vector<const ClientJob*> chosen;
    for (const auto& r : ranked) {
        chosen.push_back(r.job);
        if (!feasible(chosen, state.host, state.host.prefs, state.queue)) {
            chosen.pop_back();
        }
    }
    for (const ClientJob* j : chosen) {
        decision.run.push_back(j->instance);
    }
    for (const auto& j : state.queue) {
        if (j.running() &&
            std::find(decision.run.begin(), decision.run.end(), j.instance) == decision.run.end()) {
            decision.preempt.push_back(j.instance);
        }
    }
    return decision;
}

bool fetchable(const ClientState& state, const ProjectState& project, ResourceKind kind, SimMs now) {
    if (project.suspended || project.rpc_backoff.backed_off(now)) {
        return false;
    }
    if (!project.resources.contains(kind) || project.prohibited.contains(kind)) {
        return false;
    }
    if (auto it = project.resource_backoff.find(kind);
        it != project.resource_backoff.end() && it->second.backed_off(now)) {
        return false;
    }
    return state.usable_instances(kind) > 0;
}

namespace {

std::vector<const ProjectState*> by_priority(const ClientState& state) {
    std::vector<const ProjectState*> order;
    for (const auto& p : state.projects) {
        order.push_back(&p);
    }
    std::sort(order.begin(), order.end(), [](const ProjectState* a, const ProjectState* b) {
        if (a->priority.balance != b->priority.balance) {
            return a->priority.balance > b->priority.balance;
        }
        return a->id < b->id;
    });
    return order;
}

}  // namespace

ResourceRequest request_for(const ClientState& state, const WrrResult& wrr, ResourceKind kind) {
    ResourceRequest req;
    if (const auto* r = wrr.resource(kind)) {
        req.req_runtime_seconds = r->shortfall_seconds();
        req.req_idle = std::max(r->idle_instances_now(), 0.0);
    }
    for (const auto& j : state.queue) {
        if (j.primary_resource() == kind) {
            req.queue_dur_seconds += estimate_remaining(j, state.runtime_scale(kind));
        }
    }
    return req;
}

std::optional<WorkFetch> work_fetch(const ClientState& state, SimMs now) {
    const WrrResult wrr = wrr_simulate(state, now, default_horizon(state, now));
    const SimMs buffer_lo = seconds_to_ms(state.host.prefs.buffer_lo_seconds);
    std::vector<ResourceKind> starving;
    for (const auto& r : wrr.resources) {
        if (r.instances > 0 && r.idle_onset < buffer_lo) {
            starving.push_back(r.kind);
        }
    }
    if (starving.empty()) {
        return std::nullopt;
    }
    for (const ProjectState* p : by_priority(state)) {
        const bool wanted = std::any_of(starving.begin(), starving.end(), [&](ResourceKind k) {
            return fetchable(state, *p, k, now);
        });
        if (!wanted) {
            continue;
        }
        WorkFetch fetch{p->id, {}};
        for (const auto& res : state.host.resources) {
            if (fetchable(state, *p, res.kind, now)) {
                fetch.request.resources[res.kind] = request_for(state, wrr, res.kind);
            }
        }
        return fetch;
    }
    return std::nullopt;
}

WorkRequest piggyback_request(const ClientState& state, ProjectId project, SimMs now) {
    WorkRequest request;
    const auto order = by_priority(state);
    std::optional<WrrResult> wrr;
    for (const auto& res : state.host.resources) {
        for (const ProjectState* p : order) {
            ProjectState candidate = *p;
            if (p->id == project) {
                candidate.rpc_backoff = {};
            }
            if (!fetchable(state, candidate, res.kind, now)) {
                continue;
            }
            if (p->id == project) {
                if (!wrr) {
                    wrr = wrr_simulate(state, now, default_horizon(state, now));
                }
                request.resources[res.kind] = request_for(state, *wrr, res.kind);
            }
            break;
        }
    }
    return request;
}

std::vector<ReportBatch> report_policy(const ClientState& state, SimMs now,
                                       std::optional<ProjectId> rpc_project) {
    std::map<ProjectId, std::vector<const PendingReport*>> by_project;
    for (const auto& r : state.pending_reports) {
        by_project[r.project].push_back(&r);
    }
    std::vector<ReportBatch> batches;
    for (const auto& [project, reports] : by_project) {
        bool trigger = rpc_project == project || reports.size() >= state.config.report_batch;
        for (const PendingReport* r : reports) {
            const SimMs margin = seconds_to_ms(state.config.report_margin_fraction * r->delay_bound_seconds);
            trigger = trigger || r->deadline - now <= margin;
        }
        if (!trigger) {
            continue;
        }
        ReportBatch batch{project, {}};
        for (const PendingReport* r : reports) {
            batch.instances.push_back(r->instance);
        }
        batches.push_back(std::move(batch));
    }
    return batches;
}

void on_rpc_result(ClientState& state, ProjectId project, bool success, SimMs now, Rng& rng) {
    if (auto* p = state.project(project)) {
        record_rpc_result(p->rpc_backoff, state.config.backoff, success, now, rng);
    }
}

double capacity_fraction(const ClientJob& job, const Host& host, int n_usable_cpus) {
    double total = 0.0;
    for (const auto& r : host.resources) {
        const int n = r.kind == ResourceKind::cpu ? n_usable_cpus : r.instance_count;
        total += n * r.peak_flops_per_instance;
    }
    double mine = 0.0;
    for (const auto& u : job.usage) {
        if (const auto* r = host.resource(u.kind)) {
            mine += u.amount * r->peak_flops_per_instance;
        }
    }
    return total > 0.0 ? mine / total : 0.0;
}

void advance_priorities(ClientState& state, double elapsed_seconds,
                        const std::map<ProjectId, double>& usage_seconds) {
    for (auto& p : state.projects) {
        p.priority.rate = p.suspended ? 0.0 : state.share_fraction(p.id);
        auto it = usage_seconds.find(p.id);
        const double used = it == usage_seconds.end() ? 0.0 : it->second;
        p.priority = linear_bounded_update(p.priority, elapsed_seconds, 1.0, used);
    }
}

}  // namespace volley::client
