#include "volley/server/project.hpp"

#include <algorithm>

namespace volley::server {

ProjectServer::ProjectServer(ProjectId id, ServerConfig config, Rng rng, TraceSink* trace)
    : id_(id), config_(config), rng_(rng), trace_(trace), cache_(config.cache_slots) {}

void ProjectServer::emit(const TraceRecord& record) {
    if (trace_ != nullptr) trace_->emit(record);
}

const lifecycle::Job& ProjectServer::submit(JobId id, const JobSpec& spec, SimMs now) {
    auto& job = store_.insert(lifecycle::create_job(id, spec, now, config_.lifecycle));
    allocations_.try_emplace(spec.submitter_id);
    emit(TraceRecord(now, "job_created")
             .add("project", id_)
             .add("job", id)
             .add("instances", static_cast<std::int64_t>(job.instances.size())));
    return job;
}

Reply ProjectServer::handle_request(const SchedulerRequest& request, SimMs now) {
    hosts_.insert_or_assign(request.host.id, request.host);
    DispatchState state{catalog_,      store_,          cache_,           runtime_,
                        replication_,  allocations_,    quantiles_,       config_.dispatch,
                        config_.lifecycle, config_.comparator, rng_};
    Reply reply = server::handle_request(state, request, now);
    if (reply.error) {
        emit(TraceRecord(now, "request_error").add("host", request.host.id).add("what", *reply.error));
        return reply;
    }
    for (const auto& [inst, why] : reply.skips) {
        emit(TraceRecord(now, "skip")
                 .add("host", request.host.id)
                 .add("instance", inst)
                 .add("reason", to_string(why)));
    }
    for (JobId job : reply.replication_skipped) {
        emit(TraceRecord(now, "replication_skipped").add("job", job).add("host", request.host.id));
    }
    for (InstanceId created : reply.created) {
        emit(TraceRecord(now, "instance_created").add("instance", created));
    }
    for (const auto& j : reply.jobs) {
        emit(TraceRecord(now, "dispatch")
                 .add("project", id_)
                 .add("job", j.instance.job)
                 .add("instance", j.instance)
                 .add("host", request.host.id)
                 .add("version", j.version)
                 .add("score", j.score)
                 .add("deadline", j.deadline));
    }
    return reply;
}

ServerUpdate ProjectServer::handle_report(InstanceId instance,
                                          const lifecycle::ReportOutcome& outcome, SimMs now) {
    lifecycle::Job* job = store_.find(instance.job);
    if (job == nullptr) {
        ServerUpdate u;
        u.ignored = true;
        return u;
    }
    auto fx = lifecycle::on_report(*job, instance.seq, outcome, now, config_.comparator);
    if (fx.ignored) {
        ServerUpdate u;
        u.ignored = true;
        return u;
    }
    const auto* inst = job->find(instance.seq);
    emit(TraceRecord(now, "instance_reported")
             .add("instance", instance)
             .add("host", inst->host ? *inst->host : HostId{})
             .add("success", outcome.success)
             .add("runtime", outcome.runtime_seconds));
    pending_usage_[job->spec.submitter_id] += outcome.runtime_seconds;
    auto more = lifecycle::transition(*job, config_.comparator, now, config_.lifecycle);
    auto merge = [](std::vector<InstanceId>& into, const std::vector<InstanceId>& from) {
        into.insert(into.end(), from.begin(), from.end());
    };
    merge(fx.created, more.created);
    merge(fx.cancelled, more.cancelled);
    merge(fx.valid, more.valid);
    merge(fx.invalid, more.invalid);
    if (more.terminal) fx.terminal = more.terminal;
    fx.quorum_checked = fx.quorum_checked || more.quorum_checked;
    fx.quorum_failed = fx.quorum_failed || more.quorum_failed;
    return apply(*job, fx, now);
}

ServerUpdate ProjectServer::handle_deadline(InstanceId instance, SimMs now) {
    lifecycle::Job* job = store_.find(instance.job);
    ServerUpdate none;
    none.ignored = true;
    if (job == nullptr) return none;
    auto fx = lifecycle::on_deadline(*job, instance.seq, now);
    if (fx.timed_out.empty()) return none;
    emit(TraceRecord(now, "instance_timeout").add("instance", instance));
    auto more = lifecycle::transition(*job, config_.comparator, now, config_.lifecycle);
    more.timed_out = fx.timed_out;
    return apply(*job, more, now);
}

ServerUpdate ProjectServer::apply(lifecycle::Job& job, const lifecycle::Effects& fx, SimMs now) {
    ServerUpdate u;
    u.created = fx.created;
    u.cancelled = fx.cancelled;
    u.valid = fx.valid;
    u.invalid = fx.invalid;
    for (InstanceId id : fx.created) {
        store_.enqueue_unsent(id);
        emit(TraceRecord(now, "instance_created").add("instance", id));
    }
    for (InstanceId id : fx.cancelled) {
        emit(TraceRecord(now, "instance_cancelled").add("instance", id));
    }
    if (fx.quorum_failed) {
        emit(TraceRecord(now, "quorum_failed").add("job", job.id).add("target", job.target_instances));
    }

    // Credit: claims use statistics from before this validation.
    if (!fx.valid.empty()) {
        std::vector<CreditGrant> grants;
        std::vector<double> claims;
        for (InstanceId id : fx.valid) {
            const auto* inst = job.find(id.seq);
            const auto* h = inst->host ? host(*inst->host) : nullptr;
            const auto* v = inst->app_version ? catalog_.find(*inst->app_version) : nullptr;
            CreditGrant g;
            g.instance = id;
            g.host = inst->host.value_or(HostId{});
            if (h != nullptr && v != nullptr) {
                const auto p = credit::pfc(inst->reported_runtime, *v, *h);
                const auto norm = credit::normalization(pfc_, h->id, v->id,
                                                        catalog_.versions_of(job.spec.app_id));
                g.claimed = credit::claimed_credit(p.flops, norm);
            }
            claims.push_back(g.claimed);
            grants.push_back(g);
        }
        double grant = 0.0;
        if (auto it = granted_.find(job.id); it != granted_.end()) {
            grant = it->second;
        } else {
            grant = credit::granted_credit(claims);
            granted_.emplace(job.id, grant);
        }
        for (auto& g : grants) {
            g.granted = grant;
            emit(TraceRecord(now, "credit_granted")
                     .add("instance", g.instance)
                     .add("host", g.host)
                     .add("claimed", g.claimed)
                     .add("granted", g.granted));
        }
        u.credited = std::move(grants);

        for (InstanceId id : fx.valid) {
            const auto* inst = job.find(id.seq);
            const auto* h = inst->host ? host(*inst->host) : nullptr;
            const auto* v = inst->app_version ? catalog_.find(*inst->app_version) : nullptr;
            if (h == nullptr || v == nullptr) continue;
            const auto p = credit::pfc(inst->reported_runtime, *v, *h);
            if (!p.anomalous) pfc_.record(h->id, v->id, p.flops, job.spec.est_flop_count);
            if (inst->reported_runtime > 0.0) {
                runtime_.update(h->id, v->id, job.spec.est_flop_count, inst->reported_runtime);
            }
        }
    }
    if (job.quorum > 1) {
        for (const auto* list : {&fx.valid, &fx.invalid}) {
            const bool ok = list == &fx.valid;
            for (InstanceId id : *list) {
                const auto* inst = job.find(id.seq);
                if (inst->host && inst->app_version) {
                    validation::record_validation(replication_, *inst->host, *inst->app_version, ok);
                }
            }
        }
    }

    if (fx.terminal == lifecycle::JobState::success) {
        u.succeeded.push_back(job.id);
        emit(TraceRecord(now, "job_success")
                 .add("job", job.id)
                 .add("canonical", *job.canonical)
                 .add("instances", static_cast<std::int64_t>(job.instances.size())));
    } else if (fx.terminal == lifecycle::JobState::failed) {
        u.failed.push_back(job.id);
        emit(TraceRecord(now, "job_failed").add("job", job.id).add("reason", to_string(job.failure)));
    }
    return u;
}

std::size_t ProjectServer::feeder_tick() {
    for (std::size_t i = 0; i < cache_.size(); ++i) {
        const auto& slot = cache_.slot(i);
        if (!slot.instance || slot.taken) continue;
        const auto* inst = store_.instance(*slot.instance);
        if (inst == nullptr || inst->state != lifecycle::InstanceState::unsent) {
            cache_.clear(i);
        }
    }
    return feeder_fill(cache_, store_);
}

std::size_t ProjectServer::purge(SimMs now) {
    std::vector<JobId> doomed;
    for (const auto& [id, job] : store_.jobs()) {
        if (lifecycle::purge_eligible(job, config_.purge_grace_seconds, now)) doomed.push_back(id);
    }
    for (JobId id : doomed) {
        store_.erase(id);
        granted_.erase(id);
        emit(TraceRecord(now, "job_purged").add("job", id));
    }
    return doomed.size();
}

void ProjectServer::set_submitter_rate(SubmitterId submitter, double rate) {
    allocations_[submitter].rate = rate;
}

void ProjectServer::advance_allocations(double elapsed_seconds) {
    const double base = static_cast<double>(std::max<std::size_t>(hosts_.size(), 1));
    for (auto& [submitter, state] : allocations_) {
        double usage = 0.0;
        if (auto it = pending_usage_.find(submitter); it != pending_usage_.end()) usage = it->second;
        state = linear_bounded_update(state, elapsed_seconds, base, usage);
    }
    pending_usage_.clear();
}

void ProjectServer::update_speed_quantiles() {
    std::vector<double> speeds;
    for (const auto& [id, h] : hosts_) {
        double best = 0.0;
        for (const auto& v : catalog_.all()) {
            if (compatible(v, h)) best = std::max(best, proj_flops(runtime_, h, v));
        }
        if (best > 0.0) speeds.push_back(best);
    }
    quantiles_ = SpeedQuantiles::from(std::move(speeds), config_.dispatch.size_classes);
}

void ProjectServer::forget_host(HostId host) {
    hosts_.erase(host);
}

const Host* ProjectServer::host(HostId id) const {
    auto it = hosts_.find(id);
    return it == hosts_.end() ? nullptr : &it->second;
}

std::optional<double> ProjectServer::granted(JobId job) const {
    auto it = granted_.find(job);
    if (it == granted_.end()) return std::nullopt;
    return it->second;
}

}  // namespace volley::server
