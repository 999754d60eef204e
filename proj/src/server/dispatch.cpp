#include "volley/server/dispatch.hpp"

#include <algorithm>
#include <cmath>

#include "volley/core/error.hpp"

namespace volley::server {

SpeedQuantiles SpeedQuantiles::from(std::vector<double> speeds, int classes) {
    SpeedQuantiles q;
    if (classes <= 1 || speeds.empty()) {
        return q;
    }
    std::sort(speeds.begin(), speeds.end());
    for (int k = 1; k < classes; ++k) {
        const auto idx = static_cast<std::size_t>(k * speeds.size() / static_cast<std::size_t>(classes));
        q.bounds_.push_back(speeds[std::min(idx, speeds.size() - 1)]);
    }
    return q;
}

int SpeedQuantiles::index_of(double speed) const {
    // Hosts at a boundary go to the upper class.
    return static_cast<int>(std::upper_bound(bounds_.begin(), bounds_.end(), speed) - bounds_.begin());
}

std::optional<double> score(const lifecycle::Job& job, const Host& host, double proj_flops,
                            const ScoreContext& ctx, const ScoreWeights& weights) {
    double total = 0.0;
    for (const auto& kw : job.spec.keywords) {
        auto it = host.keyword_prefs.find(kw);
        if (it == host.keyword_prefs.end()) continue;
        if (it->second == KeywordPref::no) return std::nullopt;
        if (it->second == KeywordPref::yes) total += weights.keyword;
    }
    total += weights.allocation * ctx.allocation_norm;
    if (job.skip_count > 0 &&
        ms_to_seconds(ctx.now - job.last_skipped_at) <= ctx.skip_bonus_age_seconds) {
        total += weights.skipped;
    }
    const auto& files = job.spec.input_files;
    if (!files.empty() && std::includes(host.sticky_files.begin(), host.sticky_files.end(),
                                        files.begin(), files.end())) {
        total += weights.locality;
    }
    if (ctx.size_classes > 1 && ctx.quantiles != nullptr &&
        ctx.quantiles->index_of(proj_flops) == job.spec.size_class) {
        total += weights.size;
    }
    return total;
}

std::string_view to_string(SkipReason reason) {
    switch (reason) {
        case SkipReason::no_version: return "no_version";
        case SkipReason::disk: return "disk";
        case SkipReason::deadline: return "deadline";
        case SkipReason::dup_in_reply: return "dup_in_reply";
        case SkipReason::already_sent: return "already_sent";
        case SkipReason::terminal: return "terminal";
        case SkipReason::hr_violation: return "hr_violation";
    }
    return "unknown";
}

namespace {

bool passes_locks(const DispatchState& state, const lifecycle::Job& job, const Host& host,
                  AppVersionId version) {
    if (state.config.hr_level != HrLevel::none && job.hr_class_lock &&
        *job.hr_class_lock != hr_class(host, state.config.hr_level)) {
        return false;
    }
    return !(state.config.homogeneous_app_version && job.app_version_lock &&
             *job.app_version_lock != version);
}

bool sent_to(const lifecycle::Job& job, HostId host) {
    return std::any_of(job.instances.begin(), job.instances.end(),
                       [host](const lifecycle::JobInstance& i) { return i.host == host; });
}

double runtime_scale(const Host& host, ResourceKind kind) {
    const auto* r = host.resource(kind);
    const double avail = r == nullptr ? 1.0 : r->availability_fraction;
    return std::max(avail * host.prefs.throttle_duty_cycle, 1e-3);
}

struct Candidate {
    std::size_t slot;
    InstanceId instance;
    const AppVersion* version;
    double flops;
    double score;
};

}  // namespace

const AppVersion* select_version(const DispatchState& state, const lifecycle::Job& job,
                                 const Host& host, ResourceKind resource) {
    const AppVersion* best = nullptr;
    double best_flops = 0.0;
    for (AppVersionId id : state.catalog.versions_of(job.spec.app_id)) {
        const AppVersion* v = state.catalog.find(id);
        if (v == nullptr || v->primary_resource() != resource || !compatible(*v, host) ||
            (state.config.homogeneous_app_version && job.app_version_lock && *job.app_version_lock != v->id)) {
            continue;
        }
        const double f = proj_flops(state.runtime, host, *v);
        if (best == nullptr || f > best_flops) {
            best = v;
            best_flops = f;
        }
    }
    return best;
}

Reply handle_request(DispatchState& state, const SchedulerRequest& request, SimMs now) {
    Reply reply;
    const Host& host = request.host;
    try {
        validate(host);
    } catch (const ValidationError& e) {
        reply.error = std::string("malformed request: ") + e.what();
        return reply;
    }
    for (const auto& [kind, r] : request.work.resources) {
        if (r.req_runtime_seconds < 0.0 || r.req_idle < 0.0 || r.queue_dur_seconds < 0.0) {
            reply.error = "malformed request: negative " + std::string(to_string(kind)) + " request";
            return reply;
        }
    }

    std::vector<ResourceKind> order;
    for (const auto& [kind, r] : request.work.resources) {
        if ((r.req_runtime_seconds > 0.0 || r.req_idle > 0.0) && host.resource(kind) != nullptr) {
            order.push_back(kind);
        }
    }
    std::stable_partition(order.begin(), order.end(), [](ResourceKind k) { return is_gpu(k); });

    double disk_left = host.free_disk_bytes;
    const std::size_t n_slots = state.cache.size();
    ScoreContext ctx;
    ctx.quantiles = &state.quantiles;
    ctx.size_classes = state.config.size_classes;
    ctx.now = now;
    ctx.skip_bonus_age_seconds = state.config.skip_bonus_age_seconds;

    auto in_reply = [&reply](JobId job) {
        return std::any_of(reply.jobs.begin(), reply.jobs.end(),
                           [job](const ReplyJob& r) { return r.instance.job == job; });
    };
    auto note_skip = [&](lifecycle::Job& job, InstanceId id, SkipReason why) {
        reply.skips.emplace_back(id, why);
        if (why != SkipReason::dup_in_reply && why != SkipReason::terminal) {
            ++job.skip_count;
            job.last_skipped_at = now;
        }
    };

    for (ResourceKind kind : order) {
        client::ResourceRequest need = request.work.resources.at(kind);
        const double scale = runtime_scale(host, kind);

        std::vector<Candidate> candidates;
        const std::size_t start = n_slots == 0 ? 0 : state.rng.below(n_slots);
        for (std::size_t k = 0; k < n_slots; ++k) {
            const std::size_t i = (start + k) % n_slots;
            const auto& slot = state.cache.slot(i);
            if (!slot.instance || slot.taken) continue;
            lifecycle::Job* job = state.store.find(slot.instance->job);
            if (job == nullptr) continue;
            const AppVersion* v = select_version(state, *job, host, kind);
            if (v == nullptr) {
                // Jobs for other resources are not skips of this job.
                const bool other_resource = std::none_of(
                    state.catalog.versions_of(job->spec.app_id).begin(),
                    state.catalog.versions_of(job->spec.app_id).end(), [&](AppVersionId id) {
                        const auto* cv = state.catalog.find(id);
                        return cv != nullptr && cv->primary_resource() == kind;
                    });
                if (!other_resource) reply.skips.emplace_back(*slot.instance, SkipReason::no_version);
                continue;
            }
            const double flops = proj_flops(state.runtime, host, *v);
            ctx.allocation_norm = 0.0;
            if (auto it = state.allocations.find(job->spec.submitter_id); it != state.allocations.end() &&
                                                                          it->second.cap > 0.0) {
                ctx.allocation_norm = it->second.balance / it->second.cap;
            }
            const auto s = score(*job, host, flops, ctx, state.config.weights);
            if (!s) continue;
            candidates.push_back({i, *slot.instance, v, flops, *s});
        }
        std::stable_sort(candidates.begin(), candidates.end(),
                         [](const Candidate& a, const Candidate& b) { return a.score > b.score; });

        for (const Candidate& c : candidates) {
            if (need.req_runtime_seconds <= 0.0 && need.req_idle <= 0.0) break;
            const auto& slot = state.cache.slot(c.slot);
            if (slot.taken || slot.instance != c.instance) continue;
            lifecycle::Job& job = *state.store.find(c.instance.job);

            // Fast check: no store access beyond the cached job record.
            const double est = job.spec.est_flop_count / c.flops;
            const double scaled = est / scale;
            if (disk_left < job.spec.disk_bound_bytes) {
                note_skip(job, c.instance, SkipReason::disk);
                continue;
            }
            if (need.queue_dur_seconds + scaled > job.spec.delay_bound_seconds) {
                note_skip(job, c.instance, SkipReason::deadline);
                continue;
            }
            if (in_reply(job.id)) {
                note_skip(job, c.instance, SkipReason::dup_in_reply);
                continue;
            }
            if (!state.cache.take(c.slot)) continue;

            // Slow check against the authoritative store.
            const lifecycle::JobInstance* inst = job.find(c.instance.seq);
            if (job.terminal() || inst == nullptr || inst->state != lifecycle::InstanceState::unsent) {
                state.cache.clear(c.slot);
                note_skip(job, c.instance, SkipReason::terminal);
                continue;
            }
            if (sent_to(job, host.id)) {
                state.cache.release(c.slot);
                note_skip(job, c.instance, SkipReason::already_sent);
                continue;
            }
            if (!passes_locks(state, job, host, c.version->id)) {
                state.cache.release(c.slot);
                note_skip(job, c.instance, SkipReason::hr_violation);
                continue;
            }

            lifecycle::mark_dispatched(job, c.instance.seq, host.id, c.version->id,
                                       hr_class(host, state.config.hr_level), now);
            state.cache.clear(c.slot);
            if (job.replication_pending) {
                const bool replicate = !state.config.adaptive_replication ||
                                       validation::should_replicate(state.replication, host.id,
                                                                    c.version->id, state.rng,
                                                                    state.config.replication_threshold);
                lifecycle::resolve_replication(job, replicate);
                if (!replicate) {
                    reply.replication_skipped.push_back(job.id);
                }
                const auto fx = lifecycle::transition(job, state.comparator, now, state.lifecycle);
                for (InstanceId id : fx.created) {
                    state.store.enqueue_unsent(id);
                    reply.created.push_back(id);
                }
            }

            ReplyJob out;
            out.instance = c.instance;
            out.version = c.version->id;
            out.resource = kind;
            out.proj_flops = c.flops;
            out.est_runtime_seconds = est;
            out.est_scaled_seconds = scaled;
            out.score = c.score;
            out.deadline = job.find(c.instance.seq)->deadline;
            reply.jobs.push_back(out);

            disk_left -= job.spec.disk_bound_bytes;
            need.queue_dur_seconds += scaled;
            need.req_runtime_seconds -= scaled;
            need.req_idle -= c.version->usage(kind);
        }
    }
    return reply;
}

}  // namespace volley::server
