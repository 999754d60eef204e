#include "volley/lifecycle/job.hpp"

#include <algorithm>

#include "volley/core/error.hpp"

namespace volley::lifecycle {

std::string_view to_string(InstanceState state) {
    switch (state) {
        case InstanceState::unsent: return "unsent";
        case InstanceState::in_progress: return "in_progress";
        case InstanceState::success_reported: return "success";
        case InstanceState::error_reported: return "error";
        case InstanceState::timed_out: return "timed_out";
        case InstanceState::cancelled: return "cancelled";
    }
    return "unknown";
}

std::string_view to_string(JobState state) {
    switch (state) {
        case JobState::active: return "active";
        case JobState::success: return "success";
        case JobState::failed: return "failed";
    }
    return "unknown";
}

std::string_view to_string(FailureReason reason) {
    switch (reason) {
        case FailureReason::none: return "none";
        case FailureReason::too_many_errors: return "too_many_errors";
        case FailureReason::nondeterministic: return "nondeterministic";
    }
    return "unknown";
}

JobInstance* Job::find(std::uint32_t seq) {
    return seq < instances.size() ? &instances[seq] : nullptr;
}

const JobInstance* Job::find(std::uint32_t seq) const {
    return seq < instances.size() ? &instances[seq] : nullptr;
}

int Job::count(InstanceState s) const {
    return static_cast<int>(std::count_if(instances.begin(), instances.end(),
                                          [s](const JobInstance& i) { return i.state == s; }));
}

bool Job::all_resolved() const {
    return std::none_of(instances.begin(), instances.end(),
                        [](const JobInstance& i) { return i.live(); });
}

namespace {

InstanceId add_instance(Job& job) {
    JobInstance inst;
    inst.id = InstanceId{job.id, static_cast<std::uint32_t>(job.instances.size())};
    job.instances.push_back(inst);
    return inst.id;
}

void finish(Job& job, JobState state, SimMs now, Effects& fx) {
    job.state = state;
    job.terminal_at = now;
    fx.terminal = state;
    for (auto& inst : job.instances) {
        if (inst.state == InstanceState::unsent) {
            inst.state = InstanceState::cancelled;
            fx.cancelled.push_back(inst.id);
        }
    }
}

}  // namespace

Job create_job(JobId id, const JobSpec& spec, SimMs now, const LifecycleConfig& config) {
    validate(spec);
    Job job;
    job.id = id;
    job.spec = spec;
    job.created_at = now;
    job.quorum = spec.min_quorum;
    if (config.adaptive_replication && spec.min_quorum > 1) {
        job.replication_pending = true;
        job.target_instances = 1;
    } else {
        job.target_instances = spec.init_ninstances;
    }
    for (int i = 0; i < job.target_instances; ++i) {
        add_instance(job);
    }
    return job;
}

Effects mark_dispatched(Job& job, std::uint32_t seq, HostId host, AppVersionId version,
                        HrClass host_class, SimMs now) {
    Effects fx;
    JobInstance* inst = job.find(seq);
    if (inst == nullptr || inst->state != InstanceState::unsent || job.terminal()) {
        fx.ignored = true;
        return fx;
    }
    inst->state = InstanceState::in_progress;
    inst->host = host;
    inst->app_version = version;
    inst->dispatched_at = now;
    inst->deadline = now + seconds_to_ms(job.spec.delay_bound_seconds);
    if (!job.hr_class_lock) {
        job.hr_class_lock = host_class;
    }
    if (!job.app_version_lock) {
        job.app_version_lock = version;
    }
    job.skip_count = 0;
    return fx;
}

void resolve_replication(Job& job, bool replicate) {
    if (!job.replication_pending) {
        return;
    }
    job.replication_pending = false;
    if (replicate) {
        job.quorum = job.spec.min_quorum;
        job.target_instances = job.spec.init_ninstances;
        job.needs_transition = true;
    } else {
        job.quorum = 1;
        job.target_instances = 1;
    }
}

Effects on_deadline(Job& job, std::uint32_t seq, SimMs now) {
    Effects fx;
    JobInstance* inst = job.find(seq);
    if (inst == nullptr || inst->state != InstanceState::in_progress || now < inst->deadline) {
        fx.ignored = true;
        return fx;
    }
    inst->state = InstanceState::timed_out;
    fx.timed_out.push_back(inst->id);
    if (!job.terminal()) {
        job.needs_transition = true;
    }
    return fx;
}

Effects on_report(Job& job, std::uint32_t seq, const ReportOutcome& outcome, SimMs now,
                  const validation::Comparator& comparator) {
    (void)now;
    Effects fx;
    JobInstance* inst = job.find(seq);
    if (inst == nullptr ||
        (inst->state != InstanceState::in_progress && inst->state != InstanceState::timed_out)) {
        fx.ignored = true;
        return fx;
    }
    inst->reported_runtime = outcome.runtime_seconds;
    if (!outcome.success) {
        inst->state = InstanceState::error_reported;
        if (!job.terminal()) {
            job.needs_transition = true;
        }
        return fx;
    }
    inst->state = InstanceState::success_reported;
    inst->output_digest = outcome.digest;
    if (job.canonical) {
        const JobInstance* canon = job.find(job.canonical->seq);
        const bool ok = validation::equivalent(canon->output_digest, inst->output_digest, comparator);
        inst->verdict = ok ? Verdict::valid : Verdict::invalid;
        (ok ? fx.valid : fx.invalid).push_back(inst->id);
        return fx;
    }
    if (!job.terminal()) {
        job.needs_transition = true;
    }
    return fx;
}

Effects transition(Job& job, const validation::Comparator& comparator, SimMs now,
                   const LifecycleConfig& config) {
    Effects fx;
    if (!job.needs_transition) {
        fx.ignored = true;
        return fx;
    }
    job.needs_transition = false;
    if (job.terminal()) {
        return fx;
    }

    int errors = job.count(InstanceState::error_reported);
    if (config.count_timeouts_as_errors) {
        errors += job.count(InstanceState::timed_out);
    }
    if (errors > job.spec.max_error_instances) {
        job.failure = FailureReason::too_many_errors;
        finish(job, JobState::failed, now, fx);
        return fx;
    }

    std::vector<validation::QuorumEntry> successes;
    for (const auto& inst : job.instances) {
        if (inst.state == InstanceState::success_reported) {
            successes.push_back({inst.id, &inst.output_digest});
        }
    }
    const int n_success = static_cast<int>(successes.size());
    if (n_success >= job.quorum) {
        fx.quorum_checked = true;
        if (auto result = validation::check_quorum(successes, comparator, job.quorum)) {
            job.canonical = result->canonical;
            for (auto& inst : job.instances) {
                if (inst.state != InstanceState::success_reported) {
                    continue;
                }
                const bool ok = std::binary_search(result->agreeing.begin(),
                                                   result->agreeing.end(), inst.id);
                inst.verdict = ok ? Verdict::valid : Verdict::invalid;
                (ok ? fx.valid : fx.invalid).push_back(inst.id);
            }
            finish(job, JobState::success, now, fx);
            return fx;
        }
        fx.quorum_failed = true;
        job.target_instances = std::max(job.target_instances, n_success + 1);
        if (n_success > job.spec.max_success_instances) {
            job.failure = FailureReason::nondeterministic;
            finish(job, JobState::failed, now, fx);
            return fx;
        }
    }

    const int live = static_cast<int>(std::count_if(
        job.instances.begin(), job.instances.end(), [](const JobInstance& i) { return i.live(); }));
    for (int needed = job.target_instances - (n_success + live); needed > 0; --needed) {
        fx.created.push_back(add_instance(job));
    }
    return fx;
}

bool purge_eligible(const Job& job, double grace_seconds, SimMs now) {
    return job.terminal() && job.all_resolved() && job.terminal_at &&
           now >= *job.terminal_at + seconds_to_ms(grace_seconds);
}

}  // namespace volley::lifecycle
