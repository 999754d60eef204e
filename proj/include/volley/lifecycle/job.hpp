#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "volley/core/classify.hpp"
#include "volley/core/ids.hpp"
#include "volley/core/model.hpp"
#include "volley/core/time.hpp"
#include "volley/validation/validation.hpp"

namespace volley::lifecycle {

enum class InstanceState : std::uint8_t {
    unsent,
    in_progress,
    success_reported,
    error_reported,
    timed_out,
    cancelled,
};

std::string_view to_string(InstanceState state);

/// Validation status of a successfully reported instance.
enum class Verdict : std::uint8_t { pending, valid, invalid };

struct JobInstance {
    InstanceId id;
    std::optional<HostId> host;
    std::optional<AppVersionId> app_version;
    SimMs dispatched_at = 0;
    SimMs deadline = 0;
    InstanceState state = InstanceState::unsent;
    double reported_runtime = 0.0;
    validation::OutputDigest output_digest;
    Verdict verdict = Verdict::pending;

    /// Unsent or in progress.
    bool live() const { return state == InstanceState::unsent || state == InstanceState::in_progress; }
};

enum class JobState : std::uint8_t { active, success, failed };

enum class FailureReason : std::uint8_t { none, too_many_errors, nondeterministic };

std::string_view to_string(JobState state);
std::string_view to_string(FailureReason reason);

struct Job {
    JobId id;
    JobSpec spec;
    std::vector<JobInstance> instances;
    JobState state = JobState::active;
    std::optional<InstanceId> canonical;
    FailureReason failure = FailureReason::none;
    std::optional<HrClass> hr_class_lock;
    std::optional<AppVersionId> app_version_lock;
    bool needs_transition = false;
    SimMs created_at = 0;
    std::optional<SimMs> terminal_at;

    /// Quorum in force. Equals spec.min_quorum unless adaptive replication
    /// decided to run the job unreplicated.
    int quorum = 1;
    /// Instances wanted in flight or succeeded; grows by one after each failed
    /// quorum check.
    int target_instances = 1;
    /// Adaptive replication: decision deferred to first dispatch.
    bool replication_pending = false;
    /// Times the dispatcher considered and passed over this job since its
    /// last dispatch, and when it last did.
    int skip_count = 0;
    SimMs last_skipped_at = 0;

    bool terminal() const { return state != JobState::active; }
    JobInstance* find(std::uint32_t seq);
    const JobInstance* find(std::uint32_t seq) const;
    int count(InstanceState s) const;
    /// True when no instance is unsent or in progress.
    bool all_resolved() const;
};

struct LifecycleConfig {
    bool count_timeouts_as_errors = false;
    bool adaptive_replication = false;
};

inline constexpr double kDefaultPurgeGraceSeconds = 3 * 86400.0;

/// State changes produced by one lifecycle operation, consumed by the
/// caller to update stores, statistics, and the trace.
struct Effects {
    std::vector<InstanceId> created;
    std::vector<InstanceId> cancelled;
    std::vector<InstanceId> timed_out;
    std::vector<InstanceId> valid;
    std::vector<InstanceId> invalid;
    /// Set when the job reached a terminal state in this operation.
    std::optional<JobState> terminal;
    bool quorum_checked = false;
    bool quorum_failed = false;
    /// The event did not apply (duplicate, stale, or wrong state).
    bool ignored = false;
};

struct ReportOutcome {
    bool success = false;
    validation::OutputDigest digest;
    double runtime_seconds = 0.0;

    static ReportOutcome ok(validation::OutputDigest d, double runtime) {
        return {true, std::move(d), runtime};
    }
    static ReportOutcome error(double runtime = 0.0) { return {false, {}, runtime}; }
};

/// New active job with init_ninstances unsent instances (one when adaptive
/// replication defers the decision). Throws ValidationError on a bad spec.
Job create_job(JobId id, const JobSpec& spec, SimMs now, const LifecycleConfig& config = {});

/// Records dispatch of an unsent instance: deadline = now + delay_bound.
/// Sets the homogeneous-redundancy and app-version locks on first dispatch.
Effects mark_dispatched(Job& job, std::uint32_t seq, HostId host, AppVersionId version,
                        HrClass host_class, SimMs now);

/// Adaptive replication decision for a job whose first instance is being
/// dispatched. Unreplicated jobs run with quorum 1 and a single instance.
void resolve_replication(Job& job, bool replicate);

/// Deadline of an in-progress instance passed: it times out. Replacements are
/// created by transition(). No-op for instances not in progress.
Effects on_deadline(Job& job, std::uint32_t seq, SimMs now);

/// A host reported an instance. When the job already has a canonical result,
/// a success is validated against it without changing the job. Duplicate
/// reports are ignored.
Effects on_report(Job& job, std::uint32_t seq, const ReportOutcome& outcome, SimMs now,
                  const validation::Comparator& comparator);

/// The transitioner: quorum check, terminal transitions, cancellation of
/// unsent instances, and creation of replacement instances. Idempotent when
/// needs_transition is clear.
Effects transition(Job& job, const validation::Comparator& comparator, SimMs now,
                   const LifecycleConfig& config = {});

/// Terminal, every instance resolved, and the grace period has elapsed.
bool purge_eligible(const Job& job, double grace_seconds, SimMs now);

}  // namespace volley::lifecycle
