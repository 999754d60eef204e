#include "volley/sim/engine.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <set>
#include <unordered_map>

#include <spdlog/spdlog.h>

#include "volley/client/policy.hpp"
#include "volley/core/classify.hpp"
#include "volley/server/project.hpp"
#include "volley/sim/models.hpp"

namespace volley::sim {

std::string_view to_string(EventKind kind) {
    switch (kind) {
        case EventKind::host_on: return "host_on";
        case EventKind::host_off: return "host_off";
        case EventKind::host_departed: return "host_departed";
        case EventKind::job_complete: return "job_complete";
        case EventKind::deadline: return "deadline";
        case EventKind::rpc: return "rpc";
        case EventKind::feeder_tick: return "feeder_tick";
        case EventKind::checkpoint_tick: return "checkpoint_tick";
        case EventKind::metrics_tick: return "metrics_tick";
        case EventKind::batch_arrival: return "batch_arrival";
    }
    return "unknown";
}

void EventQueue::push(Event event) {
    event.seq = next_seq_++;
    heap_.push(event);
}

Event EventQueue::pop() {
    Event e = heap_.top();
    heap_.pop();
    return e;
}

namespace {

// Random stream families.
constexpr std::uint64_t kHostParams = 1;
constexpr std::uint64_t kHostRun = 2;
constexpr std::uint64_t kServer = 3;
constexpr std::uint64_t kJobStream = 4;

constexpr double kServerTickSeconds = 3600.0;
constexpr double kMetricsTickSeconds = 86400.0;

struct SimHost {
    std::uint32_t index = 0;
    client::ClientState client;
    std::map<ResourceKind, double> efficiency;
    double crash_prob = 0.0;
    AvailabilityModel availability;
    AvailabilityAverage average;
    Rng rng;
    bool online = true;
    bool departed = false;
    bool rpc_pending = false;
    SimMs last_advance = 0;
    std::uint64_t epoch = 0;
    std::vector<InstanceId> running;
    /// Raw seconds each queued instance needs in total.
    std::unordered_map<InstanceId, double> raw_total;
};

struct SimProject {
    std::uint32_t index = 0;
    ProjectSpec spec;
    ProjectId id;
    AppId app;
    std::unique_ptr<server::ProjectServer> server;
    Rng rng;
    std::map<AppVersionId, double> version_efficiency;
    int submitted = 0;
    int active = 0;
    bool arrivals_done = false;
    SimMs last_server_tick = 0;
    double compute_used = 0.0;
    double credit_granted = 0.0;
    int succeeded = 0;
};

struct JobTruth {
    double true_flop_count = 0.0;
    std::uint32_t project = 0;
    std::uint64_t batch = 0;
    std::int64_t index = 0;
};

struct Batch {
    SimMs submitted = 0;
    int remaining = 0;
    SimMs finished = 0;
};

double percentile(std::vector<double> v, double q) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const auto idx = static_cast<std::size_t>(std::ceil(q * static_cast<double>(v.size()))) - 1;
    return v[std::min(idx, v.size() - 1)];
}

class Simulation {
public:
    Simulation(const Scenario& scenario, TraceSink* trace)
        : s_(scenario), trace_(trace), duration_(seconds_to_ms(scenario.duration_seconds)),
          end_(duration_ + seconds_to_ms(scenario.max_delay_bound())) {
        build_projects();
        build_hosts();
    }

    RunResult run() {
        for (auto& p : projects_) {
            push({.time = 0, .kind = EventKind::batch_arrival, .target = p.index});
            push({.time = seconds_to_ms(kServerTickSeconds), .kind = EventKind::feeder_tick, .target = p.index});
        }
        push({.time = seconds_to_ms(kMetricsTickSeconds), .kind = EventKind::metrics_tick});
        for (auto& h : hosts_) start_host(h);

        RunResult result;
        SimMs last = 0;
        while (!queue_.empty()) {
            Event e = queue_.pop();
            if (e.time > end_ || stop_) break;
            last = e.time;
            ++result.events;
            dispatch(e);
        }
        now_ = std::min(std::max(last, now_), end_);
        for (auto& h : hosts_) advance(h, now_);
        result.metrics = metrics();
        result.metrics.set("events", static_cast<double>(result.events));
        result.credits = std::move(credits_);
        return result;
    }

private:
    void push(Event e) { queue_.push(e); }

    void emit(const TraceRecord& r) {
        if (trace_ != nullptr) trace_->emit(r);
    }

    SimProject& project_of(ProjectId id) { return projects_[id.value - 1]; }

    // ---- setup ------------------------------------------------------------

    void build_projects() {
        server::ServerConfig cfg;
        const auto& pol = s_.policy;
        cfg.dispatch.weights = pol.score_weights;
        cfg.dispatch.hr_level = pol.hr_level;
        cfg.dispatch.homogeneous_app_version = pol.homogeneous_app_version;
        cfg.dispatch.adaptive_replication = pol.adaptive_replication;
        cfg.dispatch.replication_threshold = pol.replication_threshold;
        cfg.dispatch.skip_bonus_age_seconds = pol.skip_bonus_age_seconds;
        cfg.dispatch.size_classes = pol.size_classes;
        cfg.lifecycle.count_timeouts_as_errors = pol.count_timeouts_as_errors;
        cfg.lifecycle.adaptive_replication = pol.adaptive_replication;
        cfg.comparator = pol.fuzzy_tolerance > 0.0 ? validation::Comparator::fuzzy(pol.fuzzy_tolerance)
                                                   : validation::Comparator::bitwise();
        cfg.cache_slots = pol.cache_slots;
        cfg.purge_grace_seconds = pol.purge_grace_seconds;

        for (std::uint32_t i = 0; i < s_.projects.size(); ++i) {
            SimProject p;
            p.index = i;
            p.spec = s_.projects[i];
            p.id = ProjectId(i + 1);
            p.app = AppId(i + 1);
            p.server = std::make_unique<server::ProjectServer>(p.id, cfg, Rng::stream(s_.seed, kServer, i),
                                                               trace_);
            p.server->set_submitter_rate(SubmitterId(1), 1.0);
            p.rng = Rng::stream(s_.seed, kJobStream, i);
            for (std::size_t k = 0; k < p.spec.versions.size(); ++k) {
                const auto& vs = p.spec.versions[k];
                AppVersion v;
                v.id = AppVersionId((i + 1) * 1000 + k + 1);
                v.app_id = p.app;
                v.version_number = static_cast<int>(k + 1);
                for (const auto& [kind, amount] : vs.resources) v.resource_usage.push_back({kind, amount});
                v.compatibility.os_allow = vs.os_allow;
                v.compatibility.min_driver_version = vs.min_driver_version;
                p.version_efficiency[v.id] = vs.efficiency;
                p.server->catalog().add(v);
            }
            projects_.push_back(std::move(p));
        }
    }

    void build_hosts() {
        std::uint32_t index = 0;
        for (const auto& g : s_.hosts) {
            const int faulty = static_cast<int>(std::lround(g.faulty_fraction * g.count));
            const int malicious = static_cast<int>(std::lround(g.malicious_fraction * g.count));
            for (int i = 0; i < g.count; ++i, ++index) {
                Rng r = Rng::stream(s_.seed, kHostParams, index);
                SimHost h;
                h.index = index;
                h.rng = Rng::stream(s_.seed, kHostRun, index);
                Host& host = h.client.host;
                host.id = HostId(index + 1);
                host.resources.push_back({ResourceKind::cpu, g.cpus, g.cpu_flops.sample(r), 1.0});
                h.efficiency[ResourceKind::cpu] = g.efficiency.sample(r);
                if (g.gpu) {
                    host.resources.push_back({g.gpu->kind, g.gpu->count, g.gpu->flops.sample(r), 1.0});
                    h.efficiency[g.gpu->kind] = g.gpu->efficiency.sample(r);
                }
                host.os_tag = g.os[r.below(g.os.size())];
                host.cpu_vendor_tag = g.vendor[r.below(g.vendor.size())];
                host.cpu_model_tag = g.model[r.below(g.model.size())];
                host.driver_version = g.driver_version;
                host.ram_bytes = g.ram_bytes;
                host.free_disk_bytes = g.disk_bytes;
                host.keyword_prefs = g.keyword_prefs;
                if (i < faulty) {
                    host.reliability = {Reliability::Kind::faulty, g.faulty_prob};
                } else if (i < faulty + malicious) {
                    host.reliability = {Reliability::Kind::malicious, g.malicious_prob};
                }
                host.prefs.n_usable_cpus = g.cpus;
                host.prefs.throttle_duty_cycle = g.throttle_duty_cycle;
                host.prefs.buffer_lo_seconds = s_.client.buffer_lo_seconds;
                host.prefs.buffer_hi_seconds = s_.client.buffer_hi_seconds;
                h.crash_prob = g.crash_prob;
                h.availability = {g.mean_on_seconds, g.mean_off_seconds, g.departure_rate};

                auto& cfg = h.client.config;
                cfg.time_slice_seconds = s_.policy.time_slice_seconds;
                cfg.edf_enabled = s_.policy.edf_enabled;
                cfg.report_margin_fraction = s_.client.report_margin_fraction;
                cfg.report_batch = s_.client.report_batch;
                for (const auto& p : projects_) {
                    client::ProjectState ps;
                    ps.id = p.id;
                    ps.resource_share = p.spec.share;
                    for (const auto& v : p.server->catalog().all()) ps.resources.insert(v.primary_resource());
                    h.client.projects.push_back(ps);
                }
                for (const auto& res : host.resources) h.client.availability[res.kind] = 1.0;
                hosts_.push_back(std::move(h));
            }
        }
    }

    void start_host(SimHost& h) {
        if (!h.availability.always_on()) {
            push({.time = h.availability.sample_on(h.rng), .kind = EventKind::host_off, .target = h.index});
        }
        if (auto gone = h.availability.sample_departure(h.rng)) {
            push({.time = *gone, .kind = EventKind::host_departed, .target = h.index});
        }
        push({.time = 0, .kind = EventKind::checkpoint_tick, .target = h.index});
    }

    // ---- event handling ---------------------------------------------------

    void dispatch(const Event& e) {
        now_ = e.time;
        switch (e.kind) {
            case EventKind::host_on: on_host_on(hosts_[e.target]); break;
            case EventKind::host_off: on_host_off(hosts_[e.target]); break;
            case EventKind::host_departed: on_departed(hosts_[e.target]); break;
            case EventKind::job_complete: on_complete(hosts_[e.target], e); break;
            case EventKind::deadline: on_deadline(projects_[e.target], e.instance); break;
            case EventKind::rpc: on_rpc(hosts_[e.target]); break;
            case EventKind::feeder_tick: on_server_tick(projects_[e.target]); break;
            case EventKind::checkpoint_tick: on_checkpoint(hosts_[e.target]); break;
            case EventKind::metrics_tick: on_metrics_tick(); break;
            case EventKind::batch_arrival: on_batch(projects_[e.target]); break;
        }
    }

    /// Brings a host's running jobs, priorities and availability average up to
    /// `now`.
    void advance(SimHost& h, SimMs now) {
        if (now <= h.last_advance) return;
        const double dt = ms_to_seconds(now - h.last_advance);
        const double counted = ms_to_seconds(std::max<SimMs>(0, std::min(now, duration_) - h.last_advance));
        h.average.observe(dt, h.online && !h.departed);
        std::map<ProjectId, double> usage;
        if (h.online && !h.departed) {
            const double duty = h.client.host.prefs.throttle_duty_cycle;
            for (auto& j : h.client.queue) {
                if (!j.running()) continue;
                const double total = h.raw_total[j.instance];
                j.elapsed_seconds = std::min(total, j.elapsed_seconds + dt * duty);
                j.fraction_done = total > 0.0 ? std::min(j.elapsed_seconds / total, 1.0) : 1.0;
                const double cf = client::capacity_fraction(j, h.client.host, h.client.host.prefs.n_usable_cpus);
                usage[j.project] += cf * dt * duty;
                project_of(j.project).compute_used += cf * counted * duty;
            }
        }
        client::advance_priorities(h.client, dt, usage);
        for (auto& [kind, a] : h.client.availability) a = h.average.value();
        for (auto& r : h.client.host.resources) r.availability_fraction = h.average.value();
        h.last_advance = now;
    }

    void rollback(client::ClientJob& j) {
        j.elapsed_seconds = j.checkpoint_elapsed;
        j.fraction_done = j.checkpoint_fraction;
        j.state = client::ClientJobState::preempted;
    }

    void stop_all(SimHost& h) {
        for (auto& j : h.client.queue) {
            if (j.running()) rollback(j);
        }
        h.running.clear();
        ++h.epoch;
    }

    void on_host_on(SimHost& h) {
        if (h.departed) return;
        advance(h, now_);
        h.online = true;
        emit(TraceRecord(now_, "host_on").add("host", h.client.host.id));
        push({.time = now_ + h.availability.sample_on(h.rng), .kind = EventKind::host_off, .target = h.index});
        client_tick(h);
    }

    void on_host_off(SimHost& h) {
        if (h.departed) return;
        advance(h, now_);
        h.online = false;
        stop_all(h);
        emit(TraceRecord(now_, "host_off").add("host", h.client.host.id));
        push({.time = now_ + h.availability.sample_off(h.rng), .kind = EventKind::host_on, .target = h.index});
    }

    void on_departed(SimHost& h) {
        if (h.departed) return;
        advance(h, now_);
        stop_all(h);
        h.departed = true;
        h.online = false;
        emit(TraceRecord(now_, "host_departed")
                 .add("host", h.client.host.id)
                 .add("queued", static_cast<std::int64_t>(h.client.queue.size())));
        h.client.queue.clear();
        h.client.pending_reports.clear();
        h.raw_total.clear();
        departed_.push_back(h.client.host.id);
    }

    void on_checkpoint(SimHost& h) {
        if (h.departed) return;
        push({.time = now_ + seconds_to_ms(s_.client.checkpoint_interval_seconds),
              .kind = EventKind::checkpoint_tick,
              .target = h.index});
        if (!h.online) return;
        advance(h, now_);
        for (auto& j : h.client.queue) {
            if (!j.running()) continue;
            j.last_checkpoint = now_;
            j.checkpoint_elapsed = j.elapsed_seconds;
            j.checkpoint_fraction = j.fraction_done;
        }
        client_tick(h);
    }

    void on_complete(SimHost& h, const Event& e) {
        if (h.departed || !h.online || e.epoch != h.epoch) return;
        advance(h, now_);
        auto it = std::find_if(h.client.queue.begin(), h.client.queue.end(),
                               [&](const client::ClientJob& j) { return j.instance == e.instance; });
        if (it == h.client.queue.end() || !it->running()) return;
        const double runtime = h.raw_total[e.instance];
        const Outcome out = sample_outcome(h.client.host.reliability, h.crash_prob, e.instance.job, h.rng,
                                           wrong_counter_, s_.policy.collusion);
        client::PendingReport rep;
        rep.instance = it->instance;
        rep.project = it->project;
        rep.success = out.kind != Outcome::Kind::crash;
        rep.digest = out.digest;
        rep.runtime_seconds = runtime;
        rep.completed_at = now_;
        rep.deadline = it->deadline;
        rep.delay_bound_seconds = it->delay_bound_seconds;
        h.client.pending_reports.push_back(rep);

        if (auto d = deadline_of_.find(e.instance); d != deadline_of_.end()) {
            const bool late = now_ > d->second;
            if (late) ++late_;
            else ++on_time_;
            deadline_of_.erase(d);
        }
        emit(TraceRecord(now_, "instance_complete")
                 .add("host", h.client.host.id)
                 .add("instance", e.instance)
                 .add("outcome", out.kind == Outcome::Kind::correct ? "correct"
                                 : out.kind == Outcome::Kind::wrong ? "wrong"
                                                                    : "crash")
                 .add("late", now_ > it->deadline));
        h.raw_total.erase(e.instance);
        h.client.queue.erase(it);
        h.running.erase(std::remove(h.running.begin(), h.running.end(), e.instance), h.running.end());
        client_tick(h);
    }

    /// Scheduling decision, then an RPC if one is due.
    void client_tick(SimHost& h) {
        if (h.departed || !h.online) return;
        advance(h, now_);
        const auto decision = client::schedule(h.client, now_);
        const std::set<InstanceId> run(decision.run.begin(), decision.run.end());
        for (auto& j : h.client.queue) {
            if (j.running() && !run.contains(j.instance)) rollback(j);
        }
        for (InstanceId id : decision.run) {
            auto* j = h.client.job(id);
            if (!j->running()) {
                j->state = client::ClientJobState::running;
                j->slice_start = now_;
            }
        }
        std::vector<InstanceId> running(run.begin(), run.end());
        if (running != h.running) {
            h.running = std::move(running);
            ++h.epoch;
            const double duty = h.client.host.prefs.throttle_duty_cycle;
            for (InstanceId id : h.running) {
                const auto* j = h.client.job(id);
                const double left = std::max(0.0, h.raw_total[id] - j->elapsed_seconds) / duty;
                push({.time = now_ + static_cast<SimMs>(std::ceil(left * 1000.0)),
                      .kind = EventKind::job_complete,
                      .target = h.index,
                      .instance = id,
                      .epoch = h.epoch});
            }
        }
        maybe_rpc(h);
    }

    void maybe_rpc(SimHost& h) {
        if (h.rpc_pending) return;
        if (!client::work_fetch(h.client, now_) && client::report_policy(h.client, now_).empty()) return;
        h.rpc_pending = true;
        push({.time = now_ + seconds_to_ms(s_.client.rpc_latency_seconds), .kind = EventKind::rpc, .target = h.index});
    }

    void on_rpc(SimHost& h) {
        h.rpc_pending = false;
        if (h.departed || !h.online) return;
        advance(h, now_);
        ProjectId target;
        client::WorkRequest request;
        if (auto wf = client::work_fetch(h.client, now_)) {
            target = wf->project;
            request = wf->request;
        } else {
            const auto batches = client::report_policy(h.client, now_);
            if (batches.empty()) {
                client_tick(h);
                return;
            }
            target = batches.front().project;
            request = client::piggyback_request(h.client, target, now_);
        }
        SimProject& p = project_of(target);
        ++rpcs_;

        std::vector<client::PendingReport> reports;
        auto& pending = h.client.pending_reports;
        for (auto it = pending.begin(); it != pending.end();) {
            if (it->project == target) {
                reports.push_back(std::move(*it));
                it = pending.erase(it);
            } else {
                ++it;
            }
        }
        for (const auto& r : reports) {
            const auto outcome = r.success ? lifecycle::ReportOutcome::ok(r.digest, r.runtime_seconds)
                                           : lifecycle::ReportOutcome::error(r.runtime_seconds);
            apply_update(p, p.server->handle_report(r.instance, outcome, now_));
        }

        std::size_t received = 0;
        if (request.wants_work()) {
            top_up(p);
            p.server->feeder_tick();
            const server::Reply reply = p.server->handle_request({h.client.host, request}, now_);
            for (InstanceId id : reply.created) created_at_[id] = now_;
            for (const auto& rj : reply.jobs) accept_job(h, p, rj);
            received = reply.jobs.size();
            auto* ps = h.client.project(target);
            for (const auto& [kind, r] : request.resources) {
                if (r.req_runtime_seconds <= 0.0 && r.req_idle <= 0.0) continue;
                const bool got = std::any_of(reply.jobs.begin(), reply.jobs.end(),
                                             [kind = kind](const server::ReplyJob& j) { return j.resource == kind; });
                client::record_rpc_result(ps->resource_backoff[kind], h.client.config.backoff, got, now_, h.rng);
            }
        }
        client::on_rpc_result(h.client, target, true, now_, h.rng);
        emit(TraceRecord(now_, "rpc")
                 .add("host", h.client.host.id)
                 .add("project", target)
                 .add("reported", static_cast<std::int64_t>(reports.size()))
                 .add("received", static_cast<std::int64_t>(received)));
        client_tick(h);
    }

    void accept_job(SimHost& h, SimProject& p, const server::ReplyJob& rj) {
        const auto* job = p.server->store().find(rj.instance.job);
        const auto* version = p.server->catalog().find(rj.version);
        client::ClientJob cj;
        cj.instance = rj.instance;
        cj.project = p.id;
        cj.version = rj.version;
        cj.usage = version->resource_usage;
        cj.est_wss_bytes = job->spec.est_wss_bytes;
        cj.static_estimate_seconds = rj.est_runtime_seconds;
        cj.deadline = rj.deadline;
        cj.delay_bound_seconds = job->spec.delay_bound_seconds;
        cj.arrival_seq = h.client.next_arrival_seq++;
        cj.last_checkpoint = now_;
        h.client.queue.push_back(cj);

        const auto& truth = truth_.at(rj.instance.job);
        const double peak = peak_flops_of(*version, h.client.host);
        const double eff = h.efficiency[version->primary_resource()] * p.version_efficiency[version->id];
        const double sigma = p.spec.runtime_noise_sigma;
        const double noise = sigma > 0.0 ? h.rng.lognormal(0.0, sigma) : 1.0;
        h.raw_total[rj.instance] = truth.true_flop_count / (peak * eff) * noise;

        deadline_of_[rj.instance] = rj.deadline;
        ++dispatched_;
        if (auto c = created_at_.find(rj.instance); c != created_at_.end()) {
            latencies_.push_back(ms_to_seconds(now_ - c->second));
            created_at_.erase(c);
        }
        push({.time = rj.deadline, .kind = EventKind::deadline, .target = p.index, .instance = rj.instance});
    }

    void on_deadline(SimProject& p, InstanceId id) {
        apply_update(p, p.server->handle_deadline(id, now_));
    }

    void apply_update(SimProject& p, const server::ServerUpdate& u) {
        if (u.ignored) return;
        for (InstanceId id : u.created) created_at_[id] = now_;
        for (InstanceId id : u.cancelled) created_at_.erase(id);
        for (JobId id : u.succeeded) {
            const auto* job = p.server->store().find(id);
            const auto* canon = job->find(job->canonical->seq);
            if (!(canon->output_digest == correct_digest(id))) ++wrong_accepted_;
            ++p.succeeded;
            if (now_ <= duration_) ++succeeded_in_window_;
            terminal(p, *job);
        }
        for (JobId id : u.failed) {
            ++failed_;
            terminal(p, *p.server->store().find(id));
        }
        for (const auto& g : u.credited) {
            credits_.push_back({g.instance.job, p.index, g.host, g.claimed, g.granted});
            p.credit_granted += g.granted;
            credit_claimed_ += g.claimed;
        }
    }

    void terminal(SimProject& p, const lifecycle::Job& job) {
        --p.active;
        ++terminal_;
        const auto& truth = truth_.at(job.id);
        if (truth.index >= s_.warmup_jobs) {
            ++overhead_jobs_;
            overhead_instances_ += static_cast<double>(job.instances.size()) -
                                   job.count(lifecycle::InstanceState::cancelled);
        }
        auto& b = batches_[truth.batch];
        b.finished = now_;
        if (--b.remaining == 0) turnarounds_.push_back(ms_to_seconds(b.finished - b.submitted));
        if (arrivals_done() && terminal_ == static_cast<std::int64_t>(truth_.size())) stop_ = true;
    }

    bool arrivals_done() const {
        return std::all_of(projects_.begin(), projects_.end(), [](const SimProject& p) { return p.arrivals_done; });
    }

    // ---- job streams and server housekeeping ------------------------------

    void submit(SimProject& p, std::uint64_t batch) {
        const auto& spec = p.spec;
        JobSpec js;
        js.app_id = p.app;
        js.est_flop_count = std::max(spec.est_flop_count.sample(p.rng), 1.0);
        const double true_flops = js.est_flop_count * spec.true_flop_ratio.sample(p.rng);
        js.max_flop_count = std::max(js.est_flop_count, true_flops) * 10.0;
        js.est_wss_bytes = spec.est_wss_bytes;
        js.disk_bound_bytes = spec.disk_bound_bytes;
        js.delay_bound_seconds = spec.delay_bound_seconds;
        js.min_quorum = spec.min_quorum;
        js.init_ninstances = spec.init_ninstances;
        js.max_error_instances = spec.max_error_instances;
        js.max_success_instances = spec.max_success_instances;
        js.keywords = {spec.keywords.begin(), spec.keywords.end()};
        js.input_files = {spec.input_files.begin(), spec.input_files.end()};
        js.submitter_id = SubmitterId(1);
        if (s_.policy.size_classes > 1) {
            const int n = s_.policy.size_classes;
            js.size_class = std::clamp(static_cast<int>(spec.est_flop_count.cdf(js.est_flop_count) * n), 0, n - 1);
        }
        const JobId id(++next_job_);
        truth_[id] = {true_flops, p.index, batch, static_cast<std::int64_t>(truth_.size())};
        const auto& job = p.server->submit(id, js, now_);
        for (const auto& inst : job.instances) created_at_[inst.id] = now_;
        ++p.submitted;
        ++p.active;
        ++batches_[batch].remaining;
        if (spec.total_jobs > 0 && p.submitted >= spec.total_jobs) p.arrivals_done = true;
    }

    bool may_submit(const SimProject& p) const {
        return now_ < duration_ && (p.spec.total_jobs == 0 || p.submitted < p.spec.total_jobs);
    }

    void on_batch(SimProject& p) {
        if (!may_submit(p)) {
            p.arrivals_done = true;
            return;
        }
        const std::uint64_t batch = batches_.size();
        batches_.push_back({now_, 0, now_});
        int n = 0;
        for (; n < p.spec.batch_size && may_submit(p); ++n) submit(p, batch);
        emit(TraceRecord(now_, "batch_arrival").add("project", p.id).add("jobs", n));
        const SimMs next = now_ + seconds_to_ms(p.spec.batch_interval_seconds);
        if (p.spec.batch_interval_seconds > 0.0 && next < duration_ && may_submit(p)) {
            push({.time = next, .kind = EventKind::batch_arrival, .target = p.index});
        } else if (p.spec.backlog == 0) {
            p.arrivals_done = true;
        }
        top_up(p);
    }

    /// Keeps the project's active job count at its backlog target.
    void top_up(SimProject& p) {
        if (p.spec.backlog == 0 || p.active >= p.spec.backlog) return;
        if (!may_submit(p)) {
            p.arrivals_done = true;
            return;
        }
        const std::uint64_t batch = batches_.size();
        batches_.push_back({now_, 0, now_});
        while (p.active < p.spec.backlog && may_submit(p)) submit(p, batch);
    }

    void on_server_tick(SimProject& p) {
        push({.time = now_ + seconds_to_ms(kServerTickSeconds), .kind = EventKind::feeder_tick, .target = p.index});
        p.server->advance_allocations(ms_to_seconds(now_ - p.last_server_tick));
        p.last_server_tick = now_;
        p.server->purge(now_);
        top_up(p);
        if (now_ >= duration_ && p.spec.backlog > 0) p.arrivals_done = true;
        p.server->feeder_tick();
    }

    void on_metrics_tick() {
        push({.time = now_ + seconds_to_ms(kMetricsTickSeconds), .kind = EventKind::metrics_tick});
        for (auto& p : projects_) {
            for (HostId h : departed_) p.server->forget_host(h);
            if (s_.policy.size_classes > 1) p.server->update_speed_quantiles();
        }
        departed_.clear();
        spdlog::debug("day {:.1f}: {} jobs terminal, {} rpcs", ms_to_seconds(now_) / 86400.0, terminal_, rpcs_);
    }

    // ---- results ----------------------------------------------------------

    Metrics metrics() const {
        Metrics m;
        const double days = s_.duration_seconds / 86400.0;
        std::int64_t succeeded = 0;
        double used = 0.0;
        for (const auto& p : projects_) {
            succeeded += p.succeeded;
            used += p.compute_used;
        }
        std::int64_t missed = late_;
        for (const auto& [id, deadline] : deadline_of_) {
            if (deadline <= now_) ++missed;
        }
        const std::int64_t resolved = on_time_ + missed;
        double granted = 0.0;
        for (const auto& p : projects_) {
            const std::string key = "project." + p.spec.name;
            m.set(key + ".compute_share", used > 0.0 ? p.compute_used / used : 0.0);
            m.set(key + ".compute_seconds", p.compute_used);
            m.set(key + ".credit_granted", p.credit_granted);
            m.set(key + ".jobs_submitted", p.submitted);
            m.set(key + ".jobs_succeeded", p.succeeded);
            granted += p.credit_granted;
        }
        m.set("hosts", s_.host_count());
        m.set("duration_days", days);
        m.set("end_time_seconds", ms_to_seconds(now_));
        m.set("jobs_submitted", static_cast<double>(truth_.size()));
        m.set("jobs_succeeded", static_cast<double>(succeeded));
        m.set("jobs_failed", static_cast<double>(failed_));
        m.set("throughput_jobs_per_day", days > 0.0 ? static_cast<double>(succeeded_in_window_) / days : 0.0);
        m.set("instances_dispatched", static_cast<double>(dispatched_));
        m.set("replication_overhead", overhead_jobs_ > 0 ? overhead_instances_ / overhead_jobs_ : 0.0);
        m.set("wrong_accepted", static_cast<double>(wrong_accepted_));
        m.set("wrong_accept_rate", succeeded > 0 ? static_cast<double>(wrong_accepted_) / succeeded : 0.0);
        m.set("deadline_misses", static_cast<double>(missed));
        m.set("deadline_miss_rate", resolved > 0 ? static_cast<double>(missed) / resolved : 0.0);
        m.set("credit_granted_total", granted);
        m.set("credit_claimed_total", credit_claimed_);
        m.set("rpcs", static_cast<double>(rpcs_));
        double lat = 0.0;
        for (double l : latencies_) lat += l;
        m.set("dispatch_latency_mean_seconds", latencies_.empty() ? 0.0 : lat / latencies_.size());
        m.set("dispatch_latency_p95_seconds", percentile(latencies_, 0.95));
        double turn = 0.0;
        for (double t : turnarounds_) turn += t;
        m.set("batches_completed", static_cast<double>(turnarounds_.size()));
        m.set("batch_turnaround_mean_seconds", turnarounds_.empty() ? 0.0 : turn / turnarounds_.size());
        m.set("batch_turnaround_p50_seconds", percentile(turnarounds_, 0.5));
        m.set("batch_turnaround_max_seconds", percentile(turnarounds_, 1.0));
        return m;
    }

    const Scenario& s_;
    TraceSink* trace_;
    SimMs duration_;
    SimMs end_;
    SimMs now_ = 0;
    bool stop_ = false;
    EventQueue queue_;
    std::vector<SimProject> projects_;
    std::vector<SimHost> hosts_;
    std::vector<HostId> departed_;
    std::unordered_map<JobId, JobTruth> truth_;
    std::vector<Batch> batches_;
    std::unordered_map<InstanceId, SimMs> created_at_;
    std::unordered_map<InstanceId, SimMs> deadline_of_;
    std::vector<double> latencies_;
    std::vector<double> turnarounds_;
    std::vector<CreditRecord> credits_;
    std::uint64_t next_job_ = 0;
    std::uint64_t wrong_counter_ = 0;
    std::int64_t wrong_accepted_ = 0;
    std::int64_t failed_ = 0;
    std::int64_t terminal_ = 0;
    std::int64_t succeeded_in_window_ = 0;
    std::int64_t dispatched_ = 0;
    std::int64_t late_ = 0;
    std::int64_t on_time_ = 0;
    std::int64_t rpcs_ = 0;
    std::int64_t overhead_jobs_ = 0;
    double overhead_instances_ = 0.0;
    double credit_claimed_ = 0.0;
};

}  // namespace

RunResult run(const Scenario& scenario, TraceSink* trace) {
    Simulation sim(scenario, trace);
    return sim.run();
}

}  // namespace volley::sim
