#include <doctest.h>

#include <algorithm>

#include "support/wrr_cases.hpp"
#include "volley/client/backoff.hpp"
#include "volley/client/policy.hpp"
#include "volley/client/state.hpp"
#include "volley/client/throttle.hpp"
#include "volley/client/wrr.hpp"

using namespace volley;
using namespace volley::client;

namespace {

ClientState make_state(int cpus, int gpus = 0) {
    ClientState st;
    st.host.id = HostId(1);
    st.host.resources = {{ResourceKind::cpu, cpus, 2e9, 1.0}};
    if (gpus > 0) st.host.resources.push_back({ResourceKind::nvidia_gpu, gpus, 5e10, 1.0});
    st.host.prefs.n_usable_cpus = cpus;
    st.host.prefs.buffer_lo_seconds = 1800;
    st.host.prefs.buffer_hi_seconds = 3600;
    return st;
}

ProjectState project(std::uint64_t id, double priority = 0.0) {
    ProjectState p;
    p.id = ProjectId(id);
    p.priority.balance = priority;
    p.resources = {ResourceKind::cpu, ResourceKind::nvidia_gpu};
    return p;
}

ClientJob& add_job(ClientState& st, std::uint64_t id, std::uint64_t proj, double seconds,
                   std::vector<ResourceUsage> usage = {{ResourceKind::cpu, 1.0}}) {
    ClientJob j;
    j.instance = InstanceId{JobId(id), 0};
    j.project = ProjectId(proj);
    j.usage = std::move(usage);
    j.static_estimate_seconds = seconds;
    j.deadline = 30 * kMsPerDay;
    j.delay_bound_seconds = 30 * 86400.0;
    j.arrival_seq = st.next_arrival_seq++;
    st.queue.push_back(j);
    return st.queue.back();
}

bool contains(const std::vector<InstanceId>& v, std::uint64_t job) {
    return std::find(v.begin(), v.end(), InstanceId{JobId(job), 0}) != v.end();
}

}  // namespace

TEST_CASE("runtime estimation") {
    ClientJob j;
    j.static_estimate_seconds = 200;
    CHECK(estimate_remaining(j) == doctest::Approx(200));
    CHECK(estimate_remaining(j, 0.5) == doctest::Approx(400));

    j.elapsed_seconds = 100;
    j.fraction_done = 0.5;
    j.accurate_fraction = true;
    CHECK(estimate_remaining(j) == doctest::Approx(100));

    j.accurate_fraction = false;
    j.static_estimate_seconds = 600;
    CHECK(estimate_remaining(j) == doctest::Approx(0.5 * 100 + 0.5 * 300));
}

TEST_CASE("feasibility") {
    ClientState st = make_state(4, 1);
    st.projects = {project(1)};
    for (int i = 0; i < 5; ++i) add_job(st, static_cast<std::uint64_t>(i + 1), 1, 100);
    add_job(st, 6, 1, 100, {{ResourceKind::cpu, 0.5}, {ResourceKind::nvidia_gpu, 1.0}});
    add_job(st, 7, 1, 100, {{ResourceKind::nvidia_gpu, 0.5}});
    add_job(st, 8, 1, 100, {{ResourceKind::nvidia_gpu, 0.5}});
    add_job(st, 9, 1, 100, {{ResourceKind::nvidia_gpu, 0.5}});
    auto pick = [&](std::initializer_list<int> idx) {
        std::vector<const ClientJob*> v;
        for (int i : idx) v.push_back(&st.queue[static_cast<std::size_t>(i)]);
        return v;
    };
    CHECK(feasible(pick({0, 1, 2, 3, 5}), st.host, st.host.prefs, st.queue));
    CHECK_FALSE(feasible(pick({0, 1, 2, 3, 4}), st.host, st.host.prefs, st.queue));
    CHECK(feasible(pick({6, 7}), st.host, st.host.prefs, st.queue));
    CHECK_FALSE(feasible(pick({6, 7, 8}), st.host, st.host.prefs, st.queue));

    st.host.ram_bytes = 1e9;
    st.queue[0].est_wss_bytes = 6e8;
    st.queue[1].est_wss_bytes = 6e8;
    CHECK_FALSE(feasible(pick({0, 1}), st.host, st.host.prefs, st.queue));
}

TEST_CASE("weighted round robin simulation examples") {
    SUBCASE("shortfall from two busy instances") {
        ClientState st = make_state(2);
        st.projects = {project(1)};
        add_job(st, 1, 1, 1000);
        add_job(st, 2, 1, 4000);
        const auto r = wrr_simulate(st, 0, default_horizon(st, 0));
        CHECK(r.resource(ResourceKind::cpu)->shortfall_seconds() == doctest::Approx(2600));
    }
    SUBCASE("empty queue") {
        ClientState st = make_state(2);
        st.projects = {project(1)};
        const auto r = wrr_simulate(st, 0, default_horizon(st, 0));
        CHECK(r.resource(ResourceKind::cpu)->shortfall_seconds() == doctest::Approx(2 * 3600));
        CHECK(r.resource(ResourceKind::cpu)->idle_instances_now() == doctest::Approx(2.0));
    }
    SUBCASE("unmeetable deadline is a miss") {
        ClientState st = make_state(1);
        st.projects = {project(1)};
        add_job(st, 1, 1, 100).deadline = 50 * kMsPerSecond;
        const auto r = wrr_simulate(st, 0, default_horizon(st, 0));
        CHECK(r.misses(InstanceId{JobId(1), 0}));
    }
}

TEST_CASE("weighted round robin shortfall matches the minute timeline") {
    Rng rng(2024);
    for (int trial = 0; trial < 300; ++trial) {
        const auto c = oracle::random_wrr_case(rng);
        const auto got = wrr_simulate(c.state, 0, default_horizon(c.state, 0));
        const auto want = oracle::timeline_shortfall(c.timeline);
        for (std::size_t r = 0; r < c.kinds.size(); ++r) {
            REQUIRE(got.resource(c.kinds[r]) != nullptr);
            CHECK(got.resource(c.kinds[r])->shortfall_milli_ms == want[r]);
        }
    }
}

TEST_CASE("job scheduling order") {
    SUBCASE("higher priority project runs first") {
        ClientState st = make_state(1);
        st.projects = {project(1, 10.0), project(2, 50.0)};
        add_job(st, 1, 1, 100);
        add_job(st, 2, 2, 100);
        const auto d = schedule(st, 0);
        CHECK(d.run == std::vector<InstanceId>{InstanceId{JobId(2), 0}});
    }
    SUBCASE("predicted misses run earliest deadline first") {
        ClientState st = make_state(1);
        st.projects = {project(1, 100.0), project(2)};
        add_job(st, 1, 1, 100);
        add_job(st, 2, 2, 7200).deadline = 7200 * kMsPerSecond;
        add_job(st, 3, 2, 7200).deadline = 5000 * kMsPerSecond;
        const auto d = schedule(st, 0);
        CHECK(contains(d.predicted_misses, 2));
        CHECK(contains(d.predicted_misses, 3));
        CHECK(d.run == std::vector<InstanceId>{InstanceId{JobId(3), 0}});
        st.config.edf_enabled = false;
        CHECK(schedule(st, 0).run == std::vector<InstanceId>{InstanceId{JobId(1), 0}});
    }
    SUBCASE("GPU job wins the last CPU fraction") {
        ClientState st = make_state(1, 1);
        st.projects = {project(1, 100.0), project(2)};
        add_job(st, 1, 1, 100);
        add_job(st, 2, 2, 100, {{ResourceKind::cpu, 1.5}, {ResourceKind::nvidia_gpu, 1.0}});
        const auto d = schedule(st, 0);
        CHECK(contains(d.run, 2));
        CHECK_FALSE(contains(d.run, 1));
    }
    SUBCASE("running job mid time slice is kept") {
        ClientState st = make_state(1);
        st.projects = {project(1), project(2, 100.0)};
        auto& a = add_job(st, 1, 1, 10000);
        a.state = ClientJobState::running;
        a.slice_start = 0;
        a.elapsed_seconds = 60;
        a.fraction_done = 0.01;
        add_job(st, 2, 2, 100);
        CHECK(schedule(st, 60 * kMsPerSecond).run == std::vector<InstanceId>{InstanceId{JobId(1), 0}});
        const auto later = schedule(st, 7200 * kMsPerSecond);
        CHECK(later.run == std::vector<InstanceId>{InstanceId{JobId(2), 0}});
        CHECK(later.preempt == std::vector<InstanceId>{InstanceId{JobId(1), 0}});
    }
}

TEST_CASE("schedule produces a maximal feasible set") {
    Rng rng(77);
    for (int trial = 0; trial < 300; ++trial) {
        ClientState st = make_state(1 + static_cast<int>(rng.below(4)), static_cast<int>(rng.below(3)));
        st.host.ram_bytes = 4e9;
        st.projects = {project(1, rng.uniform(-10, 10)), project(2, rng.uniform(-10, 10))};
        const std::size_t n = 1 + rng.below(20);
        for (std::size_t i = 0; i < n; ++i) {
            std::vector<ResourceUsage> usage;
            if (st.host.resource(ResourceKind::nvidia_gpu) && rng.bernoulli(0.3)) {
                usage = {{ResourceKind::cpu, rng.bernoulli(0.5) ? 0.5 : 1.0},
                         {ResourceKind::nvidia_gpu, rng.bernoulli(0.5) ? 0.5 : 1.0}};
            } else {
                usage = {{ResourceKind::cpu, rng.bernoulli(0.2) ? 2.0 : 1.0}};
            }
            auto& j = add_job(st, i + 1, 1 + rng.below(2), rng.uniform(60, 20000), usage);
            j.est_wss_bytes = rng.uniform(1e8, 1.5e9);
            j.deadline = static_cast<SimMs>(rng.uniform(600, 86400)) * kMsPerSecond;
        }
        const auto d = schedule(st, 0);
        std::vector<const ClientJob*> run;
        for (const auto& id : d.run) run.push_back(st.job(id));
        REQUIRE(feasible(run, st.host, st.host.prefs, st.queue));
        for (const auto& j : st.queue) {
            if (contains(d.run, j.instance.job.value)) continue;
            auto extended = run;
            extended.push_back(&j);
            CHECK_FALSE(feasible(extended, st.host, st.host.prefs, st.queue));
        }
    }
}

TEST_CASE("work fetch") {
    SUBCASE("full buffer requests nothing") {
        ClientState st = make_state(1);
        st.projects = {project(1)};
        add_job(st, 1, 1, 5000);
        CHECK_FALSE(work_fetch(st, 0).has_value());
    }
    SUBCASE("starved GPU fetches from a project that is not backed off") {
        ClientState st = make_state(1, 1);
        st.projects = {project(1, 100.0), project(2)};
        st.projects[0].rpc_backoff.next_allowed = kMsPerHour;
        add_job(st, 1, 1, 5000);
        const auto f = work_fetch(st, 0);
        REQUIRE(f.has_value());
        CHECK(f->project == ProjectId(2));
        CHECK(f->request.resources.contains(ResourceKind::nvidia_gpu));
    }
    SUBCASE("queue duration sums estimates") {
        ClientState st = make_state(2);
        st.projects = {project(1)};
        add_job(st, 1, 1, 200);
        add_job(st, 2, 1, 300);
        const auto f = work_fetch(st, 0);
        REQUIRE(f.has_value());
        const auto& req = f->request.resources.at(ResourceKind::cpu);
        CHECK(req.queue_dur_seconds == doctest::Approx(500));
        CHECK(req.req_runtime_seconds == doctest::Approx(2 * 3600 - 500));
        CHECK(req.req_idle == doctest::Approx(0.0));
    }
    SUBCASE("resource backoff and prohibition") {
        ClientState st = make_state(1);
        st.projects = {project(1)};
        st.projects[0].resource_backoff[ResourceKind::cpu].next_allowed = kMsPerHour;
        CHECK_FALSE(work_fetch(st, 0).has_value());
        st.projects[0].resource_backoff.clear();
        st.projects[0].prohibited = {ResourceKind::cpu};
        CHECK_FALSE(work_fetch(st, 0).has_value());
    }
}

TEST_CASE("report policy") {
    ClientState st = make_state(1);
    st.projects = {project(1)};
    auto pending = [&](std::uint64_t id, SimMs deadline) {
        PendingReport r;
        r.instance = InstanceId{JobId(id), 0};
        r.project = ProjectId(1);
        r.success = true;
        r.deadline = deadline;
        r.delay_bound_seconds = 100000;
        st.pending_reports.push_back(r);
    };
    pending(1, 90000 * kMsPerSecond);
    CHECK(report_policy(st, 0).empty());
    CHECK(report_policy(st, 88000 * kMsPerSecond).size() == 1);
    pending(2, 90000 * kMsPerSecond);
    pending(3, 90000 * kMsPerSecond);
    const auto piggy = report_policy(st, 0, ProjectId(1));
    REQUIRE(piggy.size() == 1);
    CHECK(piggy[0].instances.size() == 3);
    st.config.report_batch = 3;
    CHECK(report_policy(st, 0).size() == 1);
}

TEST_CASE("exponential backoff") {
    BackoffPolicy policy;
    Rng rng(3);
    for (int i = 0; i < 1000; ++i) {
        const double d = policy.delay(1, rng);
        CHECK(d >= 48.0);
        CHECK(d <= 72.0);
    }
    CHECK(policy.nominal_delay(10) == doctest::Approx(30720));
    CHECK(policy.nominal_delay(12) == doctest::Approx(86400));
    CHECK(policy.nominal_delay(40) == doctest::Approx(86400));
    for (int i = 0; i < 100; ++i) CHECK(policy.delay(40, rng) <= 1.2 * 86400);
    CHECK(policy.nominal_delay(4) == doctest::Approx(480));

    BackoffState state;
    for (int i = 0; i < 5; ++i) record_rpc_result(state, policy, false, 0, rng);
    CHECK(state.failures == 5);
    CHECK(state.backed_off(0));
    record_rpc_result(state, policy, true, 10, rng);
    CHECK(state.failures == 0);
    CHECK_FALSE(state.backed_off(10));
}

TEST_CASE("piggyback request") {
    ClientState st = make_state(1);
    st.projects = {project(1, 100.0), project(2)};
    st.projects[0].rpc_backoff.next_allowed = kMsPerHour;
    CHECK(piggyback_request(st, ProjectId(1), 0).resources.contains(ResourceKind::cpu));
    CHECK(piggyback_request(st, ProjectId(2), 0).resources.contains(ResourceKind::cpu));
    st.projects[0].rpc_backoff.next_allowed = 0;
    CHECK(piggyback_request(st, ProjectId(2), 0).empty());
}

TEST_CASE("throttle") {
    Throttle half(0.5, 1.0);
    CHECK(half.compute_time(0.0, 100.0) == doctest::Approx(50.0));
    CHECK(half.running_at(0.5));
    CHECK_FALSE(half.running_at(1.5));
    CHECK(half.compute_time(0.5, 2.5) == doctest::Approx(1.0));
    Throttle full(1.0);
    CHECK(full.compute_time(3.0, 10.0) == doctest::Approx(7.0));
}

TEST_CASE("priority accounting") {
    ClientState st = make_state(1);
    st.projects = {project(1), project(2)};
    st.projects[0].resource_share = 300;
    st.projects[1].resource_share = 100;
    CHECK(st.share_fraction(ProjectId(1)) == doctest::Approx(0.75));
    advance_priorities(st, 1000.0, {{ProjectId(1), 1000.0}});
    CHECK(st.projects[0].priority.balance < st.projects[1].priority.balance);
}
