#include <doctest.h>

#include <algorithm>
#include <set>

#include "volley/core/classify.hpp"
#include "volley/server/cache.hpp"
#include "volley/server/dispatch.hpp"
#include "volley/server/project.hpp"
#include "volley/server/stats.hpp"
#include "volley/server/store.hpp"

using namespace volley;
using namespace volley::server;

namespace {

Host cpu_host(std::uint64_t id, double flops = 1e9, int cpus = 1) {
    Host h;
    h.id = HostId(id);
    h.resources = {{ResourceKind::cpu, cpus, flops, 1.0}};
    h.prefs.n_usable_cpus = cpus;
    h.os_tag = "linux";
    h.cpu_vendor_tag = "intel";
    h.cpu_model_tag = "i7";
    return h;
}

AppVersion cpu_version(std::uint64_t id = 1) {
    AppVersion v;
    v.id = AppVersionId(id);
    v.app_id = AppId(1);
    v.resource_usage = {{ResourceKind::cpu, 1.0}};
    return v;
}

JobSpec spec(double est_seconds_at_1gflops, int quorum = 1, int init = 1) {
    JobSpec s;
    s.app_id = AppId(1);
    s.est_flop_count = est_seconds_at_1gflops * 1e9;
    s.max_flop_count = 10 * s.est_flop_count;
    s.min_quorum = quorum;
    s.init_ninstances = init;
    s.delay_bound_seconds = 86400;
    return s;
}

SchedulerRequest request(const Host& h, double seconds, double idle = 0.0) {
    SchedulerRequest r;
    r.host = h;
    r.work.resources[ResourceKind::cpu] = {seconds, idle, 0.0};
    return r;
}

ProjectServer make_server(ServerConfig cfg = {}) {
    ProjectServer srv(ProjectId(1), cfg, Rng(1));
    srv.catalog().add(cpu_version());
    return srv;
}

bool skipped_for(const Reply& r, SkipReason reason) {
    return std::any_of(r.skips.begin(), r.skips.end(), [&](const auto& s) { return s.second == reason; });
}

}  // namespace

TEST_CASE("welford statistics") {
    Welford w;
    w.add(2e-10);
    CHECK(w.count == 1);
    CHECK(w.mean == doctest::Approx(2e-10));
    CHECK(w.variance() == 0.0);
    Welford v;
    v.add(1);
    v.add(3);
    CHECK(v.mean == doctest::Approx(2));
    CHECK(v.variance() == doctest::Approx(2));
}

TEST_CASE("projected flops fallback chain") {
    const Host h = cpu_host(1, 3e9);
    const Host other = cpu_host(2, 3e9);
    const AppVersion v = cpu_version();
    RuntimeStats stats;
    CHECK(proj_flops(stats, h, v) == doctest::Approx(3e9));

    for (int i = 0; i < 11; ++i) stats.update(h.id, v.id, 1.0, 2e-10);
    CHECK(proj_flops(stats, h, v) == doctest::Approx(5e9));

    RuntimeStats fallback;
    for (int i = 0; i < 3; ++i) fallback.update(h.id, v.id, 1.0, 4e-10);
    for (int i = 0; i < 47; ++i) fallback.update(other.id, v.id, 1.0, 4e-10);
    CHECK(fallback.version(v.id).count == 50);
    CHECK(proj_flops(fallback, h, v) == doctest::Approx(2.5e9));

    JobSpec s;
    s.est_flop_count = 1e12;
    CHECK(est_runtime(s, stats, h, v) == doctest::Approx(200));
}

TEST_CASE("feeder keeps every category represented") {
    JobStore store;
    for (std::uint64_t i = 0; i < 1000; ++i) {
        JobSpec s = spec(60);
        s.size_class = i < 900 ? 0 : 1;
        store.insert(lifecycle::create_job(JobId(i + 1), s, 0));
    }
    JobCache cache(100);
    CHECK(feeder_fill(cache, store) == 100);
    std::set<int> classes;
    for (std::size_t i = 0; i < cache.size(); ++i) {
        classes.insert(store.find(cache.slot(i).instance->job)->spec.size_class);
    }
    CHECK(classes == std::set<int>{0, 1});

    CHECK(feeder_fill(cache, store) == 0);
    REQUIRE(cache.take(5));
    cache.clear(5);
    CHECK(cache.occupied() == 99);
    CHECK(feeder_fill(cache, store) == 1);
    CHECK(cache.slot(5).instance.has_value());

    JobStore empty;
    JobCache idle(10);
    CHECK(feeder_fill(idle, empty) == 0);
    CHECK(idle.occupied() == 0);
}

TEST_CASE("cache slot claiming") {
    JobCache cache(2);
    cache.put(0, InstanceId{JobId(1), 0});
    CHECK(cache.take(0));
    CHECK_FALSE(cache.take(0));
    cache.release(0);
    CHECK(cache.take(0));
    CHECK_FALSE(cache.take(1));
}

TEST_CASE("job scoring") {
    lifecycle::Job job = lifecycle::create_job(JobId(1), spec(60), 0);
    Host h = cpu_host(1);
    const ScoreContext ctx;
    const ScoreWeights w;
    CHECK(score(job, h, 1e9, ctx, w) == doctest::Approx(0.0));

    job.spec.keywords = {"astro"};
    h.keyword_prefs["astro"] = KeywordPref::yes;
    CHECK(score(job, h, 1e9, ctx, w) == doctest::Approx(1.0));
    h.keyword_prefs["astro"] = KeywordPref::no;
    CHECK_FALSE(score(job, h, 1e9, ctx, w).has_value());

    h.keyword_prefs.clear();
    job.spec.input_files = {"a.dat"};
    h.sticky_files = {"a.dat", "b.dat"};
    CHECK(score(job, h, 1e9, ctx, w) == doctest::Approx(w.locality));

    ScoreContext alloc;
    alloc.allocation_norm = 0.5;
    h.sticky_files.clear();
    CHECK(score(job, h, 1e9, alloc, w) == doctest::Approx(0.5 * w.allocation));
}

TEST_CASE("speed quantiles") {
    const auto q = SpeedQuantiles::from({1, 2, 3, 4, 5, 6, 7, 8}, 2);
    CHECK(q.classes() == 2);
    CHECK(q.index_of(1.5) == 0);
    CHECK(q.index_of(7.5) == 1);
}

TEST_CASE("dispatch accumulates until the request is met") {
    ProjectServer srv = make_server();
    for (std::uint64_t i = 1; i <= 10; ++i) srv.submit(JobId(i), spec(60), 0);
    srv.feeder_tick();
    const Reply r = srv.handle_request(request(cpu_host(1), 100.0), 0);
    CHECK_FALSE(r.error.has_value());
    CHECK(r.jobs.size() == 2);
    for (const auto& j : r.jobs) {
        CHECK(j.est_runtime_seconds == doctest::Approx(60));
        CHECK(j.deadline == 86400 * kMsPerSecond);
    }
}

TEST_CASE("dispatch never sends two instances of a job to one host") {
    ProjectServer srv = make_server();
    srv.submit(JobId(1), spec(60, 2, 2), 0);
    srv.feeder_tick();
    const Host h = cpu_host(1);
    const Reply first = srv.handle_request(request(h, 1000.0), 0);
    REQUIRE(first.jobs.size() == 1);
    CHECK(skipped_for(first, SkipReason::dup_in_reply));
    srv.feeder_tick();
    const Reply second = srv.handle_request(request(h, 1000.0), 1000);
    CHECK(second.jobs.empty());
    CHECK(skipped_for(second, SkipReason::already_sent));
    const Reply other = srv.handle_request(request(cpu_host(2), 1000.0), 2000);
    CHECK(other.jobs.size() == 1);
}

TEST_CASE("homogeneous redundancy lock is enforced") {
    ServerConfig cfg;
    cfg.dispatch.hr_level = HrLevel::coarse;
    ProjectServer srv = make_server(cfg);
    srv.submit(JobId(1), spec(60, 2, 2), 0);
    srv.feeder_tick();
    Host a = cpu_host(1);
    Host b = cpu_host(2);
    b.os_tag = "windows";
    REQUIRE(srv.handle_request(request(a, 1000.0), 0).jobs.size() == 1);
    srv.feeder_tick();
    const Reply r = srv.handle_request(request(b, 1000.0), 10);
    CHECK(r.jobs.empty());
    CHECK(skipped_for(r, SkipReason::hr_violation));
    srv.feeder_tick();
    Host c = cpu_host(3);
    CHECK(srv.handle_request(request(c, 1000.0), 20).jobs.size() == 1);
}

TEST_CASE("fast check rejects jobs that cannot meet their deadline or fit on disk") {
    ProjectServer srv = make_server();
    JobSpec slow = spec(7200);
    slow.delay_bound_seconds = 3600;
    srv.submit(JobId(1), slow, 0);
    JobSpec big = spec(60);
    big.disk_bound_bytes = 1e12;
    srv.submit(JobId(2), big, 0);
    srv.feeder_tick();
    const Reply r = srv.handle_request(request(cpu_host(1), 10000.0), 0);
    CHECK(r.jobs.empty());
    CHECK(skipped_for(r, SkipReason::deadline));
    CHECK(skipped_for(r, SkipReason::disk));
}

TEST_CASE("GPU request without a GPU version is not served") {
    ProjectServer srv = make_server();
    srv.submit(JobId(1), spec(60), 0);
    srv.feeder_tick();
    Host h = cpu_host(1);
    h.resources.push_back({ResourceKind::nvidia_gpu, 1, 1e11, 1.0});
    SchedulerRequest req;
    req.host = h;
    req.work.resources[ResourceKind::nvidia_gpu] = {1000.0, 1.0, 0.0};
    CHECK(srv.handle_request(req, 0).jobs.empty());
}

TEST_CASE("malformed request gets an error reply") {
    ProjectServer srv = make_server();
    CHECK(srv.handle_request(request(cpu_host(1), -5.0), 0).error.has_value());
    Host bad = cpu_host(2);
    bad.resources.clear();
    CHECK(srv.handle_request(request(bad, 5.0), 0).error.has_value());
}

TEST_CASE("reports drive validation and credit") {
    ProjectServer srv = make_server();
    srv.submit(JobId(1), spec(60, 2, 2), 0);
    srv.feeder_tick();
    const Reply ra = srv.handle_request(request(cpu_host(1), 100.0), 0);
    srv.feeder_tick();
    const Reply rb = srv.handle_request(request(cpu_host(2, 2e9), 100.0), 0);
    REQUIRE(ra.jobs.size() == 1);
    REQUIRE(rb.jobs.size() == 1);

    const auto u1 = srv.handle_report(ra.jobs[0].instance, lifecycle::ReportOutcome::ok({{0.5}}, 60.0), 60000);
    CHECK(u1.succeeded.empty());
    const auto u2 = srv.handle_report(rb.jobs[0].instance, lifecycle::ReportOutcome::ok({{0.5}}, 30.0), 70000);
    CHECK(u2.succeeded == std::vector<JobId>{JobId(1)});
    REQUIRE(u2.credited.size() == 2);
    CHECK(u2.credited[0].granted == u2.credited[1].granted);
    CHECK(srv.granted(JobId(1)).has_value());
    CHECK(srv.runtime_stats().version(AppVersionId(1)).count == 2);

    CHECK(srv.handle_report(ra.jobs[0].instance, lifecycle::ReportOutcome::ok({{0.5}}, 60.0), 80000).ignored);
    CHECK(srv.purge(80000) == 0);
    CHECK(srv.purge(80000 + 4 * kMsPerDay) == 1);
    CHECK(srv.store().size() == 0);
}

TEST_CASE("failed instances leave runtime statistics unchanged") {
    ProjectServer srv = make_server();
    srv.submit(JobId(1), spec(60), 0);
    srv.feeder_tick();
    const Reply r = srv.handle_request(request(cpu_host(1), 100.0), 0);
    REQUIRE(r.jobs.size() == 1);
    const auto u = srv.handle_report(r.jobs[0].instance, lifecycle::ReportOutcome::error(5.0), 5000);
    CHECK(u.created.size() == 1);
    CHECK(srv.runtime_stats().version(AppVersionId(1)).count == 0);
}

TEST_CASE("deadline creates a replacement") {
    ProjectServer srv = make_server();
    srv.submit(JobId(1), spec(60), 0);
    srv.feeder_tick();
    const Reply r = srv.handle_request(request(cpu_host(1), 100.0), 0);
    REQUIRE(r.jobs.size() == 1);
    const auto u = srv.handle_deadline(r.jobs[0].instance, r.jobs[0].deadline);
    CHECK(u.created.size() == 1);
    srv.feeder_tick();
    CHECK(srv.handle_request(request(cpu_host(2), 100.0), r.jobs[0].deadline).jobs.size() == 1);
}

TEST_CASE("adaptive replication skips replication for trusted hosts") {
    ServerConfig cfg;
    cfg.dispatch.adaptive_replication = true;
    cfg.lifecycle.adaptive_replication = true;
    ProjectServer srv = make_server(cfg);
    const Host h = cpu_host(1);
    const Host partner = cpu_host(2);
    std::uint64_t next = 1;
    int unreplicated = 0;
    for (int round = 0; round < 200; ++round) {
        const JobId id(next++);
        srv.submit(id, spec(60, 2, 2), 0);
        srv.feeder_tick();
        const SimMs now = round * 1000;
        const Reply r = srv.handle_request(request(h, 50.0), now);
        REQUIRE(r.jobs.size() == 1);
        const bool replicated = srv.store().find(id)->quorum == 2;
        srv.handle_report(r.jobs[0].instance, lifecycle::ReportOutcome::ok({{1.0}}, 60.0), now + 1);
        if (replicated) {
            srv.feeder_tick();
            const Reply p = srv.handle_request(request(partner, 50.0), now + 2);
            REQUIRE(p.jobs.size() == 1);
            srv.handle_report(p.jobs[0].instance, lifecycle::ReportOutcome::ok({{1.0}}, 60.0), now + 3);
        } else {
            ++unreplicated;
        }
        CHECK(srv.store().find(id)->state == lifecycle::JobState::success);
    }
    CHECK(srv.replication_stats().consecutive_valid(h.id, AppVersionId(1)) > 10);
    CHECK(unreplicated > 100);
}
