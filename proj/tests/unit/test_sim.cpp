#include <doctest.h>

#include <map>
#include <set>
#include <string>

#include "volley/core/error.hpp"
#include "volley/core/trace.hpp"
#include "volley/sim/engine.hpp"
#include "volley/sim/metrics.hpp"
#include "volley/sim/models.hpp"
#include "volley/sim/scenario.hpp"

using namespace volley;
using namespace volley::sim;

namespace {

Json minimal_doc() {
    return Json::parse(R"({
        "seed": 1,
        "duration_seconds": 86400,
        "hosts": [{"count": 1}],
        "projects": [{"name": "p", "share": 100, "delay_bound_seconds": 86400,
                      "est_flop_count": 3.6e12, "total_jobs": 1}]
    })");
}

std::vector<const TraceRecord*> events(const MemoryTrace& trace, std::string_view name) {
    std::vector<const TraceRecord*> out;
    for (const auto& r : trace.records()) {
        if (r.event() == name) out.push_back(&r);
    }
    return out;
}

std::string validation_path(const Json& doc) {
    try {
        parse_scenario(doc);
    } catch (const ValidationError& e) {
        return e.path();
    }
    return "";
}

}  // namespace

TEST_CASE("scenario validation names the offending field") {
    Json doc = minimal_doc();
    doc["projects"][0].erase("delay_bound_seconds");
    CHECK(validation_path(doc) == "projects[0].delay_bound_seconds");

    doc = minimal_doc();
    doc["hosts"][0]["bogus"] = 1;
    CHECK(validation_path(doc) == "hosts[0].bogus");

    doc = minimal_doc();
    doc.erase("duration_seconds");
    CHECK(validation_path(doc) == "duration_seconds");

    doc = minimal_doc();
    doc["projects"][0]["share"] = -1;
    CHECK(validation_path(doc) == "projects[0].share");
}

TEST_CASE("scenario round trip is a fixed point") {
    const Json doc = canonicalize(minimal_doc());
    const Json emitted = emit_scenario(parse_scenario(doc));
    CHECK(canonicalize(emitted) == emitted);
    CHECK(emit_scenario(parse_scenario(emitted)) == emitted);
    CHECK(scenario_digest(emitted) == scenario_digest(canonicalize(emitted)));
}

TEST_CASE("overrides address nested fields") {
    Json doc = minimal_doc();
    apply_override(doc, "projects[0].share", "300");
    apply_override(doc, "policy.edf_enabled", "false");
    const Scenario s = parse_scenario(canonicalize(doc));
    CHECK(s.projects[0].share == doctest::Approx(300));
    CHECK_FALSE(s.policy.edf_enabled);
    CHECK_THROWS_AS(apply_override(doc, "projects[5].share", "1"), ValidationError);
}

TEST_CASE("distributions") {
    Rng rng(1);
    Distribution c = Distribution::constant(4.0);
    CHECK(c.sample(rng) == 4.0);
    CHECK(c.mean() == 4.0);
    Distribution u = Distribution::uniform(0.4, 0.95);
    for (int i = 0; i < 1000; ++i) {
        const double x = u.sample(rng);
        CHECK(x >= 0.4);
        CHECK(x < 0.95);
    }
}

TEST_CASE("single job completes after runtime plus dispatch latency") {
    const Scenario s = parse_scenario(canonicalize(minimal_doc()));
    MemoryTrace trace;
    const RunResult r = run(s, &trace);
    const auto dispatches = events(trace, "dispatch");
    const auto successes = events(trace, "job_success");
    REQUIRE(dispatches.size() == 1);
    REQUIRE(successes.size() == 1);
    CHECK(dispatches[0]->time() == 1000);
    CHECK(successes[0]->time() == 3600 * 1000 + 1000);
    CHECK(r.metrics.get("jobs_succeeded") == 1);
    CHECK(r.metrics.get("instances_dispatched") == 1);
    REQUIRE(r.credits.size() == 1);
    CHECK(r.credits[0].granted == doctest::Approx(3.6e12 / 8.64e13));
}

TEST_CASE("same seed gives identical traces") {
    Json doc = minimal_doc();
    doc["hosts"][0]["count"] = 5;
    doc["hosts"][0]["mean_on_seconds"] = 20000;
    doc["hosts"][0]["mean_off_seconds"] = 5000;
    doc["projects"][0]["total_jobs"] = 40;
    doc["projects"][0]["backlog"] = 10;
    doc["projects"][0]["runtime_noise_sigma"] = 0.3;
    const Scenario s = parse_scenario(canonicalize(doc));
    MemoryTrace a;
    MemoryTrace b;
    run(s, &a);
    run(s, &b);
    CHECK(a.records().size() > 100);
    CHECK(a.text() == b.text());

    Scenario other = s;
    other.seed = 2;
    MemoryTrace c;
    run(other, &c);
    CHECK(a.text() != c.text());
}

TEST_CASE("throttling doubles wall time at duty cycle 0.5") {
    Json doc = minimal_doc();
    doc["duration_seconds"] = 3000000;
    doc["projects"][0]["delay_bound_seconds"] = 3000000;
    doc["projects"][0]["total_jobs"] = 100;
    doc["projects"][0]["backlog"] = 100;
    auto makespan = [&](double duty) {
        doc["hosts"][0]["throttle_duty_cycle"] = duty;
        MemoryTrace trace;
        run(parse_scenario(canonicalize(doc)), &trace);
        const auto done = events(trace, "instance_complete");
        REQUIRE(done.size() == 100);
        return static_cast<double>(done.back()->time());
    };
    const double ratio = makespan(0.5) / makespan(1.0);
    CHECK(ratio == doctest::Approx(2.0).epsilon(0.05));
}

TEST_CASE("no host holds two instances of one job") {
    Json doc = minimal_doc();
    doc["duration_seconds"] = 10 * 86400;
    doc["hosts"][0]["count"] = 6;
    doc["hosts"][0]["cpus"] = 4;
    doc["hosts"][0]["faulty_fraction"] = 0.5;
    doc["hosts"][0]["faulty_prob"] = 0.5;
    doc["projects"][0]["min_quorum"] = 2;
    doc["projects"][0]["init_ninstances"] = 3;
    doc["projects"][0]["total_jobs"] = 0;
    doc["projects"][0]["backlog"] = 50;
    MemoryTrace trace;
    const RunResult r = run(parse_scenario(canonicalize(doc)), &trace);
    std::set<std::pair<std::string, std::string>> seen;
    int dispatched = 0;
    for (const auto* d : events(trace, "dispatch")) {
        ++dispatched;
        CHECK(seen.emplace(std::string(d->get("job")), std::string(d->get("host"))).second);
    }
    CHECK(dispatched > 100);
    CHECK(r.metrics.get("jobs_succeeded") + r.metrics.get("jobs_failed") <= r.metrics.get("jobs_submitted"));
    CHECK(r.metrics.get("project.p.compute_share") <= 1.0 + 1e-9);
}

TEST_CASE("departed host instances time out") {
    Json doc = minimal_doc();
    doc["duration_seconds"] = 5 * 86400;
    doc["hosts"][0]["cpus"] = 2;
    doc["hosts"][0]["departure_rate"] = 1.0 / 3600;
    doc["projects"][0]["est_flop_count"] = 3.6e13;
    doc["projects"][0]["total_jobs"] = 2;
    doc["projects"][0]["backlog"] = 2;
    doc["seed"] = 4;
    MemoryTrace trace;
    run(parse_scenario(canonicalize(doc)), &trace);
    REQUIRE(events(trace, "host_departed").size() == 1);
    const SimMs departed = events(trace, "host_departed")[0]->time();
    std::set<std::string> in_flight;
    for (const auto* d : events(trace, "dispatch")) {
        if (d->time() <= departed) in_flight.insert(std::string(d->get("instance")));
    }
    CHECK(in_flight.size() == 2);
    std::set<std::string> timed_out;
    for (const auto* t : events(trace, "instance_timeout")) timed_out.insert(std::string(t->get("instance")));
    CHECK(timed_out == in_flight);
}

TEST_CASE("sampled outcomes") {
    std::uint64_t counter = 0;
    Rng rng(11);
    const Reliability honest;
    CHECK(sample_outcome(honest, 0.0, JobId(5), rng, counter).digest == correct_digest(JobId(5)));
    CHECK(correct_digest(JobId(5)) != correct_digest(JobId(6)));

    const Reliability malicious{Reliability::Kind::malicious, 1.0};
    for (int i = 0; i < 100; ++i) {
        CHECK(sample_outcome(malicious, 0.0, JobId(5), rng, counter).kind == Outcome::Kind::wrong);
    }
    const auto c1 = sample_outcome(malicious, 0.0, JobId(5), rng, counter, true);
    const auto c2 = sample_outcome(malicious, 0.0, JobId(5), rng, counter, true);
    CHECK(c1.digest == c2.digest);

    const Reliability faulty{Reliability::Kind::faulty, 0.1};
    const int n = 10000;
    int wrong = 0;
    std::set<double> wrong_values;
    for (int i = 0; i < n; ++i) {
        const auto o = sample_outcome(faulty, 0.0, JobId(9), rng, counter);
        if (o.kind == Outcome::Kind::wrong) {
            ++wrong;
            wrong_values.insert(o.digest.values.at(0));
        }
    }
    const double sigma = std::sqrt(0.1 * 0.9 / n);
    CHECK(std::abs(static_cast<double>(wrong) / n - 0.1) <= 3 * sigma);
    CHECK(wrong_values.size() == static_cast<std::size_t>(wrong));
}

TEST_CASE("availability model") {
    Rng rng(21);
    AvailabilityModel stay{3600, 3600, 0.0};
    CHECK_FALSE(stay.sample_departure(rng).has_value());
    CHECK(stay.long_run_availability() == doctest::Approx(0.5));

    double on = 0;
    double total = 0;
    for (int i = 0; i < 20000; ++i) {
        const double a = static_cast<double>(stay.sample_on(rng));
        const double b = static_cast<double>(stay.sample_off(rng));
        on += a;
        total += a + b;
    }
    CHECK(std::abs(on / total - 0.5) <= 0.02);

    AvailabilityModel always;
    CHECK(always.always_on());
    CHECK(always.long_run_availability() == 1.0);

    AvailabilityAverage avg(86400.0, 1.0);
    for (int i = 0; i < 100; ++i) {
        avg.observe(3600, true);
        avg.observe(3600, false);
    }
    CHECK(avg.value() == doctest::Approx(0.5).epsilon(0.05));
}

TEST_CASE("metrics text round trip") {
    Metrics m;
    m.set("a.count", 12);
    m.set("b.rate", 0.125);
    const Metrics back = parse_metrics(m.text());
    CHECK(back.values == m.values);
    CHECK(m.text() == "a.count 12\nb.rate 0.125000\n");
    CHECK(std::isnan(m.get("missing")));
    CHECK_THROWS_AS(parse_metrics("novalue\n"), ValidationError);
}

TEST_CASE("event queue orders by time then insertion") {
    EventQueue q;
    q.push(Event{.time = 5, .kind = EventKind::rpc, .target = 1});
    q.push(Event{.time = 1, .kind = EventKind::rpc, .target = 2});
    q.push(Event{.time = 5, .kind = EventKind::rpc, .target = 3});
    CHECK(q.pop().target == 2);
    CHECK(q.pop().target == 1);
    CHECK(q.pop().target == 3);
    CHECK(q.empty());
}
