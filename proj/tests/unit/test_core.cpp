#include <doctest.h>

#include <cmath>
#include <set>

#include "volley/core/allocation.hpp"
#include "volley/core/classify.hpp"
#include "volley/core/error.hpp"
#include "volley/core/model.hpp"
#include "volley/core/random.hpp"
#include "volley/core/trace.hpp"

using namespace volley;

namespace {

Host make_host(std::string os, std::string vendor, std::string model) {
    Host h;
    h.id = HostId(1);
    h.resources = {{ResourceKind::cpu, 4, 4e9, 1.0}};
    h.os_tag = std::move(os);
    h.cpu_vendor_tag = std::move(vendor);
    h.cpu_model_tag = std::move(model);
    return h;
}

}  // namespace

TEST_CASE("linear bounded allocation") {
    CHECK(linear_bounded_update({0.0, 0.5, 1000.0}, 100.0, 1.0, 0.0).balance == doctest::Approx(50.0));
    CHECK(linear_bounded_update({0.0, 1.0, 1000.0}, 1e9, 1.0, 0.0).balance == doctest::Approx(1000.0));
    CHECK(linear_bounded_update({50.0, 0.0, 1000.0}, 0.0, 1.0, 80.0).balance == doctest::Approx(-30.0));
    CHECK(linear_bounded_update({0.0, 0.0, 1000.0}, 0.0, 1.0, 1e9).balance == doctest::Approx(-1000.0));
    CHECK(linear_bounded_update({10.0, 1.0, 1000.0}, -5.0, 1.0, -5.0).balance == doctest::Approx(10.0));
}

TEST_CASE("homogeneous redundancy classes") {
    const Host a = make_host("linux", "intel", "i7");
    const Host b = make_host("linux", "intel", "i9");
    const Host c = make_host("windows", "amd", "ryzen");
    CHECK(hr_class(a, HrLevel::coarse) == hr_class(b, HrLevel::coarse));
    CHECK(hr_class(a, HrLevel::fine) != hr_class(b, HrLevel::fine));
    CHECK(hr_class(a, HrLevel::none) == hr_class(c, HrLevel::none));
    CHECK(hr_class(a, HrLevel::coarse) != hr_class(c, HrLevel::coarse));
    CHECK(parse_hr_level("fine") == HrLevel::fine);
    CHECK_FALSE(parse_hr_level("bogus").has_value());
}

TEST_CASE("peak flops of a version on a host") {
    Host h = make_host("linux", "intel", "i7");
    h.resources = {{ResourceKind::cpu, 4, 5e9, 1.0}};
    AppVersion cpu;
    cpu.resource_usage = {{ResourceKind::cpu, 1.0}};
    CHECK(peak_flops_of(cpu, h) == doctest::Approx(5e9));

    h.resources = {{ResourceKind::cpu, 4, 4e9, 1.0}, {ResourceKind::nvidia_gpu, 1, 1e11, 1.0}};
    AppVersion gpu;
    gpu.resource_usage = {{ResourceKind::cpu, 0.5}, {ResourceKind::nvidia_gpu, 1.0}};
    CHECK(peak_flops_of(gpu, h) == doctest::Approx(1.02e11));

    AppVersion none;
    CHECK_THROWS_AS(peak_flops_of(none, h), DispatchError);
    CHECK_THROWS_AS(validate(none), ValidationError);
}

TEST_CASE("compatibility") {
    Host h = make_host("linux", "intel", "i7");
    AppVersion v;
    v.resource_usage = {{ResourceKind::cpu, 1.0}};
    CHECK(compatible(v, h));
    v.compatibility.os_allow = {"windows"};
    CHECK_FALSE(compatible(v, h));
    AppVersion g;
    g.resource_usage = {{ResourceKind::nvidia_gpu, 1.0}};
    CHECK_FALSE(compatible(g, h));
    h.resources.push_back({ResourceKind::nvidia_gpu, 1, 1e11, 1.0});
    h.driver_version = 400;
    g.compatibility.min_driver_version = 450;
    CHECK_FALSE(compatible(g, h));
    h.driver_version = 460;
    CHECK(compatible(g, h));
    CHECK(g.primary_resource() == ResourceKind::nvidia_gpu);
}

TEST_CASE("job spec validation") {
    JobSpec s;
    s.min_quorum = 2;
    s.init_ninstances = 1;
    CHECK_THROWS_AS(validate(s), ValidationError);
    s.init_ninstances = 2;
    CHECK_NOTHROW(validate(s));
    s.delay_bound_seconds = 0;
    CHECK_THROWS_AS(validate(s), ValidationError);
}

TEST_CASE("host validation") {
    Host h = make_host("linux", "intel", "i7");
    CHECK_NOTHROW(validate(h));
    h.prefs.n_usable_cpus = 5;
    CHECK_THROWS_AS(validate(h), ValidationError);
    h.prefs.n_usable_cpus = 2;
    h.prefs.throttle_duty_cycle = 0.0;
    CHECK_THROWS_AS(validate(h), ValidationError);
}

TEST_CASE("rng streams are reproducible and independent") {
    Rng a = Rng::stream(42, 1, 0);
    Rng b = Rng::stream(42, 1, 0);
    Rng c = Rng::stream(42, 1, 1);
    bool differs = false;
    for (int i = 0; i < 100; ++i) {
        const auto x = a.next();
        CHECK(x == b.next());
        differs = differs || x != c.next();
    }
    CHECK(differs);

    Rng r(7);
    double sum = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        const double u = r.uniform();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
        sum += u;
    }
    CHECK(sum / n == doctest::Approx(0.5).epsilon(0.01));

    double esum = 0.0;
    for (int i = 0; i < n; ++i) esum += r.exponential(10.0);
    CHECK(esum / n == doctest::Approx(10.0).epsilon(0.02));
}

TEST_CASE("trace records sort keys and format decimals") {
    TraceRecord rec(1500, "dispatch");
    rec.add("zeta", 1).add("alpha", 0.5).add("inst", InstanceId{JobId(3), 2});
    CHECK(rec.str() == "t=1500 ev=dispatch alpha=0.500000 inst=3.2 zeta=1");
    CHECK(rec.get("zeta") == "1");
    CHECK(rec.get("missing").empty());
    CHECK(format_decimal(-0.0) == "0.000000");

    MemoryTrace mem;
    mem.emit(rec);
    CHECK(mem.text() == rec.str() + "\n");
}

TEST_CASE("fnv1a is stable") {
    CHECK(fnv1a("") == 0xcbf29ce484222325ULL);
    CHECK(fnv1a("a") == 0xaf63dc4c8601ec8cULL);
}
