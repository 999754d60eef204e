#include <doctest.h>

#include <algorithm>
#include <map>

#include "support/union_find.hpp"
#include "volley/core/error.hpp"
#include "volley/validation/validation.hpp"

using namespace volley;
using namespace volley::validation;

namespace {

InstanceId inst(std::uint32_t seq) {
    return InstanceId{JobId(1), seq};
}

OutputDigest d(double x) {
    return OutputDigest{{x}};
}

}  // namespace

TEST_CASE("equivalence") {
    CHECK(equivalent(d(1.0), d(1.0), Comparator::fuzzy(1e-6)));
    CHECK(equivalent(d(1.0), d(1.0000005), Comparator::fuzzy(1e-6)));
    CHECK_FALSE(equivalent(d(1.0), d(1.0000005), Comparator::fuzzy(1e-8)));
    CHECK_FALSE(equivalent(d(1.0), d(1.1), Comparator::bitwise()));
    CHECK(equivalent(d(1.0), d(1.0), Comparator::bitwise()));
    CHECK_FALSE(equivalent(OutputDigest{{1.0, 2.0}}, d(1.0), Comparator::bitwise()));
    CHECK_THROWS_AS(Comparator::fuzzy(0.0), ValidationError);
}

TEST_CASE("quorum check examples") {
    const OutputDigest x = d(1.0);
    const OutputDigest y = d(2.0);
    const auto bw = Comparator::bitwise();

    std::vector<QuorumEntry> xx{{inst(1), &x}, {inst(0), &x}};
    auto r = check_quorum(xx, bw, 2);
    REQUIRE(r.has_value());
    CHECK(r->canonical == inst(0));
    CHECK(r->agreeing == std::vector<InstanceId>{inst(0), inst(1)});

    std::vector<QuorumEntry> xyx{{inst(0), &x}, {inst(1), &y}, {inst(2), &x}};
    r = check_quorum(xyx, bw, 2);
    REQUIRE(r.has_value());
    CHECK(r->canonical == inst(0));
    CHECK(r->agreeing == std::vector<InstanceId>{inst(0), inst(2)});

    std::vector<QuorumEntry> xy{{inst(0), &x}, {inst(1), &y}};
    CHECK_FALSE(check_quorum(xy, bw, 2).has_value());

    std::vector<QuorumEntry> single{{inst(0), &x}};
    CHECK_FALSE(check_quorum(single, bw, 2).has_value());
    CHECK(check_quorum(single, bw, 1).has_value());
}

TEST_CASE("quorum grouping matches union-find closure") {
    Rng rng(99);
    const auto cmp = Comparator::fuzzy(0.05);
    for (int trial = 0; trial < 3000; ++trial) {
        const std::size_t n = 1 + rng.below(6);
        std::vector<OutputDigest> digests(n);
        for (auto& dg : digests) dg = d(1.0 + 0.03 * static_cast<double>(rng.below(6)));
        std::vector<QuorumEntry> entries;
        for (std::size_t i = 0; i < n; ++i) entries.push_back({inst(static_cast<std::uint32_t>(i)), &digests[i]});

        std::vector<std::vector<bool>> rel(n, std::vector<bool>(n));
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) rel[i][j] = equivalent(digests[i], digests[j], cmp);
        }
        const auto label = oracle::closure_groups(rel);
        std::map<std::size_t, std::vector<InstanceId>> groups;
        for (std::size_t i = 0; i < n; ++i) groups[label[i]].push_back(inst(static_cast<std::uint32_t>(i)));
        std::optional<std::vector<InstanceId>> majority;
        for (auto& [l, g] : groups) {
            if (2 * g.size() > n) majority = g;
        }

        const int quorum = 1 + static_cast<int>(rng.below(3));
        const auto got = check_quorum(entries, cmp, quorum);
        if (static_cast<int>(n) < quorum || !majority) {
            CHECK_FALSE(got.has_value());
        } else {
            REQUIRE(got.has_value());
            CHECK(got->agreeing == *majority);
            CHECK(got->canonical == majority->front());
        }
    }
}

TEST_CASE("replication statistics") {
    ReplicationStats s;
    const HostId h(1);
    const AppVersionId v(1);
    record_validation(s, h, v, true);
    CHECK(s.consecutive_valid(h, v) == 1);
    for (int i = 0; i < 4; ++i) record_validation(s, h, v, true);
    CHECK(s.consecutive_valid(h, v) == 5);
    record_validation(s, h, v, true);
    CHECK(s.consecutive_valid(h, v) == 6);
    for (int i = 0; i < 5; ++i) record_validation(s, h, v, true);
    record_validation(s, h, v, false);
    CHECK(s.consecutive_valid(h, v) == 0);
    CHECK(s.consecutive_valid(HostId(2), v) == 0);
}

TEST_CASE("adaptive replication decision") {
    ReplicationStats s;
    Rng rng(5);
    const HostId h(1);
    const AppVersionId v(1);
    for (int i = 0; i < 100; ++i) CHECK(should_replicate(s, h, v, rng));
    for (int i = 0; i < 10; ++i) s.record(h, v, true);
    for (int i = 0; i < 100; ++i) CHECK(should_replicate(s, h, v, rng, 10));
    for (int i = 0; i < 90; ++i) s.record(h, v, true);
    REQUIRE(s.consecutive_valid(h, v) == 100);
    const int n = 10000;
    int yes = 0;
    for (int i = 0; i < n; ++i) yes += should_replicate(s, h, v, rng, 10) ? 1 : 0;
    const double sigma = std::sqrt(0.1 * 0.9 / n);
    CHECK(std::abs(static_cast<double>(yes) / n - 0.1) <= 3 * sigma);
}
