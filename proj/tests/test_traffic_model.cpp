#include <doctest.h>

#include <algorithm>
#include <numeric>

#include "slicing/error.hpp"
#include "slicing/traffic_model.hpp"
#include "support/fixtures.hpp"

using namespace slicing;
using fixtures::reference_model;

namespace {

const Transition* arrival_of(const std::vector<Transition>& ts, int cls) {
    for (const auto& t : ts)
        if (t.kind != TransitionKind::departure && t.dimension == cls) return &t;
    return nullptr;
}

} // namespace

TEST_CASE("occupied blocks") {
    const auto m = reference_model(Policy::nc3);
    CHECK(occupied({10, 5, 3}, m) == 23);
    CHECK(occupied({10, 5, 3}, m) * 360 == 8280);
    CHECK(occupied({0, 0, 0}, m) == 0);
    CHECK(occupied({1, 30, 1}, m) == 62);
    CHECK(feasible({1, 30, 1}, m));
    CHECK_FALSE(feasible({2, 30, 1}, m));
    CHECK_FALSE(feasible({0, 32, 0}, m));
}

TEST_CASE("admissibility") {
    const auto m = reference_model(Policy::nc2);
    CHECK_FALSE(admissible({0, 31}, 1, m));
    CHECK(admissible({0, 0}, 0, m));
    CHECK(admissible({0, 0}, 1, m));
    CHECK_FALSE(admissible({62, 0}, 0, m));
}

TEST_CASE("NC1 arcs") {
    const auto m = reference_model(Policy::nc1);
    auto ts = transitions_nc1({61, 0}, m);
    REQUIRE(arrival_of(ts, 0));
    CHECK(arrival_of(ts, 0)->kind == TransitionKind::arrival_accepted);
    CHECK(arrival_of(ts, 0)->target == SystemState{62, 0});
    CHECK(arrival_of(ts, 1)->kind == TransitionKind::arrival_rejected);
    CHECK(arrival_of(ts, 1)->target == SystemState{61, 0});

    ts = transitions_nc1({0, 0}, m);
    CHECK(ts.size() == 2);
    CHECK(std::none_of(ts.begin(), ts.end(), [](const Transition& t) { return t.kind == TransitionKind::departure; }));
}

TEST_CASE("NC2 preemption") {
    const auto m = reference_model(Policy::nc2);
    auto o = resolve_arrival(m, {0, 31}, 0);
    CHECK(o.kind == TransitionKind::preempt_discard);
    CHECK(o.target == SystemState{1, 30});
    CHECK(o.discarded == 1);

    CHECK(resolve_arrival(m, {62, 0}, 0).kind == TransitionKind::arrival_rejected);

    // 60 + 2 = 62 blocks in use, so the single video must go
    o = resolve_arrival(m, {60, 1}, 0);
    CHECK(o.kind == TransitionKind::preempt_discard);
    CHECK(o.target == SystemState{61, 0});

    // video arrivals never preempt
    CHECK(resolve_arrival(m, {0, 31}, 1).kind == TransitionKind::arrival_rejected);
}

TEST_CASE("NC2 discards several videos when the control demand is large") {
    TrafficClass g{"g", 1.0, 1.0, 5, 2, Priority::high, false, 0, {}};
    TrafficClass v{"v", 1.0, 1.0, 2, 5, Priority::low, false, 0, {}};
    const auto m = make_model(Policy::nc2, {g, v}, 10);
    const auto o = resolve_arrival(m, {0, 5}, 0);
    CHECK(o.target == SystemState{1, 2});
    CHECK(o.discarded == 3);
}

TEST_CASE("NC3 downgrade cascade") {
    const auto m = reference_model(Policy::nc3);
    auto o = resolve_arrival(m, {0, 31, 0}, 0);
    CHECK(o.kind == TransitionKind::downgrade_cascade);
    CHECK(o.target == SystemState{1, 30, 1});
    CHECK(o.downgraded == 1);
    CHECK(o.discarded == 0);
    CHECK(occupied(o.target, m) == 62);

    CHECK(resolve_arrival(m, {0, 31, 0}, 1).kind == TransitionKind::arrival_rejected);
    CHECK(resolve_arrival(m, {62, 0, 0}, 0).kind == TransitionKind::arrival_rejected);

    // a video arriving to a nearly full pool is admitted at the reduced rate
    o = resolve_arrival(m, {1, 30, 0}, 1);
    CHECK(o.kind == TransitionKind::arrival_downgraded);
    CHECK(o.target == SystemState{1, 30, 1});
    CHECK(o.downgraded == 1);

    // nothing left to downgrade: discard a downgraded session
    o = resolve_arrival(m, {30, 0, 32}, 0);
    CHECK(o.kind == TransitionKind::preempt_discard);
    CHECK(o.target == SystemState{31, 0, 31});
    CHECK(o.discarded == 1);
    CHECK(o.downgraded == 0);
}

TEST_CASE("NC3 departures use three dimensions") {
    const auto m = reference_model(Policy::nc3);
    const auto ts = transitions_nc3({2, 3, 4}, m);
    std::vector<double> rates;
    for (const auto& t : ts)
        if (t.kind == TransitionKind::departure) rates.push_back(t.rate);
    REQUIRE(rates.size() == 3);
    CHECK(rates[0] == doctest::Approx(2.0 / 60.0));
    CHECK(rates[1] == doctest::Approx(3.0 / 600.0));
    CHECK(rates[2] == doctest::Approx(4.0 / 600.0));
}

TEST_CASE("model validation") {
    TrafficClass a{"a", 1.0, 1.0, 1, 4, Priority::none, false, 0, {}};
    TrafficClass b{"b", 1.0, 1.0, 2, 2, Priority::none, false, 0, {}};
    CHECK_NOTHROW(make_model(Policy::nc1, {a, b}, 4));
    CHECK_THROWS_AS(make_model(Policy::nc2, {a, b}, 4), InvalidArgument);
    CHECK_THROWS_AS(make_model(Policy::nc1, {a, b}, 0), InvalidArgument);

    TrafficClass hi = a, lo = b;
    hi.priority = Priority::high;
    lo.priority = Priority::low;
    CHECK_NOTHROW(make_model(Policy::nc2, {hi, lo}, 4));
    CHECK_THROWS_AS(make_model(Policy::nc3, {hi, lo}, 4), InvalidArgument);

    lo.adaptive = true;
    lo.downgraded_demand_blocks = 2;
    CHECK_THROWS_AS(make_model(Policy::nc3, {hi, lo}, 4), InvalidArgument);
    lo.downgraded_demand_blocks = 1;
    const auto m = make_model(Policy::nc3, {hi, lo}, 4);
    CHECK(m.dimension_count() == 3);
    CHECK(m.dims[2].demand_blocks == 1);
    CHECK(m.dims[2].service_rate == 1.0);
}

TEST_CASE("every target is feasible and arcs match the brute-force oracle") {
    for (Policy policy : {Policy::nc1, Policy::nc2, Policy::nc3}) {
        const auto m = reference_model(policy);
        for (const auto& s : fixtures::enumerate_states(m)) {
            for (const auto& t : transitions(s, m)) {
                REQUIRE(feasible(t.target, m));
                REQUIRE(t.rate > 0.0);
            }
            if (policy == Policy::nc1) continue;
            const auto o = resolve_arrival(m, s, 0);
            const auto oracle = fixtures::brute_force_priority_admission(m, s);
            REQUIRE(o.admitted() == oracle.has_value());
            if (!oracle) continue;
            REQUIRE(o.discarded == oracle->discards);
            if (oracle->discards == 0) REQUIRE(o.downgraded == oracle->downgrades);
            // a discard implies no full-rate session was left to downgrade
            if (o.discarded > 0 && policy == Policy::nc3) REQUIRE(o.target[LossModel::video_class] == 0);
        }
    }
}

TEST_CASE("priority only changes arcs where control traffic would be blocked") {
    const auto nc1 = reference_model(Policy::nc1);
    const auto nc2 = reference_model(Policy::nc2);
    int compared = 0;
    for (const auto& s : fixtures::enumerate_states(nc1)) {
        if (!admissible(s, 0, nc1)) continue;
        const auto a = transitions_nc1(s, nc1);
        const auto b = transitions_nc2(s, nc2);
        REQUIRE(a.size() == b.size());
        for (std::size_t i = 0; i < a.size(); ++i) {
            CHECK(a[i].target == b[i].target);
            CHECK(a[i].rate == b[i].rate);
            CHECK(a[i].kind == b[i].kind);
        }
        ++compared;
    }
    CHECK(compared == 992);
}

TEST_CASE("total outgoing rate") {
    for (Policy policy : {Policy::nc1, Policy::nc2, Policy::nc3}) {
        const auto m = reference_model(policy, 1.0 / 10.0, 0.5);
        for (const auto& s : fixtures::enumerate_states(m)) {
            const auto ts = transitions(s, m);
            const double total = std::accumulate(ts.begin(), ts.end(), 0.0,
                                                 [](double acc, const Transition& t) { return acc + t.rate; });
            double expected = 0.5 + 0.1;
            for (std::size_t d = 0; d < s.size(); ++d) expected += s[d] * m.dims[d].service_rate;
            REQUIRE(total == doctest::Approx(expected).epsilon(1e-12));
        }
    }

    // a silent class contributes no arc at all
    const auto m = reference_model(Policy::nc2, 0.1, 0.0);
    CHECK(transitions({0, 0}, m).size() == 1);
}
