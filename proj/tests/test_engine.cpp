#include <doctest.h>

#include <string>
#include <vector>

#include "helpers.hpp"
#include "survsim/engine.hpp"
#include "survsim/maintenance.hpp"

using namespace survsim;
using testutil::make_node;

namespace {

template <typename T>
std::vector<std::pair<double, T>> records_of(const RunResult& rr) {
    std::vector<std::pair<double, T>> out;
    for (const TraceRecord& r : rr.trace) {
        if (const T* p = std::get_if<T>(&r.payload)) out.push_back({r.t, *p});
    }
    return out;
}

NodePlacement place(NodeId id, double x, double y, double battery = 1.0) {
    NodePlacement p;
    p.id = id;
    p.position = {x, y};
    p.battery = battery;
    return p;
}

/// Two zones, gateway pairs (1,3) and (2,4), heads 0 (left) and 5 (right).
Scenario two_zone_scenario() {
    Scenario sc;
    sc.grid = {200.0, 100.0, 1, 2};
    sc.nodes.count = 6;
    sc.nodes.radio_range = 60.0;
    sc.nodes.battery_drain_per_s = 0.0;
    sc.nodes.placements = {place(0, 50, 50),       place(1, 90, 30, 0.5),
                           place(2, 90, 70, 0.5),  place(3, 110, 30, 0.5),
                           place(4, 110, 70, 0.5), place(5, 150, 50)};
    sc.duration = 5.0;
    return sc;
}

Scenario line_scenario() {
    Scenario sc;
    sc.grid = {100.0, 100.0, 1, 1};
    sc.nodes.count = 3;
    sc.nodes.radio_range = 45.0;
    sc.nodes.battery_drain_per_s = 0.0;
    sc.nodes.placements = {place(0, 10, 50), place(1, 50, 50), place(2, 90, 50)};
    sc.duration = 4.0;
    return sc;
}

SimState state_of(const Scenario& sc) {
    SimState st;
    st.link_capacity = sc.link_capacity;
    std::vector<NodeState> raw;
    for (const NodePlacement& p : sc.nodes.placements) {
        auto n = make_node(p.id, p.position.x, p.position.y, p.speed, p.battery,
                           p.computation, sc.nodes.radio_range);
        raw.push_back(n);
    }
    st.nodes = NodeTable(std::move(raw));
    st.links = links_of(st.nodes, sc.nodes.radio_range, sc.link_capacity);
    return st;
}

}  // namespace

TEST_CASE("apply_fault semantics") {
    SimState st = state_of(line_scenario());

    SUBCASE("crash kills the node and its links") {
        apply_fault(ScenarioEvent{1.0, ev::NodeCrash{1}}, st);
        CHECK_FALSE(st.nodes.at(1).alive);
        CHECK_FALSE(st.links.has(0, 1));
        CHECK_FALSE(st.links.has(1, 2));
    }

    SUBCASE("link cut severs the pair permanently") {
        apply_fault(ScenarioEvent{1.0, ev::LinkCut{1, 0}}, st);
        CHECK_FALSE(st.links.has(0, 1));
        CHECK(st.cut_links.count({0, 1}) == 1);
        CHECK(st.links.has(1, 2));
    }

    SUBCASE("seizure drains incident capacity, floor zero") {
        apply_fault(ScenarioEvent{1.0, ev::IntruderSeizure{1, 4.0}}, st);
        CHECK(st.links.find(0, 1)->capacity == 6.0);
        CHECK(st.links.find(1, 2)->capacity == 6.0);
        CHECK(st.seized.at(1) == 4.0);

        apply_fault(ScenarioEvent{2.0, ev::IntruderSeizure{1, 100.0}}, st);
        CHECK(st.links.find(0, 1)->capacity == 0.0);

        apply_fault(ScenarioEvent{3.0, ev::IntruderSeizure{2, 0.0}}, st);
        CHECK(st.links.find(1, 2)->capacity == 0.0);  // unchanged by zero seize
    }

    SUBCASE("unknown ids and non-fault events are rejected") {
        CHECK_THROWS_AS(apply_fault(ScenarioEvent{1.0, ev::NodeCrash{99}}, st),
                        std::invalid_argument);
        CHECK_THROWS_AS(apply_fault(ScenarioEvent{1.0, ev::MaintenanceTick{}}, st),
                        std::invalid_argument);
    }
}

TEST_CASE("empty world produces only start and end records") {
    Scenario sc;
    sc.grid = {100.0, 100.0, 1, 1};
    sc.nodes.count = 0;
    sc.duration = 0.0;
    const RunResult rr = run(sc);
    REQUIRE(rr.trace.size() == 2);
    CHECK(std::holds_alternative<rec::RunStart>(rr.trace.front().payload));
    CHECK(std::holds_alternative<rec::RunEnd>(rr.trace.back().payload));
}

TEST_CASE("startup records cover nodes, elections and gateways") {
    const RunResult rr = run(two_zone_scenario());

    const auto inits = records_of<rec::NodeInit>(rr);
    REQUIRE(inits.size() == 6);
    for (std::size_t i = 0; i < 6; ++i) {
        CHECK(inits[i].second.node == i);  // ascending id order
    }

    const auto elects = records_of<rec::Elect>(rr);
    REQUIRE(elects.size() == 2);
    CHECK(elects[0].second.zone == ZoneId{0, 0});
    CHECK(elects[0].second.ch == 0);
    CHECK(elects[1].second.zone == ZoneId{0, 1});
    CHECK(elects[1].second.ch == 5);

    const auto gateways = records_of<rec::GatewayInit>(rr);
    REQUIRE(gateways.size() == 2);
    CHECK(gateways[0].second.gateways == std::vector<NodeId>{1, 2});
    CHECK(gateways[1].second.gateways == std::vector<NodeId>{3, 4});

    // One synthesized tick per second.
    const auto ticks = records_of<rec::Tick>(rr);
    REQUIRE(ticks.size() == 5);
    CHECK(ticks.front().first == 1.0);
    CHECK(ticks.back().first == 5.0);
}

TEST_CASE("flows are admitted, carried and released") {
    Scenario sc = two_zone_scenario();
    sc.events.push_back(
        {1.0, ev::FlowArrival{FlowRequest{1, 0, 5, 4.0, 1.0, 2.0}}});
    const RunResult rr = run(sc, true);

    const auto admits = records_of<rec::FlowAdmit>(rr);
    REQUIRE(admits.size() == 1);
    CHECK(admits[0].first == 1.0);
    CHECK(admits[0].second.path == std::vector<NodeId>{0, 1, 3, 5});

    const auto releases = records_of<rec::FlowRelease>(rr);
    REQUIRE(releases.size() == 1);
    CHECK(releases[0].first == 3.0);

    const auto ticks = records_of<rec::Tick>(rr);
    CHECK(ticks[0].second.active_flows == 1);  // t=1
    CHECK(ticks[2].second.active_flows == 0);  // t=3, after departure

    CHECK(rr.metrics.flows_admitted == 1);
    CHECK(rr.metrics.flows_released == 1);
    CHECK(rr.metrics.flows_active_at_end == 0);
    CHECK(rr.metrics.reservation_survival_rate == 1.0);
}

TEST_CASE("a crash on the path triggers an immediate repair") {
    Scenario sc = two_zone_scenario();
    sc.events.push_back(
        {1.0, ev::FlowArrival{FlowRequest{1, 0, 5, 4.0, 1.0, std::nullopt}}});
    sc.events.push_back({2.5, ev::NodeCrash{3}});
    const RunResult rr = run(sc, true);

    const auto repairs = records_of<rec::FlowRepair>(rr);
    REQUIRE(repairs.size() == 1);
    CHECK(repairs[0].first == 2.5);
    CHECK(repairs[0].second.path == std::vector<NodeId>{0, 1, 4, 5});
    CHECK(repairs[0].second.latency == 0.0);

    CHECK(rr.metrics.flows_repaired == 1);
    CHECK(rr.metrics.repair_events == 1);
    CHECK(rr.metrics.flows_active_at_end == 1);
    CHECK(rr.metrics.reservation_survival_rate == 1.0);
}

TEST_CASE("a flow with no detour fails and frees its holdings") {
    Scenario sc = line_scenario();
    sc.events.push_back(
        {1.0, ev::FlowArrival{FlowRequest{1, 0, 2, 4.0, 1.0, std::nullopt}}});
    sc.events.push_back({2.0, ev::NodeCrash{1}});
    const RunResult rr = run(sc, true);

    const auto fails = records_of<rec::FlowFail>(rr);
    REQUIRE(fails.size() == 1);
    CHECK(fails[0].first == 2.0);
    CHECK(fails[0].second.reason == RouteFailure::Disconnected);
    CHECK(rr.metrics.reservation_survival_rate == 0.0);

    // After the crash both links are gone entirely.
    const auto ticks = records_of<rec::Tick>(rr);
    CHECK(ticks.back().second.links == 0);
    CHECK(ticks.back().second.residual_total == 0.0);
}

TEST_CASE("head battery drain shows up at re-election time") {
    Scenario base;
    base.grid = {100.0, 100.0, 1, 1};
    base.nodes.count = 2;
    base.nodes.radio_range = 50.0;
    base.nodes.placements = {place(0, 40, 50, 1.0), place(1, 60, 50, 0.3)};
    base.election_period = 10.0;
    base.duration = 10.0;

    // Heads burn battery faster; after one period the member overtakes.
    Scenario drained = base;
    drained.nodes.battery_drain_per_s = 0.001;
    drained.nodes.ch_drain_multiplier = 10.0;
    const auto changes = records_of<rec::ChChange>(run(drained, true));
    REQUIRE(changes.size() == 1);
    CHECK(changes[0].first == 10.0);
    CHECK(changes[0].second.reason == ChChangeReason::ElectionPeriodEnded);
    CHECK(changes[0].second.old_ch == 0);
    CHECK(changes[0].second.new_ch == 1);

    // With even drain the incumbent's battery lead holds.
    Scenario even = base;
    even.nodes.battery_drain_per_s = 0.001;
    even.nodes.ch_drain_multiplier = 1.0;
    CHECK(records_of<rec::ChChange>(run(even, true)).empty());
}

TEST_CASE("identical scenarios give byte-identical traces") {
    Scenario sc;
    sc.seed = 2024;
    sc.grid = {300.0, 300.0, 2, 2};
    sc.nodes.count = 30;
    sc.nodes.radio_range = 120.0;
    sc.nodes.speed_min = 0.5;
    sc.nodes.speed_max = 2.0;
    sc.duration = 10.0;
    sc.events.push_back(
        {2.0, ev::FlowArrival{FlowRequest{1, 3, 17, 1.0, 2.0, 5.0}}});
    sc.events.push_back(
        {3.0, ev::FlowArrival{FlowRequest{2, 8, 25, 2.0, 3.0, std::nullopt}}});
    sc.events.push_back({4.0, ev::NodeCrash{17}});
    sc.events.push_back({5.0, ev::IntruderSeizure{8, 5.0}});
    sc.events.push_back({6.0, ev::LinkCut{3, 4}});

    const RunResult a = run(sc);
    const RunResult b = run(sc);
    CHECK(serialize_trace(a.trace) == serialize_trace(b.trace));
    CHECK(a.metrics == b.metrics);

    // A different seed moves the nodes elsewhere.
    Scenario other = sc;
    other.seed = 2025;
    CHECK(serialize_trace(run(other).trace) != serialize_trace(a.trace));
}

TEST_CASE("metrics refold equals the in-run report") {
    Scenario sc = two_zone_scenario();
    sc.events.push_back(
        {1.0, ev::FlowArrival{FlowRequest{1, 0, 5, 4.0, 1.0, 2.0}}});
    sc.events.push_back({2.5, ev::NodeCrash{3}});
    const RunResult rr = run(sc);
    const auto parsed = parse_trace(serialize_trace(rr.trace));
    CHECK(collect_metrics(parsed) == rr.metrics);
}

TEST_CASE("static fault-free worlds stay quiescent after startup") {
    Scenario sc = two_zone_scenario();
    sc.election_period = 100.0;  // longer than the run
    sc.duration = 20.0;
    const RunResult rr = run(sc, true);
    CHECK(records_of<rec::ChChange>(rr).empty());
    CHECK(records_of<rec::Reregister>(rr).empty());
    CHECK(records_of<rec::GatewayChange>(rr).empty());
}

TEST_CASE("malformed scenarios are rejected before simulation") {
    Scenario sc = line_scenario();

    SUBCASE("event after duration") {
        sc.events.push_back({99.0, ev::NodeCrash{1}});
        CHECK_THROWS_AS(run(sc), std::invalid_argument);
    }

    SUBCASE("invalid weights") {
        sc.weights.a1 = 7.0;
        CHECK_THROWS_AS(run(sc), std::invalid_argument);
    }

    SUBCASE("placements not covering count") {
        sc.nodes.placements.pop_back();
        CHECK_THROWS_AS(run(sc), std::invalid_argument);
    }
}

TEST_CASE("random busy scenario passes invariant sweeps") {
    Scenario sc;
    sc.seed = 77;
    sc.grid = {400.0, 400.0, 3, 3};
    sc.nodes.count = 40;
    sc.nodes.radio_range = 140.0;
    sc.nodes.speed_min = 0.2;
    sc.nodes.speed_max = 1.5;
    sc.election_period = 7.0;
    sc.duration = 25.0;
    for (int i = 0; i < 10; ++i) {
        sc.events.push_back({1.0 + i * 2.0,
                             ev::FlowArrival{FlowRequest{static_cast<FlowId>(i + 1),
                                                         static_cast<NodeId>(i),
                                                         static_cast<NodeId>(39 - i),
                                                         0.5 + 0.25 * i, 0.0, 8.0}}});
    }
    sc.events.push_back({6.0, ev::NodeCrash{5}});
    sc.events.push_back({9.0, ev::IntruderSeizure{12, 6.0}});
    sc.events.push_back({12.0, ev::LinkCut{20, 21}});
    sc.events.push_back({15.0, ev::NodeCrash{30}});
    CHECK_NOTHROW(run(sc, true));
}
