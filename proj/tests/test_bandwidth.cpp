#include <doctest.h>

#include <random>

#include "helpers.hpp"
#include "oracles.hpp"
#include "survsim/bandwidth.hpp"
#include "survsim/clustering.hpp"
#include "survsim/routing.hpp"

using namespace survsim;
using testutil::make_node;

namespace {

struct Net {
    GridConfig grid{100.0, 100.0, 1, 1};
    NodeTable nodes;
    LinkSet links;
    ClusterMap map;
    ClusterConnectivityGraph graph;

    explicit Net(std::vector<NodeState> raw, double r = 45.0, double capacity = 10.0) {
        nodes = NodeTable(std::move(raw));
        links = links_of(nodes, r, capacity);
        map = construct_clusters(nodes, links, grid, ElectionWeights{});
        graph = build_zone_graph(nodes, links, map, grid);
    }

    AdmitResult admit_flow(FlowId id, NodeId src, NodeId dst, double demand) {
        return admit(FlowRequest{id, src, dst, demand, 0.0, std::nullopt}, nodes, links,
                     map, graph);
    }
};

Net line3() {
    return Net({make_node(0, 10, 50), make_node(1, 50, 50), make_node(2, 90, 50)});
}

Net diamond() {
    return Net({make_node(0, 10, 50), make_node(1, 50, 30), make_node(2, 50, 70),
                make_node(3, 90, 50)});
}

}  // namespace

TEST_CASE("admit reserves the demand on every hop") {
    Net net = line3();
    const AdmitResult r = net.admit_flow(1, 0, 2, 4.0);
    REQUIRE(r);
    CHECK(r.reservation->state == ReservationState::Active);
    CHECK(r.reservation->path.node_path == std::vector<NodeId>{0, 1, 2});
    CHECK(net.links.find(0, 1)->reserved == 4.0);
    CHECK(net.links.find(1, 2)->reserved == 4.0);
}

TEST_CASE("admit and release cancel exactly") {
    Net net = diamond();
    AdmitResult r = net.admit_flow(1, 0, 3, 2.5);
    REQUIRE(r);
    release(*r.reservation, net.links);
    CHECK(r.reservation->state == ReservationState::Released);
    for (const LinkSet::Link& l : net.links.links()) {
        CHECK(l.reserved == 0.0);
    }
    CHECK_THROWS_AS(release(*r.reservation, net.links), std::domain_error);
}

TEST_CASE("admit rejections") {
    SUBCASE("disconnected endpoints") {
        Net net({make_node(0, 10, 10), make_node(1, 90, 90)});
        const AdmitResult r = net.admit_flow(1, 0, 1, 1.0);
        CHECK_FALSE(r);
        CHECK(r.reject == RejectReason::NoRoute);
        CHECK(r.route_failure == RouteFailure::Disconnected);
    }

    SUBCASE("dead endpoint") {
        Net net = line3();
        net.nodes.at(2).alive = false;
        const AdmitResult r = net.admit_flow(1, 0, 2, 1.0);
        CHECK_FALSE(r);
        CHECK(r.reject == RejectReason::NoRoute);
    }

    SUBCASE("not enough residual") {
        Net net = line3();
        REQUIRE(net.admit_flow(1, 0, 2, 8.0));
        const AdmitResult r = net.admit_flow(2, 0, 2, 4.0);
        CHECK_FALSE(r);
        CHECK(r.reject == RejectReason::InsufficientBandwidth);
        // The failed admission must not leave partial holdings.
        CHECK(net.links.find(0, 1)->reserved == 8.0);
        CHECK(net.links.find(1, 2)->reserved == 8.0);
    }

    SUBCASE("nonpositive demand") {
        Net net = line3();
        CHECK_THROWS_AS(net.admit_flow(1, 0, 2, 0.0), std::domain_error);
    }
}

TEST_CASE("validate_path reports the first violating element in path order") {
    Net net = line3();
    AdmitResult r = net.admit_flow(1, 0, 2, 1.0);
    REQUIRE(r);
    const Reservation& res = *r.reservation;

    SUBCASE("healthy path: no violation") {
        CHECK_FALSE(validate_path(res, net.nodes, net.links).has_value());
    }

    SUBCASE("dead relay") {
        net.nodes.at(1).alive = false;
        const auto v = validate_path(res, net.nodes, net.links);
        REQUIRE(v);
        CHECK(v->kind == PathViolation::Kind::DeadNode);
        CHECK(v->node == 1);
    }

    SUBCASE("missing link wins over the dead node behind it") {
        net.nodes.at(1).alive = false;
        net.links.remove_link(0, 1);
        const auto v = validate_path(res, net.nodes, net.links);
        REQUIRE(v);
        CHECK(v->kind == PathViolation::Kind::MissingLink);
        CHECK(v->link_a == 0);
        CHECK(v->link_b == 1);
    }

    SUBCASE("over-reserved link") {
        net.links.set_capacity(1, 2, 0.5);
        const auto v = validate_path(res, net.nodes, net.links);
        REQUIRE(v);
        CHECK(v->kind == PathViolation::Kind::OverCapacity);
        CHECK(v->link_a == 1);
        CHECK(v->link_b == 2);
    }
}

TEST_CASE("validate_paths skips settled flows and keeps admission order") {
    Net net = diamond();
    std::vector<Reservation> all;
    for (FlowId f = 1; f <= 3; ++f) {
        AdmitResult r = net.admit_flow(f, 0, 3, 1.0);
        REQUIRE(r);
        all.push_back(*r.reservation);
    }
    release(all[1], net.links);

    // Break every remaining path at once.
    net.links.remove_link(0, 1);
    net.links.remove_link(0, 2);
    const auto violations = validate_paths(all, net.nodes, net.links);
    REQUIRE(violations.size() == 2);
    CHECK(violations[0].flow == 1);
    CHECK(violations[1].flow == 3);
}

TEST_CASE("repair reroutes around the break") {
    Net net = diamond();
    AdmitResult r = net.admit_flow(1, 0, 3, 4.0);
    REQUIRE(r);
    REQUIRE(r.reservation->path.node_path == std::vector<NodeId>{0, 1, 3});

    net.links.remove_link(0, 1);
    net.graph = build_zone_graph(net.nodes, net.links, net.map, net.grid);
    const auto failure = repair(*r.reservation, net.nodes, net.links, net.map, net.graph);
    CHECK_FALSE(failure.has_value());
    CHECK(r.reservation->state == ReservationState::Repaired);
    CHECK(r.reservation->repair_count == 1);
    CHECK(r.reservation->path.node_path == std::vector<NodeId>{0, 2, 3});
    CHECK(net.links.find(0, 2)->reserved == 4.0);
    CHECK(net.links.find(2, 3)->reserved == 4.0);
    // The surviving half of the old path gave its holdings back.
    CHECK(net.links.find(1, 3)->reserved == 0.0);
}

TEST_CASE("repair on a fully valid path is a contract violation") {
    Net net = diamond();
    AdmitResult r = net.admit_flow(1, 0, 3, 1.0);
    REQUIRE(r);
    CHECK_THROWS_AS(repair(*r.reservation, net.nodes, net.links, net.map, net.graph),
                    std::domain_error);
}

TEST_CASE("repair fails closed when no detour exists") {
    Net net = line3();
    AdmitResult r = net.admit_flow(1, 0, 2, 4.0);
    REQUIRE(r);
    net.links.remove_link(1, 2);
    net.graph = build_zone_graph(net.nodes, net.links, net.map, net.grid);
    const auto failure = repair(*r.reservation, net.nodes, net.links, net.map, net.graph);
    REQUIRE(failure.has_value());
    CHECK(*failure == RouteFailure::Disconnected);
    CHECK(r.reservation->state == ReservationState::Failed);
    CHECK(net.links.find(0, 1)->reserved == 0.0);
}

TEST_CASE("repair of a flow with a dead endpoint fails without rerouting") {
    Net net = line3();
    AdmitResult r = net.admit_flow(1, 0, 2, 4.0);
    REQUIRE(r);
    net.nodes.at(2).alive = false;
    const auto failure = repair(*r.reservation, net.nodes, net.links, net.map, net.graph);
    REQUIRE(failure.has_value());
    CHECK(*failure == RouteFailure::Disconnected);
    CHECK(r.reservation->state == ReservationState::Failed);
    CHECK(net.links.find(0, 1)->reserved == 0.0);
    CHECK(net.links.find(1, 2)->reserved == 0.0);
}

TEST_CASE("admission is monotone in demand") {
    std::mt19937 gen(61);
    for (int trial = 0; trial < 60; ++trial) {
        auto topo = testutil::random_topology(gen, 15);
        const ClusterMap map =
            construct_clusters(topo.nodes, topo.links, topo.grid, ElectionWeights{});
        const auto graph = build_zone_graph(topo.nodes, topo.links, map, topo.grid);
        const NodeId src = static_cast<NodeId>(gen() % topo.nodes.size());
        const NodeId dst = static_cast<NodeId>(gen() % topo.nodes.size());
        if (src == dst) continue;
        // Same-zone pairs route over simple paths, where admission is
        // provably monotone in demand.
        if (!(zone_of(topo.nodes.at(src).position, topo.grid) ==
              zone_of(topo.nodes.at(dst).position, topo.grid))) {
            continue;
        }
        const double hi = 1.0 + (gen() % 8);

        LinkSet links_hi = topo.links;
        const bool admitted_hi =
            static_cast<bool>(admit(FlowRequest{1, src, dst, hi, 0.0, std::nullopt},
                                    topo.nodes, links_hi, map, graph));
        LinkSet links_lo = topo.links;
        const bool admitted_lo =
            static_cast<bool>(admit(FlowRequest{1, src, dst, hi / 2.0, 0.0, std::nullopt},
                                    topo.nodes, links_lo, map, graph));
        if (admitted_hi) CHECK(admitted_lo);
    }
}
