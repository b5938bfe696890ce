#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "survsim/bandwidth.hpp"
#include "survsim/clustering.hpp"
#include "survsim/routing.hpp"
#include "survsim/trace.hpp"
#include "survsim/world.hpp"

namespace survsim {

namespace ev {

struct MobilityEpoch {
    friend bool operator==(const MobilityEpoch&, const MobilityEpoch&) = default;
};
struct MaintenanceTick {
    friend bool operator==(const MaintenanceTick&, const MaintenanceTick&) = default;
};
struct ElectionPeriodBoundary {
    friend bool operator==(const ElectionPeriodBoundary&,
                           const ElectionPeriodBoundary&) = default;
};
struct FlowArrival {
    FlowRequest request;
    friend bool operator==(const FlowArrival&, const FlowArrival&) = default;
};
struct FlowDeparture {
    FlowId flow = 0;
    friend bool operator==(const FlowDeparture&, const FlowDeparture&) = default;
};
struct NodeCrash {
    NodeId node = 0;
    friend bool operator==(const NodeCrash&, const NodeCrash&) = default;
};
struct LinkCut {
    NodeId a = 0;
    NodeId b = 0;
    friend bool operator==(const LinkCut&, const LinkCut&) = default;
};
struct IntruderSeizure {
    NodeId node = 0;
    double seized = 0.0;
    friend bool operator==(const IntruderSeizure&, const IntruderSeizure&) = default;
};

}  // namespace ev

struct ScenarioEvent {
    double time = 0.0;
    std::variant<ev::MobilityEpoch, ev::NodeCrash, ev::LinkCut, ev::IntruderSeizure,
                 ev::ElectionPeriodBoundary, ev::MaintenanceTick, ev::FlowDeparture,
                 ev::FlowArrival>
        kind;

    /// Processing rank within one timestamp: mobility, then faults in
    /// crash/cut/seizure order, then election boundary, maintenance tick,
    /// departures and finally arrivals. Equal ranks keep insertion order.
    int priority() const { return static_cast<int>(kind.index()); }

    friend bool operator==(const ScenarioEvent&, const ScenarioEvent&) = default;
};

struct NodePlacement {
    NodeId id = 0;
    Vec2 position;
    double speed = 0.0;
    double battery = 1.0;
    double computation = 1.0;

    friend bool operator==(const NodePlacement&, const NodePlacement&) = default;
};

struct NodeSpec {
    std::uint32_t count = 0;
    double radio_range = 250.0;
    double speed_min = 0.0;
    double speed_max = 0.0;
    double battery_min = 0.5;
    double battery_max = 1.0;
    double computation_min = 0.5;
    double computation_max = 1.0;
    double battery_drain_per_s = 1e-5;
    double ch_drain_multiplier = 10.0;
    /// When nonempty, replaces random generation; size must equal count.
    std::vector<NodePlacement> placements;

    friend bool operator==(const NodeSpec&, const NodeSpec&) = default;
};

struct Scenario {
    std::uint64_t seed = 0;
    GridConfig grid;
    NodeSpec nodes;
    ElectionWeights weights;
    double link_capacity = 10.0;
    double election_period = 50.0;
    double maintenance_tick = 1.0;
    int overload_threshold = 8;
    double duration = 0.0;
    std::vector<ScenarioEvent> events;

    friend bool operator==(const Scenario&, const Scenario&) = default;
};

/// Thrown by run() in invariant-checking mode when a post-tick sweep fails.
struct InvariantViolation : std::logic_error {
    using std::logic_error::logic_error;
};

/// Mutable simulation state, exposed for fault-application tests.
struct SimState {
    NodeTable nodes;
    LinkSet links;
    ClusterMap map;
    ClusterConnectivityGraph zone_graph;
    std::vector<Reservation> reservations;
    /// Cumulative bandwidth seized at each node; reduces the capacity of
    /// every incident link, floor zero.
    std::map<NodeId, double> seized;
    /// Severed pairs; never relinked while present.
    std::set<std::pair<NodeId, NodeId>> cut_links;
    double link_capacity = 0.0;
};

/// Applies one fault event to the state: NodeCrash kills the node and drops
/// its links, LinkCut severs the pair permanently, IntruderSeizure lowers
/// incident link capacities by the seized amount (floor 0). Throws
/// std::invalid_argument for non-fault events or unknown node ids.
void apply_fault(const ScenarioEvent& event, SimState& state);

struct RunResult {
    std::vector<TraceRecord> trace;
    MetricsReport metrics;
};

/// Runs the scenario to completion. Deterministic: identical scenarios give
/// byte-identical serialized traces. With check_invariants set, a full
/// consistency sweep runs after every processed timestamp and a failure
/// throws InvariantViolation. Malformed scenarios throw
/// std::invalid_argument before any simulation.
RunResult run(const Scenario& scenario, bool check_invariants = false);

}  // namespace survsim
