#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "survsim/routing.hpp"
#include "survsim/world.hpp"

namespace survsim {

using FlowId = std::uint64_t;

struct FlowRequest {
    FlowId id = 0;
    NodeId src = 0;
    NodeId dst = 0;
    double demand = 0.0;               // bandwidth units, > 0
    double start = 0.0;                // seconds
    std::optional<double> duration;    // seconds; nullopt = until scenario end

    friend bool operator==(const FlowRequest&, const FlowRequest&) = default;
};

enum class ReservationState { Active, Repaired, Failed, Released };

/// A flow's admitted path plus lifecycle. While Active or Repaired the
/// flow's demand is held on every link of the path (once per traversal, so
/// a link crossed twice holds twice the demand).
struct Reservation {
    FlowRequest flow;
    RoutePath path;
    ReservationState state = ReservationState::Active;
    int repair_count = 0;
};

enum class RejectReason { NoRoute, InsufficientBandwidth };

struct AdmitResult {
    std::optional<Reservation> reservation;
    RejectReason reject = RejectReason::NoRoute;
    /// Raw routing outcome behind a rejection, for metrics (distinguishes
    /// zone-expansion-infeasible from plain disconnection).
    RouteFailure route_failure = RouteFailure::Disconnected;

    explicit operator bool() const { return reservation.has_value(); }
};

struct PathViolation {
    enum class Kind { DeadNode, MissingLink, OverCapacity };

    FlowId flow = 0;
    Kind kind = Kind::DeadNode;
    NodeId node = 0;    // DeadNode
    NodeId link_a = 0;  // MissingLink / OverCapacity
    NodeId link_b = 0;
};

/// Routes the request at min_residual = demand and reserves the demand on
/// every link of the resulting path. All-or-nothing: on any failure the
/// ledger is untouched. Dead endpoints reject as NoRoute.
AdmitResult admit(const FlowRequest& request, const NodeTable& nodes, LinkSet& links,
                  const ClusterMap& map, const ClusterConnectivityGraph& zone_graph);

/// Returns the reservation's holdings to the ledger and marks it Released.
/// Throws std::domain_error unless the state is Active or Repaired.
void release(Reservation& res, LinkSet& links);

/// Releases the old path's holdings, then reroutes at the original demand.
/// Success: new path reserved, state = Repaired, repair_count incremented,
/// returns nullopt. Failure: state = Failed, nothing held, returns the
/// routing failure. Throws std::domain_error if the state is not
/// Active/Repaired or the current path is still fully valid.
std::optional<RouteFailure> repair(Reservation& res, const NodeTable& nodes,
                                   LinkSet& links, const ClusterMap& map,
                                   const ClusterConnectivityGraph& zone_graph);

/// First violating element of one reservation's path in path order: a dead
/// node, a missing link, or a link with reserved > capacity.
std::optional<PathViolation> validate_path(const Reservation& res,
                                           const NodeTable& nodes, const LinkSet& links);

/// Every Active/Repaired reservation whose path has a violation, with that
/// first violating element.
std::vector<PathViolation> validate_paths(const std::vector<Reservation>& reservations,
                                          const NodeTable& nodes, const LinkSet& links);

}  // namespace survsim
