#pragma once

#include <map>
#include <optional>
#include <vector>

#include "survsim/clustering.hpp"
#include "survsim/world.hpp"

namespace survsim {

/// One physical link that crosses a zone boundary. Stored with local in the
/// lexicographically smaller zone.
struct GatewayLink {
    NodeId local = 0;
    NodeId remote = 0;
    ZoneId local_zone;
    ZoneId remote_zone;

    friend bool operator==(const GatewayLink&, const GatewayLink&) = default;
};

/// Zones as vertices, gateway-backed zone adjacencies as edges. Residual
/// bandwidth annotations are looked up live from the LinkSet so admissions
/// inside one tick never see stale numbers.
class ClusterConnectivityGraph {
public:
    struct Edge {
        ZoneId a;  // a < b
        ZoneId b;
        std::vector<GatewayLink> supports;  // sorted by (local, remote)
    };

    ClusterConnectivityGraph() = default;

    const std::vector<ZoneId>& vertices() const { return vertices_; }
    const std::vector<Edge>& edges() const { return edges_; }

    bool has_edge(ZoneId x, ZoneId y) const;
    const Edge* find_edge(ZoneId x, ZoneId y) const;
    /// Zones adjacent to z, ascending.
    std::vector<ZoneId> neighbors(ZoneId z) const;

    /// Highest live residual over the edge's supporting links; -inf if the
    /// edge is absent or none of its links survive in `links`.
    double max_residual(ZoneId x, ZoneId y, const LinkSet& links) const;

    /// The supporting link used to cross from `from` into the opposite zone:
    /// highest live residual, ties to the smallest (local id, remote id) as
    /// seen from `from`. Returns (local node in `from`, remote node).
    std::optional<std::pair<NodeId, NodeId>> pick_gateway(ZoneId from, ZoneId to,
                                                          const LinkSet& links) const;

    void add_vertex(ZoneId z);
    void add_support(GatewayLink gw);
    void add_edge(Edge e);
    void finalize();  // sorts vertices/edges/supports

private:
    std::vector<ZoneId> vertices_;  // sorted
    std::vector<Edge> edges_;       // sorted by (a, b)
};

/// A routed path: explicit node hops plus the zone-level projection
/// (consecutive duplicates collapsed).
struct RoutePath {
    std::vector<NodeId> node_path;
    std::vector<ZoneId> zone_path;

    friend bool operator==(const RoutePath&, const RoutePath&) = default;
};

enum class RouteFailure {
    Disconnected,            // endpoints not connected at all
    InsufficientBandwidth,   // connected, but not at the demanded residual
    ZoneExpansionInfeasible  // flat graph connects, zone-constrained search does not
};

struct RouteResult {
    std::optional<RoutePath> path;
    RouteFailure failure = RouteFailure::Disconnected;  // meaningful when !path

    explicit operator bool() const { return path.has_value(); }
};

/// True iff the node has an alive neighbor in a different zone, i.e. it can
/// carry inter-cluster traffic.
bool is_gateway(const NodeState& node, const NodeTable& nodes, const LinkSet& links,
                const GridConfig& grid);

/// Same check against a shared zone cache, for callers probing many nodes
/// over one topology snapshot.
bool is_gateway(const NodeState& node, const LinkSet& links, const GridConfig& grid,
                NodeZoneCache& zones);

/// Builds the zone graph: one vertex per zone with at least one alive
/// member, one edge per zone pair connected by at least one cross-zone link.
ClusterConnectivityGraph build_zone_graph(const NodeTable& nodes, const LinkSet& links,
                                          const ClusterMap& map, const GridConfig& grid);

/// Two-phase route from src to dst using only links with residual >=
/// min_residual.
///
/// Same zone: hop-count-shortest path over the whole link graph,
/// lexicographically smallest id sequence on ties. Different zones: shortest
/// zone walk over qualifying zone edges (fewest zone hops, lexicographic
/// tie-breaks), expanded to node hops zone by zone through the pinned
/// gateway of each zone edge. Cross-zone expansion never relays through a
/// current CH (control plane only); src and dst themselves are exempt.
/// Returns a failure reason instead of a path when no feasible route
/// exists. Throws std::domain_error for dead endpoints.
RouteResult route(NodeId src, NodeId dst, const NodeTable& nodes, const LinkSet& links,
                  const ClusterMap& map, const ClusterConnectivityGraph& zone_graph,
                  double min_residual);

}  // namespace survsim
