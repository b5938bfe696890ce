#pragma once

#include <map>
#include <optional>
#include <set>
#include <vector>

#include "survsim/world.hpp"

namespace survsim {

/// Weights of the cluster-head eligibility score. Each weight must lie in
/// [0,1]; they are not required to sum to 1.
struct ElectionWeights {
    double a1 = 0.25;  // speed term,        a1 * exp(-speed)
    double a2 = 0.25;  // CH-history term,   a2 * exp(-ch_count)
    double a3 = 0.25;  // battery term,      a3 * battery
    double a4 = 0.25;  // computation term,  a4 * computation
    double a5 = 0.0;   // low-battery term,  a5 * (1 - battery)

    bool valid() const;

    friend bool operator==(const ElectionWeights&, const ElectionWeights&) = default;
};

/// One zone's cluster record: elected head, recorded backup, registered
/// members and the subset of members currently acting as gateways.
struct ClusterState {
    ZoneId zone;
    std::optional<NodeId> ch;
    std::optional<NodeId> backup;
    std::set<NodeId> members;
    std::set<NodeId> gateways;

    friend bool operator==(const ClusterState&, const ClusterState&) = default;
};

/// Per-zone cluster records for the whole grid, plus a reverse index from
/// node id to its registered zone.
class ClusterMap {
public:
    ClusterMap() = default;
    explicit ClusterMap(const GridConfig& grid);

    const GridConfig& grid() const { return grid_; }

    const ClusterState& zone(ZoneId z) const;
    ClusterState& zone(ZoneId z);

    /// Zone the node is currently registered in, if any.
    std::optional<ZoneId> zone_of_member(NodeId node) const;

    /// All zones in (row, col) order.
    const std::vector<ClusterState>& zones() const { return zones_; }

    void add_member(ZoneId z, NodeId node);
    void remove_member(ZoneId z, NodeId node);

    friend bool operator==(const ClusterMap&, const ClusterMap&) = default;

private:
    std::size_t index_of(ZoneId z) const;

    GridConfig grid_;
    std::vector<ClusterState> zones_;       // row-major
    std::map<NodeId, ZoneId> member_zone_;  // reverse index
};

struct ElectionOutcome {
    std::optional<NodeId> ch;
    std::optional<NodeId> backup;

    friend bool operator==(const ElectionOutcome&, const ElectionOutcome&) = default;
};

/// Eligibility score of a node:
///   a1*exp(-speed) + a2*exp(-ch_count) + a3*battery + a4*computation
///   + a5*(1 - battery).
/// Throws std::domain_error for dead nodes or out-of-range attributes.
double eligibility(const NodeState& node, const ElectionWeights& weights);

/// Head and backup of a candidate set: the two highest-eligibility nodes,
/// ties broken by smallest id. Empty set elects nobody; a singleton elects
/// itself with no backup.
ElectionOutcome elect(const std::vector<const NodeState*>& members,
                      const ElectionWeights& weights);

/// Convenience overload over a member-id set.
ElectionOutcome elect(const NodeTable& nodes, const std::set<NodeId>& members,
                      const ElectionWeights& weights);

/// Initial cluster construction: registers every alive node in the zone of
/// its position, elects head and backup per zone, and marks gateways. Does
/// not modify node state; the caller applies ch_count bookkeeping.
ClusterMap construct_clusters(const NodeTable& nodes, const LinkSet& links,
                              const GridConfig& grid, const ElectionWeights& weights);

/// Moves a node's registration from one zone to another. Vacates any head,
/// backup or gateway role it held in the zone it leaves. Registering a node
/// where it is already a member is a no-op.
void register_node(ClusterMap& map, NodeId node, std::optional<ZoneId> from_zone,
                   ZoneId to_zone);

}  // namespace survsim
