#include "survsim/maintenance.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

#include "survsim/routing.hpp"

namespace survsim {

const char* to_string(ChChangeReason reason) {
    switch (reason) {
        case ChChangeReason::ChFailed: return "ch_failed";
        case ChChangeReason::ChLeftCluster: return "ch_left_cluster";
        case ChChangeReason::ElectionPeriodEnded: return "election_period_ended";
        case ChChangeReason::ChOverloaded: return "ch_overloaded";
    }
    return "unknown";
}

MaintenanceReport maintain(NodeTable& nodes, const LinkSet& links, ClusterMap& map,
                           const ElectionWeights& weights, bool election_period_elapsed) {
    MaintenanceReport report;
    const GridConfig& grid = map.grid();

    std::map<ZoneId, std::optional<NodeId>> ch_before;
    for (const ClusterState& cs : map.zones()) ch_before[cs.zone] = cs.ch;

    std::map<ZoneId, ChChangeReason> pending;

    // Dead members drop out first; a dead CH marks its zone for failover.
    for (const NodeState& n : nodes) {
        if (n.alive) continue;
        const auto z = map.zone_of_member(n.id);
        if (!z) continue;
        if (map.zone(*z).ch == n.id) pending.emplace(*z, ChChangeReason::ChFailed);
        map.remove_member(*z, n.id);
    }

    // Re-register nodes whose position crossed a zone boundary.
    for (const NodeState& n : nodes) {
        if (!n.alive) continue;
        const ZoneId here = zone_of(n.position, grid);
        const auto registered = map.zone_of_member(n.id);
        if (registered == here) continue;
        if (registered) {
            if (map.zone(*registered).ch == n.id) {
                pending.emplace(*registered, ChChangeReason::ChLeftCluster);
            }
            report.moved_nodes.push_back({n.id, *registered, here});
        }
        register_node(map, n.id, registered, here);
    }

    // A populated zone without a CH for any other reason (say, members moved
    // into a previously empty zone) also counts as the CH being absent.
    for (const ClusterState& cs : map.zones()) {
        if (!cs.ch && !cs.members.empty()) {
            pending.emplace(cs.zone, ChChangeReason::ChLeftCluster);
        }
    }

    // Gateway status refresh, zone by zone, members ascending.
    NodeZoneCache zones(nodes, grid);
    for (const ClusterState& zs : map.zones()) {
        ClusterState& cs = map.zone(zs.zone);
        for (NodeId m : cs.members) {
            const bool now = is_gateway(nodes.at(m), links, grid, zones);
            const bool was = cs.gateways.count(m) > 0;
            if (now == was) continue;
            if (now) cs.gateways.insert(m);
            else cs.gateways.erase(m);
            report.gateway_changes.push_back({m, cs.zone, now});
        }
    }

    for (const ClusterState& zs : map.zones()) {
        std::optional<ChChangeReason> reason;
        if (auto p = pending.find(zs.zone); p != pending.end()) {
            reason = p->second;
        } else if (election_period_elapsed && !zs.members.empty()) {
            reason = ChChangeReason::ElectionPeriodEnded;
        }
        if (!reason) continue;
        ClusterState& cs = map.zone(zs.zone);
        const auto [ch_at_call, new_ch] = replace_ch(cs, nodes, weights, *reason);
        (void)ch_at_call;
        const std::optional<NodeId> before = ch_before[cs.zone];
        if (before != new_ch) {
            report.ch_changes.push_back({cs.zone, before, new_ch, *reason});
        }
    }
    return report;
}

std::pair<std::optional<NodeId>, std::optional<NodeId>> replace_ch(
    ClusterState& cluster, NodeTable& nodes, const ElectionWeights& weights,
    ChChangeReason reason) {
    const std::optional<NodeId> old_ch = cluster.ch;
    const NodeState* old_state = old_ch ? nodes.find(*old_ch) : nullptr;
    const bool old_alive_member = old_state && old_state->alive &&
                                  cluster.members.count(*old_ch) > 0;

    switch (reason) {
        case ChChangeReason::ChFailed:
            if (old_state && old_state->alive) {
                throw std::domain_error("replace_ch: ChFailed but the CH is alive");
            }
            break;
        case ChChangeReason::ChLeftCluster:
            if (old_alive_member) {
                throw std::domain_error(
                    "replace_ch: ChLeftCluster but the CH is still a member");
            }
            break;
        case ChChangeReason::ChOverloaded:
            if (!old_alive_member) {
                throw std::domain_error("replace_ch: ChOverloaded needs a live CH");
            }
            break;
        case ChChangeReason::ElectionPeriodEnded:
            break;
    }

    auto candidates = [&](std::optional<NodeId> exclude) {
        std::vector<const NodeState*> out;
        for (NodeId m : cluster.members) {
            if (exclude == m) continue;
            const NodeState* s = nodes.find(m);
            if (s && s->alive) out.push_back(s);
        }
        return out;
    };

    const bool fault = reason != ChChangeReason::ElectionPeriodEnded;
    std::optional<NodeId> new_ch;
    if (fault && cluster.backup) {
        const NodeState* b = nodes.find(*cluster.backup);
        if (b && b->alive && cluster.members.count(*cluster.backup)) {
            new_ch = cluster.backup;
        }
    }
    if (!new_ch) {
        // Fresh election; a failed, departed or overloaded CH never
        // re-elects itself.
        new_ch = elect(candidates(fault ? old_ch : std::nullopt), weights).ch;
    }

    std::optional<NodeId> new_backup;
    if (new_ch) new_backup = elect(candidates(new_ch), weights).ch;

    if (new_ch && new_ch != old_ch) nodes.at(*new_ch).ch_count += 1;
    cluster.ch = new_ch;
    cluster.backup = new_backup;
    return {old_ch, new_ch};
}

bool check_overload(const ClusterState& cluster,
                    const std::vector<Reservation>& reservations, int threshold) {
    if (!cluster.ch) return false;
    int count = 0;
    for (const Reservation& r : reservations) {
        if (r.state != ReservationState::Active &&
            r.state != ReservationState::Repaired) {
            continue;
        }
        const auto& p = r.path.node_path;
        if (std::find(p.begin(), p.end(), *cluster.ch) != p.end()) ++count;
    }
    return count > threshold;
}

}  // namespace survsim
