#include "survsim/clustering.hpp"

#include <cmath>
#include <stdexcept>

#include "survsim/routing.hpp"

namespace survsim {

bool ElectionWeights::valid() const {
    for (double a : {a1, a2, a3, a4, a5}) {
        if (!(a >= 0.0 && a <= 1.0)) return false;
    }
    return true;
}

ClusterMap::ClusterMap(const GridConfig& grid) : grid_(grid) {
    if (!grid.valid()) throw std::invalid_argument("ClusterMap: invalid grid");
    zones_.reserve(static_cast<std::size_t>(grid.zone_count()));
    for (int r = 0; r < grid.rows; ++r) {
        for (int c = 0; c < grid.cols; ++c) {
            ClusterState cs;
            cs.zone = ZoneId{r, c};
            zones_.push_back(std::move(cs));
        }
    }
}

std::size_t ClusterMap::index_of(ZoneId z) const {
    if (z.row < 0 || z.row >= grid_.rows || z.col < 0 || z.col >= grid_.cols) {
        throw std::out_of_range("zone id outside grid");
    }
    return static_cast<std::size_t>(z.row) * grid_.cols + z.col;
}

const ClusterState& ClusterMap::zone(ZoneId z) const { return zones_[index_of(z)]; }
ClusterState& ClusterMap::zone(ZoneId z) { return zones_[index_of(z)]; }

std::optional<ZoneId> ClusterMap::zone_of_member(NodeId node) const {
    auto it = member_zone_.find(node);
    if (it == member_zone_.end()) return std::nullopt;
    return it->second;
}

void ClusterMap::add_member(ZoneId z, NodeId node) {
    zone(z).members.insert(node);
    member_zone_[node] = z;
}

void ClusterMap::remove_member(ZoneId z, NodeId node) {
    ClusterState& cs = zone(z);
    cs.members.erase(node);
    cs.gateways.erase(node);
    if (cs.ch == node) cs.ch.reset();
    if (cs.backup == node) cs.backup.reset();
    auto it = member_zone_.find(node);
    if (it != member_zone_.end() && it->second == z) member_zone_.erase(it);
}

double eligibility(const NodeState& node, const ElectionWeights& weights) {
    if (!node.alive) throw std::domain_error("eligibility: node is dead");
    if (!(node.battery >= 0.0 && node.battery <= 1.0)) {
        throw std::domain_error("eligibility: battery outside [0,1]");
    }
    if (!(node.computation >= 0.0 && node.computation <= 1.0)) {
        throw std::domain_error("eligibility: computation outside [0,1]");
    }
    if (!weights.valid()) throw std::domain_error("eligibility: weights outside [0,1]");
    return weights.a1 * std::exp(-node.speed) +
           weights.a2 * std::exp(-static_cast<double>(node.ch_count)) +
           weights.a3 * node.battery +
           weights.a4 * node.computation +
           weights.a5 * (1.0 - node.battery);
}

ElectionOutcome elect(const std::vector<const NodeState*>& members,
                      const ElectionWeights& weights) {
    // Rank by (eligibility desc, id asc) so ties always go to the smaller id
    // regardless of input order.
    auto better = [](double ef_l, NodeId id_l, double ef_r, NodeId id_r) {
        return ef_l > ef_r || (ef_l == ef_r && id_l < id_r);
    };
    const NodeState* best = nullptr;
    const NodeState* second = nullptr;
    double best_ef = 0.0;
    double second_ef = 0.0;
    for (const NodeState* m : members) {
        const double ef = eligibility(*m, weights);
        if (!best || better(ef, m->id, best_ef, best->id)) {
            second = best;
            second_ef = best_ef;
            best = m;
            best_ef = ef;
        } else if (!second || better(ef, m->id, second_ef, second->id)) {
            second = m;
            second_ef = ef;
        }
    }
    ElectionOutcome out;
    if (best) out.ch = best->id;
    if (second) out.backup = second->id;
    return out;
}

ElectionOutcome elect(const NodeTable& nodes, const std::set<NodeId>& members,
                      const ElectionWeights& weights) {
    std::vector<const NodeState*> states;
    states.reserve(members.size());
    for (NodeId id : members) states.push_back(&nodes.at(id));
    return elect(states, weights);
}

ClusterMap construct_clusters(const NodeTable& nodes, const LinkSet& links,
                              const GridConfig& grid, const ElectionWeights& weights) {
    ClusterMap map(grid);
    for (const NodeState& n : nodes) {
        if (!n.alive) continue;
        map.add_member(zone_of(n.position, grid), n.id);
    }
    for (int r = 0; r < grid.rows; ++r) {
        for (int c = 0; c < grid.cols; ++c) {
            ClusterState& cs = map.zone(ZoneId{r, c});
            const ElectionOutcome out = elect(nodes, cs.members, weights);
            cs.ch = out.ch;
            cs.backup = out.backup;
        }
    }
    NodeZoneCache zones(nodes, grid);
    for (const NodeState& n : nodes) {
        if (!n.alive) continue;
        if (is_gateway(n, links, grid, zones)) {
            map.zone(zone_of(n.position, grid)).gateways.insert(n.id);
        }
    }
    return map;
}

void register_node(ClusterMap& map, NodeId node, std::optional<ZoneId> from_zone,
                   ZoneId to_zone) {
    if (map.zone(to_zone).members.count(node)) return;
    if (from_zone) map.remove_member(*from_zone, node);
    map.add_member(to_zone, node);
}

}  // namespace survsim
