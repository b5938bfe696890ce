#include "survsim/routing.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <set>
#include <stdexcept>
#include <unordered_map>

namespace survsim {

namespace {

std::pair<ZoneId, ZoneId> ordered(ZoneId x, ZoneId y) {
    return x < y ? std::make_pair(x, y) : std::make_pair(y, x);
}

/// Hop-count BFS from dst over admissible links, then a greedy forward walk
/// that always takes the smallest admissible id, which yields the
/// lexicographically smallest shortest id sequence. Empty result = no path.
template <class NodeOk>
std::vector<NodeId> lex_shortest_path(NodeId src, NodeId dst, const LinkSet& links,
                                      double min_residual, const NodeOk& node_ok) {
    if (!node_ok(src) || !node_ok(dst)) return {};
    if (src == dst) return {src};

    const auto& recs = links.links();
    std::unordered_map<NodeId, int> dist;
    dist.reserve(64);
    dist.emplace(dst, 0);
    std::deque<NodeId> queue{dst};
    while (!queue.empty()) {
        const NodeId u = queue.front();
        queue.pop_front();
        const int du = dist.find(u)->second;
        const auto nbrs = links.neighbors(u);
        const auto lids = links.neighbor_links(u);
        for (std::size_t i = 0; i < nbrs.size(); ++i) {
            const NodeId v = nbrs[i];
            if (!node_ok(v) || recs[lids[i]].residual() < min_residual) continue;
            if (dist.count(v)) continue;
            dist.emplace(v, du + 1);
            if (v == src) {
                queue.clear();
                break;
            }
            queue.push_back(v);
        }
    }
    auto it = dist.find(src);
    if (it == dist.end()) return {};

    std::vector<NodeId> path{src};
    NodeId cur = src;
    int remaining = it->second;
    while (cur != dst) {
        const auto nbrs = links.neighbors(cur);  // ascending ids
        const auto lids = links.neighbor_links(cur);
        for (std::size_t i = 0; i < nbrs.size(); ++i) {
            const NodeId v = nbrs[i];
            if (!node_ok(v) || recs[lids[i]].residual() < min_residual) continue;
            auto dv = dist.find(v);
            if (dv != dist.end() && dv->second == remaining - 1) {
                path.push_back(v);
                cur = v;
                remaining = dv->second;
                break;
            }
        }
    }
    return path;
}

std::vector<ZoneId> project_zones(const std::vector<NodeId>& node_path,
                                  const NodeTable& nodes, const GridConfig& grid) {
    std::vector<ZoneId> zones;
    for (NodeId id : node_path) {
        const ZoneId z = zone_of(nodes.at(id).position, grid);
        if (zones.empty() || zones.back() != z) zones.push_back(z);
    }
    return zones;
}

}  // namespace

bool ClusterConnectivityGraph::has_edge(ZoneId x, ZoneId y) const {
    return find_edge(x, y) != nullptr;
}

const ClusterConnectivityGraph::Edge* ClusterConnectivityGraph::find_edge(ZoneId x,
                                                                          ZoneId y) const {
    const auto [a, b] = ordered(x, y);
    auto it = std::lower_bound(edges_.begin(), edges_.end(), std::make_pair(a, b),
                               [](const Edge& e, const std::pair<ZoneId, ZoneId>& k) {
                                   return std::make_pair(e.a, e.b) < k;
                               });
    if (it == edges_.end() || it->a != a || it->b != b) return nullptr;
    return &*it;
}

std::vector<ZoneId> ClusterConnectivityGraph::neighbors(ZoneId z) const {
    std::vector<ZoneId> out;
    for (const Edge& e : edges_) {
        if (e.a == z) out.push_back(e.b);
        else if (e.b == z) out.push_back(e.a);
    }
    std::sort(out.begin(), out.end());
    return out;
}

double ClusterConnectivityGraph::max_residual(ZoneId x, ZoneId y,
                                              const LinkSet& links) const {
    const Edge* e = find_edge(x, y);
    if (!e) return -std::numeric_limits<double>::infinity();
    double best = -std::numeric_limits<double>::infinity();
    for (const GatewayLink& gw : e->supports) {
        const LinkSet::Link* l = links.find(gw.local, gw.remote);
        if (l) best = std::max(best, l->residual());
    }
    return best;
}

std::optional<std::pair<NodeId, NodeId>> ClusterConnectivityGraph::pick_gateway(
    ZoneId from, ZoneId to, const LinkSet& links) const {
    const Edge* e = find_edge(from, to);
    if (!e) return std::nullopt;
    bool have = false;
    double best_res = 0.0;
    std::pair<NodeId, NodeId> best{0, 0};
    for (const GatewayLink& gw : e->supports) {
        const LinkSet::Link* l = links.find(gw.local, gw.remote);
        if (!l) continue;
        // Orient so first is the node inside `from`.
        const std::pair<NodeId, NodeId> cand =
            gw.local_zone == from ? std::make_pair(gw.local, gw.remote)
                                  : std::make_pair(gw.remote, gw.local);
        const double res = l->residual();
        if (!have || res > best_res || (res == best_res && cand < best)) {
            have = true;
            best_res = res;
            best = cand;
        }
    }
    if (!have) return std::nullopt;
    return best;
}

void ClusterConnectivityGraph::add_vertex(ZoneId z) { vertices_.push_back(z); }

void ClusterConnectivityGraph::add_support(GatewayLink gw) {
    if (gw.remote_zone < gw.local_zone) {
        std::swap(gw.local, gw.remote);
        std::swap(gw.local_zone, gw.remote_zone);
    }
    for (Edge& e : edges_) {
        if (e.a == gw.local_zone && e.b == gw.remote_zone) {
            e.supports.push_back(gw);
            return;
        }
    }
    Edge e;
    e.a = gw.local_zone;
    e.b = gw.remote_zone;
    e.supports.push_back(gw);
    edges_.push_back(std::move(e));
}

void ClusterConnectivityGraph::add_edge(Edge e) { edges_.push_back(std::move(e)); }

void ClusterConnectivityGraph::finalize() {
    std::sort(vertices_.begin(), vertices_.end());
    vertices_.erase(std::unique(vertices_.begin(), vertices_.end()), vertices_.end());
    std::sort(edges_.begin(), edges_.end(), [](const Edge& l, const Edge& r) {
        return std::make_pair(l.a, l.b) < std::make_pair(r.a, r.b);
    });
    for (Edge& e : edges_) {
        std::sort(e.supports.begin(), e.supports.end(),
                  [](const GatewayLink& l, const GatewayLink& r) {
                      return std::make_pair(l.local, l.remote) <
                             std::make_pair(r.local, r.remote);
                  });
    }
}

bool is_gateway(const NodeState& node, const NodeTable& nodes, const LinkSet& links,
                const GridConfig& grid) {
    NodeZoneCache zones(nodes, grid);
    return is_gateway(node, links, grid, zones);
}

bool is_gateway(const NodeState& node, const LinkSet& links, const GridConfig& grid,
                NodeZoneCache& zones) {
    if (!node.alive) return false;
    const ZoneId my_zone = zone_of(node.position, grid);
    for (NodeId m : links.neighbors(node.id)) {
        if (zones.zone(m) != my_zone) return true;
    }
    return false;
}

ClusterConnectivityGraph build_zone_graph(const NodeTable& nodes, const LinkSet& links,
                                          const ClusterMap& map, const GridConfig& grid) {
    ClusterConnectivityGraph g;
    for (const ClusterState& cs : map.zones()) {
        for (NodeId m : cs.members) {
            const NodeState* n = nodes.find(m);
            if (n && n->alive) {
                g.add_vertex(cs.zone);
                break;
            }
        }
    }
    std::map<std::pair<ZoneId, ZoneId>, ClusterConnectivityGraph::Edge> edges;
    NodeZoneCache zones(nodes, grid);
    for (const LinkSet::Link& l : links.links()) {
        ZoneId za = zones.zone(l.a);
        ZoneId zb = zones.zone(l.b);
        if (za == zb) continue;
        GatewayLink gw{l.a, l.b, za, zb};
        if (zb < za) {
            std::swap(gw.local, gw.remote);
            std::swap(gw.local_zone, gw.remote_zone);
            std::swap(za, zb);
        }
        auto& e = edges[{za, zb}];
        e.a = za;
        e.b = zb;
        e.supports.push_back(gw);
    }
    for (auto& [key, e] : edges) g.add_edge(std::move(e));
    g.finalize();
    return g;
}

namespace {

/// Directed use of one zone edge: crossing from `from` into `to` over the
/// pinned gateway pair (g in `from`, h in `to`).
struct DirectedCrossing {
    ZoneId from;
    ZoneId to;
    NodeId g = 0;
    NodeId h = 0;
};

class ZoneWalkSearch {
public:
    ZoneWalkSearch(NodeId src, NodeId dst, const NodeTable& nodes, const LinkSet& links,
                   const ClusterMap& map, const ClusterConnectivityGraph& zgraph,
                   const GridConfig& grid, double min_residual)
        : src_(src), dst_(dst), nodes_(nodes), links_(links), grid_(grid),
          min_residual_(min_residual), zones_(nodes, grid) {
        zs_ = zone_of(nodes.at(src).position, grid);
        zd_ = zone_of(nodes.at(dst).position, grid);
        for (const ClusterState& cs : map.zones()) {
            if (cs.ch) ch_ids_.insert(*cs.ch);
        }
        if (!nodes.empty()) {
            const NodeId max_id = std::prev(nodes.end())->id;
            if (max_id < 4 * nodes.size() + 1024) {
                nflags_.assign(static_cast<std::size_t>(max_id) + 1, 0);
                for (const NodeState& n : nodes) {
                    if (n.alive) nflags_[n.id] |= 1;
                }
                for (NodeId ch : ch_ids_) {
                    if (ch < nflags_.size()) nflags_[ch] |= 2;
                }
            }
        }
        for (const auto& e : zgraph.edges()) {
            if (zgraph.max_residual(e.a, e.b, links) < min_residual) continue;
            if (auto gw = zgraph.pick_gateway(e.a, e.b, links)) {
                crossings_.push_back(DirectedCrossing{e.a, e.b, gw->first, gw->second});
            }
            if (auto gw = zgraph.pick_gateway(e.b, e.a, links)) {
                crossings_.push_back(DirectedCrossing{e.b, e.a, gw->first, gw->second});
            }
        }
        std::sort(crossings_.begin(), crossings_.end(),
                  [](const DirectedCrossing& l, const DirectedCrossing& r) {
                      return std::tie(l.from, l.to, l.g, l.h) <
                             std::tie(r.from, r.to, r.g, r.h);
                  });
    }

    /// Expands the fewest-zone-hops walk from src to dst, lexicographic zone
    /// sequence on ties. Empty = infeasible under zone-constrained routing.
    std::vector<NodeId> search() {
        const std::size_t n = crossings_.size();
        // dist_goal[i]: crossings still needed after taking crossing i.
        std::vector<int> dist_goal(n, -1);
        std::deque<std::size_t> queue;
        for (std::size_t i = 0; i < n; ++i) {
            if (crossings_[i].to == zd_ &&
                !segment(zd_, crossings_[i].h, dst_).empty()) {
                dist_goal[i] = 0;
                queue.push_back(i);
            }
        }
        while (!queue.empty()) {
            const std::size_t j = queue.front();
            queue.pop_front();
            for (std::size_t i = 0; i < n; ++i) {
                if (dist_goal[i] >= 0) continue;
                if (crossings_[i].to != crossings_[j].from) continue;
                if (segment(crossings_[i].to, crossings_[i].h, crossings_[j].g).empty())
                    continue;
                dist_goal[i] = dist_goal[j] + 1;
                queue.push_back(i);
            }
        }

        // Entry candidates: crossings leaving the source zone reachable from
        // src inside it.
        int best = -1;
        for (std::size_t i = 0; i < n; ++i) {
            if (crossings_[i].from != zs_ || dist_goal[i] < 0) continue;
            if (segment(zs_, src_, crossings_[i].g).empty()) continue;
            if (best < 0 || dist_goal[i] < best) best = dist_goal[i];
        }
        if (best < 0) return {};

        // Greedy reconstruction: smallest (to, g, h) among candidates that
        // keep the walk shortest. crossings_ is sorted in that order, so the
        // first admissible candidate wins.
        std::vector<NodeId> path;
        NodeId cur = src_;
        ZoneId cur_zone = zs_;
        int remaining = best;
        bool at_start = true;
        while (true) {
            const DirectedCrossing* next = nullptr;
            for (std::size_t i = 0; i < n; ++i) {
                const DirectedCrossing& c = crossings_[i];
                if (c.from != cur_zone || dist_goal[i] != remaining) continue;
                const std::vector<NodeId> seg = segment(cur_zone, cur, c.g);
                if (seg.empty()) continue;
                next = &c;
                append_segment(path, seg, at_start);
                break;
            }
            if (!next) return {};  // unreachable if dist_goal is consistent
            path.push_back(next->h);
            cur = next->h;
            cur_zone = next->to;
            at_start = false;
            if (remaining == 0) break;
            --remaining;
        }
        const std::vector<NodeId> tail = segment(zd_, cur, dst_);
        if (tail.empty()) return {};
        append_segment(path, tail, false);
        return path;
    }

private:
    /// Lexicographically smallest shortest path between two nodes of zone z,
    /// using only links internal to z and never relaying through a CH (the
    /// route endpoints are exempt). Cached per (zone, endpoints).
    const std::vector<NodeId>& segment(ZoneId z, NodeId from, NodeId to) {
        const auto key = std::make_tuple(z, from, to);
        auto it = segment_cache_.find(key);
        if (it != segment_cache_.end()) return it->second;
        auto usable = [&](NodeId id) {
            if (id < nflags_.size()) {
                const std::uint8_t f = nflags_[id];
                if (!(f & 1) || zones_.zone(id) != z) return false;
                return id == src_ || id == dst_ || !(f & 2);
            }
            const NodeState& s = nodes_.at(id);
            if (!s.alive || zone_of(s.position, grid_) != z) return false;
            return id == src_ || id == dst_ || !ch_ids_.count(id);
        };
        std::vector<NodeId> p = lex_shortest_path(from, to, links_, min_residual_, usable);
        return segment_cache_.emplace(key, std::move(p)).first->second;
    }

    static void append_segment(std::vector<NodeId>& path, const std::vector<NodeId>& seg,
                               bool include_first) {
        path.insert(path.end(), seg.begin() + (include_first ? 0 : 1), seg.end());
    }

    NodeId src_;
    NodeId dst_;
    const NodeTable& nodes_;
    const LinkSet& links_;
    const GridConfig& grid_;
    double min_residual_;
    ZoneId zs_;
    ZoneId zd_;
    std::set<NodeId> ch_ids_;
    NodeZoneCache zones_;
    std::vector<std::uint8_t> nflags_;  // bit 0 alive, bit 1 CH; compact ids only
    std::vector<DirectedCrossing> crossings_;
    std::map<std::tuple<ZoneId, NodeId, NodeId>, std::vector<NodeId>> segment_cache_;
};

}  // namespace

RouteResult route(NodeId src, NodeId dst, const NodeTable& nodes, const LinkSet& links,
                  const ClusterMap& map, const ClusterConnectivityGraph& zone_graph,
                  double min_residual) {
    const NodeState& s = nodes.at(src);
    const NodeState& d = nodes.at(dst);
    if (!s.alive || !d.alive) throw std::domain_error("route: dead endpoint");

    RouteResult result;
    const GridConfig& grid = map.grid();
    const ZoneId zs = zone_of(s.position, grid);
    const ZoneId zd = zone_of(d.position, grid);

    auto any_node = [](NodeId) { return true; };

    std::vector<NodeId> node_path;
    if (src == dst) {
        node_path = {src};
    } else if (zs == zd) {
        node_path = lex_shortest_path(src, dst, links, min_residual, any_node);
    } else {
        ZoneWalkSearch search(src, dst, nodes, links, map, zone_graph, grid, min_residual);
        node_path = search.search();
    }

    if (!node_path.empty()) {
        result.path = RoutePath{node_path, project_zones(node_path, nodes, grid)};
        return result;
    }

    // Classify the failure: feasible on the flat graph at the demanded
    // residual means only the zone-constrained expansion failed.
    if (!lex_shortest_path(src, dst, links, min_residual, any_node).empty()) {
        result.failure = RouteFailure::ZoneExpansionInfeasible;
    } else if (!lex_shortest_path(src, dst, links, 0.0, any_node).empty()) {
        result.failure = RouteFailure::InsufficientBandwidth;
    } else {
        result.failure = RouteFailure::Disconnected;
    }
    return result;
}

}  // namespace survsim
