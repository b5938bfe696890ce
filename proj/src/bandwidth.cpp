#include "survsim/bandwidth.hpp"

#include <map>
#include <stdexcept>
#include <utility>

namespace survsim {

namespace {

std::pair<NodeId, NodeId> link_key(NodeId u, NodeId v) {
    return u < v ? std::make_pair(u, v) : std::make_pair(v, u);
}

/// How often each undirected link appears on the path. A walk may cross the
/// same link more than once; each traversal holds the demand separately.
std::map<std::pair<NodeId, NodeId>, int> link_multiplicity(
    const std::vector<NodeId>& node_path) {
    std::map<std::pair<NodeId, NodeId>, int> mult;
    for (std::size_t i = 1; i < node_path.size(); ++i) {
        ++mult[link_key(node_path[i - 1], node_path[i])];
    }
    return mult;
}

bool reserve_path(const std::vector<NodeId>& node_path, double demand, LinkSet& links) {
    const auto mult = link_multiplicity(node_path);
    for (const auto& [key, count] : mult) {
        const LinkSet::Link* l = links.find(key.first, key.second);
        if (!l || l->residual() < demand * count) return false;
    }
    for (const auto& [key, count] : mult) {
        links.add_reserved(key.first, key.second, demand * count);
    }
    return true;
}

/// Missing links are skipped: a link that vanished took its held bandwidth
/// with it, so only the surviving links still hold this flow's demand.
void unreserve_path(const std::vector<NodeId>& node_path, double demand, LinkSet& links) {
    for (const auto& [key, count] : link_multiplicity(node_path)) {
        if (links.has(key.first, key.second)) {
            links.add_reserved(key.first, key.second, -demand * count);
        }
    }
}

}  // namespace

std::optional<PathViolation> validate_path(const Reservation& res, const NodeTable& nodes,
                                           const LinkSet& links) {
    // Path order interleaves nodes and links: p[0], (p[0],p[1]), p[1], ...
    const std::vector<NodeId>& p = res.path.node_path;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (i > 0) {
            const LinkSet::Link* l = links.find(p[i - 1], p[i]);
            if (!l) {
                return PathViolation{res.flow.id, PathViolation::Kind::MissingLink, 0,
                                     p[i - 1], p[i]};
            }
            if (l->reserved > l->capacity) {
                return PathViolation{res.flow.id, PathViolation::Kind::OverCapacity, 0,
                                     p[i - 1], p[i]};
            }
        }
        const NodeState* n = nodes.find(p[i]);
        if (!n || !n->alive) {
            return PathViolation{res.flow.id, PathViolation::Kind::DeadNode, p[i], 0, 0};
        }
    }
    return std::nullopt;
}

AdmitResult admit(const FlowRequest& request, const NodeTable& nodes, LinkSet& links,
                  const ClusterMap& map, const ClusterConnectivityGraph& zone_graph) {
    AdmitResult out;
    if (request.demand <= 0.0) throw std::domain_error("admit: demand must be positive");

    const NodeState* s = nodes.find(request.src);
    const NodeState* d = nodes.find(request.dst);
    if (!s || !d || !s->alive || !d->alive) {
        out.reject = RejectReason::NoRoute;
        out.route_failure = RouteFailure::Disconnected;
        return out;
    }

    RouteResult r = route(request.src, request.dst, nodes, links, map, zone_graph,
                          request.demand);
    if (!r) {
        out.route_failure = r.failure;
        out.reject = r.failure == RouteFailure::InsufficientBandwidth
                         ? RejectReason::InsufficientBandwidth
                         : RejectReason::NoRoute;
        return out;
    }

    // Route checks residual per hop; a link crossed twice needs twice the
    // demand, so the multiplicity-aware reserve can still say no.
    if (!reserve_path(r.path->node_path, request.demand, links)) {
        out.reject = RejectReason::InsufficientBandwidth;
        out.route_failure = RouteFailure::InsufficientBandwidth;
        return out;
    }

    out.reservation = Reservation{request, *r.path, ReservationState::Active, 0};
    return out;
}

void release(Reservation& res, LinkSet& links) {
    if (res.state != ReservationState::Active && res.state != ReservationState::Repaired) {
        throw std::domain_error("release: reservation is not active");
    }
    unreserve_path(res.path.node_path, res.flow.demand, links);
    res.state = ReservationState::Released;
}

std::optional<RouteFailure> repair(Reservation& res, const NodeTable& nodes,
                                   LinkSet& links, const ClusterMap& map,
                                   const ClusterConnectivityGraph& zone_graph) {
    if (res.state != ReservationState::Active && res.state != ReservationState::Repaired) {
        throw std::domain_error("repair: reservation is not active");
    }
    if (!validate_path(res, nodes, links)) {
        throw std::domain_error("repair: path is still fully valid");
    }

    unreserve_path(res.path.node_path, res.flow.demand, links);

    const NodeState* s = nodes.find(res.flow.src);
    const NodeState* d = nodes.find(res.flow.dst);
    if (!s || !d || !s->alive || !d->alive) {
        res.state = ReservationState::Failed;
        return RouteFailure::Disconnected;
    }

    RouteResult r = route(res.flow.src, res.flow.dst, nodes, links, map, zone_graph,
                          res.flow.demand);
    if (r && reserve_path(r.path->node_path, res.flow.demand, links)) {
        res.path = *r.path;
        res.state = ReservationState::Repaired;
        ++res.repair_count;
        return std::nullopt;
    }
    res.state = ReservationState::Failed;
    return r ? RouteFailure::InsufficientBandwidth : r.failure;
}

std::vector<PathViolation> validate_paths(const std::vector<Reservation>& reservations,
                                          const NodeTable& nodes, const LinkSet& links) {
    std::vector<PathViolation> out;
    for (const Reservation& res : reservations) {
        if (res.state != ReservationState::Active &&
            res.state != ReservationState::Repaired) {
            continue;
        }
        if (auto v = validate_path(res, nodes, links)) out.push_back(*v);
    }
    return out;
}

}  // namespace survsim
