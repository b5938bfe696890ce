#include "survsim/engine.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <utility>

#include "survsim/maintenance.hpp"

namespace survsim {

namespace {

std::pair<NodeId, NodeId> ordered_pair(NodeId u, NodeId v) {
    return u < v ? std::make_pair(u, v) : std::make_pair(v, u);
}

void validate_scenario(const Scenario& sc) {
    auto bad = [](const char* what) { throw std::invalid_argument(what); };
    if (!sc.grid.valid()) bad("scenario: invalid grid");
    if (!sc.weights.valid()) bad("scenario: weights outside [0,1]");
    if (sc.link_capacity <= 0.0) bad("scenario: link_capacity must be > 0");
    if (sc.maintenance_tick <= 0.0) bad("scenario: maintenance_tick must be > 0");
    if (sc.election_period <= 0.0) bad("scenario: election_period must be > 0");
    if (sc.overload_threshold < 1) bad("scenario: overload_threshold must be >= 1");
    if (sc.duration < 0.0) bad("scenario: duration must be >= 0");
    const NodeSpec& ns = sc.nodes;
    if (ns.radio_range <= 0.0) bad("scenario: radio_range must be > 0");
    if (ns.speed_min < 0.0 || ns.speed_max < ns.speed_min) bad("scenario: bad speed range");
    if (ns.battery_min < 0.0 || ns.battery_max > 1.0 || ns.battery_max < ns.battery_min) {
        bad("scenario: bad battery range");
    }
    if (ns.computation_min < 0.0 || ns.computation_max > 1.0 ||
        ns.computation_max < ns.computation_min) {
        bad("scenario: bad computation range");
    }
    if (ns.battery_drain_per_s < 0.0) bad("scenario: bad battery drain");
    if (ns.ch_drain_multiplier < 0.0) bad("scenario: bad drain multiplier");
    if (!ns.placements.empty() && ns.placements.size() != ns.count) {
        bad("scenario: placements must cover every node");
    }
    for (const ScenarioEvent& e : sc.events) {
        if (e.time < 0.0) bad("scenario: event before t=0");
        if (e.time > sc.duration) bad("scenario: event after duration");
    }
}

NodeTable init_nodes(const Scenario& sc, Rng& rng) {
    std::vector<NodeState> nodes;
    const NodeSpec& ns = sc.nodes;
    nodes.reserve(ns.count);
    if (!ns.placements.empty()) {
        for (const NodePlacement& p : ns.placements) {
            NodeState n;
            n.id = p.id;
            n.position = p.position;
            n.waypoint = p.position;
            n.speed = p.speed;
            n.radio_range = ns.radio_range;
            n.battery = p.battery;
            n.computation = p.computation;
            nodes.push_back(n);
        }
    } else {
        for (std::uint32_t i = 0; i < ns.count; ++i) {
            NodeState n;
            n.id = i;
            n.position.x = rng.uniform(0.0, sc.grid.world_width);
            n.position.y = rng.uniform(0.0, sc.grid.world_height);
            n.waypoint.x = rng.uniform(0.0, sc.grid.world_width);
            n.waypoint.y = rng.uniform(0.0, sc.grid.world_height);
            n.speed = rng.uniform(ns.speed_min, ns.speed_max);
            n.battery = rng.uniform(ns.battery_min, ns.battery_max);
            n.computation = rng.uniform(ns.computation_min, ns.computation_max);
            n.radio_range = ns.radio_range;
            nodes.push_back(n);
        }
    }
    return NodeTable(std::move(nodes));
}

/// Scratch buffers reused across per-group topology rebuilds.
struct LinkScratch {
    std::vector<std::pair<NodeId, NodeId>> pairs;
    std::vector<LinkSet::Link> links;
};

void rebuild_links(SimState& st, double radio_range, LinkScratch& scratch) {
    collect_link_pairs(st.nodes, radio_range, scratch.pairs);
    scratch.links.clear();
    scratch.links.reserve(scratch.pairs.size());
    // Both pairs and the previous link set are sorted by (a,b), so the
    // reserved carry-over is a single merge pass.
    const auto& old = st.links.links();
    std::size_t oi = 0;
    for (const auto& [a, b] : scratch.pairs) {
        if (st.cut_links.count({a, b})) continue;
        double cap = st.link_capacity;
        if (auto it = st.seized.find(a); it != st.seized.end()) cap -= it->second;
        if (auto it = st.seized.find(b); it != st.seized.end()) cap -= it->second;
        if (cap < 0.0) cap = 0.0;
        while (oi < old.size() && std::pair{old[oi].a, old[oi].b} < std::pair{a, b}) ++oi;
        double reserved = 0.0;
        if (oi < old.size() && old[oi].a == a && old[oi].b == b) {
            reserved = old[oi].reserved;
        }
        scratch.links.push_back(LinkSet::Link{a, b, cap, reserved});
    }
    st.links.assign(scratch.links);
}

class Sweeper {
public:
    Sweeper(const SimState& st, double t) : st_(st), t_(t) {}

    void check() {
        check_cluster_map();
        check_links();
        check_conservation();
    }

private:
    [[noreturn]] void violated(const std::string& what) const {
        throw InvariantViolation("invariant violation at t=" + format_double(t_) + ": " +
                                 what);
    }

    void check_cluster_map() const {
        std::set<NodeId> seen;
        std::set<NodeId> heads;
        for (const ClusterState& cs : st_.map.zones()) {
            for (NodeId m : cs.members) {
                if (!seen.insert(m).second) violated("node registered in two zones");
                const NodeState* n = st_.nodes.find(m);
                if (!n || !n->alive) violated("dead node still registered");
                if (zone_of(n->position, st_.map.grid()) != cs.zone) {
                    violated("member registered outside its position zone");
                }
            }
            if (cs.ch && !cs.members.count(*cs.ch)) violated("CH is not a member");
            if (cs.backup && !cs.members.count(*cs.backup)) violated("backup not a member");
            if (cs.ch && cs.ch == cs.backup) violated("CH equals backup");
            if (cs.ch && !heads.insert(*cs.ch).second) violated("node is CH twice");
            for (NodeId gw : cs.gateways) {
                if (!cs.members.count(gw)) violated("gateway not a member");
            }
        }
        for (const NodeState& n : st_.nodes) {
            if (n.alive && !seen.count(n.id)) violated("alive node not registered");
        }
    }

    void check_links() const {
        for (const LinkSet::Link& l : st_.links.links()) {
            const NodeState* a = st_.nodes.find(l.a);
            const NodeState* b = st_.nodes.find(l.b);
            if (!a || !b || !a->alive || !b->alive) violated("link touches a dead node");
            if (l.reserved < -kEps) violated("negative reservation");
            if (l.reserved > l.capacity + kEps) violated("link over-reserved");
        }
    }

    void check_conservation() const {
        std::map<std::pair<NodeId, NodeId>, double> expected;
        for (const Reservation& r : st_.reservations) {
            if (r.state != ReservationState::Active &&
                r.state != ReservationState::Repaired) {
                continue;
            }
            const auto& p = r.path.node_path;
            for (std::size_t i = 1; i < p.size(); ++i) {
                const NodeId u = p[i - 1];
                const NodeId v = p[i];
                if (!st_.links.has(u, v)) violated("live path uses a missing link");
                expected[ordered_pair(u, v)] += r.flow.demand;
            }
            for (NodeId n : p) {
                const NodeState* s = st_.nodes.find(n);
                if (!s || !s->alive) violated("live path crosses a dead node");
            }
        }
        for (const LinkSet::Link& l : st_.links.links()) {
            const auto it = expected.find({l.a, l.b});
            const double want = it == expected.end() ? 0.0 : it->second;
            if (std::abs(want - l.reserved) > kEps) {
                violated("reserved total does not match live reservations");
            }
        }
    }

    static constexpr double kEps = 1e-9;
    const SimState& st_;
    double t_;
};

struct Group {
    double t = 0.0;
    std::vector<const ScenarioEvent*> events;
    bool tick = false;
    bool boundary = false;
};

}  // namespace

void apply_fault(const ScenarioEvent& event, SimState& state) {
    if (const auto* c = std::get_if<ev::NodeCrash>(&event.kind)) {
        NodeState* n = state.nodes.find(c->node);
        if (!n) throw std::invalid_argument("apply_fault: unknown node id");
        n->alive = false;
        const auto span = state.links.neighbors(c->node);
        const std::vector<NodeId> neighbors(span.begin(), span.end());
        for (NodeId m : neighbors) state.links.remove_link(c->node, m);
    } else if (const auto* c = std::get_if<ev::LinkCut>(&event.kind)) {
        if (!state.nodes.find(c->a) || !state.nodes.find(c->b)) {
            throw std::invalid_argument("apply_fault: unknown node id");
        }
        state.cut_links.insert(ordered_pair(c->a, c->b));
        if (state.links.has(c->a, c->b)) state.links.remove_link(c->a, c->b);
    } else if (const auto* c = std::get_if<ev::IntruderSeizure>(&event.kind)) {
        if (!state.nodes.find(c->node)) {
            throw std::invalid_argument("apply_fault: unknown node id");
        }
        if (c->seized < 0.0) throw std::invalid_argument("apply_fault: negative seizure");
        state.seized[c->node] += c->seized;
        for (NodeId m : state.links.neighbors(c->node)) {
            const LinkSet::Link* l = state.links.find(c->node, m);
            state.links.set_capacity(c->node, m, std::max(0.0, l->capacity - c->seized));
        }
    } else {
        throw std::invalid_argument("apply_fault: not a fault event");
    }
}

RunResult run(const Scenario& scenario, bool check_invariants) {
    validate_scenario(scenario);

    Rng rng(scenario.seed);
    const GridConfig& grid = scenario.grid;
    const MobilitySpec mobility{scenario.nodes.speed_min, scenario.nodes.speed_max};

    SimState st;
    LinkScratch link_scratch;
    st.link_capacity = scenario.link_capacity;
    st.nodes = init_nodes(scenario, rng);
    rebuild_links(st, scenario.nodes.radio_range, link_scratch);
    st.map = construct_clusters(st.nodes, st.links, grid, scenario.weights);
    for (const ClusterState& cs : st.map.zones()) {
        if (cs.ch) st.nodes.at(*cs.ch).ch_count += 1;
    }
    st.zone_graph = build_zone_graph(st.nodes, st.links, st.map, grid);

    std::vector<TraceRecord> trace;
    auto emit = [&trace](double t, auto payload) {
        trace.push_back(TraceRecord{t, std::move(payload)});
    };

    emit(0.0, rec::RunStart{scenario.seed, scenario.nodes.count, grid.rows, grid.cols});
    for (const NodeState& n : st.nodes) {
        emit(0.0, rec::NodeInit{n.id, n.position, n.speed, n.battery, n.computation,
                                zone_of(n.position, grid)});
    }
    for (const ClusterState& cs : st.map.zones()) {
        if (!cs.members.empty()) emit(0.0, rec::Elect{cs.zone, cs.ch, cs.backup});
        if (!cs.gateways.empty()) {
            emit(0.0, rec::GatewayInit{cs.zone, {cs.gateways.begin(), cs.gateways.end()}});
        }
    }

    // Full event list: scenario events, plus synthesized departures for
    // finite-duration flows, maintenance ticks and election boundaries.
    std::vector<ScenarioEvent> events = scenario.events;
    for (const ScenarioEvent& e : scenario.events) {
        if (const auto* a = std::get_if<ev::FlowArrival>(&e.kind)) {
            if (a->request.duration) {
                const double end = e.time + *a->request.duration;
                if (end <= scenario.duration) {
                    events.push_back(
                        ScenarioEvent{end, ev::FlowDeparture{a->request.id}});
                }
            }
        }
    }
    for (int k = 1; k * scenario.maintenance_tick <= scenario.duration; ++k) {
        events.push_back(ScenarioEvent{k * scenario.maintenance_tick, ev::MaintenanceTick{}});
    }
    for (int k = 1; k * scenario.election_period <= scenario.duration; ++k) {
        events.push_back(
            ScenarioEvent{k * scenario.election_period, ev::ElectionPeriodBoundary{}});
    }
    std::stable_sort(events.begin(), events.end(),
                     [](const ScenarioEvent& l, const ScenarioEvent& r) {
                         return l.time < r.time ||
                                (l.time == r.time && l.priority() < r.priority());
                     });

    std::vector<Group> groups;
    for (const ScenarioEvent& e : events) {
        if (groups.empty() || groups.back().t != e.time) {
            groups.push_back(Group{e.time, {}, false, false});
        }
        Group& g = groups.back();
        g.events.push_back(&e);
        if (std::holds_alternative<ev::MaintenanceTick>(e.kind)) g.tick = true;
        if (std::holds_alternative<ev::ElectionPeriodBoundary>(e.kind)) g.boundary = true;
    }

    // Fault timestamps for repair latency attribution.
    std::map<NodeId, double> crash_stamp;
    std::map<std::pair<NodeId, NodeId>, double> cut_stamp;
    std::map<NodeId, double> seize_stamp;
    auto violation_stamp = [&](const PathViolation& v, double now) {
        switch (v.kind) {
            case PathViolation::Kind::DeadNode:
                if (auto it = crash_stamp.find(v.node); it != crash_stamp.end()) {
                    return it->second;
                }
                return now;
            case PathViolation::Kind::MissingLink: {
                const auto key = ordered_pair(v.link_a, v.link_b);
                if (auto it = cut_stamp.find(key); it != cut_stamp.end()) return it->second;
                for (NodeId n : {v.link_a, v.link_b}) {
                    const NodeState* s = st.nodes.find(n);
                    if (s && !s->alive) {
                        if (auto it = crash_stamp.find(n); it != crash_stamp.end()) {
                            return it->second;
                        }
                    }
                }
                return now;  // the link broke by movement this very step
            }
            case PathViolation::Kind::OverCapacity: {
                double stamp = now;
                bool found = false;
                for (NodeId n : {v.link_a, v.link_b}) {
                    if (auto it = seize_stamp.find(n); it != seize_stamp.end()) {
                        stamp = found ? std::max(stamp, it->second) : it->second;
                        found = true;
                    }
                }
                return stamp;
            }
        }
        return now;
    };

    std::map<FlowId, std::size_t> flow_index;

    double prev_t = 0.0;
    for (const Group& g : groups) {
        const double t = g.t;
        const double dt = t - prev_t;
        prev_t = t;

        if (dt > 0.0) {
            step_mobility(st.nodes, dt, mobility, grid, rng);
            std::set<NodeId> heads;
            for (const ClusterState& cs : st.map.zones()) {
                if (cs.ch) heads.insert(*cs.ch);
            }
            const double base = scenario.nodes.battery_drain_per_s * dt;
            for (NodeState& n : st.nodes) {
                if (!n.alive) continue;
                const double drain =
                    heads.count(n.id) ? base * scenario.nodes.ch_drain_multiplier : base;
                n.battery = std::max(0.0, n.battery - drain);
            }
        }

        for (const ScenarioEvent* e : g.events) {
            if (const auto* c = std::get_if<ev::NodeCrash>(&e->kind)) {
                apply_fault(*e, st);
                crash_stamp.emplace(c->node, t);
                emit(t, rec::NodeCrash{c->node});
            } else if (const auto* c = std::get_if<ev::LinkCut>(&e->kind)) {
                apply_fault(*e, st);
                cut_stamp.emplace(ordered_pair(c->a, c->b), t);
                emit(t, rec::LinkCut{std::min(c->a, c->b), std::max(c->a, c->b)});
            } else if (const auto* c = std::get_if<ev::IntruderSeizure>(&e->kind)) {
                apply_fault(*e, st);
                seize_stamp[c->node] = t;
                emit(t, rec::Seizure{c->node, c->seized});
            }
        }

        rebuild_links(st, scenario.nodes.radio_range, link_scratch);
        // The zone graph is only read by repair and admission, so it is
        // rebuilt on first use per group instead of unconditionally.
        bool zone_graph_fresh = false;
        auto ensure_zone_graph = [&] {
            if (!zone_graph_fresh) {
                st.zone_graph = build_zone_graph(st.nodes, st.links, st.map, grid);
                zone_graph_fresh = true;
            }
        };

        for (const PathViolation& v : validate_paths(st.reservations, st.nodes, st.links)) {
            Reservation& res = st.reservations[flow_index.at(v.flow)];
            // An earlier repair in this group may have released enough
            // bandwidth to clear this flow's violation.
            const auto fresh = validate_path(res, st.nodes, st.links);
            if (!fresh) continue;
            const double stamp = violation_stamp(*fresh, t);
            ensure_zone_graph();
            const auto failure = repair(res, st.nodes, st.links, st.map, st.zone_graph);
            if (!failure) {
                emit(t, rec::FlowRepair{res.flow.id, res.path.node_path,
                                        res.path.zone_path, t - stamp});
            } else {
                emit(t, rec::FlowFail{res.flow.id, *failure});
            }
        }

        const MaintenanceReport report =
            maintain(st.nodes, st.links, st.map, scenario.weights, g.boundary);
        for (const auto& m : report.moved_nodes) {
            emit(t, rec::Reregister{m.node, m.from, m.to});
        }
        for (const auto& gw : report.gateway_changes) {
            emit(t, rec::GatewayChange{gw.node, gw.zone, gw.now_gateway});
        }
        for (const auto& ch : report.ch_changes) {
            emit(t, rec::ChChange{ch.zone, ch.old_ch, ch.new_ch, ch.reason});
        }

        for (const ClusterState& cs : st.map.zones()) {
            if (!cs.ch || cs.members.size() < 2) continue;
            if (!check_overload(cs, st.reservations, scenario.overload_threshold)) continue;
            ClusterState& mut = st.map.zone(cs.zone);
            const auto [old_ch, new_ch] = replace_ch(mut, st.nodes, scenario.weights,
                                                     ChChangeReason::ChOverloaded);
            if (old_ch != new_ch) {
                emit(t, rec::ChChange{cs.zone, old_ch, new_ch,
                                      ChChangeReason::ChOverloaded});
            }
        }

        // Vertices depend on alive membership and edges only on links, so a
        // graph built before the repair wave stays valid unless a node
        // changed zones.
        if (!report.moved_nodes.empty()) zone_graph_fresh = false;

        for (const ScenarioEvent* e : g.events) {
            if (const auto* dep = std::get_if<ev::FlowDeparture>(&e->kind)) {
                const auto it = flow_index.find(dep->flow);
                if (it == flow_index.end()) continue;
                Reservation& res = st.reservations[it->second];
                if (res.state != ReservationState::Active &&
                    res.state != ReservationState::Repaired) {
                    continue;  // already failed or released
                }
                release(res, st.links);
                emit(t, rec::FlowRelease{res.flow.id});
            } else if (const auto* arr = std::get_if<ev::FlowArrival>(&e->kind)) {
                FlowRequest req = arr->request;
                req.start = t;
                emit(t, rec::FlowRequest{req.id, req.src, req.dst, req.demand,
                                         req.duration});
                ensure_zone_graph();
                AdmitResult result = admit(req, st.nodes, st.links, st.map, st.zone_graph);
                if (result) {
                    flow_index[req.id] = st.reservations.size();
                    st.reservations.push_back(*result.reservation);
                    const Reservation& res = st.reservations.back();
                    emit(t, rec::FlowAdmit{req.id, res.path.node_path,
                                           res.path.zone_path, req.demand});
                } else {
                    emit(t, rec::FlowReject{req.id, result.reject,
                                            result.route_failure ==
                                                RouteFailure::ZoneExpansionInfeasible});
                }
            }
        }

        if (g.tick) {
            double residual_total = 0.0;
            for (const LinkSet::Link& l : st.links.links()) {
                residual_total += l.residual();
            }
            std::uint32_t active = 0;
            for (const Reservation& r : st.reservations) {
                if (r.state == ReservationState::Active ||
                    r.state == ReservationState::Repaired) {
                    ++active;
                }
            }
            emit(t, rec::Tick{residual_total,
                              static_cast<std::uint32_t>(st.links.size()), active});
        }

        if (check_invariants) Sweeper(st, t).check();
    }

    emit(scenario.duration, rec::RunEnd{scenario.duration});

    RunResult out;
    out.metrics = collect_metrics(trace);
    out.trace = std::move(trace);
    return out;
}

}  // namespace survsim
