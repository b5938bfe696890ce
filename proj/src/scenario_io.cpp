#include "survsim/scenario_io.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <utility>

namespace survsim {

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw ScenarioError("scenario: " + (path.empty() ? what : path + ": " + what));
}

double as_number(const Json& v, const std::string& path) {
    if (!v.is_number()) fail(path, "expected a number");
    return v.get<double>();
}

std::uint64_t as_uint(const Json& v, const std::string& path) {
    // Accepts signed storage too: documents assembled through the JSON API
    // hold small literals as signed integers.
    if (v.is_number_integer() && !v.is_number_unsigned() &&
        v.get<std::int64_t>() >= 0) {
        return static_cast<std::uint64_t>(v.get<std::int64_t>());
    }
    if (!v.is_number_unsigned()) fail(path, "expected a non-negative integer");
    return v.get<std::uint64_t>();
}

int as_int(const Json& v, const std::string& path) {
    if (!v.is_number_integer()) fail(path, "expected an integer");
    const auto raw = v.get<std::int64_t>();
    if (raw < std::numeric_limits<int>::min() || raw > std::numeric_limits<int>::max()) {
        fail(path, "integer out of range");
    }
    return static_cast<int>(raw);
}

std::string as_string(const Json& v, const std::string& path) {
    if (!v.is_string()) fail(path, "expected a string");
    return v.get<std::string>();
}

/// Strict object view: every key must be consumed exactly once; finish()
/// rejects leftovers by full path.
class Obj {
public:
    Obj(const Json& node, std::string path) : node_(node), path_(std::move(path)) {
        if (!node_.is_object()) fail(path_, "expected an object");
    }

    std::string sub(const std::string& key) const {
        return path_.empty() ? key : path_ + "." + key;
    }

    const Json* get(const std::string& key) {
        seen_.insert(key);
        const auto it = node_.find(key);
        return it == node_.end() ? nullptr : &*it;
    }

    const Json& require(const std::string& key) {
        const Json* v = get(key);
        if (!v) fail(sub(key), "missing required key");
        return *v;
    }

    double number(const std::string& key, double fallback) {
        const Json* v = get(key);
        return v ? as_number(*v, sub(key)) : fallback;
    }

    double number_req(const std::string& key) {
        return as_number(require(key), sub(key));
    }

    std::uint64_t uint_req(const std::string& key) {
        return as_uint(require(key), sub(key));
    }

    int integer(const std::string& key, int fallback) {
        const Json* v = get(key);
        return v ? as_int(*v, sub(key)) : fallback;
    }

    void finish() const {
        for (const auto& item : node_.items()) {
            if (!seen_.count(item.key())) fail(sub(item.key()), "unknown key");
        }
    }

private:
    const Json& node_;
    std::string path_;
    std::set<std::string> seen_;
};

NodeId as_node_id(const Json& v, const std::string& path,
                  const std::set<NodeId>& valid_ids) {
    const std::uint64_t raw = as_uint(v, path);
    if (raw > std::numeric_limits<NodeId>::max()) fail(path, "node id out of range");
    const auto id = static_cast<NodeId>(raw);
    if (!valid_ids.count(id)) fail(path, "unknown node id");
    return id;
}

GridConfig parse_grid(const Json& v, const std::string& path) {
    Obj o(v, path);
    GridConfig grid;
    grid.world_width = o.number_req("width");
    grid.world_height = o.number_req("height");
    grid.rows = o.integer("rows", 1);
    grid.cols = o.integer("cols", 1);
    o.finish();
    if (grid.world_width <= 0.0) fail(path + ".width", "must be > 0");
    if (grid.world_height <= 0.0) fail(path + ".height", "must be > 0");
    if (grid.rows < 1) fail(path + ".rows", "must be >= 1");
    if (grid.cols < 1) fail(path + ".cols", "must be >= 1");
    return grid;
}

NodePlacement parse_placement(const Json& v, const std::string& path,
                              const GridConfig& grid) {
    Obj o(v, path);
    NodePlacement p;
    const std::uint64_t raw_id = o.uint_req("id");
    if (raw_id > std::numeric_limits<NodeId>::max()) {
        fail(o.sub("id"), "node id out of range");
    }
    p.id = static_cast<NodeId>(raw_id);
    p.position.x = o.number_req("x");
    p.position.y = o.number_req("y");
    p.speed = o.number("speed", 0.0);
    p.battery = o.number("battery", 1.0);
    p.computation = o.number("computation", 1.0);
    o.finish();
    if (p.position.x < 0.0 || p.position.x >= grid.world_width) {
        fail(path + ".x", "outside the world (allowed: 0 <= x < width)");
    }
    if (p.position.y < 0.0 || p.position.y >= grid.world_height) {
        fail(path + ".y", "outside the world (allowed: 0 <= y < height)");
    }
    if (p.speed < 0.0) fail(path + ".speed", "must be >= 0");
    if (p.battery < 0.0 || p.battery > 1.0) fail(path + ".battery", "must be in [0, 1]");
    if (p.computation < 0.0 || p.computation > 1.0) {
        fail(path + ".computation", "must be in [0, 1]");
    }
    return p;
}

NodeSpec parse_nodes(const Json& v, const GridConfig& grid) {
    Obj o(v, "nodes");
    NodeSpec spec;
    const std::uint64_t count = o.uint_req("count");
    if (count > std::numeric_limits<std::uint32_t>::max()) {
        fail("nodes.count", "out of range");
    }
    spec.count = static_cast<std::uint32_t>(count);
    spec.radio_range = o.number("radio_range", spec.radio_range);
    spec.speed_min = o.number("speed_min", spec.speed_min);
    spec.speed_max = o.number("speed_max", spec.speed_max);
    spec.battery_min = o.number("battery_min", spec.battery_min);
    spec.battery_max = o.number("battery_max", spec.battery_max);
    spec.computation_min = o.number("computation_min", spec.computation_min);
    spec.computation_max = o.number("computation_max", spec.computation_max);
    spec.battery_drain_per_s = o.number("battery_drain_per_s", spec.battery_drain_per_s);
    spec.ch_drain_multiplier = o.number("ch_drain_multiplier", spec.ch_drain_multiplier);
    if (const Json* pl = o.get("placements")) {
        if (!pl->is_array()) fail("nodes.placements", "expected an array");
        std::set<NodeId> ids;
        for (std::size_t i = 0; i < pl->size(); ++i) {
            const std::string path = "nodes.placements[" + std::to_string(i) + "]";
            NodePlacement p = parse_placement((*pl)[i], path, grid);
            if (!ids.insert(p.id).second) fail(path + ".id", "duplicate node id");
            spec.placements.push_back(std::move(p));
        }
        if (spec.placements.size() != spec.count) {
            fail("nodes.placements", "size must equal nodes.count");
        }
    }
    o.finish();
    if (spec.radio_range <= 0.0) fail("nodes.radio_range", "must be > 0");
    if (spec.speed_min < 0.0) fail("nodes.speed_min", "must be >= 0");
    if (spec.speed_max < spec.speed_min) {
        fail("nodes.speed_max", "must be >= nodes.speed_min");
    }
    if (spec.battery_min < 0.0 || spec.battery_min > 1.0) {
        fail("nodes.battery_min", "must be in [0, 1]");
    }
    if (spec.battery_max < spec.battery_min || spec.battery_max > 1.0) {
        fail("nodes.battery_max", "must be in [nodes.battery_min, 1]");
    }
    if (spec.computation_min < 0.0 || spec.computation_min > 1.0) {
        fail("nodes.computation_min", "must be in [0, 1]");
    }
    if (spec.computation_max < spec.computation_min || spec.computation_max > 1.0) {
        fail("nodes.computation_max", "must be in [nodes.computation_min, 1]");
    }
    if (spec.battery_drain_per_s < 0.0) fail("nodes.battery_drain_per_s", "must be >= 0");
    if (spec.ch_drain_multiplier < 0.0) fail("nodes.ch_drain_multiplier", "must be >= 0");
    return spec;
}

ElectionWeights parse_weights(const Json& v) {
    Obj o(v, "weights");
    ElectionWeights w;
    w.a1 = o.number("a1", w.a1);
    w.a2 = o.number("a2", w.a2);
    w.a3 = o.number("a3", w.a3);
    w.a4 = o.number("a4", w.a4);
    w.a5 = o.number("a5", w.a5);
    o.finish();
    const std::pair<const char*, double> all[] = {
        {"a1", w.a1}, {"a2", w.a2}, {"a3", w.a3}, {"a4", w.a4}, {"a5", w.a5}};
    for (const auto& [name, value] : all) {
        if (value < 0.0 || value > 1.0) {
            fail(std::string("weights.") + name, "must be in [0, 1]");
        }
    }
    return w;
}

ScenarioEvent parse_event(const Json& v, const std::string& path,
                          const std::set<NodeId>& valid_ids,
                          std::set<FlowId>& arrival_flows) {
    Obj o(v, path);
    ScenarioEvent e;
    e.time = o.number_req("t");
    if (e.time < 0.0) fail(path + ".t", "must be >= 0");
    const std::string kind = as_string(o.require("kind"), o.sub("kind"));
    if (kind == "flow_arrival") {
        FlowRequest req;
        req.id = o.uint_req("flow");
        if (!arrival_flows.insert(req.id).second) {
            fail(path + ".flow", "duplicate arrival flow id");
        }
        req.src = as_node_id(o.require("src"), o.sub("src"), valid_ids);
        req.dst = as_node_id(o.require("dst"), o.sub("dst"), valid_ids);
        req.demand = o.number_req("demand");
        if (req.demand <= 0.0) fail(path + ".demand", "must be > 0");
        if (const Json* d = o.get("duration")) {
            const double dur = as_number(*d, o.sub("duration"));
            if (dur <= 0.0) fail(path + ".duration", "must be > 0");
            req.duration = dur;
        }
        req.start = e.time;
        e.kind = ev::FlowArrival{std::move(req)};
    } else if (kind == "flow_departure") {
        e.kind = ev::FlowDeparture{o.uint_req("flow")};
    } else if (kind == "node_crash") {
        e.kind = ev::NodeCrash{as_node_id(o.require("node"), o.sub("node"), valid_ids)};
    } else if (kind == "link_cut") {
        const NodeId a = as_node_id(o.require("a"), o.sub("a"), valid_ids);
        const NodeId b = as_node_id(o.require("b"), o.sub("b"), valid_ids);
        if (a == b) fail(path + ".b", "must differ from a");
        e.kind = ev::LinkCut{a, b};
    } else if (kind == "intruder_seizure") {
        const NodeId node = as_node_id(o.require("node"), o.sub("node"), valid_ids);
        const double seized = o.number_req("seized");
        if (seized < 0.0) fail(path + ".seized", "must be >= 0");
        e.kind = ev::IntruderSeizure{node, seized};
    } else if (kind == "mobility_epoch") {
        e.kind = ev::MobilityEpoch{};
    } else if (kind == "maintenance_tick") {
        e.kind = ev::MaintenanceTick{};
    } else if (kind == "election_boundary") {
        e.kind = ev::ElectionPeriodBoundary{};
    } else {
        fail(path + ".kind", "unknown event kind \"" + kind + "\"");
    }
    o.finish();
    return e;
}

}  // namespace

Scenario scenario_from_json(const Json& doc) {
    Obj o(doc, "");
    Scenario sc;

    if (const Json* v = o.get("seed")) sc.seed = as_uint(*v, "seed");
    sc.grid = parse_grid(o.require("grid"), "grid");
    sc.nodes = parse_nodes(o.require("nodes"), sc.grid);
    if (const Json* v = o.get("weights")) sc.weights = parse_weights(*v);

    sc.link_capacity = o.number("link_capacity", sc.link_capacity);
    if (sc.link_capacity <= 0.0) fail("link_capacity", "must be > 0");
    sc.election_period = o.number("election_period", sc.election_period);
    if (sc.election_period <= 0.0) fail("election_period", "must be > 0");
    sc.maintenance_tick = o.number("maintenance_tick", sc.maintenance_tick);
    if (sc.maintenance_tick <= 0.0) fail("maintenance_tick", "must be > 0");
    sc.overload_threshold = o.integer("overload_threshold", sc.overload_threshold);
    if (sc.overload_threshold < 1) fail("overload_threshold", "must be >= 1");

    std::set<NodeId> valid_ids;
    if (!sc.nodes.placements.empty()) {
        for (const NodePlacement& p : sc.nodes.placements) valid_ids.insert(p.id);
    } else {
        for (std::uint32_t i = 0; i < sc.nodes.count; ++i) valid_ids.insert(i);
    }

    double max_event_t = 0.0;
    if (const Json* ev_arr = o.get("events")) {
        if (!ev_arr->is_array()) fail("events", "expected an array");
        std::set<FlowId> arrival_flows;
        for (std::size_t i = 0; i < ev_arr->size(); ++i) {
            const std::string path = "events[" + std::to_string(i) + "]";
            ScenarioEvent e = parse_event((*ev_arr)[i], path, valid_ids, arrival_flows);
            max_event_t = std::max(max_event_t, e.time);
            sc.events.push_back(std::move(e));
        }
    }

    if (const Json* v = o.get("duration")) {
        sc.duration = as_number(*v, "duration");
        if (sc.duration < 0.0) fail("duration", "must be >= 0");
        if (sc.duration < max_event_t) fail("duration", "earlier than the last event");
    } else {
        sc.duration = max_event_t;
    }

    o.finish();
    return sc;
}

Json scenario_to_json(const Scenario& sc) {
    Json doc;
    doc["seed"] = sc.seed;
    doc["grid"] = Json{{"width", sc.grid.world_width},
                       {"height", sc.grid.world_height},
                       {"rows", sc.grid.rows},
                       {"cols", sc.grid.cols}};
    Json nodes;
    nodes["count"] = sc.nodes.count;
    nodes["radio_range"] = sc.nodes.radio_range;
    nodes["speed_min"] = sc.nodes.speed_min;
    nodes["speed_max"] = sc.nodes.speed_max;
    nodes["battery_min"] = sc.nodes.battery_min;
    nodes["battery_max"] = sc.nodes.battery_max;
    nodes["computation_min"] = sc.nodes.computation_min;
    nodes["computation_max"] = sc.nodes.computation_max;
    nodes["battery_drain_per_s"] = sc.nodes.battery_drain_per_s;
    nodes["ch_drain_multiplier"] = sc.nodes.ch_drain_multiplier;
    if (!sc.nodes.placements.empty()) {
        Json arr = Json::array();
        for (const NodePlacement& p : sc.nodes.placements) {
            arr.push_back(Json{{"id", p.id},
                               {"x", p.position.x},
                               {"y", p.position.y},
                               {"speed", p.speed},
                               {"battery", p.battery},
                               {"computation", p.computation}});
        }
        nodes["placements"] = std::move(arr);
    }
    doc["nodes"] = std::move(nodes);
    doc["weights"] = Json{{"a1", sc.weights.a1},
                          {"a2", sc.weights.a2},
                          {"a3", sc.weights.a3},
                          {"a4", sc.weights.a4},
                          {"a5", sc.weights.a5}};
    doc["link_capacity"] = sc.link_capacity;
    doc["election_period"] = sc.election_period;
    doc["maintenance_tick"] = sc.maintenance_tick;
    doc["overload_threshold"] = sc.overload_threshold;
    doc["duration"] = sc.duration;

    Json events = Json::array();
    for (const ScenarioEvent& e : sc.events) {
        Json ev;
        ev["t"] = e.time;
        if (const auto* a = std::get_if<ev::FlowArrival>(&e.kind)) {
            ev["kind"] = "flow_arrival";
            ev["flow"] = a->request.id;
            ev["src"] = a->request.src;
            ev["dst"] = a->request.dst;
            ev["demand"] = a->request.demand;
            if (a->request.duration) ev["duration"] = *a->request.duration;
        } else if (const auto* d = std::get_if<ev::FlowDeparture>(&e.kind)) {
            ev["kind"] = "flow_departure";
            ev["flow"] = d->flow;
        } else if (const auto* c = std::get_if<ev::NodeCrash>(&e.kind)) {
            ev["kind"] = "node_crash";
            ev["node"] = c->node;
        } else if (const auto* c = std::get_if<ev::LinkCut>(&e.kind)) {
            ev["kind"] = "link_cut";
            ev["a"] = c->a;
            ev["b"] = c->b;
        } else if (const auto* s = std::get_if<ev::IntruderSeizure>(&e.kind)) {
            ev["kind"] = "intruder_seizure";
            ev["node"] = s->node;
            ev["seized"] = s->seized;
        } else if (std::holds_alternative<ev::MobilityEpoch>(e.kind)) {
            ev["kind"] = "mobility_epoch";
        } else if (std::holds_alternative<ev::MaintenanceTick>(e.kind)) {
            ev["kind"] = "maintenance_tick";
        } else {
            ev["kind"] = "election_boundary";
        }
        events.push_back(std::move(ev));
    }
    doc["events"] = std::move(events);
    return doc;
}

Scenario parse_scenario_text(const std::string& text) {
    Json doc;
    try {
        doc = Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ScenarioError(std::string("scenario: invalid JSON: ") + e.what());
    }
    return scenario_from_json(doc);
}

Scenario parse_scenario_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ScenarioError("scenario: cannot open file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_scenario_text(buf.str());
}

}  // namespace survsim
