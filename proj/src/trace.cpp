#include "survsim/trace.hpp"

#include <charconv>
#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>

#include "survsim/version.hpp"

namespace survsim {

namespace {

void append_kv(std::string& out, std::string_view key, std::string_view value) {
    out += ' ';
    out += key;
    out += '=';
    out += value;
}

std::string format_zone(ZoneId z) {
    return std::to_string(z.row) + ',' + std::to_string(z.col);
}

std::string format_zone_list(const std::vector<ZoneId>& zones) {
    if (zones.empty()) return "none";
    std::string out;
    for (std::size_t i = 0; i < zones.size(); ++i) {
        if (i) out += '|';
        out += format_zone(zones[i]);
    }
    return out;
}

std::string format_node_list(const std::vector<NodeId>& nodes) {
    if (nodes.empty()) return "none";
    std::string out;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (i) out += '-';
        out += std::to_string(nodes[i]);
    }
    return out;
}

std::string format_opt_node(const std::optional<NodeId>& n) {
    return n ? std::to_string(*n) : "none";
}

struct LineError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

[[noreturn]] void fail(std::string_view what) { throw LineError(std::string(what)); }

double parse_double(std::string_view s) {
    double v = 0.0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size()) fail("bad number");
    return v;
}

template <typename T>
T parse_uint(std::string_view s) {
    T v = 0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size()) fail("bad integer");
    return v;
}

int parse_int(std::string_view s) {
    int v = 0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size()) fail("bad integer");
    return v;
}

ZoneId parse_zone(std::string_view s) {
    const auto comma = s.find(',');
    if (comma == std::string_view::npos) fail("bad zone");
    return ZoneId{parse_int(s.substr(0, comma)), parse_int(s.substr(comma + 1))};
}

std::vector<ZoneId> parse_zone_list(std::string_view s) {
    std::vector<ZoneId> out;
    if (s == "none") return out;
    while (!s.empty()) {
        const auto bar = s.find('|');
        out.push_back(parse_zone(s.substr(0, bar)));
        if (bar == std::string_view::npos) break;
        s.remove_prefix(bar + 1);
    }
    return out;
}

std::vector<NodeId> parse_node_list(std::string_view s) {
    std::vector<NodeId> out;
    if (s == "none") return out;
    while (!s.empty()) {
        const auto dash = s.find('-');
        out.push_back(parse_uint<NodeId>(s.substr(0, dash)));
        if (dash == std::string_view::npos) break;
        s.remove_prefix(dash + 1);
    }
    return out;
}

std::optional<NodeId> parse_opt_node(std::string_view s) {
    if (s == "none") return std::nullopt;
    return parse_uint<NodeId>(s);
}

ChChangeReason parse_reason(std::string_view s) {
    if (s == "ch_failed") return ChChangeReason::ChFailed;
    if (s == "ch_left_cluster") return ChChangeReason::ChLeftCluster;
    if (s == "election_period_ended") return ChChangeReason::ElectionPeriodEnded;
    if (s == "ch_overloaded") return ChChangeReason::ChOverloaded;
    fail("bad ch-change reason");
}

RejectReason parse_reject(std::string_view s) {
    if (s == "no_route") return RejectReason::NoRoute;
    if (s == "insufficient_bandwidth") return RejectReason::InsufficientBandwidth;
    fail("bad reject reason");
}

RouteFailure parse_route_failure(std::string_view s) {
    if (s == "disconnected") return RouteFailure::Disconnected;
    if (s == "insufficient_bandwidth") return RouteFailure::InsufficientBandwidth;
    if (s == "zone_expansion_infeasible") return RouteFailure::ZoneExpansionInfeasible;
    fail("bad route failure");
}

/// Walks the `key=value` tokens of one line in declaration order.
class FieldCursor {
public:
    explicit FieldCursor(std::string_view line) {
        while (!line.empty()) {
            const auto space = line.find(' ');
            const std::string_view token = line.substr(0, space);
            const auto eq = token.find('=');
            if (eq == std::string_view::npos || eq == 0) fail("malformed token");
            fields_.emplace_back(token.substr(0, eq), token.substr(eq + 1));
            if (space == std::string_view::npos) break;
            line.remove_prefix(space + 1);
        }
    }

    std::string_view need(std::string_view key) {
        if (pos_ >= fields_.size() || fields_[pos_].first != key) {
            fail(std::string("expected field ") + std::string(key));
        }
        return fields_[pos_++].second;
    }

    void done() const {
        if (pos_ != fields_.size()) fail("trailing fields");
    }

private:
    std::vector<std::pair<std::string_view, std::string_view>> fields_;
    std::size_t pos_ = 0;
};

TraceRecord parse_line(std::string_view line) {
    FieldCursor c(line);
    TraceRecord r;
    r.t = parse_double(c.need("t"));
    const std::string_view kind = c.need("kind");

    if (kind == "RunStart") {
        rec::RunStart p;
        p.seed = parse_uint<std::uint64_t>(c.need("seed"));
        p.nodes = parse_uint<std::uint32_t>(c.need("nodes"));
        p.rows = parse_int(c.need("rows"));
        p.cols = parse_int(c.need("cols"));
        r.payload = p;
    } else if (kind == "NodeInit") {
        rec::NodeInit p;
        p.node = parse_uint<NodeId>(c.need("node"));
        p.position.x = parse_double(c.need("x"));
        p.position.y = parse_double(c.need("y"));
        p.speed = parse_double(c.need("speed"));
        p.battery = parse_double(c.need("battery"));
        p.computation = parse_double(c.need("computation"));
        p.zone = parse_zone(c.need("zone"));
        r.payload = p;
    } else if (kind == "Elect") {
        rec::Elect p;
        p.zone = parse_zone(c.need("zone"));
        p.ch = parse_opt_node(c.need("ch"));
        p.backup = parse_opt_node(c.need("backup"));
        r.payload = p;
    } else if (kind == "GatewayInit") {
        rec::GatewayInit p;
        p.zone = parse_zone(c.need("zone"));
        p.gateways = parse_node_list(c.need("gateways"));
        r.payload = p;
    } else if (kind == "Tick") {
        rec::Tick p;
        p.residual_total = parse_double(c.need("residual_total"));
        p.links = parse_uint<std::uint32_t>(c.need("links"));
        p.active_flows = parse_uint<std::uint32_t>(c.need("active_flows"));
        r.payload = p;
    } else if (kind == "Reregister") {
        rec::Reregister p;
        p.node = parse_uint<NodeId>(c.need("node"));
        p.from = parse_zone(c.need("from"));
        p.to = parse_zone(c.need("to"));
        r.payload = p;
    } else if (kind == "ChChange") {
        rec::ChChange p;
        p.zone = parse_zone(c.need("zone"));
        p.old_ch = parse_opt_node(c.need("old"));
        p.new_ch = parse_opt_node(c.need("new"));
        p.reason = parse_reason(c.need("reason"));
        r.payload = p;
    } else if (kind == "GatewayChange") {
        rec::GatewayChange p;
        p.node = parse_uint<NodeId>(c.need("node"));
        p.zone = parse_zone(c.need("zone"));
        p.now_gateway = parse_int(c.need("gateway")) != 0;
        r.payload = p;
    } else if (kind == "NodeCrash") {
        rec::NodeCrash p;
        p.node = parse_uint<NodeId>(c.need("node"));
        r.payload = p;
    } else if (kind == "LinkCut") {
        rec::LinkCut p;
        p.a = parse_uint<NodeId>(c.need("a"));
        p.b = parse_uint<NodeId>(c.need("b"));
        r.payload = p;
    } else if (kind == "Seizure") {
        rec::Seizure p;
        p.node = parse_uint<NodeId>(c.need("node"));
        p.seized = parse_double(c.need("seized"));
        r.payload = p;
    } else if (kind == "FlowRequest") {
        rec::FlowRequest p;
        p.flow = parse_uint<FlowId>(c.need("flow"));
        p.src = parse_uint<NodeId>(c.need("src"));
        p.dst = parse_uint<NodeId>(c.need("dst"));
        p.demand = parse_double(c.need("demand"));
        const std::string_view d = c.need("duration");
        if (d != "none") p.duration = parse_double(d);
        r.payload = p;
    } else if (kind == "FlowAdmit") {
        rec::FlowAdmit p;
        p.flow = parse_uint<FlowId>(c.need("flow"));
        p.path = parse_node_list(c.need("path"));
        p.zones = parse_zone_list(c.need("zones"));
        p.demand = parse_double(c.need("demand"));
        r.payload = p;
    } else if (kind == "FlowReject") {
        rec::FlowReject p;
        p.flow = parse_uint<FlowId>(c.need("flow"));
        p.reason = parse_reject(c.need("reason"));
        p.expansion_infeasible = parse_int(c.need("expansion_infeasible")) != 0;
        r.payload = p;
    } else if (kind == "FlowRepair") {
        rec::FlowRepair p;
        p.flow = parse_uint<FlowId>(c.need("flow"));
        p.path = parse_node_list(c.need("path"));
        p.zones = parse_zone_list(c.need("zones"));
        p.latency = parse_double(c.need("latency"));
        r.payload = p;
    } else if (kind == "FlowFail") {
        rec::FlowFail p;
        p.flow = parse_uint<FlowId>(c.need("flow"));
        p.reason = parse_route_failure(c.need("reason"));
        r.payload = p;
    } else if (kind == "FlowRelease") {
        rec::FlowRelease p;
        p.flow = parse_uint<FlowId>(c.need("flow"));
        r.payload = p;
    } else if (kind == "RunEnd") {
        rec::RunEnd p;
        p.duration = parse_double(c.need("duration"));
        r.payload = p;
    } else {
        fail("unknown record kind");
    }
    c.done();
    return r;
}

struct Serializer {
    std::string& out;

    void operator()(const rec::RunStart& p) const {
        append_kv(out, "kind", "RunStart");
        append_kv(out, "seed", std::to_string(p.seed));
        append_kv(out, "nodes", std::to_string(p.nodes));
        append_kv(out, "rows", std::to_string(p.rows));
        append_kv(out, "cols", std::to_string(p.cols));
    }
    void operator()(const rec::NodeInit& p) const {
        append_kv(out, "kind", "NodeInit");
        append_kv(out, "node", std::to_string(p.node));
        append_kv(out, "x", format_double(p.position.x));
        append_kv(out, "y", format_double(p.position.y));
        append_kv(out, "speed", format_double(p.speed));
        append_kv(out, "battery", format_double(p.battery));
        append_kv(out, "computation", format_double(p.computation));
        append_kv(out, "zone", format_zone(p.zone));
    }
    void operator()(const rec::Elect& p) const {
        append_kv(out, "kind", "Elect");
        append_kv(out, "zone", format_zone(p.zone));
        append_kv(out, "ch", format_opt_node(p.ch));
        append_kv(out, "backup", format_opt_node(p.backup));
    }
    void operator()(const rec::GatewayInit& p) const {
        append_kv(out, "kind", "GatewayInit");
        append_kv(out, "zone", format_zone(p.zone));
        append_kv(out, "gateways", format_node_list(p.gateways));
    }
    void operator()(const rec::Tick& p) const {
        append_kv(out, "kind", "Tick");
        append_kv(out, "residual_total", format_double(p.residual_total));
        append_kv(out, "links", std::to_string(p.links));
        append_kv(out, "active_flows", std::to_string(p.active_flows));
    }
    void operator()(const rec::Reregister& p) const {
        append_kv(out, "kind", "Reregister");
        append_kv(out, "node", std::to_string(p.node));
        append_kv(out, "from", format_zone(p.from));
        append_kv(out, "to", format_zone(p.to));
    }
    void operator()(const rec::ChChange& p) const {
        append_kv(out, "kind", "ChChange");
        append_kv(out, "zone", format_zone(p.zone));
        append_kv(out, "old", format_opt_node(p.old_ch));
        append_kv(out, "new", format_opt_node(p.new_ch));
        append_kv(out, "reason", to_string(p.reason));
    }
    void operator()(const rec::GatewayChange& p) const {
        append_kv(out, "kind", "GatewayChange");
        append_kv(out, "node", std::to_string(p.node));
        append_kv(out, "zone", format_zone(p.zone));
        append_kv(out, "gateway", p.now_gateway ? "1" : "0");
    }
    void operator()(const rec::NodeCrash& p) const {
        append_kv(out, "kind", "NodeCrash");
        append_kv(out, "node", std::to_string(p.node));
    }
    void operator()(const rec::LinkCut& p) const {
        append_kv(out, "kind", "LinkCut");
        append_kv(out, "a", std::to_string(p.a));
        append_kv(out, "b", std::to_string(p.b));
    }
    void operator()(const rec::Seizure& p) const {
        append_kv(out, "kind", "Seizure");
        append_kv(out, "node", std::to_string(p.node));
        append_kv(out, "seized", format_double(p.seized));
    }
    void operator()(const rec::FlowRequest& p) const {
        append_kv(out, "kind", "FlowRequest");
        append_kv(out, "flow", std::to_string(p.flow));
        append_kv(out, "src", std::to_string(p.src));
        append_kv(out, "dst", std::to_string(p.dst));
        append_kv(out, "demand", format_double(p.demand));
        append_kv(out, "duration", p.duration ? format_double(*p.duration) : "none");
    }
    void operator()(const rec::FlowAdmit& p) const {
        append_kv(out, "kind", "FlowAdmit");
        append_kv(out, "flow", std::to_string(p.flow));
        append_kv(out, "path", format_node_list(p.path));
        append_kv(out, "zones", format_zone_list(p.zones));
        append_kv(out, "demand", format_double(p.demand));
    }
    void operator()(const rec::FlowReject& p) const {
        append_kv(out, "kind", "FlowReject");
        append_kv(out, "flow", std::to_string(p.flow));
        append_kv(out, "reason", to_string(p.reason));
        append_kv(out, "expansion_infeasible", p.expansion_infeasible ? "1" : "0");
    }
    void operator()(const rec::FlowRepair& p) const {
        append_kv(out, "kind", "FlowRepair");
        append_kv(out, "flow", std::to_string(p.flow));
        append_kv(out, "path", format_node_list(p.path));
        append_kv(out, "zones", format_zone_list(p.zones));
        append_kv(out, "latency", format_double(p.latency));
    }
    void operator()(const rec::FlowFail& p) const {
        append_kv(out, "kind", "FlowFail");
        append_kv(out, "flow", std::to_string(p.flow));
        append_kv(out, "reason", to_string(p.reason));
    }
    void operator()(const rec::FlowRelease& p) const {
        append_kv(out, "kind", "FlowRelease");
        append_kv(out, "flow", std::to_string(p.flow));
    }
    void operator()(const rec::RunEnd& p) const {
        append_kv(out, "kind", "RunEnd");
        append_kv(out, "duration", format_double(p.duration));
    }
};

}  // namespace

std::string format_double(double value) {
    char buf[64];
    const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, p);
}

const char* to_string(RejectReason reason) {
    switch (reason) {
        case RejectReason::NoRoute: return "no_route";
        case RejectReason::InsufficientBandwidth: return "insufficient_bandwidth";
    }
    return "unknown";
}

const char* to_string(RouteFailure failure) {
    switch (failure) {
        case RouteFailure::Disconnected: return "disconnected";
        case RouteFailure::InsufficientBandwidth: return "insufficient_bandwidth";
        case RouteFailure::ZoneExpansionInfeasible: return "zone_expansion_infeasible";
    }
    return "unknown";
}

std::string serialize_record(const TraceRecord& record) {
    std::string out = "t=" + format_double(record.t);
    std::visit(Serializer{out}, record.payload);
    return out;
}

std::string serialize_trace(const std::vector<TraceRecord>& trace) {
    std::string out;
    for (const TraceRecord& r : trace) {
        out += serialize_record(r);
        out += '\n';
    }
    return out;
}

std::vector<TraceRecord> parse_trace(std::string_view text) {
    std::vector<TraceRecord> out;
    int line_no = 0;
    while (!text.empty()) {
        ++line_no;
        const auto nl = text.find('\n');
        const std::string_view line = text.substr(0, nl);
        if (!line.empty()) {
            try {
                out.push_back(parse_line(line));
            } catch (const LineError& e) {
                throw std::runtime_error("trace parse error at line " +
                                         std::to_string(line_no) + ": " + e.what());
            }
        }
        if (nl == std::string_view::npos) break;
        text.remove_prefix(nl + 1);
    }
    return out;
}

MetricsReport collect_metrics(const std::vector<TraceRecord>& trace) {
    MetricsReport m;
    std::set<FlowId> admitted;
    std::set<FlowId> repaired;
    std::set<FlowId> failed;
    std::set<FlowId> released;

    for (const TraceRecord& r : trace) {
        if (const auto* p = std::get_if<rec::ChChange>(&r.payload)) {
            ++m.ch_changes_total;
            switch (p->reason) {
                case ChChangeReason::ChFailed: ++m.ch_changes_failed; break;
                case ChChangeReason::ChLeftCluster: ++m.ch_changes_left_cluster; break;
                case ChChangeReason::ElectionPeriodEnded: ++m.ch_changes_period; break;
                case ChChangeReason::ChOverloaded: ++m.ch_changes_overloaded; break;
            }
        } else if (std::get_if<rec::Reregister>(&r.payload)) {
            ++m.reregistrations;
        } else if (std::get_if<rec::GatewayChange>(&r.payload)) {
            ++m.gateway_churn;
        } else if (std::get_if<rec::FlowRequest>(&r.payload)) {
            ++m.flows_requested;
        } else if (const auto* p = std::get_if<rec::FlowAdmit>(&r.payload)) {
            ++m.flows_admitted;
            admitted.insert(p->flow);
        } else if (const auto* p = std::get_if<rec::FlowReject>(&r.payload)) {
            ++m.flows_rejected;
            if (p->reason == RejectReason::NoRoute) ++m.flows_rejected_no_route;
            else ++m.flows_rejected_insufficient_bandwidth;
            if (p->expansion_infeasible) ++m.zone_expansion_infeasible;
        } else if (const auto* p = std::get_if<rec::FlowRepair>(&r.payload)) {
            ++m.repair_events;
            repaired.insert(p->flow);
            m.repair_latency.push_back(p->latency);
        } else if (const auto* p = std::get_if<rec::FlowFail>(&r.payload)) {
            ++m.flows_failed;
            failed.insert(p->flow);
            if (p->reason == RouteFailure::ZoneExpansionInfeasible) {
                ++m.zone_expansion_infeasible;
            }
        } else if (const auto* p = std::get_if<rec::FlowRelease>(&r.payload)) {
            ++m.flows_released;
            released.insert(p->flow);
        } else if (const auto* p = std::get_if<rec::Tick>(&r.payload)) {
            m.residual_series.emplace_back(r.t, p->residual_total);
        }
    }

    m.flows_repaired = repaired.size();
    m.flows_active_at_end = admitted.size() - failed.size() - released.size();
    m.reservation_survival_rate =
        admitted.empty() ? 1.0
                         : static_cast<double>(admitted.size() - failed.size()) /
                               static_cast<double>(admitted.size());
    return m;
}

}  // namespace survsim
