#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "survsim/bandwidth.hpp"
#include "survsim/maintenance.hpp"
#include "survsim/world.hpp"

namespace survsim {

/// Trace records, one per observable transition. Serialized as one line
/// each: `t=<seconds> kind=<Kind> key=value ...` with a fixed key order per
/// kind, so identical runs produce byte-identical traces.
namespace rec {

struct RunStart {
    std::uint64_t seed = 0;
    std::uint32_t nodes = 0;
    int rows = 0;
    int cols = 0;
};

struct NodeInit {
    NodeId node = 0;
    Vec2 position;
    double speed = 0.0;
    double battery = 0.0;
    double computation = 0.0;
    ZoneId zone;
};

struct Elect {
    ZoneId zone;
    std::optional<NodeId> ch;
    std::optional<NodeId> backup;
};

struct GatewayInit {
    ZoneId zone;
    std::vector<NodeId> gateways;
};

struct Tick {
    double residual_total = 0.0;  // sum of link residuals after the tick
    std::uint32_t links = 0;
    std::uint32_t active_flows = 0;
};

struct Reregister {
    NodeId node = 0;
    ZoneId from;
    ZoneId to;
};

struct ChChange {
    ZoneId zone;
    std::optional<NodeId> old_ch;
    std::optional<NodeId> new_ch;
    ChChangeReason reason = ChChangeReason::ChFailed;
};

struct GatewayChange {
    NodeId node = 0;
    ZoneId zone;
    bool now_gateway = false;
};

struct NodeCrash {
    NodeId node = 0;
};

struct LinkCut {
    NodeId a = 0;
    NodeId b = 0;
};

struct Seizure {
    NodeId node = 0;
    double seized = 0.0;
};

struct FlowRequest {
    FlowId flow = 0;
    NodeId src = 0;
    NodeId dst = 0;
    double demand = 0.0;
    std::optional<double> duration;
};

struct FlowAdmit {
    FlowId flow = 0;
    std::vector<NodeId> path;
    std::vector<ZoneId> zones;
    double demand = 0.0;
};

struct FlowReject {
    FlowId flow = 0;
    RejectReason reason = RejectReason::NoRoute;
    bool expansion_infeasible = false;
};

struct FlowRepair {
    FlowId flow = 0;
    std::vector<NodeId> path;
    std::vector<ZoneId> zones;
    double latency = 0.0;  // seconds from the causal fault to this repair
};

struct FlowFail {
    FlowId flow = 0;
    RouteFailure reason = RouteFailure::Disconnected;
};

struct FlowRelease {
    FlowId flow = 0;
};

struct RunEnd {
    double duration = 0.0;
};

}  // namespace rec

struct TraceRecord {
    double t = 0.0;
    std::variant<rec::RunStart, rec::NodeInit, rec::Elect, rec::GatewayInit, rec::Tick,
                 rec::Reregister, rec::ChChange, rec::GatewayChange, rec::NodeCrash,
                 rec::LinkCut, rec::Seizure, rec::FlowRequest, rec::FlowAdmit,
                 rec::FlowReject, rec::FlowRepair, rec::FlowFail, rec::FlowRelease,
                 rec::RunEnd>
        payload;
};

std::string serialize_record(const TraceRecord& record);
std::string serialize_trace(const std::vector<TraceRecord>& trace);

/// Inverse of serialize_trace. Throws std::runtime_error naming the
/// offending 1-based line on malformed input.
std::vector<TraceRecord> parse_trace(std::string_view text);

/// Aggregates folded from a trace.
struct MetricsReport {
    std::uint64_t ch_changes_total = 0;
    std::uint64_t ch_changes_failed = 0;
    std::uint64_t ch_changes_left_cluster = 0;
    std::uint64_t ch_changes_period = 0;
    std::uint64_t ch_changes_overloaded = 0;

    std::uint64_t flows_requested = 0;
    std::uint64_t flows_admitted = 0;
    std::uint64_t flows_rejected = 0;
    std::uint64_t flows_rejected_no_route = 0;
    std::uint64_t flows_rejected_insufficient_bandwidth = 0;
    std::uint64_t flows_failed = 0;
    std::uint64_t flows_repaired = 0;  // distinct flows that were repaired
    std::uint64_t repair_events = 0;
    std::uint64_t flows_released = 0;
    std::uint64_t flows_active_at_end = 0;

    std::uint64_t reregistrations = 0;
    std::uint64_t gateway_churn = 0;
    std::uint64_t zone_expansion_infeasible = 0;

    std::vector<double> repair_latency;  // seconds, one entry per repair event
    double reservation_survival_rate = 1.0;  // (admitted - failed) / admitted

    std::vector<std::pair<double, double>> residual_series;  // (t, residual_total)

    friend bool operator==(const MetricsReport&, const MetricsReport&) = default;
};

/// Pure fold over trace records. Rerunning it on a persisted trace yields
/// the same report the run produced.
MetricsReport collect_metrics(const std::vector<TraceRecord>& trace);

std::string metrics_to_json(const MetricsReport& metrics);
std::string metrics_to_csv(const MetricsReport& metrics);

/// Shortest round-trip decimal form of a double, identical on every
/// platform (std::to_chars).
std::string format_double(double value);

const char* to_string(RejectReason reason);
const char* to_string(RouteFailure failure);

}  // namespace survsim
