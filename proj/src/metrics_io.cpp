#include <numeric>

#include <json.hpp>

#include "survsim/trace.hpp"
#include "survsim/version.hpp"

namespace survsim {

std::string metrics_to_json(const MetricsReport& m) {
    nlohmann::ordered_json j;
    j["ch_changes_total"] = m.ch_changes_total;
    j["ch_changes_failed"] = m.ch_changes_failed;
    j["ch_changes_left_cluster"] = m.ch_changes_left_cluster;
    j["ch_changes_period"] = m.ch_changes_period;
    j["ch_changes_overloaded"] = m.ch_changes_overloaded;
    j["flows_requested"] = m.flows_requested;
    j["flows_admitted"] = m.flows_admitted;
    j["flows_rejected"] = m.flows_rejected;
    j["flows_rejected_no_route"] = m.flows_rejected_no_route;
    j["flows_rejected_insufficient_bandwidth"] = m.flows_rejected_insufficient_bandwidth;
    j["flows_failed"] = m.flows_failed;
    j["flows_repaired"] = m.flows_repaired;
    j["repair_events"] = m.repair_events;
    j["flows_released"] = m.flows_released;
    j["flows_active_at_end"] = m.flows_active_at_end;
    j["reregistrations"] = m.reregistrations;
    j["gateway_churn"] = m.gateway_churn;
    j["zone_expansion_infeasible"] = m.zone_expansion_infeasible;
    j["repair_latency"] = m.repair_latency;
    j["reservation_survival_rate"] = m.reservation_survival_rate;
    auto series = nlohmann::ordered_json::array();
    for (const auto& [t, residual] : m.residual_series) {
        series.push_back({t, residual});
    }
    j["residual_series"] = std::move(series);
    return j.dump(2) + "\n";
}

std::string metrics_to_csv(const MetricsReport& m) {
    std::string out = "# schema=survsim-metrics-1 tool=survsim-";
    out += kVersion;
    out += "\nmetric,value\n";
    auto row = [&out](std::string_view key, std::string value) {
        out += key;
        out += ',';
        out += value;
        out += '\n';
    };
    row("ch_changes_total", std::to_string(m.ch_changes_total));
    row("ch_changes_failed", std::to_string(m.ch_changes_failed));
    row("ch_changes_left_cluster", std::to_string(m.ch_changes_left_cluster));
    row("ch_changes_period", std::to_string(m.ch_changes_period));
    row("ch_changes_overloaded", std::to_string(m.ch_changes_overloaded));
    row("flows_requested", std::to_string(m.flows_requested));
    row("flows_admitted", std::to_string(m.flows_admitted));
    row("flows_rejected", std::to_string(m.flows_rejected));
    row("flows_rejected_no_route", std::to_string(m.flows_rejected_no_route));
    row("flows_rejected_insufficient_bandwidth",
        std::to_string(m.flows_rejected_insufficient_bandwidth));
    row("flows_failed", std::to_string(m.flows_failed));
    row("flows_repaired", std::to_string(m.flows_repaired));
    row("repair_events", std::to_string(m.repair_events));
    row("flows_released", std::to_string(m.flows_released));
    row("flows_active_at_end", std::to_string(m.flows_active_at_end));
    row("reregistrations", std::to_string(m.reregistrations));
    row("gateway_churn", std::to_string(m.gateway_churn));
    row("zone_expansion_infeasible", std::to_string(m.zone_expansion_infeasible));
    row("repair_latency_count", std::to_string(m.repair_latency.size()));
    const double latency_mean =
        m.repair_latency.empty()
            ? 0.0
            : std::accumulate(m.repair_latency.begin(), m.repair_latency.end(), 0.0) /
                  static_cast<double>(m.repair_latency.size());
    row("repair_latency_mean", format_double(latency_mean));
    row("reservation_survival_rate", format_double(m.reservation_survival_rate));
    row("residual_final",
        format_double(m.residual_series.empty() ? 0.0 : m.residual_series.back().second));
    return out;
}

}  // namespace survsim
