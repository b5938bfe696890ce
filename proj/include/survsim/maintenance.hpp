#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "survsim/bandwidth.hpp"
#include "survsim/clustering.hpp"
#include "survsim/world.hpp"

namespace survsim {

enum class ChChangeReason { ChFailed, ChLeftCluster, ElectionPeriodEnded, ChOverloaded };

const char* to_string(ChChangeReason reason);

/// Everything one maintenance pass changed, for tracing.
struct MaintenanceReport {
    struct Move {
        NodeId node = 0;
        ZoneId from;
        ZoneId to;

        friend bool operator==(const Move&, const Move&) = default;
    };
    struct ChChange {
        ZoneId zone;
        std::optional<NodeId> old_ch;  // CH before the pass (may be dead)
        std::optional<NodeId> new_ch;
        ChChangeReason reason = ChChangeReason::ChFailed;

        friend bool operator==(const ChChange&, const ChChange&) = default;
    };
    struct GatewayChange {
        NodeId node = 0;
        ZoneId zone;
        bool now_gateway = false;

        friend bool operator==(const GatewayChange&, const GatewayChange&) = default;
    };

    std::vector<Move> moved_nodes;
    std::vector<ChChange> ch_changes;
    std::vector<GatewayChange> gateway_changes;

    bool empty() const {
        return moved_nodes.empty() && ch_changes.empty() && gateway_changes.empty();
    }
};

/// One maintenance pass, in order: scrub dead members, re-register nodes
/// that changed zone, recompute gateway status, then replace the CH of
/// every zone whose CH died (ChFailed) or is absent (ChLeftCluster), or of
/// every populated zone when the election period elapsed
/// (ElectionPeriodEnded). A zone gets at most one replacement per pass; the
/// fault reasons win over period expiry.
MaintenanceReport maintain(NodeTable& nodes, const LinkSet& links, ClusterMap& map,
                           const ElectionWeights& weights, bool election_period_elapsed);

/// Replaces the cluster's CH for the given reason. Failure reasons
/// (ChFailed / ChLeftCluster / ChOverloaded) promote the recorded backup
/// when it is still an alive member, otherwise elect fresh among the
/// remaining members; ElectionPeriodEnded always elects fresh among all
/// alive members. The new backup is re-elected either way. ch_count of the
/// new CH increments only when the role actually changes hands. Returns
/// (old ch, new ch) as seen by this call. Throws std::domain_error when the
/// reason does not match the cluster's state.
std::pair<std::optional<NodeId>, std::optional<NodeId>> replace_ch(
    ClusterState& cluster, NodeTable& nodes, const ElectionWeights& weights,
    ChChangeReason reason);

/// True iff more than `threshold` of the Active/Repaired reservations run
/// through the cluster's CH.
bool check_overload(const ClusterState& cluster,
                    const std::vector<Reservation>& reservations, int threshold);

}  // namespace survsim
