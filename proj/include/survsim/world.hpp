#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace survsim {

using NodeId = std::uint32_t;

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const Vec2&, const Vec2&) = default;
};

double distance(const Vec2& a, const Vec2& b);

/// Bounded rectangular world split into a fixed grid of rows x cols cells.
/// Cells are half-open in both axes, so every in-bounds position falls in
/// exactly one cell.
struct GridConfig {
    double world_width = 0.0;   // meters
    double world_height = 0.0;  // meters
    int rows = 1;
    int cols = 1;

    double cell_width() const { return world_width / cols; }
    double cell_height() const { return world_height / rows; }
    int zone_count() const { return rows * cols; }

    bool valid() const {
        return world_width > 0.0 && world_height > 0.0 && rows >= 1 && cols >= 1;
    }

    friend bool operator==(const GridConfig&, const GridConfig&) = default;
};

/// (row, col) address of one grid cell; each cell is one cluster.
struct ZoneId {
    int row = 0;
    int col = 0;

    friend auto operator<=>(const ZoneId&, const ZoneId&) = default;
};

struct NodeState {
    NodeId id = 0;
    Vec2 position;
    Vec2 waypoint;
    double speed = 0.0;        // m/s toward waypoint
    double radio_range = 0.0;  // identical for all nodes in a scenario
    double battery = 1.0;      // [0,1]
    double computation = 1.0;  // [0,1]
    std::uint32_t ch_count = 0;  // times this node assumed the CH role
    bool alive = true;

    friend bool operator==(const NodeState&, const NodeState&) = default;
};

/// Node set addressable by id. Ids need not be dense but must be unique.
class NodeTable {
public:
    NodeTable() = default;
    explicit NodeTable(std::vector<NodeState> nodes);

    const NodeState* find(NodeId id) const;
    NodeState* find(NodeId id);
    const NodeState& at(NodeId id) const;  // throws std::out_of_range
    NodeState& at(NodeId id);

    auto begin() const { return nodes_.begin(); }
    auto end() const { return nodes_.end(); }
    auto begin() { return nodes_.begin(); }
    auto end() { return nodes_.end(); }
    std::size_t size() const { return nodes_.size(); }
    bool empty() const { return nodes_.empty(); }

private:
    std::vector<NodeState> nodes_;  // sorted by id
};

/// Undirected unit-disk link set with per-link bandwidth accounting.
/// Links exist only between distinct alive nodes; (u,v) and (v,u) are the
/// same link.
class LinkSet {
public:
    struct Link {
        NodeId a = 0;  // a < b
        NodeId b = 0;
        double capacity = 0.0;
        double reserved = 0.0;

        double residual() const { return capacity - reserved; }
    };

    LinkSet() = default;
    static LinkSet from_links(std::vector<Link> links);

    /// Replaces the whole link set, reusing internal buffers. Semantics match
    /// from_links on the same records; on a validation throw the set is left
    /// unspecified.
    void assign(std::span<const Link> links);

    bool has(NodeId u, NodeId v) const;
    const Link* find(NodeId u, NodeId v) const;
    /// Residual bandwidth of link (u,v); throws std::out_of_range if absent.
    double residual(NodeId u, NodeId v) const;

    void add_link(NodeId u, NodeId v, double capacity);
    void remove_link(NodeId u, NodeId v);
    void set_capacity(NodeId u, NodeId v, double capacity);
    /// Adds delta to the reserved amount of (u,v); throws if the link is
    /// absent. Negative deltas release bandwidth.
    void add_reserved(NodeId u, NodeId v, double delta);

    /// Neighbor ids of u in ascending order.
    std::span<const NodeId> neighbors(NodeId u) const;
    /// Indices into links() of u's incident links, parallel to neighbors(u).
    std::span<const std::uint32_t> neighbor_links(NodeId u) const;

    const std::vector<Link>& links() const { return links_; }
    std::size_t size() const { return links_.size(); }
    bool empty() const { return links_.empty(); }

private:
    Link* find_mut(NodeId u, NodeId v);
    void normalize_and_index();
    void rebuild_adjacency();
    void rebuild_adjacency(NodeId max_id);

    std::vector<Link> links_;  // sorted by (a,b)
    std::vector<NodeId> adj_nodes_;       // sorted
    std::vector<std::uint32_t> adj_off_;  // CSR offsets, one past adj_nodes_
    std::vector<NodeId> adj_flat_;        // neighbor lists, ascending per node
    std::vector<std::uint32_t> adj_link_;  // link index per adj_flat_ entry
};

/// Deterministic random source. Wraps std::mt19937_64 and maps draws to
/// ranges without std::uniform_*_distribution so that identical seeds give
/// identical streams on every platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform in [0, 1).
    double next_unit() { return (engine_() >> 11) * 0x1.0p-53; }

    /// Uniform in [lo, hi); returns lo when the interval is empty.
    double uniform(double lo, double hi) {
        return lo < hi ? lo + (hi - lo) * next_unit() : lo;
    }

    std::uint64_t next_u64() { return engine_(); }

private:
    std::mt19937_64 engine_;
};

struct MobilitySpec {
    double speed_min = 0.0;
    double speed_max = 0.0;

    friend bool operator==(const MobilitySpec&, const MobilitySpec&) = default;
};

/// Maps an in-bounds position to its grid cell. Throws std::domain_error
/// for positions outside [0,width) x [0,height).
ZoneId zone_of(const Vec2& position, const GridConfig& grid);

/// Memoizes zone_of(nodes.at(id).position, grid) over one topology snapshot.
/// Resolution is lazy, so an id that would throw (unknown, or out-of-bounds
/// position) still throws, and only when actually looked up.
class NodeZoneCache {
public:
    NodeZoneCache(const NodeTable& nodes, const GridConfig& grid);

    ZoneId zone(NodeId id);

private:
    const NodeTable& nodes_;
    const GridConfig& grid_;
    std::vector<std::int64_t> packed_;  // INT64_MIN marks an unresolved id
};

/// All unordered pairs of distinct alive nodes within distance <= r.
/// Boundary is inclusive. Every link gets the same capacity.
LinkSet links_of(const NodeTable& nodes, double r, double capacity);

/// The pair enumeration behind links_of, for callers that assign their own
/// per-link capacities. Pairs come back sorted by (min id, max id).
std::vector<std::pair<NodeId, NodeId>> collect_link_pairs(const NodeTable& nodes, double r);

/// Same enumeration into a caller-owned buffer (cleared first), so repeated
/// scans can reuse capacity.
void collect_link_pairs(const NodeTable& nodes, double r,
                        std::vector<std::pair<NodeId, NodeId>>& out);

/// Random-waypoint step: each alive node advances toward its waypoint at its
/// own speed for dt seconds; on arrival it draws a fresh waypoint uniformly
/// in the world and a fresh speed from [speed_min, speed_max]. Dead nodes do
/// not move. Positions stay inside the world.
void step_mobility(NodeTable& nodes, double dt, const MobilitySpec& mobility,
                   const GridConfig& grid, Rng& rng);

}  // namespace survsim
