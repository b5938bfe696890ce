#include "survsim/world.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <limits>
#include <stdexcept>

namespace survsim {

namespace {

std::uint64_t link_key(NodeId u, NodeId v) {
    NodeId a = std::min(u, v);
    NodeId b = std::max(u, v);
    return (static_cast<std::uint64_t>(a) << 32) | b;
}

}  // namespace

double distance(const Vec2& a, const Vec2& b) {
    return std::hypot(a.x - b.x, a.y - b.y);
}

NodeTable::NodeTable(std::vector<NodeState> nodes) : nodes_(std::move(nodes)) {
    std::sort(nodes_.begin(), nodes_.end(),
              [](const NodeState& l, const NodeState& r) { return l.id < r.id; });
    for (std::size_t i = 1; i < nodes_.size(); ++i) {
        if (nodes_[i].id == nodes_[i - 1].id) {
            throw std::invalid_argument("NodeTable: duplicate node id " +
                                        std::to_string(nodes_[i].id));
        }
    }
}

const NodeState* NodeTable::find(NodeId id) const {
    auto it = std::lower_bound(nodes_.begin(), nodes_.end(), id,
                               [](const NodeState& n, NodeId v) { return n.id < v; });
    if (it == nodes_.end() || it->id != id) return nullptr;
    return &*it;
}

NodeState* NodeTable::find(NodeId id) {
    return const_cast<NodeState*>(static_cast<const NodeTable*>(this)->find(id));
}

const NodeState& NodeTable::at(NodeId id) const {
    const NodeState* n = find(id);
    if (!n) throw std::out_of_range("unknown node id " + std::to_string(id));
    return *n;
}

NodeState& NodeTable::at(NodeId id) {
    return const_cast<NodeState&>(static_cast<const NodeTable*>(this)->at(id));
}

LinkSet LinkSet::from_links(std::vector<Link> links) {
    LinkSet ls;
    ls.links_ = std::move(links);
    ls.normalize_and_index();
    return ls;
}

void LinkSet::assign(std::span<const Link> links) {
    links_.assign(links.begin(), links.end());
    normalize_and_index();
}

void LinkSet::normalize_and_index() {
    // One pass validates endpoints, normalizes their order, tracks the
    // largest id, and checks sortedness on the fly; the main producer
    // (collect_link_pairs) already emits sorted pairs, so the sort below
    // almost never runs.
    bool sorted = true;
    NodeId max_id = 0;
    std::uint64_t prev_key = 0;
    for (Link& l : links_) {
        if (l.a == l.b) throw std::invalid_argument("LinkSet: self link");
        if (l.a > l.b) std::swap(l.a, l.b);
        max_id = std::max(max_id, l.b);
        const std::uint64_t key = link_key(l.a, l.b);
        if (&l != links_.data()) {
            if (key < prev_key) sorted = false;
            else if (key == prev_key) throw std::invalid_argument("LinkSet: duplicate link");
        }
        prev_key = key;
    }
    if (!sorted) {
        std::sort(links_.begin(), links_.end(), [](const Link& l, const Link& r) {
            return link_key(l.a, l.b) < link_key(r.a, r.b);
        });
        for (std::size_t i = 1; i < links_.size(); ++i) {
            if (links_[i].a == links_[i - 1].a && links_[i].b == links_[i - 1].b) {
                throw std::invalid_argument("LinkSet: duplicate link");
            }
        }
    }
    rebuild_adjacency(max_id);
}

const LinkSet::Link* LinkSet::find(NodeId u, NodeId v) const {
    const std::uint64_t key = link_key(u, v);
    auto it = std::lower_bound(links_.begin(), links_.end(), key,
                               [](const Link& l, std::uint64_t k) { return link_key(l.a, l.b) < k; });
    if (it == links_.end() || link_key(it->a, it->b) != key) return nullptr;
    return &*it;
}

LinkSet::Link* LinkSet::find_mut(NodeId u, NodeId v) {
    return const_cast<Link*>(static_cast<const LinkSet*>(this)->find(u, v));
}

bool LinkSet::has(NodeId u, NodeId v) const { return find(u, v) != nullptr; }

double LinkSet::residual(NodeId u, NodeId v) const {
    const Link* l = find(u, v);
    if (!l) throw std::out_of_range("no such link");
    return l->residual();
}

void LinkSet::add_link(NodeId u, NodeId v, double capacity) {
    if (u == v) throw std::invalid_argument("LinkSet: self link");
    if (has(u, v)) throw std::invalid_argument("LinkSet: link already present");
    Link l{std::min(u, v), std::max(u, v), capacity, 0.0};
    const std::uint64_t key = link_key(u, v);
    auto it = std::lower_bound(links_.begin(), links_.end(), key,
                               [](const Link& x, std::uint64_t k) { return link_key(x.a, x.b) < k; });
    links_.insert(it, l);
    rebuild_adjacency();
}

void LinkSet::remove_link(NodeId u, NodeId v) {
    const std::uint64_t key = link_key(u, v);
    auto it = std::lower_bound(links_.begin(), links_.end(), key,
                               [](const Link& x, std::uint64_t k) { return link_key(x.a, x.b) < k; });
    if (it == links_.end() || link_key(it->a, it->b) != key) return;
    links_.erase(it);
    rebuild_adjacency();
}

void LinkSet::set_capacity(NodeId u, NodeId v, double capacity) {
    Link* l = find_mut(u, v);
    if (!l) throw std::out_of_range("no such link");
    l->capacity = capacity;
}

void LinkSet::add_reserved(NodeId u, NodeId v, double delta) {
    Link* l = find_mut(u, v);
    if (!l) throw std::out_of_range("no such link");
    l->reserved += delta;
}

std::span<const NodeId> LinkSet::neighbors(NodeId u) const {
    auto it = std::lower_bound(adj_nodes_.begin(), adj_nodes_.end(), u);
    if (it == adj_nodes_.end() || *it != u) return {};
    const std::size_t i = static_cast<std::size_t>(it - adj_nodes_.begin());
    return {adj_flat_.data() + adj_off_[i], adj_off_[i + 1] - adj_off_[i]};
}

std::span<const std::uint32_t> LinkSet::neighbor_links(NodeId u) const {
    auto it = std::lower_bound(adj_nodes_.begin(), adj_nodes_.end(), u);
    if (it == adj_nodes_.end() || *it != u) return {};
    const std::size_t i = static_cast<std::size_t>(it - adj_nodes_.begin());
    return {adj_link_.data() + adj_off_[i], adj_off_[i + 1] - adj_off_[i]};
}

void LinkSet::rebuild_adjacency() {
    // b > a always, so the largest endpoint is some link's b.
    NodeId max_id = 0;
    for (const Link& l : links_) max_id = std::max(max_id, l.b);
    rebuild_adjacency(max_id);
}

void LinkSet::rebuild_adjacency(NodeId max_id) {
    adj_nodes_.clear();
    if (links_.empty()) {
        adj_off_.assign(1, 0);
        adj_flat_.clear();
        adj_link_.clear();
        return;
    }

    // Dense id->slot table when ids are compact, binary search otherwise.
    std::vector<std::uint32_t> dense;
    const bool compact = max_id < 4 * links_.size() + 1024;
    if (compact) {
        // Degrees counted per id double as the offset table, then the cells
        // are repurposed as the id->slot map.
        dense.assign(static_cast<std::size_t>(max_id) + 1, 0);
        for (const Link& l : links_) {
            ++dense[l.a];
            ++dense[l.b];
        }
        adj_nodes_.reserve(links_.size());
        adj_off_.clear();
        adj_off_.push_back(0);
        for (NodeId v = 0; v <= max_id; ++v) {
            if (dense[v]) {
                adj_off_.push_back(adj_off_.back() + dense[v]);
                dense[v] = static_cast<std::uint32_t>(adj_nodes_.size());
                adj_nodes_.push_back(v);
            }
        }
    } else {
        adj_nodes_.reserve(links_.size() * 2);
        for (const Link& l : links_) {
            adj_nodes_.push_back(l.a);
            adj_nodes_.push_back(l.b);
        }
        std::sort(adj_nodes_.begin(), adj_nodes_.end());
        adj_nodes_.erase(std::unique(adj_nodes_.begin(), adj_nodes_.end()),
                         adj_nodes_.end());
    }
    auto slot = [&](NodeId v) -> std::size_t {
        if (compact) return dense[v];
        return static_cast<std::size_t>(
            std::lower_bound(adj_nodes_.begin(), adj_nodes_.end(), v) - adj_nodes_.begin());
    };

    if (!compact) {
        const std::size_t n = adj_nodes_.size();
        adj_off_.assign(n + 1, 0);
        for (const Link& l : links_) {
            ++adj_off_[slot(l.a) + 1];
            ++adj_off_[slot(l.b) + 1];
        }
        for (std::size_t i = 0; i < n; ++i) adj_off_[i + 1] += adj_off_[i];
    }

    // links_ is sorted by (a,b) with a < b, so every node sees its smaller
    // neighbors first in ascending order and then its larger ones in
    // ascending order: each list comes out sorted without a per-node sort.
    adj_flat_.resize(links_.size() * 2);
    adj_link_.resize(links_.size() * 2);
    std::vector<std::uint32_t> cursor(adj_off_.begin(), adj_off_.end() - 1);
    for (std::size_t li = 0; li < links_.size(); ++li) {
        const Link& l = links_[li];
        const std::size_t pa = cursor[slot(l.a)]++;
        const std::size_t pb = cursor[slot(l.b)]++;
        adj_flat_[pa] = l.b;
        adj_flat_[pb] = l.a;
        adj_link_[pa] = static_cast<std::uint32_t>(li);
        adj_link_[pb] = static_cast<std::uint32_t>(li);
    }
}

ZoneId zone_of(const Vec2& position, const GridConfig& grid) {
    if (!grid.valid()) throw std::domain_error("invalid grid configuration");
    if (position.x < 0.0 || position.x >= grid.world_width ||
        position.y < 0.0 || position.y >= grid.world_height) {
        throw std::domain_error("position outside world bounds");
    }
    int row = static_cast<int>(std::floor(position.y / grid.cell_height()));
    int col = static_cast<int>(std::floor(position.x / grid.cell_width()));
    // Guard against floating division landing exactly on the upper edge.
    row = std::min(row, grid.rows - 1);
    col = std::min(col, grid.cols - 1);
    return ZoneId{row, col};
}

NodeZoneCache::NodeZoneCache(const NodeTable& nodes, const GridConfig& grid)
    : nodes_(nodes), grid_(grid) {
    if (nodes.empty() || !grid.valid()) return;
    const NodeId max_id = std::prev(nodes.end())->id;
    // Only worth a table when ids are compact; otherwise fall through to the
    // uncached path per lookup.
    if (max_id >= 4 * nodes.size() + 1024) return;
    packed_.assign(static_cast<std::size_t>(max_id) + 1,
                   std::numeric_limits<std::int64_t>::min());
    // Bulk-resolve in-bounds nodes up front; out-of-bounds ones keep the
    // sentinel so looking them up still throws exactly like zone_of.
    for (const NodeState& n : nodes) {
        const Vec2& p = n.position;
        if (p.x < 0.0 || p.x >= grid.world_width || p.y < 0.0 ||
            p.y >= grid.world_height) {
            continue;
        }
        const ZoneId z = zone_of(p, grid);
        packed_[n.id] = (static_cast<std::int64_t>(z.row) << 32) |
                        static_cast<std::uint32_t>(z.col);
    }
}

ZoneId NodeZoneCache::zone(NodeId id) {
    if (id < packed_.size()) {
        std::int64_t& p = packed_[id];
        if (p == std::numeric_limits<std::int64_t>::min()) {
            const ZoneId z = zone_of(nodes_.at(id).position, grid_);
            p = (static_cast<std::int64_t>(z.row) << 32) |
                static_cast<std::uint32_t>(z.col);
        }
        return ZoneId{static_cast<int>(p >> 32),
                      static_cast<int>(static_cast<std::uint32_t>(p))};
    }
    return zone_of(nodes_.at(id).position, grid_);
}

std::vector<std::pair<NodeId, NodeId>> collect_link_pairs(const NodeTable& nodes, double r) {
    std::vector<std::pair<NodeId, NodeId>> pairs;
    collect_link_pairs(nodes, r, pairs);
    return pairs;
}

void collect_link_pairs(const NodeTable& nodes, double r,
                        std::vector<std::pair<NodeId, NodeId>>& pairs) {
    pairs.clear();
    if (nodes.size() < 2 || r < 0.0) return;

    // Bucket alive nodes on a grid of cell size r so only the 3x3 bucket
    // neighborhood of each node needs a distance check. Positions are copied
    // into a dense array first so the scan never touches the node table.
    struct Pt {
        double x, y;
        NodeId id;
    };
    double min_x = 0.0, min_y = 0.0, max_x = 0.0, max_y = 0.0;
    bool first = true;
    std::vector<Pt> alive;
    alive.reserve(nodes.size());
    for (const NodeState& n : nodes) {
        if (!n.alive) continue;
        alive.push_back(Pt{n.position.x, n.position.y, n.id});
        if (first) {
            min_x = max_x = n.position.x;
            min_y = max_y = n.position.y;
            first = false;
        } else {
            min_x = std::min(min_x, n.position.x);
            max_x = std::max(max_x, n.position.x);
            min_y = std::min(min_y, n.position.y);
            max_y = std::max(max_y, n.position.y);
        }
    }
    if (alive.size() < 2) return;

    const double cell = std::max(r, 1e-9);
    const int bx = std::min<int>(256, static_cast<int>((max_x - min_x) / cell) + 1);
    const int by = std::min<int>(256, static_cast<int>((max_y - min_y) / cell) + 1);
    auto bucket_of = [&](const Pt& p) {
        int cx = std::min(bx - 1, static_cast<int>((p.x - min_x) / cell));
        int cy = std::min(by - 1, static_cast<int>((p.y - min_y) / cell));
        return cy * bx + cx;
    };
    const std::size_t nb = static_cast<std::size_t>(bx) * by;
    std::vector<std::uint32_t> bucket_off(nb + 1, 0);
    for (const Pt& n : alive) {
        ++bucket_off[static_cast<std::size_t>(bucket_of(n)) + 1];
    }
    for (std::size_t i = 0; i < nb; ++i) bucket_off[i + 1] += bucket_off[i];
    std::vector<Pt> bucket_nodes(alive.size());
    {
        std::vector<std::uint32_t> cursor(bucket_off.begin(), bucket_off.end() - 1);
        for (const Pt& n : alive) {
            bucket_nodes[cursor[static_cast<std::size_t>(bucket_of(n))]++] = n;
        }
    }

    // Outer ids ascend and each node's matches are sorted in place, so the
    // whole vector ends up sorted by (min id, max id).
    const double r2 = r * r;
    pairs.reserve(alive.size() * 8);
    for (const Pt& n : alive) {
        const std::size_t run = pairs.size();
        const int cx = std::min(bx - 1, static_cast<int>((n.x - min_x) / cell));
        const int cy = std::min(by - 1, static_cast<int>((n.y - min_y) / cell));
        for (int dy = -1; dy <= 1; ++dy) {
            for (int dx = -1; dx <= 1; ++dx) {
                const int nx = cx + dx;
                const int ny = cy + dy;
                if (nx < 0 || nx >= bx || ny < 0 || ny >= by) continue;
                const std::size_t b = static_cast<std::size_t>(ny) * bx + nx;
                for (std::uint32_t i = bucket_off[b]; i < bucket_off[b + 1]; ++i) {
                    const Pt& m = bucket_nodes[i];
                    if (m.id <= n.id) continue;
                    const double ddx = n.x - m.x;
                    const double ddy = n.y - m.y;
                    if (ddx * ddx + ddy * ddy <= r2) pairs.emplace_back(n.id, m.id);
                }
            }
        }
        std::sort(pairs.begin() + static_cast<std::ptrdiff_t>(run), pairs.end());
    }
}

LinkSet links_of(const NodeTable& nodes, double r, double capacity) {
    std::vector<LinkSet::Link> links;
    for (auto [a, b] : collect_link_pairs(nodes, r)) {
        links.push_back(LinkSet::Link{a, b, capacity, 0.0});
    }
    return LinkSet::from_links(std::move(links));
}

void step_mobility(NodeTable& nodes, double dt, const MobilitySpec& mobility,
                   const GridConfig& grid, Rng& rng) {
    if (dt <= 0.0) throw std::domain_error("step_mobility: dt must be positive");
    auto clamp_inside = [&](Vec2& p) {
        p.x = std::clamp(p.x, 0.0, std::nextafter(grid.world_width, 0.0));
        p.y = std::clamp(p.y, 0.0, std::nextafter(grid.world_height, 0.0));
    };
    for (NodeState& n : nodes) {
        if (!n.alive || n.speed <= 0.0) continue;
        double remaining = dt;
        while (remaining > 0.0 && n.speed > 0.0) {
            const double dist = distance(n.position, n.waypoint);
            const double travel = n.speed * remaining;
            if (travel < dist) {
                const double frac = travel / dist;
                n.position.x += (n.waypoint.x - n.position.x) * frac;
                n.position.y += (n.waypoint.y - n.position.y) * frac;
                clamp_inside(n.position);
                break;
            }
            // Arrived: land exactly on the waypoint, then pick a new leg.
            remaining -= dist / n.speed;
            n.position = n.waypoint;
            n.waypoint.x = rng.uniform(0.0, grid.world_width);
            n.waypoint.y = rng.uniform(0.0, grid.world_height);
            n.speed = rng.uniform(mobility.speed_min, mobility.speed_max);
        }
    }
}

}  // namespace survsim
