#pragma once

#include <random>
#include <vector>

#include "survsim/clustering.hpp"
#include "survsim/world.hpp"

namespace testutil {

inline survsim::NodeState make_node(survsim::NodeId id, double x, double y,
                                    double speed = 0.0, double battery = 1.0,
                                    double computation = 1.0, double range = 100.0) {
    survsim::NodeState n;
    n.id = id;
    n.position = {x, y};
    n.waypoint = {x, y};
    n.speed = speed;
    n.radio_range = range;
    n.battery = battery;
    n.computation = computation;
    return n;
}

struct RandomTopology {
    survsim::GridConfig grid;
    survsim::NodeTable nodes;
    survsim::LinkSet links;
    double radio_range = 0.0;
};

/// Random nodes in a random grid, linked at a radius that keeps the graph
/// neither empty nor complete.
inline RandomTopology random_topology(std::mt19937& gen, int max_nodes,
                                      double link_capacity = 10.0) {
    std::uniform_int_distribution<int> dim(2, 4);
    RandomTopology t;
    t.grid.world_width = 1000.0;
    t.grid.world_height = 1000.0;
    t.grid.rows = dim(gen);
    t.grid.cols = dim(gen);

    std::uniform_int_distribution<int> count(1, max_nodes);
    std::uniform_real_distribution<double> pos(0.0, 1000.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_real_distribution<double> speed(0.0, 3.0);
    std::uniform_real_distribution<double> range(150.0, 450.0);
    std::uniform_int_distribution<int> history(0, 5);

    t.radio_range = range(gen);
    const int n = count(gen);
    std::vector<survsim::NodeState> nodes;
    for (int i = 0; i < n; ++i) {
        survsim::NodeState node = make_node(static_cast<survsim::NodeId>(i), pos(gen),
                                            pos(gen), speed(gen), unit(gen), unit(gen),
                                            t.radio_range);
        node.ch_count = static_cast<std::uint32_t>(history(gen));
        nodes.push_back(node);
    }
    t.nodes = survsim::NodeTable(std::move(nodes));
    t.links = survsim::links_of(t.nodes, t.radio_range, link_capacity);
    return t;
}

inline survsim::ElectionWeights random_weights(std::mt19937& gen) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    survsim::ElectionWeights w;
    w.a1 = unit(gen);
    w.a2 = unit(gen);
    w.a3 = unit(gen);
    w.a4 = unit(gen);
    w.a5 = unit(gen);
    return w;
}

}  // namespace testutil
