#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "irdrop/netlist.hpp"

namespace irdrop {

constexpr double kDefaultVdd = 1.1;

// One physical resistor kept as one edge; parallel resistors stay separate
// so structural feature maps can count them.
struct EdgeR {
    int u = 0;
    int v = 0;
    double ohms = 0.0;
};

// A current-drawing instance: one graph node with its summed current.
struct Instance {
    int node = 0;
    double amps = 0.0;
    NodeLoc loc;
};

// Geometric resistor graph. Ground is not a node: current sources sink to it
// and voltage sources reference it implicitly. Immutable after build.
struct PdnGraph {
    std::vector<NodeLoc> nodes;                       // index order = first appearance
    std::vector<EdgeR> edges;                         // ohms > 0, no self-loops
    std::vector<std::pair<int, double>> injections;   // node -> summed amps, ascending node
    std::vector<int> vsource_nodes;                   // ascending, unique
    double vdd = kDefaultVdd;

    std::vector<Instance> instances() const;
    // Die extent anchored at the origin: max coordinate over all nodes.
    std::int64_t extent_x_nm() const;
    std::int64_t extent_y_nm() const;
};

// Builds the graph from a parsed netlist. Zero-ohm resistors merge their
// endpoints (union-find); resistors touching ground and voltage sources whose
// value differs from vdd by more than 1e-9 are rejected.
PdnGraph build_graph(const PdnNetlist& netlist, double vdd = kDefaultVdd);

struct Diagnostics {
    std::size_t node_count = 0;
    std::size_t edge_count = 0;
    std::size_t instance_count = 0;
    std::size_t vsource_count = 0;
    int components = 0;
    int floating_components = 0;  // components with no voltage source
    int max_degree = 0;
    bool degree_over_6 = false;   // observed PDN bound exceeded; warning only

    std::string to_json() const;
};

Diagnostics validate(const PdnGraph& graph);

// CSR adjacency over both edge directions, shared by validation, shortest
// paths and the solver.
struct Adjacency {
    std::vector<int> ptr;      // size nodes+1
    std::vector<int> to;
    std::vector<double> ohms;
};

Adjacency build_adjacency(const PdnGraph& graph);

}  // namespace irdrop
