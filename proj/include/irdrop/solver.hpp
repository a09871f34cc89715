#pragma once

#include <vector>

#include "irdrop/feature_map.hpp"
#include "irdrop/graph.hpp"

namespace irdrop {

// Reduced conductance system G*V = J over the unknown (non-fixed) nodes.
// Voltage-source nodes are eliminated Dirichlet-style so G stays SPD.
struct LinearSystem {
    int dim = 0;
    std::vector<int> row_ptr;          // CSR, size dim+1
    std::vector<int> col;              // ascending within each row
    std::vector<double> val;           // siemens
    std::vector<double> rhs;           // amps, includes vdd boundary terms
    std::vector<int> unknown_of_node;  // -1 for fixed nodes
    std::vector<int> node_of_unknown;
    double vdd = kDefaultVdd;
};

// Stamps every edge into the reduced system. Throws SolveError naming a node
// if some connected component contains no voltage source (singular system).
LinearSystem assemble_system(const PdnGraph& graph);

struct NodeVoltages {
    std::vector<double> volts;  // one per graph node; fixed nodes hold vdd
};

struct CgOptions {
    double tol = 1e-10;       // relative residual ||G*V - J|| / ||J||
    long long max_iter = -1;  // -1 -> 20 * dim
};

struct CgStats {
    long long iterations = 0;
    double rel_residual = 0.0;
};

// Jacobi-preconditioned conjugate gradient. Deterministic: fixed stamping and
// reduction order, no data-dependent reordering.
NodeVoltages solve_cg(const LinearSystem& system, CgOptions opts = {}, CgStats* stats = nullptr);

// Ground-truth map: per-instance drop vdd - V(node), averaged per cell.
FeatureMap ir_drop_map(const PdnGraph& graph, const NodeVoltages& v, int cell_nm = kDefaultCellNm);

}  // namespace irdrop
