#include "irdrop/solver.hpp"

#include <algorithm>
#include <cmath>

#include "irdrop/errors.hpp"
#include "irdrop/features.hpp"

namespace irdrop {

LinearSystem assemble_system(const PdnGraph& graph) {
    const int n = static_cast<int>(graph.nodes.size());

    LinearSystem sys;
    sys.vdd = graph.vdd;
    sys.unknown_of_node.assign(n, 0);
    for (int v : graph.vsource_nodes) sys.unknown_of_node[v] = -1;
    for (int i = 0; i < n; ++i) {
        if (sys.unknown_of_node[i] == 0) {
            sys.unknown_of_node[i] = static_cast<int>(sys.node_of_unknown.size());
            sys.node_of_unknown.push_back(i);
        }
    }
    sys.dim = static_cast<int>(sys.node_of_unknown.size());

    // Reject components with no voltage source before stamping: they make
    // the reduced system singular.
    {
        Adjacency adj = build_adjacency(graph);
        std::vector<int> comp(n, -1);
        std::vector<int> stack;
        int ncomp = 0;
        for (int s = 0; s < n; ++s) {
            if (comp[s] >= 0) continue;
            comp[s] = ncomp;
            stack.push_back(s);
            while (!stack.empty()) {
                int u = stack.back();
                stack.pop_back();
                for (int k = adj.ptr[u]; k < adj.ptr[u + 1]; ++k)
                    if (comp[adj.to[k]] < 0) {
                        comp[adj.to[k]] = ncomp;
                        stack.push_back(adj.to[k]);
                    }
            }
            ++ncomp;
        }
        std::vector<char> sourced(ncomp, 0);
        for (int v : graph.vsource_nodes) sourced[comp[v]] = 1;
        for (int i = 0; i < n; ++i) {
            if (!sourced[comp[i]])
                throw SolveError("singular system: node " + graph.nodes[i].raw +
                                 " lies in a component with no voltage source");
        }
    }

    struct Triplet {
        int r, c;
        double g;
    };
    std::vector<Triplet> trips;
    trips.reserve(graph.edges.size() * 4);
    sys.rhs.assign(sys.dim, 0.0);

    for (const EdgeR& e : graph.edges) {
        const double g = 1.0 / e.ohms;
        const int iu = sys.unknown_of_node[e.u];
        const int iv = sys.unknown_of_node[e.v];
        if (iu >= 0 && iv >= 0) {
            trips.push_back({iu, iu, g});
            trips.push_back({iv, iv, g});
            trips.push_back({iu, iv, -g});
            trips.push_back({iv, iu, -g});
        } else if (iu >= 0) {
            trips.push_back({iu, iu, g});
            sys.rhs[iu] += graph.vdd * g;
        } else if (iv >= 0) {
            trips.push_back({iv, iv, g});
            sys.rhs[iv] += graph.vdd * g;
        }
        // Edge between two fixed nodes carries no unknown.
    }
    for (const auto& [node, amps] : graph.injections) {
        int iu = sys.unknown_of_node[node];
        if (iu >= 0) sys.rhs[iu] -= amps;
    }

    std::stable_sort(trips.begin(), trips.end(), [](const Triplet& a, const Triplet& b) {
        return a.r != b.r ? a.r < b.r : a.c < b.c;
    });

    sys.row_ptr.assign(sys.dim + 1, 0);
    for (std::size_t i = 0; i < trips.size();) {
        std::size_t j = i;
        double sum = 0.0;
        while (j < trips.size() && trips[j].r == trips[i].r && trips[j].c == trips[i].c)
            sum += trips[j++].g;
        sys.col.push_back(trips[i].c);
        sys.val.push_back(sum);
        ++sys.row_ptr[trips[i].r + 1];
        i = j;
    }
    for (int r = 0; r < sys.dim; ++r) sys.row_ptr[r + 1] += sys.row_ptr[r];
    return sys;
}

namespace {

void spmv(const LinearSystem& s, const std::vector<double>& x, std::vector<double>& y) {
    for (int r = 0; r < s.dim; ++r) {
        double acc = 0.0;
        for (int k = s.row_ptr[r]; k < s.row_ptr[r + 1]; ++k) acc += s.val[k] * x[s.col[k]];
        y[r] = acc;
    }
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

}  // namespace

NodeVoltages solve_cg(const LinearSystem& sys, CgOptions opts, CgStats* stats) {
    if (!(opts.tol > 0.0 && opts.tol < 1.0)) throw SolveError("cg tolerance must be in (0,1)");
    const long long max_iter = opts.max_iter >= 0 ? opts.max_iter : 20LL * sys.dim;

    const int n = sys.dim;
    std::vector<double> x(n, 0.0);

    std::vector<double> inv_diag(n, 0.0);
    for (int r = 0; r < n; ++r) {
        for (int k = sys.row_ptr[r]; k < sys.row_ptr[r + 1]; ++k) {
            if (sys.col[k] == r) inv_diag[r] = 1.0 / sys.val[k];
        }
        if (inv_diag[r] == 0.0)
            throw SolveError("singular system: zero diagonal at unknown " + std::to_string(r));
    }

    const double rhs_norm = std::sqrt(dot(sys.rhs, sys.rhs));
    CgStats local{};
    if (rhs_norm == 0.0) {
        // Zero loads and no boundary currents: the zero vector is exact.
        if (stats) *stats = local;
        NodeVoltages out;
        out.volts.assign(sys.unknown_of_node.size(), sys.vdd);
        for (std::size_t node = 0; node < sys.unknown_of_node.size(); ++node)
            if (sys.unknown_of_node[node] >= 0) out.volts[node] = 0.0;
        return out;
    }

    std::vector<double> r = sys.rhs;  // r = b - A*0
    std::vector<double> z(n), p(n), ap(n);
    for (int i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
    p = z;
    double rz = dot(r, z);
    double rel = std::sqrt(dot(r, r)) / rhs_norm;

    long long it = 0;
    while (rel > opts.tol && it < max_iter) {
        spmv(sys, p, ap);
        const double pap = dot(p, ap);
        if (pap <= 0.0)
            throw SolveError("cg breakdown: non-positive curvature (system not SPD?)");
        const double alpha = rz / pap;
        for (int i = 0; i < n; ++i) x[i] += alpha * p[i];
        for (int i = 0; i < n; ++i) r[i] -= alpha * ap[i];
        ++it;

        rel = std::sqrt(dot(r, r)) / rhs_norm;
        if (rel <= opts.tol) {
            // Recurrence residual can drift; confirm with the true residual.
            spmv(sys, x, ap);
            for (int i = 0; i < n; ++i) r[i] = sys.rhs[i] - ap[i];
            rel = std::sqrt(dot(r, r)) / rhs_norm;
            if (rel <= opts.tol) break;
        }
        for (int i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
        const double rz_next = dot(r, z);
        const double beta = rz_next / rz;
        rz = rz_next;
        for (int i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    }

    local.iterations = it;
    local.rel_residual = rel;
    if (stats) *stats = local;
    if (rel > opts.tol)
        throw SolveError("cg did not converge in " + std::to_string(max_iter) +
                         " iterations; relative residual " + std::to_string(rel));

    NodeVoltages out;
    out.volts.assign(sys.unknown_of_node.size(), sys.vdd);
    for (std::size_t node = 0; node < sys.unknown_of_node.size(); ++node) {
        int iu = sys.unknown_of_node[node];
        if (iu >= 0) out.volts[node] = x[iu];
    }
    return out;
}

FeatureMap ir_drop_map(const PdnGraph& graph, const NodeVoltages& v, int cell_nm) {
    auto insts = graph.instances();
    if (insts.empty()) throw GraphError("ir_drop_map: graph has no instances");
    std::vector<RasterPoint> pts;
    pts.reserve(insts.size());
    for (const Instance& inst : insts)
        pts.push_back({inst.loc.x_nm, inst.loc.y_nm, graph.vdd - v.volts[inst.node]});
    Extent ext{graph.extent_x_nm(), graph.extent_y_nm()};
    return rasterize(pts, RasterMode::Average, cell_nm, ext, Unit::Volts);
}

}  // namespace irdrop
