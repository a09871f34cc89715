#include "irdrop/graph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "irdrop/errors.hpp"

namespace irdrop {

std::vector<Instance> PdnGraph::instances() const {
    std::vector<Instance> out;
    out.reserve(injections.size());
    for (const auto& [node, amps] : injections) out.push_back({node, amps, nodes[node]});
    return out;
}

std::int64_t PdnGraph::extent_x_nm() const {
    std::int64_t m = 0;
    for (const NodeLoc& n : nodes) m = std::max(m, n.x_nm);
    return m;
}

std::int64_t PdnGraph::extent_y_nm() const {
    std::int64_t m = 0;
    for (const NodeLoc& n : nodes) m = std::max(m, n.y_nm);
    return m;
}

namespace {

struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    int find(int a) {
        while (parent[a] != a) {
            parent[a] = parent[parent[a]];
            a = parent[a];
        }
        return a;
    }
    void unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a == b) return;
        // Keep the earlier-appearing node as representative for determinism.
        if (a > b) std::swap(a, b);
        parent[b] = a;
    }
};

}  // namespace

PdnGraph build_graph(const PdnNetlist& netlist, double vdd) {
    if (!(vdd > 0.0)) throw GraphError("vdd must be positive");

    // Replay elements in file order so node indices are deterministic.
    struct Ref {
        int line;
        int kind;  // 0=R 1=I 2=V
        std::size_t idx;
    };
    std::vector<Ref> order;
    order.reserve(netlist.element_count());
    for (std::size_t i = 0; i < netlist.resistors.size(); ++i)
        order.push_back({netlist.resistors[i].line, 0, i});
    for (std::size_t i = 0; i < netlist.current_sources.size(); ++i)
        order.push_back({netlist.current_sources[i].line, 1, i});
    for (std::size_t i = 0; i < netlist.voltage_sources.size(); ++i)
        order.push_back({netlist.voltage_sources[i].line, 2, i});
    std::stable_sort(order.begin(), order.end(),
                     [](const Ref& a, const Ref& b) { return a.line < b.line; });

    std::unordered_map<std::string, int> id_of;
    std::vector<NodeLoc> prov_nodes;
    auto intern = [&](const std::string& name) -> int {
        auto it = id_of.find(name);
        if (it != id_of.end()) return it->second;
        NodeLoc loc = parse_node_name(name);
        if (loc.kind == NodeKind::Ground) throw GraphError("ground used as an element node");
        int id = static_cast<int>(prov_nodes.size());
        id_of.emplace(name, id);
        prov_nodes.push_back(std::move(loc));
        return id;
    };

    struct ProvEdge {
        int a, b;
        double ohms;
    };
    std::vector<ProvEdge> prov_edges;
    std::vector<std::pair<int, double>> prov_injections;
    std::vector<int> prov_vsources;

    // Two passes over the ordered refs would also work, but unions must be
    // known before compaction, so collect everything provisionally first.
    std::vector<std::pair<int, int>> zero_ohm_pairs;
    for (const Ref& r : order) {
        switch (r.kind) {
            case 0: {
                const Resistor& e = netlist.resistors[r.idx];
                if (e.node_a == "0" || e.node_b == "0")
                    throw GraphError("resistor " + e.name + " references ground; PDN edges must connect internal nodes");
                int a = intern(e.node_a);
                int b = intern(e.node_b);
                if (e.ohms == 0.0)
                    zero_ohm_pairs.emplace_back(a, b);
                else
                    prov_edges.push_back({a, b, e.ohms});
                break;
            }
            case 1: {
                const CurrentSource& e = netlist.current_sources[r.idx];
                prov_injections.emplace_back(intern(e.node), e.amps);
                break;
            }
            default: {
                const VoltageSource& e = netlist.voltage_sources[r.idx];
                if (std::abs(e.volts - vdd) > 1e-9)
                    throw GraphError("voltage source " + e.name + " is " + std::to_string(e.volts) +
                                     " V but vdd is " + std::to_string(vdd) +
                                     " V; mixed-rail nets are unsupported");
                prov_vsources.push_back(intern(e.node));
                break;
            }
        }
    }

    UnionFind uf(static_cast<int>(prov_nodes.size()));
    for (auto [a, b] : zero_ohm_pairs) uf.unite(a, b);

    // Compact class representatives in first-appearance order.
    std::vector<int> final_of(prov_nodes.size(), -1);
    PdnGraph g;
    g.vdd = vdd;
    for (int p = 0; p < static_cast<int>(prov_nodes.size()); ++p) {
        int root = uf.find(p);
        if (final_of[root] < 0) {
            final_of[root] = static_cast<int>(g.nodes.size());
            g.nodes.push_back(prov_nodes[root]);
        }
        final_of[p] = final_of[root];
    }

    for (const ProvEdge& e : prov_edges) {
        int u = final_of[e.a];
        int v = final_of[e.b];
        if (u == v) continue;  // collapsed by a zero-ohm short
        g.edges.push_back({u, v, e.ohms});
    }

    std::unordered_map<int, double> inj;
    for (auto [p, amps] : prov_injections) inj[final_of[p]] += amps;
    g.injections.assign(inj.begin(), inj.end());
    std::sort(g.injections.begin(), g.injections.end());

    for (int p : prov_vsources) g.vsource_nodes.push_back(final_of[p]);
    std::sort(g.vsource_nodes.begin(), g.vsource_nodes.end());
    g.vsource_nodes.erase(std::unique(g.vsource_nodes.begin(), g.vsource_nodes.end()),
                          g.vsource_nodes.end());
    return g;
}

Adjacency build_adjacency(const PdnGraph& graph) {
    Adjacency adj;
    const int n = static_cast<int>(graph.nodes.size());
    adj.ptr.assign(n + 1, 0);
    for (const EdgeR& e : graph.edges) {
        ++adj.ptr[e.u + 1];
        ++adj.ptr[e.v + 1];
    }
    for (int i = 0; i < n; ++i) adj.ptr[i + 1] += adj.ptr[i];
    adj.to.resize(adj.ptr[n]);
    adj.ohms.resize(adj.ptr[n]);
    std::vector<int> cursor(adj.ptr.begin(), adj.ptr.end() - 1);
    for (const EdgeR& e : graph.edges) {
        adj.to[cursor[e.u]] = e.v;
        adj.ohms[cursor[e.u]++] = e.ohms;
        adj.to[cursor[e.v]] = e.u;
        adj.ohms[cursor[e.v]++] = e.ohms;
    }
    return adj;
}

Diagnostics validate(const PdnGraph& graph) {
    Diagnostics d;
    d.node_count = graph.nodes.size();
    d.edge_count = graph.edges.size();
    d.instance_count = graph.injections.size();
    d.vsource_count = graph.vsource_nodes.size();

    const int n = static_cast<int>(graph.nodes.size());
    Adjacency adj = build_adjacency(graph);
    for (int i = 0; i < n; ++i) d.max_degree = std::max(d.max_degree, adj.ptr[i + 1] - adj.ptr[i]);
    d.degree_over_6 = d.max_degree > 6;

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
            for (int k = adj.ptr[u]; k < adj.ptr[u + 1]; ++k) {
                int v = adj.to[k];
                if (comp[v] < 0) {
                    comp[v] = ncomp;
                    stack.push_back(v);
                }
            }
        }
        ++ncomp;
    }
    d.components = ncomp;

    std::vector<char> has_vsrc(ncomp, 0);
    for (int v : graph.vsource_nodes) has_vsrc[comp[v]] = 1;
    for (int c = 0; c < ncomp; ++c)
        if (!has_vsrc[c]) ++d.floating_components;
    return d;
}

std::string Diagnostics::to_json() const {
    std::ostringstream os;
    os << "{\"nodes\":" << node_count << ",\"edges\":" << edge_count
       << ",\"instances\":" << instance_count << ",\"vsources\":" << vsource_count
       << ",\"components\":" << components << ",\"floating_components\":" << floating_components
       << ",\"max_degree\":" << max_degree << ",\"degree_over_6\":" << (degree_over_6 ? "true" : "false")
       << "}";
    return os.str();
}

}  // namespace irdrop
