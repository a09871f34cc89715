#include "irdrop/features.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <limits>
#include <map>
#include <queue>
#include <set>
#include <thread>

#include "irdrop/errors.hpp"
#include "irdrop/solver.hpp"

namespace irdrop {

FeatureMap rasterize(std::span<const RasterPoint> points, RasterMode mode, int cell_nm,
                     Extent extent, Unit unit) {
    GridSpec grid = GridSpec::from_extent(extent, cell_nm);
    FeatureMap sum = FeatureMap::zeros(grid, unit);
    std::vector<int> count(sum.size(), 0);
    for (const RasterPoint& p : points) {
        if (p.x_nm < 0 || p.y_nm < 0 || p.x_nm > extent.x_nm || p.y_nm > extent.y_nm)
            throw ShapeError("rasterize: point (" + std::to_string(p.x_nm) + "," +
                             std::to_string(p.y_nm) + ") outside extent");
        std::size_t idx = static_cast<std::size_t>(grid.row_of(p.y_nm)) * grid.w + grid.col_of(p.x_nm);
        sum.data[idx] += p.value;
        ++count[idx];
    }
    if (mode == RasterMode::Average) {
        for (std::size_t i = 0; i < sum.size(); ++i)
            if (count[i] > 0) sum.data[i] /= count[i];
    }
    return sum;
}

FeatureMap current_map(const PdnGraph& graph, int cell_nm) {
    std::vector<RasterPoint> pts;
    pts.reserve(graph.injections.size());
    for (const auto& [node, amps] : graph.injections)
        pts.push_back({graph.nodes[node].x_nm, graph.nodes[node].y_nm, amps});
    return rasterize(pts, RasterMode::Sum, cell_nm, {graph.extent_x_nm(), graph.extent_y_nm()},
                     Unit::Amps);
}

std::vector<double> source_distances_um(const PdnGraph& graph, std::int64_t x_nm,
                                        std::int64_t y_nm) {
    std::vector<double> out;
    out.reserve(graph.vsource_nodes.size());
    for (int v : graph.vsource_nodes) {
        const double dx = static_cast<double>(x_nm - graph.nodes[v].x_nm) / 1000.0;
        const double dy = static_cast<double>(y_nm - graph.nodes[v].y_nm) / 1000.0;
        out.push_back(std::hypot(dx, dy));
    }
    return out;
}

double effective_distance_um(std::span<const double> distances_um) {
    if (distances_um.empty()) throw GraphError("effective_distance_um: no sources");
    if (distances_um.size() == 1) return distances_um[0];  // K=1 degenerates to the distance
    double inv_sum = 0.0;
    for (double d : distances_um) {
        if (d == 0.0) return 0.0;  // coincident with a source
        inv_sum += 1.0 / d;
    }
    return 1.0 / inv_sum;
}

FeatureMap effective_distance_map(const PdnGraph& graph, int cell_nm) {
    if (graph.vsource_nodes.empty())
        throw GraphError("effective_distance_map: no voltage sources");
    std::vector<RasterPoint> pts;
    pts.reserve(graph.injections.size());
    std::vector<double> dists;
    for (const auto& [node, amps] : graph.injections) {
        (void)amps;
        const NodeLoc& loc = graph.nodes[node];
        dists = source_distances_um(graph, loc.x_nm, loc.y_nm);
        pts.push_back({loc.x_nm, loc.y_nm, effective_distance_um(dists)});
    }
    return rasterize(pts, RasterMode::Average, cell_nm, {graph.extent_x_nm(), graph.extent_y_nm()},
                     Unit::Micrometers);
}

PathDistances multi_source_dijkstra(const PdnGraph& graph, std::span<const int> sources) {
    if (sources.empty()) throw GraphError("multi_source_dijkstra: no sources");
    const int n = static_cast<int>(graph.nodes.size());
    Adjacency adj = build_adjacency(graph);

    PathDistances out;
    out.ohms.assign(n, std::numeric_limits<double>::infinity());

    using Item = std::pair<double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<Item>> heap;
    for (int s : sources) {
        out.ohms[s] = 0.0;
        heap.push({0.0, s});
    }
    while (!heap.empty()) {
        auto [d, u] = heap.top();
        heap.pop();
        if (d > out.ohms[u]) continue;
        for (int k = adj.ptr[u]; k < adj.ptr[u + 1]; ++k) {
            const double nd = d + adj.ohms[k];
            if (nd < out.ohms[adj.to[k]]) {
                out.ohms[adj.to[k]] = nd;
                heap.push({nd, adj.to[k]});
            }
        }
    }
    for (double d : out.ohms)
        if (std::isinf(d)) ++out.unreachable;
    return out;
}

ShortestPathMaps shortest_path_maps(const PdnGraph& graph, int cell_nm) {
    if (graph.vsource_nodes.empty()) throw GraphError("shortest_path_maps: no voltage sources");
    PathDistances dist = multi_source_dijkstra(graph, graph.vsource_nodes);

    ShortestPathMaps out;
    std::vector<RasterPoint> rho_pts, volt_pts;
    rho_pts.reserve(graph.injections.size());
    volt_pts.reserve(graph.injections.size());
    for (const auto& [node, amps] : graph.injections) {
        const NodeLoc& loc = graph.nodes[node];
        double rho = dist.ohms[node];
        if (std::isinf(rho)) {
            rho = 0.0;  // unreachable: contributes zero, surfaced via the counter
            ++out.unreachable_instances;
        }
        rho_pts.push_back({loc.x_nm, loc.y_nm, rho});
        volt_pts.push_back({loc.x_nm, loc.y_nm, rho * amps});
    }
    Extent ext{graph.extent_x_nm(), graph.extent_y_nm()};
    out.resistance = rasterize(rho_pts, RasterMode::Average, cell_nm, ext, Unit::Ohms);
    out.voltage = rasterize(volt_pts, RasterMode::Average, cell_nm, ext, Unit::Volts);
    return out;
}

namespace {

// Visits every cell overlapped by the projected segment. Covered columns are
// [col_of(min_x), col_of(max_x)] and rows likewise; one of the two spans is a
// single index for rectilinear segments and vias.
template <typename Fn>
void for_each_covered_cell(const GridSpec& grid, const NodeLoc& a, const NodeLoc& b, Fn&& fn) {
    if (a.x_nm != b.x_nm && a.y_nm != b.y_nm)
        throw GraphError("resistor between " + a.raw + " and " + b.raw +
                         " is diagonal; PDN rails must be rectilinear");
    const int c0 = grid.col_of(std::min(a.x_nm, b.x_nm));
    const int c1 = grid.col_of(std::max(a.x_nm, b.x_nm));
    const int r0 = grid.row_of(std::min(a.y_nm, b.y_nm));
    const int r1 = grid.row_of(std::max(a.y_nm, b.y_nm));
    for (int r = r0; r <= r1; ++r)
        for (int c = c0; c <= c1; ++c) fn(r, c);
}

}  // namespace

FeatureMap resistor_count_map(const PdnGraph& graph, int cell_nm) {
    GridSpec grid = GridSpec::from_extent({graph.extent_x_nm(), graph.extent_y_nm()}, cell_nm);
    FeatureMap out = FeatureMap::zeros(grid, Unit::Count);
    for (const EdgeR& e : graph.edges) {
        for_each_covered_cell(grid, graph.nodes[e.u], graph.nodes[e.v],
                              [&](int r, int c) { out.at(r, c) += 1.0; });
    }
    return out;
}

FeatureMap resistance_map(const PdnGraph& graph, int cell_nm) {
    GridSpec grid = GridSpec::from_extent({graph.extent_x_nm(), graph.extent_y_nm()}, cell_nm);
    FeatureMap out = FeatureMap::zeros(grid, Unit::OhmsPerCell);
    for (const EdgeR& e : graph.edges) {
        int cells = 0;
        for_each_covered_cell(grid, graph.nodes[e.u], graph.nodes[e.v],
                              [&](int, int) { ++cells; });
        const double share = e.ohms / cells;
        for_each_covered_cell(grid, graph.nodes[e.u], graph.nodes[e.v],
                              [&](int r, int c) { out.at(r, c) += share; });
    }
    return out;
}

FeatureMap pdn_density_map(const PdnGraph& graph, int cell_nm) {
    GridSpec grid = GridSpec::from_extent({graph.extent_x_nm(), graph.extent_y_nm()}, cell_nm);
    FeatureMap out = FeatureMap::zeros(grid, Unit::PerMicrometer);

    // Group intra-layer rails by (layer, orientation). Vias and cross-layer
    // resistors do not define rails.
    struct Group {
        std::set<std::int64_t> coords;       // distinct rail positions (nm)
        std::vector<const EdgeR*> segments;
    };
    std::map<std::pair<int, int>, Group> groups;  // (layer, 0=horizontal 1=vertical)
    for (const EdgeR& e : graph.edges) {
        const NodeLoc& a = graph.nodes[e.u];
        const NodeLoc& b = graph.nodes[e.v];
        if (a.layer != b.layer) continue;
        if (a.x_nm == b.x_nm && a.y_nm != b.y_nm) {
            Group& g = groups[{a.layer, 1}];
            g.coords.insert(a.x_nm);
            g.segments.push_back(&e);
        } else if (a.y_nm == b.y_nm && a.x_nm != b.x_nm) {
            Group& g = groups[{a.layer, 0}];
            g.coords.insert(a.y_nm);
            g.segments.push_back(&e);
        }
        // Same-layer zero-length resistors have no orientation.
    }

    std::vector<char> covered(out.size());
    for (const auto& [key, g] : groups) {
        if (g.coords.size() < 2) continue;  // pitch undefined for a single rail
        std::vector<double> spacing;
        spacing.reserve(g.coords.size() - 1);
        auto it = g.coords.begin();
        std::int64_t prev = *it++;
        for (; it != g.coords.end(); ++it) {
            spacing.push_back(static_cast<double>(*it - prev) / 1000.0);
            prev = *it;
        }
        std::sort(spacing.begin(), spacing.end());
        const std::size_t m = spacing.size();
        const double pitch_um =
            (m % 2 == 1) ? spacing[m / 2] : 0.5 * (spacing[m / 2 - 1] + spacing[m / 2]);
        const double density = 1.0 / pitch_um;

        std::fill(covered.begin(), covered.end(), 0);
        for (const EdgeR* e : g.segments) {
            for_each_covered_cell(grid, graph.nodes[e->u], graph.nodes[e->v], [&](int r, int c) {
                covered[static_cast<std::size_t>(r) * grid.w + c] = 1;
            });
        }
        for (std::size_t i = 0; i < out.size(); ++i)
            if (covered[i]) out.data[i] += density;
    }
    return out;
}

int effective_threads(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("IRDROP_THREADS")) {
        int v = std::atoi(env);
        if (v > 0) return v;
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

MapStack extract_all(const PdnGraph& graph, const ExtractOptions& opts) {
    if (graph.injections.empty())
        throw GraphError("extract_all: graph has no instances");

    MapStack stack;
    stack.channels.resize(opts.with_truth ? 8 : 7);

    std::vector<std::function<void()>> jobs = {
        [&] { stack.channels[0] = current_map(graph, opts.cell_nm); },
        [&] { stack.channels[1] = effective_distance_map(graph, opts.cell_nm); },
        [&] { stack.channels[2] = pdn_density_map(graph, opts.cell_nm); },
        [&] {
            ShortestPathMaps sp = shortest_path_maps(graph, opts.cell_nm);
            stack.channels[3] = std::move(sp.resistance);
            stack.channels[4] = std::move(sp.voltage);
        },
        [&] { stack.channels[5] = resistor_count_map(graph, opts.cell_nm); },
        [&] { stack.channels[6] = resistance_map(graph, opts.cell_nm); },
    };
    if (opts.with_truth) {
        jobs.push_back([&] {
            LinearSystem sys = assemble_system(graph);
            NodeVoltages v = solve_cg(sys, CgOptions{opts.solve_tol, -1});
            stack.channels[7] = ir_drop_map(graph, v, opts.cell_nm);
        });
    }

    // Each job writes disjoint channels, so running them on a small pool is
    // deterministic regardless of schedule.
    const int threads = std::min<int>(effective_threads(opts.threads), static_cast<int>(jobs.size()));
    if (threads <= 1) {
        std::exception_ptr first_error;
        for (auto& job : jobs) {
            try {
                job();
            } catch (...) {
                if (!first_error) first_error = std::current_exception();
            }
        }
        if (first_error) std::rethrow_exception(first_error);
    } else {
        std::vector<std::exception_ptr> errors(jobs.size());
        std::vector<std::thread> pool;
        std::atomic<std::size_t> next{0};
        for (int t = 0; t < threads; ++t) {
            pool.emplace_back([&] {
                for (std::size_t j = next.fetch_add(1); j < jobs.size(); j = next.fetch_add(1)) {
                    try {
                        jobs[j]();
                    } catch (...) {
                        errors[j] = std::current_exception();
                    }
                }
            });
        }
        for (std::thread& t : pool) t.join();
        for (const std::exception_ptr& e : errors)
            if (e) std::rethrow_exception(e);
    }

    stack.check_aligned();
    return stack;
}

}  // namespace irdrop
