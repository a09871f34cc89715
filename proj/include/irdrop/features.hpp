#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "irdrop/feature_map.hpp"
#include "irdrop/graph.hpp"

namespace irdrop {

enum class RasterMode { Average, Sum };

struct RasterPoint {
    std::int64_t x_nm = 0;
    std::int64_t y_nm = 0;
    double value = 0.0;
};

// Bins points onto the grid derived from `extent`. Average divides each
// cell's sum by its point count; empty cells stay 0. Points outside the
// extent are rejected.
FeatureMap rasterize(std::span<const RasterPoint> points, RasterMode mode, int cell_nm,
                     Extent extent, Unit unit);

// Per-cell sum of instance currents (A).
FeatureMap current_map(const PdnGraph& graph, int cell_nm = kDefaultCellNm);

// Euclidean distances (um) from one point to every voltage-source node,
// in vsource_nodes order.
std::vector<double> source_distances_um(const PdnGraph& graph, std::int64_t x_nm,
                                        std::int64_t y_nm);

// d_e = (sum_i 1/d_i)^-1; zero if any distance is zero. Empty input is
// rejected.
double effective_distance_um(std::span<const double> distances_um);

// Harmonic aggregate d_e = (sum_i 1/d_i)^-1 per instance, average-rasterized
// (um). An instance coincident with any source gets d_e = 0.
FeatureMap effective_distance_map(const PdnGraph& graph, int cell_nm = kDefaultCellNm);

// Per-node shortest-path resistance to the nearest seed, one run with all
// seeds started at 0 (equivalent to the minimum over per-source runs).
struct PathDistances {
    std::vector<double> ohms;  // +inf for nodes unreachable from every seed
    int unreachable = 0;
};

PathDistances multi_source_dijkstra(const PdnGraph& graph, std::span<const int> sources);

// Instance-level maps from the vsource-seeded distances: per-cell average of
// rho (ohm) and of rho * amps (V). Unreachable instances contribute 0.
struct ShortestPathMaps {
    FeatureMap resistance;
    FeatureMap voltage;
    int unreachable_instances = 0;
};

ShortestPathMaps shortest_path_maps(const PdnGraph& graph, int cell_nm = kDefaultCellNm);

// 2D-projected structural maps. Every resistor becomes an axis-aligned
// segment between its endpoints; vias cover exactly one cell. Diagonal
// segments are rejected.
FeatureMap resistor_count_map(const PdnGraph& graph, int cell_nm = kDefaultCellNm);
FeatureMap resistance_map(const PdnGraph& graph, int cell_nm = kDefaultCellNm);

// Rail-pitch reciprocal sums (1/um). Per (layer, orientation): distinct rail
// coordinates, pitch = median adjacent spacing, and every cell overlapped by
// that group's rails gains 1/pitch. Groups with fewer than two distinct rail
// coordinates contribute nothing.
FeatureMap pdn_density_map(const PdnGraph& graph, int cell_nm = kDefaultCellNm);

inline constexpr std::array<const char*, 8> kChannelNames = {
    "current",        "effective_distance", "pdn_density", "sp_resistance",
    "sp_voltage",     "resistor_count",     "resistance",  "ir_drop",
};

struct ExtractOptions {
    int cell_nm = kDefaultCellNm;
    bool with_truth = false;   // append the golden IR-drop channel
    double solve_tol = 1e-10;
    int threads = 0;           // 0 = auto (IRDROP_THREADS, then hardware)
};

// All seven features in kChannelNames order, plus the truth channel when
// requested. Channels share extent and cell size.
MapStack extract_all(const PdnGraph& graph, const ExtractOptions& opts = {});

// Effective parallelism: explicit value, else IRDROP_THREADS, else hardware.
int effective_threads(int requested);

}  // namespace irdrop
