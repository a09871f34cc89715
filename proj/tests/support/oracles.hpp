#pragma once

// Test-only reference implementations, kept deliberately independent of the
// library's algorithms: dense Gaussian elimination instead of CG, Bellman-Ford
// instead of Dijkstra, interval enumeration instead of index ranges, direct
// nested loops instead of the tuned conv kernels.

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "irdrop/feature_map.hpp"
#include "irdrop/graph.hpp"
#include "irdrop/tensor.hpp"

namespace oracles {

// Dense nodal solve: assembles the full conductance matrix over unknown
// nodes straight from the edge list and eliminates with partial pivoting.
inline std::vector<double> dense_lu_voltages(const irdrop::PdnGraph& g) {
    const int n = static_cast<int>(g.nodes.size());
    std::vector<int> unknown(n, -1);
    std::vector<char> fixed(n, 0);
    for (int v : g.vsource_nodes) fixed[v] = 1;
    int dim = 0;
    for (int i = 0; i < n; ++i)
        if (!fixed[i]) unknown[i] = dim++;

    std::vector<std::vector<double>> a(dim, std::vector<double>(dim + 1, 0.0));
    for (const irdrop::EdgeR& e : g.edges) {
        const double cond = 1.0 / e.ohms;
        const int iu = unknown[e.u], iv = unknown[e.v];
        if (iu >= 0) a[iu][iu] += cond;
        if (iv >= 0) a[iv][iv] += cond;
        if (iu >= 0 && iv >= 0) {
            a[iu][iv] -= cond;
            a[iv][iu] -= cond;
        } else if (iu >= 0) {
            a[iu][dim] += g.vdd * cond;
        } else if (iv >= 0) {
            a[iv][dim] += g.vdd * cond;
        }
    }
    for (const auto& [node, amps] : g.injections)
        if (unknown[node] >= 0) a[unknown[node]][dim] -= amps;

    for (int col = 0; col < dim; ++col) {
        int pivot = col;
        for (int r = col + 1; r < dim; ++r)
            if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
        if (a[pivot][col] == 0.0) throw std::runtime_error("oracle: singular matrix");
        std::swap(a[col], a[pivot]);
        for (int r = col + 1; r < dim; ++r) {
            const double f = a[r][col] / a[col][col];
            if (f == 0.0) continue;
            for (int c = col; c <= dim; ++c) a[r][c] -= f * a[col][c];
        }
    }
    std::vector<double> x(dim, 0.0);
    for (int r = dim - 1; r >= 0; --r) {
        double acc = a[r][dim];
        for (int c = r + 1; c < dim; ++c) acc -= a[r][c] * x[c];
        x[r] = acc / a[r][r];
    }

    std::vector<double> volts(n, g.vdd);
    for (int i = 0; i < n; ++i)
        if (unknown[i] >= 0) volts[i] = x[unknown[i]];
    return volts;
}

// Multi-source Bellman-Ford over the edge list; no adjacency structure.
inline std::vector<double> bellman_ford(const irdrop::PdnGraph& g,
                                        const std::vector<int>& sources) {
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> dist(g.nodes.size(), inf);
    for (int s : sources) dist[s] = 0.0;
    bool changed = true;
    while (changed) {
        changed = false;
        for (const irdrop::EdgeR& e : g.edges) {
            if (dist[e.u] + e.ohms < dist[e.v]) {
                dist[e.v] = dist[e.u] + e.ohms;
                changed = true;
            }
            if (dist[e.v] + e.ohms < dist[e.u]) {
                dist[e.u] = dist[e.v] + e.ohms;
                changed = true;
            }
        }
    }
    return dist;
}

// Closed segment vs per-cell interval test, the last row/column closed at the
// die boundary. Enumerates every cell of the grid.
inline std::vector<std::pair<int, int>> covered_cells_bruteforce(const irdrop::GridSpec& grid,
                                                                 std::int64_t x1, std::int64_t y1,
                                                                 std::int64_t x2,
                                                                 std::int64_t y2) {
    const std::int64_t lo_x = std::min(x1, x2), hi_x = std::max(x1, x2);
    const std::int64_t lo_y = std::min(y1, y2), hi_y = std::max(y1, y2);
    const std::int64_t cell = grid.cell_nm;
    std::vector<std::pair<int, int>> out;
    for (int r = 0; r < grid.h; ++r) {
        const std::int64_t cy0 = r * cell;
        const std::int64_t cy1 = (r + 1) * cell;  // exclusive except on the last row
        const bool y_hit = (r == grid.h - 1) ? (hi_y >= cy0 && lo_y <= cy1)
                                             : (hi_y >= cy0 && lo_y < cy1);
        if (!y_hit) continue;
        for (int c = 0; c < grid.w; ++c) {
            const std::int64_t cx0 = c * cell;
            const std::int64_t cx1 = (c + 1) * cell;
            const bool x_hit = (c == grid.w - 1) ? (hi_x >= cx0 && lo_x <= cx1)
                                                 : (hi_x >= cx0 && lo_x < cx1);
            if (x_hit) out.emplace_back(r, c);
        }
    }
    return out;
}

// Plain quadruple-loop cross-correlation.
inline irdrop::nn::Tensor conv2d_oracle(const irdrop::nn::Tensor& x,
                                        const irdrop::nn::Tensor& w,
                                        const irdrop::nn::Tensor& bias, int stride, int ph,
                                        int pw) {
    const int in_c = x.dim(0), h = x.dim(1), width = x.dim(2);
    const int out_c = w.dim(0), kh = w.dim(2), kw = w.dim(3);
    const int out_h = (h + 2 * ph - kh) / stride + 1;
    const int out_w = (width + 2 * pw - kw) / stride + 1;
    irdrop::nn::Tensor out = irdrop::nn::Tensor::zeros({out_c, out_h, out_w});
    for (int oc = 0; oc < out_c; ++oc)
        for (int oy = 0; oy < out_h; ++oy)
            for (int ox = 0; ox < out_w; ++ox) {
                double acc = bias.data.empty() ? 0.0 : bias.data[oc];
                for (int ic = 0; ic < in_c; ++ic)
                    for (int ky = 0; ky < kh; ++ky)
                        for (int kx = 0; kx < kw; ++kx) {
                            const int sy = oy * stride + ky - ph;
                            const int sx = ox * stride + kx - pw;
                            if (sy < 0 || sy >= h || sx < 0 || sx >= width) continue;
                            acc += static_cast<double>(x.at(ic, sy, sx)) *
                                   w.data[((static_cast<std::size_t>(oc) * in_c + ic) * kh + ky) * kw + kx];
                        }
                out.at(oc, oy, ox) = static_cast<float>(acc);
            }
    return out;
}

// Scatter-accumulate transposed convolution, kernel 2x2 stride 2.
inline irdrop::nn::Tensor deconv2d_x2_oracle(const irdrop::nn::Tensor& x,
                                             const irdrop::nn::Tensor& w,
                                             const irdrop::nn::Tensor& bias) {
    const int in_c = x.dim(0), h = x.dim(1), width = x.dim(2);
    const int out_c = w.dim(1);
    std::vector<double> acc(static_cast<std::size_t>(out_c) * 2 * h * 2 * width, 0.0);
    for (int ic = 0; ic < in_c; ++ic)
        for (int y = 0; y < h; ++y)
            for (int xx = 0; xx < width; ++xx)
                for (int oc = 0; oc < out_c; ++oc)
                    for (int ky = 0; ky < 2; ++ky)
                        for (int kx = 0; kx < 2; ++kx) {
                            const double wv =
                                w.data[((static_cast<std::size_t>(ic) * out_c + oc) * 2 + ky) * 2 + kx];
                            acc[(static_cast<std::size_t>(oc) * 2 * h + 2 * y + ky) * 2 * width +
                                2 * xx + kx] += wv * x.at(ic, y, xx);
                        }
    irdrop::nn::Tensor out = irdrop::nn::Tensor::zeros({out_c, 2 * h, 2 * width});
    const std::size_t plane = static_cast<std::size_t>(2 * h) * 2 * width;
    for (int oc = 0; oc < out_c; ++oc) {
        const double b = bias.data.empty() ? 0.0 : bias.data[oc];
        for (std::size_t i = 0; i < plane; ++i)
            out.data[oc * plane + i] = static_cast<float>(acc[oc * plane + i] + b);
    }
    return out;
}

// Two-pass population standard deviation.
inline double two_pass_std(const std::vector<double>& xs) {
    if (xs.empty()) return 0.0;
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / static_cast<double>(xs.size()));
}

}  // namespace oracles
