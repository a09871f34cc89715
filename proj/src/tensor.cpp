#include "irdrop/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

#include "irdrop/errors.hpp"
#include "irdrop/features.hpp"  // effective_threads

namespace irdrop::nn {

namespace {

std::int64_t product(const std::vector<int>& dims) {
    std::int64_t n = 1;
    for (int d : dims) {
        if (d <= 0) throw ShapeError("tensor dimension must be positive");
        n *= d;
    }
    return n;
}

void require(bool cond, const char* msg) {
    if (!cond) throw ShapeError(msg);
}

// Runs fn(first, last) over [0, n) split across the worker pool. Each index
// is handled by exactly one worker, so results do not depend on the split.
template <typename Fn>
void parallel_for(int n, std::int64_t work_per_item, Fn&& fn) {
    int threads = effective_threads(0);
    threads = std::min<int>(threads, n);
    // Not worth spawning below ~20M flops of total work.
    if (threads <= 1 || work_per_item * n < 20'000'000) {
        fn(0, n);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(threads);
    const int chunk = (n + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
        const int lo = t * chunk;
        const int hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([&fn, lo, hi] { fn(lo, hi); });
    }
    for (std::thread& th : pool) th.join();
}

}  // namespace

Tensor Tensor::zeros(std::initializer_list<int> dims) {
    return zeros(std::vector<int>(dims));
}

Tensor Tensor::zeros(const std::vector<int>& dims) {
    Tensor t;
    t.shape = dims;
    t.data.assign(static_cast<std::size_t>(product(dims)), 0.0f);
    return t;
}

std::int64_t Tensor::numel() const {
    std::int64_t n = 1;
    for (int d : shape) n *= d;
    return n;
}

Tensor conv2d(const Tensor& x, const Tensor& weights, const Tensor& bias, int stride,
              Padding padding) {
    require(x.rank() == 3, "conv2d: input must be (c,h,w)");
    require(weights.rank() == 4, "conv2d: weights must be (out_c,in_c,kh,kw)");
    const int in_c = x.dim(0), h = x.dim(1), w = x.dim(2);
    const int out_c = weights.dim(0), kh = weights.dim(2), kw = weights.dim(3);
    require(weights.dim(1) == in_c, "conv2d: weight in_c mismatch");
    require(stride >= 1, "conv2d: stride must be >= 1");
    require(bias.data.empty() || (bias.rank() == 1 && bias.dim(0) == out_c),
            "conv2d: bias shape mismatch");

    int ph, pw;
    if (padding.same) {
        require(kh % 2 == 1 && kw % 2 == 1, "conv2d: same padding needs odd kernels");
        ph = kh / 2;
        pw = kw / 2;
    } else {
        ph = padding.pad_h;
        pw = padding.pad_w;
    }
    const int out_h = (h + 2 * ph - kh) / stride + 1;
    const int out_w = (w + 2 * pw - kw) / stride + 1;
    require(out_h >= 1 && out_w >= 1, "conv2d: kernel larger than padded input");

    // Materialize the zero-padded input once; every output channel reuses it.
    const int pad_h_total = h + 2 * ph, pad_w_total = w + 2 * pw;
    std::vector<float> padded(static_cast<std::size_t>(in_c) * pad_h_total * pad_w_total, 0.0f);
    for (int c = 0; c < in_c; ++c) {
        for (int y = 0; y < h; ++y) {
            const float* src = &x.data[(static_cast<std::size_t>(c) * h + y) * w];
            float* dst = &padded[(static_cast<std::size_t>(c) * pad_h_total + y + ph) * pad_w_total + pw];
            std::copy(src, src + w, dst);
        }
    }

    Tensor out = Tensor::zeros({out_c, out_h, out_w});
    const std::int64_t per_oc = static_cast<std::int64_t>(in_c) * kh * kw * out_h * out_w * 2;

    parallel_for(out_c, per_oc, [&](int oc_lo, int oc_hi) {
        std::vector<double> acc(static_cast<std::size_t>(out_h) * out_w);
        for (int oc = oc_lo; oc < oc_hi; ++oc) {
            std::fill(acc.begin(), acc.end(), 0.0);
            const float* wbase =
                &weights.data[static_cast<std::size_t>(oc) * in_c * kh * kw];
            for (int ic = 0; ic < in_c; ++ic) {
                const float* plane = &padded[static_cast<std::size_t>(ic) * pad_h_total * pad_w_total];
                for (int ky = 0; ky < kh; ++ky) {
                    for (int kx = 0; kx < kw; ++kx) {
                        const double wv = wbase[(static_cast<std::size_t>(ic) * kh + ky) * kw + kx];
                        if (stride == 1) {
                            for (int oy = 0; oy < out_h; ++oy) {
                                const float* src = &plane[static_cast<std::size_t>(oy + ky) * pad_w_total + kx];
                                double* arow = &acc[static_cast<std::size_t>(oy) * out_w];
                                for (int ox = 0; ox < out_w; ++ox)
                                    arow[ox] += wv * static_cast<double>(src[ox]);
                            }
                        } else {
                            for (int oy = 0; oy < out_h; ++oy) {
                                const float* src =
                                    &plane[static_cast<std::size_t>(oy * stride + ky) * pad_w_total + kx];
                                double* arow = &acc[static_cast<std::size_t>(oy) * out_w];
                                for (int ox = 0; ox < out_w; ++ox)
                                    arow[ox] += wv * static_cast<double>(src[static_cast<std::size_t>(ox) * stride]);
                            }
                        }
                    }
                }
            }
            const double b = bias.data.empty() ? 0.0 : static_cast<double>(bias.data[oc]);
            float* orow = &out.data[static_cast<std::size_t>(oc) * out_h * out_w];
            for (std::size_t i = 0; i < acc.size(); ++i)
                orow[i] = static_cast<float>(acc[i] + b);
        }
    });
    return out;
}

Tensor deconv2d_x2(const Tensor& x, const Tensor& weights, const Tensor& bias) {
    require(x.rank() == 3, "deconv2d_x2: input must be (c,h,w)");
    require(weights.rank() == 4, "deconv2d_x2: weights must be (in_c,out_c,kh,kw)");
    require(weights.dim(2) == 2 && weights.dim(3) == 2, "deconv2d_x2: kernel must be 2x2");
    const int in_c = x.dim(0), h = x.dim(1), w = x.dim(2);
    const int out_c = weights.dim(1);
    require(weights.dim(0) == in_c, "deconv2d_x2: weight in_c mismatch");
    require(bias.data.empty() || (bias.rank() == 1 && bias.dim(0) == out_c),
            "deconv2d_x2: bias shape mismatch");

    Tensor out = Tensor::zeros({out_c, 2 * h, 2 * w});
    const std::int64_t per_oc = static_cast<std::int64_t>(in_c) * h * w * 8;

    // Kernel 2x2 at stride 2 tiles the output: each output pixel receives
    // exactly one (input pixel, tap) product per input channel.
    parallel_for(out_c, per_oc, [&](int oc_lo, int oc_hi) {
        std::vector<double> acc(static_cast<std::size_t>(h) * w * 4);
        for (int oc = oc_lo; oc < oc_hi; ++oc) {
            std::fill(acc.begin(), acc.end(), 0.0);
            for (int ic = 0; ic < in_c; ++ic) {
                const float* wq = &weights.data[(static_cast<std::size_t>(ic) * out_c + oc) * 4];
                const double w00 = wq[0], w01 = wq[1], w10 = wq[2], w11 = wq[3];
                const float* plane = &x.data[static_cast<std::size_t>(ic) * h * w];
                for (int y = 0; y < h; ++y) {
                    const float* src = &plane[static_cast<std::size_t>(y) * w];
                    double* a0 = &acc[static_cast<std::size_t>(2 * y) * 2 * w];
                    double* a1 = a0 + 2 * w;
                    for (int xx = 0; xx < w; ++xx) {
                        const double v = src[xx];
                        a0[2 * xx] += w00 * v;
                        a0[2 * xx + 1] += w01 * v;
                        a1[2 * xx] += w10 * v;
                        a1[2 * xx + 1] += w11 * v;
                    }
                }
            }
            const double b = bias.data.empty() ? 0.0 : static_cast<double>(bias.data[oc]);
            float* orow = &out.data[static_cast<std::size_t>(oc) * 4 * h * w];
            for (std::size_t i = 0; i < acc.size(); ++i)
                orow[i] = static_cast<float>(acc[i] + b);
        }
    });
    return out;
}

Tensor maxpool2(const Tensor& x) {
    require(x.rank() == 3, "maxpool2: input must be (c,h,w)");
    const int c = x.dim(0), h = x.dim(1), w = x.dim(2);
    const int oh = h / 2, ow = w / 2;
    require(oh >= 1 && ow >= 1, "maxpool2: input too small");
    Tensor out = Tensor::zeros({c, oh, ow});
    for (int ch = 0; ch < c; ++ch)
        for (int y = 0; y < oh; ++y)
            for (int xx = 0; xx < ow; ++xx) {
                float m = x.at(ch, 2 * y, 2 * xx);
                m = std::max(m, x.at(ch, 2 * y, 2 * xx + 1));
                m = std::max(m, x.at(ch, 2 * y + 1, 2 * xx));
                m = std::max(m, x.at(ch, 2 * y + 1, 2 * xx + 1));
                out.at(ch, y, xx) = m;
            }
    return out;
}

Tensor avgpool_same(const Tensor& x, int k) {
    require(x.rank() == 3, "avgpool_same: input must be (c,h,w)");
    require(k >= 1 && k % 2 == 1, "avgpool_same: kernel must be odd");
    const int c = x.dim(0), h = x.dim(1), w = x.dim(2);
    const int r = k / 2;
    Tensor out = Tensor::zeros({c, h, w});
    for (int ch = 0; ch < c; ++ch)
        for (int y = 0; y < h; ++y)
            for (int xx = 0; xx < w; ++xx) {
                double sum = 0.0;
                for (int dy = -r; dy <= r; ++dy)
                    for (int dx = -r; dx <= r; ++dx) {
                        const int sy = y + dy, sx = xx + dx;
                        if (sy >= 0 && sy < h && sx >= 0 && sx < w) sum += x.at(ch, sy, sx);
                    }
                out.at(ch, y, xx) = static_cast<float>(sum / (k * k));
            }
    return out;
}

Tensor channel_avg(const Tensor& x) {
    require(x.rank() == 3 && x.numel() > 0, "channel_avg: input must be (c,h,w)");
    const int c = x.dim(0);
    const std::size_t plane = static_cast<std::size_t>(x.dim(1)) * x.dim(2);
    Tensor out = Tensor::zeros({c});
    for (int ch = 0; ch < c; ++ch) {
        double sum = 0.0;
        const float* p = &x.data[ch * plane];
        for (std::size_t i = 0; i < plane; ++i) sum += p[i];
        out.data[ch] = static_cast<float>(sum / static_cast<double>(plane));
    }
    return out;
}

Tensor channel_max(const Tensor& x) {
    require(x.rank() == 3 && x.numel() > 0, "channel_max: input must be (c,h,w)");
    const int c = x.dim(0);
    const std::size_t plane = static_cast<std::size_t>(x.dim(1)) * x.dim(2);
    Tensor out = Tensor::zeros({c});
    for (int ch = 0; ch < c; ++ch) {
        float m = -std::numeric_limits<float>::infinity();
        const float* p = &x.data[ch * plane];
        for (std::size_t i = 0; i < plane; ++i) m = std::max(m, p[i]);
        out.data[ch] = m;
    }
    return out;
}

Tensor spatial_avg(const Tensor& x) {
    require(x.rank() == 3 && x.numel() > 0, "spatial_avg: input must be (c,h,w)");
    const int c = x.dim(0), h = x.dim(1), w = x.dim(2);
    Tensor out = Tensor::zeros({1, h, w});
    const std::size_t plane = static_cast<std::size_t>(h) * w;
    for (std::size_t i = 0; i < plane; ++i) {
        double sum = 0.0;
        for (int ch = 0; ch < c; ++ch) sum += x.data[ch * plane + i];
        out.data[i] = static_cast<float>(sum / c);
    }
    return out;
}

Tensor spatial_max(const Tensor& x) {
    require(x.rank() == 3 && x.numel() > 0, "spatial_max: input must be (c,h,w)");
    const int c = x.dim(0), h = x.dim(1), w = x.dim(2);
    Tensor out = Tensor::zeros({1, h, w});
    const std::size_t plane = static_cast<std::size_t>(h) * w;
    for (std::size_t i = 0; i < plane; ++i) {
        float m = -std::numeric_limits<float>::infinity();
        for (int ch = 0; ch < c; ++ch) m = std::max(m, x.data[ch * plane + i]);
        out.data[i] = m;
    }
    return out;
}

namespace {

// Catmull-Rom weights, a = -0.5.
inline void cubic_weights(double t, double w[4]) {
    const double a = -0.5;
    const double t2 = t * t, t3 = t2 * t;
    w[0] = a * (t3 - 2.0 * t2 + t);
    w[1] = (a + 2.0) * t3 - (a + 3.0) * t2 + 1.0;
    w[2] = -(a + 2.0) * t3 + (2.0 * a + 3.0) * t2 - a * t;
    w[3] = a * (t2 - t3);
}

}  // namespace

Tensor bicubic_resize(const Tensor& x, int out_h, int out_w) {
    require(x.rank() == 3, "bicubic_resize: input must be (c,h,w)");
    require(out_h >= 1 && out_w >= 1, "bicubic_resize: output dims must be >= 1");
    const int c = x.dim(0), h = x.dim(1), w = x.dim(2);
    if (out_h == h && out_w == w) return x;

    const double sy = static_cast<double>(h) / out_h;
    const double sx = static_cast<double>(w) / out_w;

    struct Taps {
        int idx[4];
        double wgt[4];
    };
    auto make_taps = [](int out_n, int in_n, double scale) {
        std::vector<Taps> taps(out_n);
        for (int o = 0; o < out_n; ++o) {
            const double src = (o + 0.5) * scale - 0.5;
            const double base = std::floor(src);
            const double t = src - base;
            cubic_weights(t, taps[o].wgt);
            for (int k = 0; k < 4; ++k)
                taps[o].idx[k] = std::clamp(static_cast<int>(base) - 1 + k, 0, in_n - 1);
        }
        return taps;
    };
    const std::vector<Taps> ty = make_taps(out_h, h, sy);
    const std::vector<Taps> tx = make_taps(out_w, w, sx);

    Tensor out = Tensor::zeros({c, out_h, out_w});
    std::vector<double> row(w);
    for (int ch = 0; ch < c; ++ch) {
        for (int oy = 0; oy < out_h; ++oy) {
            const Taps& yt = ty[oy];
            for (int xx = 0; xx < w; ++xx) {
                double v = 0.0;
                for (int k = 0; k < 4; ++k) v += yt.wgt[k] * x.at(ch, yt.idx[k], xx);
                row[xx] = v;
            }
            for (int ox = 0; ox < out_w; ++ox) {
                const Taps& xt = tx[ox];
                double v = 0.0;
                for (int k = 0; k < 4; ++k) v += xt.wgt[k] * row[xt.idx[k]];
                out.at(ch, oy, ox) = static_cast<float>(v);
            }
        }
    }
    return out;
}

Tensor relu(Tensor x) {
    for (float& v : x.data) v = v > 0.0f ? v : 0.0f;
    return x;
}

Tensor sigmoid(Tensor x) {
    for (float& v : x.data) v = static_cast<float>(1.0 / (1.0 + std::exp(-static_cast<double>(v))));
    return x;
}

Tensor add(const Tensor& a, const Tensor& b) {
    require(a.same_shape(b), "add: shape mismatch");
    Tensor out = a;
    for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] += b.data[i];
    return out;
}

Tensor mul_channel_gate(const Tensor& x, const Tensor& gate) {
    require(x.rank() == 3 && gate.rank() == 1 && gate.dim(0) == x.dim(0),
            "mul_channel_gate: gate must be (c)");
    Tensor out = x;
    const std::size_t plane = static_cast<std::size_t>(x.dim(1)) * x.dim(2);
    for (int ch = 0; ch < x.dim(0); ++ch) {
        const float g = gate.data[ch];
        float* p = &out.data[ch * plane];
        for (std::size_t i = 0; i < plane; ++i) p[i] *= g;
    }
    return out;
}

Tensor mul_spatial_gate(const Tensor& x, const Tensor& gate) {
    require(x.rank() == 3 && gate.rank() == 3 && gate.dim(0) == 1 && gate.dim(1) == x.dim(1) &&
                gate.dim(2) == x.dim(2),
            "mul_spatial_gate: gate must be (1,h,w)");
    Tensor out = x;
    const std::size_t plane = static_cast<std::size_t>(x.dim(1)) * x.dim(2);
    for (int ch = 0; ch < x.dim(0); ++ch) {
        float* p = &out.data[ch * plane];
        for (std::size_t i = 0; i < plane; ++i) p[i] *= gate.data[i];
    }
    return out;
}

Tensor concat_channels(const std::vector<const Tensor*>& parts) {
    require(!parts.empty(), "concat_channels: no inputs");
    const int h = parts[0]->dim(1), w = parts[0]->dim(2);
    int total_c = 0;
    for (const Tensor* p : parts) {
        require(p->rank() == 3 && p->dim(1) == h && p->dim(2) == w,
                "concat_channels: spatial dims differ");
        total_c += p->dim(0);
    }
    Tensor out = Tensor::zeros({total_c, h, w});
    std::size_t off = 0;
    for (const Tensor* p : parts) {
        std::copy(p->data.begin(), p->data.end(), out.data.begin() + off);
        off += p->data.size();
    }
    return out;
}

Tensor batchnorm(const Tensor& x, const Tensor& gamma, const Tensor& beta, const Tensor& mean,
                 const Tensor& var) {
    require(x.rank() == 3, "batchnorm: input must be (c,h,w)");
    const int c = x.dim(0);
    require(gamma.dim(0) == c && beta.dim(0) == c && mean.dim(0) == c && var.dim(0) == c,
            "batchnorm: parameter size mismatch");
    constexpr double kEps = 1e-5;
    Tensor out = x;
    const std::size_t plane = static_cast<std::size_t>(x.dim(1)) * x.dim(2);
    for (int ch = 0; ch < c; ++ch) {
        const double scale = gamma.data[ch] / std::sqrt(static_cast<double>(var.data[ch]) + kEps);
        const double shift = beta.data[ch] - scale * mean.data[ch];
        float* p = &out.data[ch * plane];
        for (std::size_t i = 0; i < plane; ++i)
            p[i] = static_cast<float>(scale * p[i] + shift);
    }
    return out;
}

Tensor linear(const Tensor& x, const Tensor& w, const Tensor& b) {
    require(x.rank() == 2 && w.rank() == 2, "linear: x must be (n,d), w (out,in)");
    const int n = x.dim(0), din = x.dim(1), dout = w.dim(0);
    require(w.dim(1) == din, "linear: weight in-dim mismatch");
    require(b.data.empty() || b.dim(0) == dout, "linear: bias size mismatch");
    Tensor out = Tensor::zeros({n, dout});
    for (int i = 0; i < n; ++i) {
        const float* xi = &x.data[static_cast<std::size_t>(i) * din];
        for (int o = 0; o < dout; ++o) {
            const float* wo = &w.data[static_cast<std::size_t>(o) * din];
            double acc = b.data.empty() ? 0.0 : static_cast<double>(b.data[o]);
            for (int j = 0; j < din; ++j) acc += static_cast<double>(xi[j]) * wo[j];
            out.at(i, o) = static_cast<float>(acc);
        }
    }
    return out;
}

Tensor layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta) {
    require(x.rank() == 2, "layer_norm: input must be (n,d)");
    const int n = x.dim(0), d = x.dim(1);
    require(gamma.dim(0) == d && beta.dim(0) == d, "layer_norm: parameter size mismatch");
    constexpr double kEps = 1e-5;
    Tensor out = x;
    for (int i = 0; i < n; ++i) {
        float* row = &out.data[static_cast<std::size_t>(i) * d];
        double mean = 0.0;
        for (int j = 0; j < d; ++j) mean += row[j];
        mean /= d;
        double var = 0.0;
        for (int j = 0; j < d; ++j) {
            const double dv = row[j] - mean;
            var += dv * dv;
        }
        var /= d;
        const double inv = 1.0 / std::sqrt(var + kEps);
        for (int j = 0; j < d; ++j)
            row[j] = static_cast<float>((row[j] - mean) * inv * gamma.data[j] + beta.data[j]);
    }
    return out;
}

void softmax_rows(Tensor& x) {
    require(x.rank() == 2, "softmax_rows: input must be (n,d)");
    const int n = x.dim(0), d = x.dim(1);
    for (int i = 0; i < n; ++i) {
        float* row = &x.data[static_cast<std::size_t>(i) * d];
        float m = row[0];
        for (int j = 1; j < d; ++j) m = std::max(m, row[j]);
        double sum = 0.0;
        for (int j = 0; j < d; ++j) sum += std::exp(static_cast<double>(row[j] - m));
        for (int j = 0; j < d; ++j)
            row[j] = static_cast<float>(std::exp(static_cast<double>(row[j] - m)) / sum);
    }
}

Tensor gelu(Tensor x) {
    for (float& v : x.data) {
        const double t = v;
        v = static_cast<float>(0.5 * t * (1.0 + std::erf(t / std::sqrt(2.0))));
    }
    return x;
}

Tensor mhsa_block(const Tensor& tokens, const TransformerLayerParams& p) {
    require(tokens.rank() == 2, "mhsa_block: tokens must be (n,d)");
    const int n = tokens.dim(0), d = tokens.dim(1);
    require(p.heads >= 1 && d % p.heads == 0, "mhsa_block: head count must divide dim");
    const int dh = d / p.heads;
    const double scale = 1.0 / std::sqrt(static_cast<double>(dh));

    Tensor normed = layer_norm(tokens, p.ln1_gamma, p.ln1_beta);
    Tensor q = linear(normed, p.wq, p.bq);
    Tensor k = linear(normed, p.wk, p.bk);
    Tensor v = linear(normed, p.wv, p.bv);

    Tensor attn_out = Tensor::zeros({n, d});
    Tensor scores = Tensor::zeros({n, n});
    for (int head = 0; head < p.heads; ++head) {
        const int off = head * dh;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                double acc = 0.0;
                for (int t = 0; t < dh; ++t)
                    acc += static_cast<double>(q.at(i, off + t)) * k.at(j, off + t);
                scores.at(i, j) = static_cast<float>(acc * scale);
            }
        softmax_rows(scores);
        for (int i = 0; i < n; ++i)
            for (int t = 0; t < dh; ++t) {
                double acc = 0.0;
                for (int j = 0; j < n; ++j)
                    acc += static_cast<double>(scores.at(i, j)) * v.at(j, off + t);
                attn_out.at(i, off + t) = static_cast<float>(acc);
            }
    }
    Tensor projected = linear(attn_out, p.wo, p.bo);
    Tensor after_attn = add(tokens, projected);

    Tensor normed2 = layer_norm(after_attn, p.ln2_gamma, p.ln2_beta);
    Tensor hidden = gelu(linear(normed2, p.mlp_w1, p.mlp_b1));
    Tensor mlp_out = linear(hidden, p.mlp_w2, p.mlp_b2);
    return add(after_attn, mlp_out);
}

}  // namespace irdrop::nn
