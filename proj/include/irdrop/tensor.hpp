#pragma once

#include <cstdint>
#include <initializer_list>
#include <vector>

namespace irdrop::nn {

// Dense row-major float tensor, rank 1..4. All ops here are deterministic:
// fixed loop order, double accumulation, no data-dependent branching. Any
// internal parallelism partitions outputs so each element keeps one fixed
// reduction order.
struct Tensor {
    std::vector<int> shape;
    std::vector<float> data;

    Tensor() = default;
    static Tensor zeros(std::initializer_list<int> dims);
    static Tensor zeros(const std::vector<int>& dims);

    int rank() const { return static_cast<int>(shape.size()); }
    int dim(int i) const { return shape[static_cast<std::size_t>(i)]; }
    std::int64_t numel() const;

    // (c,h,w) indexing
    float& at(int c, int y, int x) {
        return data[(static_cast<std::size_t>(c) * shape[1] + y) * shape[2] + x];
    }
    float at(int c, int y, int x) const {
        return data[(static_cast<std::size_t>(c) * shape[1] + y) * shape[2] + x];
    }
    // (n,d) indexing
    float& at(int n, int d) { return data[static_cast<std::size_t>(n) * shape[1] + d]; }
    float at(int n, int d) const { return data[static_cast<std::size_t>(n) * shape[1] + d]; }

    bool same_shape(const Tensor& other) const { return shape == other.shape; }
};

struct Padding {
    bool same = true;  // stride-1 same padding (odd kernels only)
    int pad_h = 0;     // used when same == false
    int pad_w = 0;

    static Padding same_pad() { return {true, 0, 0}; }
    static Padding explicit_pad(int ph, int pw) { return {false, ph, pw}; }
};

// Cross-correlation (no kernel flip). x: (in_c,h,w), weights:
// (out_c,in_c,kh,kw), bias: (out_c) or empty.
Tensor conv2d(const Tensor& x, const Tensor& weights, const Tensor& bias, int stride = 1,
              Padding padding = Padding::same_pad());

// Stride-2 transposed convolution with a 2x2 kernel: output is exactly
// (out_c, 2h, 2w). weights: (in_c,out_c,2,2).
Tensor deconv2d_x2(const Tensor& x, const Tensor& weights, const Tensor& bias);

Tensor maxpool2(const Tensor& x);                  // halves h,w (floor)
Tensor avgpool_same(const Tensor& x, int k);       // stride-1 k x k mean, zero-padded
Tensor channel_avg(const Tensor& x);               // (c)
Tensor channel_max(const Tensor& x);               // (c)
Tensor spatial_avg(const Tensor& x);               // (1,h,w), mean over channels
Tensor spatial_max(const Tensor& x);               // (1,h,w), max over channels

// Per-channel Catmull-Rom bicubic (a = -0.5), half-pixel centers, edges
// clamped. Identity when the size is unchanged.
Tensor bicubic_resize(const Tensor& x, int out_h, int out_w);

Tensor relu(Tensor x);
Tensor sigmoid(Tensor x);
Tensor add(const Tensor& a, const Tensor& b);
Tensor mul_channel_gate(const Tensor& x, const Tensor& gate);   // gate: (c)
Tensor mul_spatial_gate(const Tensor& x, const Tensor& gate);   // gate: (1,h,w)
Tensor concat_channels(const std::vector<const Tensor*>& parts);

// Inference-form batch normalization, eps = 1e-5.
Tensor batchnorm(const Tensor& x, const Tensor& gamma, const Tensor& beta, const Tensor& mean,
                 const Tensor& var);

// y = x * W^T + b over tokens; W: (out,in), x: (n,in).
Tensor linear(const Tensor& x, const Tensor& w, const Tensor& b);

// Per-token normalization before affine; gamma/beta: (d).
Tensor layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta);

// In-place row softmax with max subtraction.
void softmax_rows(Tensor& x);

Tensor gelu(Tensor x);

struct TransformerLayerParams {
    Tensor ln1_gamma, ln1_beta;
    Tensor wq, bq, wk, bk, wv, bv, wo, bo;   // all (d,d) / (d)
    Tensor ln2_gamma, ln2_beta;
    Tensor mlp_w1, mlp_b1, mlp_w2, mlp_b2;   // (hidden,d),(hidden),(d,hidden),(d)
    int heads = 8;
};

// Pre-norm transformer layer: x + MHSA(LN1(x)), then + MLP(LN2(.)).
Tensor mhsa_block(const Tensor& tokens, const TransformerLayerParams& params);

}  // namespace irdrop::nn
