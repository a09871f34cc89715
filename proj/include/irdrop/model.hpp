#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "irdrop/tensor.hpp"

namespace irdrop {

struct TransformerConfig {
    int layers = 2;
    int heads = 8;
    int hidden = 512;
    int mlp_ratio = 4;
    int grid = 16;  // tokens form a grid x grid patch map
};

struct CbamConfig {
    int spatial_kernel = 25;
    int reduction = 16;
};

struct InceptionKernels {
    int a_k = 5;  // square convs in Inception-A
    int b_k = 7;  // factorized 1xk / kx1 chains in Inception-B
    int c_k = 3;  // split tails in Inception-C
};

struct ModelConfig {
    int in_channels = 7;
    std::array<int, 4> level_channels{64, 128, 256, 512};
    int bottleneck_channels = 512;
    TransformerConfig transformer;
    CbamConfig cbam;
    InceptionKernels inception;
    int stem_kernel = 7;
    std::uint64_t seed = 0;

    // Throws ConfigError when an architectural invariant is violated
    // (bottleneck must equal the transformer hidden size, kernels odd,
    // channel counts divisible by the branch split, ...).
    void validate() const;

    std::string to_json() const;
    static ModelConfig from_json(const std::string& json);

    bool operator==(const ModelConfig&) const = default;
};

// conv + BN + ReLU unit.
struct ConvBn {
    nn::Tensor w, b;
    nn::Tensor bn_gamma, bn_beta, bn_mean, bn_var;
};

// (k x k conv + BN + ReLU) x 2.
struct ConvBlock {
    ConvBn conv1, conv2;
};

enum class InceptionVariant { A, B, C };

// Four-branch module, stride 1, same padding, equal channel split:
//   A: 1x1 | 1x1->kxk | 1x1->kxk->kxk           | avgpool3->1x1
//   B: 1x1 | 1x1->1xk->kx1 | 1x1->(1xk->kx1)x2  | avgpool3->1x1
//   C: 1x1 | 1x1->(1xk | kx1) | 1x1->kx1->1xk->(1xk | kx1) | avgpool3->1x1
struct InceptionParams {
    InceptionVariant variant = InceptionVariant::A;
    ConvBn b1;
    ConvBn b2_reduce;
    std::vector<ConvBn> b2_chain;
    ConvBn b2_split_h, b2_split_v;  // variant C only
    ConvBn b3_reduce;
    std::vector<ConvBn> b3_chain;
    ConvBn b3_split_h, b3_split_v;  // variant C only
    ConvBn b4_proj;
};

struct GlobalAttentionParams {
    nn::Tensor pos_emb;  // (grid*grid, hidden)
    std::vector<nn::TransformerLayerParams> layers;
    int grid = 16;
};

struct CbamParams {
    nn::Tensor mlp_w1, mlp_b1, mlp_w2, mlp_b2;  // shared channel MLP
    nn::Tensor spatial_w, spatial_b;            // (1,2,k,k) conv over [avg,max]
};

struct DecoderStage {
    nn::Tensor deconv_w, deconv_b;  // (in,out,2,2)
    std::optional<InceptionParams> inception;
    std::optional<ConvBlock> conv_block;
    CbamParams cbam;
};

// The full network: 7x7 stem, Inception encoder (A, B, C), transformer
// global attention at the bottleneck, four deconv+Inception/conv+CBAM
// decoder stages with concatenated skips, 1x1 head.
struct Model {
    ModelConfig config;
    ConvBlock stem1, stem2;
    InceptionParams enc_a, enc_b, enc_c;
    GlobalAttentionParams gattn;
    DecoderStage dec1, dec2, dec3, dec4;  // blocks: C, B, A, plain conv
    nn::Tensor head_w, head_b;

    std::int64_t parameter_count() const;
};

// Deterministic build: weights drawn from a SplitMix64 stream seeded with
// `seed`, uniform with fan-in scaling; BN starts as identity.
Model build_model(const ModelConfig& config, std::uint64_t seed);
inline Model build_model(const ModelConfig& config) { return build_model(config, config.seed); }

nn::Tensor conv_bn_relu(const nn::Tensor& x, const ConvBn& p);
nn::Tensor conv_block_forward(const nn::Tensor& x, const ConvBlock& p);
nn::Tensor inception_forward(const nn::Tensor& x, const InceptionParams& p);

// out = x + up(T(t) - t) with t = tokens(bicubic16(x)) + pos_emb: the block
// feeds back only the transformer increment, so zeroed output projections
// make it an exact identity.
nn::Tensor global_attention_forward(const nn::Tensor& x, const GlobalAttentionParams& p);

// CBAM with residual: out = x + Ms(Mc(x) * x) * (Mc(x) * x).
nn::Tensor local_attention_forward(const nn::Tensor& x, const CbamParams& p);

// (in_channels, h, w) -> (1, h, w); h and w must be multiples of 16.
nn::Tensor forward(const Model& model, const nn::Tensor& input);

// Canonical tensor enumeration used by initialization and the weights file.
void visit_tensors(Model& model,
                   const std::function<void(const std::string&, nn::Tensor&)>& fn);
void visit_tensors(const Model& model,
                   const std::function<void(const std::string&, const nn::Tensor&)>& fn);

// Weights file: magic "IRWT", u16 version, length-prefixed config JSON, then
// per-tensor records (u32 name_len, name, u8 dtype=0, u32 ndim, u32 dims[],
// little-endian f32 payload). save->load->save is byte-identical.
void save_weights(const Model& model, const std::string& path);
Model load_weights(const std::string& path);

}  // namespace irdrop
