#include "irdrop/model.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "irdrop/augment.hpp"  // SplitMix64
#include "irdrop/errors.hpp"

namespace irdrop {

using nn::Tensor;

void ModelConfig::validate() const {
    if (in_channels < 1) throw ConfigError("in_channels must be >= 1");
    for (int c : level_channels)
        if (c < 1) throw ConfigError("level channels must be >= 1");
    if (bottleneck_channels != transformer.hidden)
        throw ConfigError("bottleneck_channels must equal transformer.hidden");
    if (transformer.layers < 1 || transformer.heads < 1 || transformer.grid < 1 ||
        transformer.mlp_ratio < 1)
        throw ConfigError("transformer config values must be >= 1");
    if (transformer.hidden % transformer.heads != 0)
        throw ConfigError("transformer.hidden must be divisible by heads");
    if (cbam.spatial_kernel < 1 || cbam.spatial_kernel % 2 == 0)
        throw ConfigError("cbam.spatial_kernel must be odd");
    if (cbam.reduction < 1) throw ConfigError("cbam.reduction must be >= 1");
    if (stem_kernel < 1 || stem_kernel % 2 == 0) throw ConfigError("stem_kernel must be odd");
    for (int k : {inception.a_k, inception.b_k, inception.c_k})
        if (k < 1 || k % 2 == 0) throw ConfigError("inception kernels must be odd");
    // Branch splits: every Inception output divides into 4 branches, and the
    // C variant's two tail convs halve a branch again.
    if (level_channels[1] % 4 || level_channels[2] % 4 || level_channels[3] % 8 ||
        bottleneck_channels % 8)
        throw ConfigError("inception output channels must divide into branches "
                          "(levels 1-2: by 4; level 3 and bottleneck: by 8)");
}

std::string ModelConfig::to_json() const {
    nlohmann::json j;
    j["in_channels"] = in_channels;
    j["level_channels"] = level_channels;
    j["bottleneck_channels"] = bottleneck_channels;
    j["transformer"] = {{"layers", transformer.layers},
                        {"heads", transformer.heads},
                        {"hidden", transformer.hidden},
                        {"mlp_ratio", transformer.mlp_ratio},
                        {"grid", transformer.grid}};
    j["cbam"] = {{"spatial_kernel", cbam.spatial_kernel}, {"reduction", cbam.reduction}};
    j["inception"] = {{"a_k", inception.a_k}, {"b_k", inception.b_k}, {"c_k", inception.c_k}};
    j["stem_kernel"] = stem_kernel;
    j["seed"] = seed;
    return j.dump();
}

ModelConfig ModelConfig::from_json(const std::string& json) {
    nlohmann::json j = nlohmann::json::parse(json);
    ModelConfig c;
    c.in_channels = j.at("in_channels").get<int>();
    auto lv = j.at("level_channels").get<std::vector<int>>();
    if (lv.size() != 4) throw ConfigError("level_channels must have 4 entries");
    std::copy(lv.begin(), lv.end(), c.level_channels.begin());
    c.bottleneck_channels = j.at("bottleneck_channels").get<int>();
    const auto& t = j.at("transformer");
    c.transformer = {t.at("layers").get<int>(), t.at("heads").get<int>(),
                     t.at("hidden").get<int>(), t.at("mlp_ratio").get<int>(),
                     t.at("grid").get<int>()};
    const auto& cb = j.at("cbam");
    c.cbam = {cb.at("spatial_kernel").get<int>(), cb.at("reduction").get<int>()};
    const auto& inc = j.at("inception");
    c.inception = {inc.at("a_k").get<int>(), inc.at("b_k").get<int>(), inc.at("c_k").get<int>()};
    c.stem_kernel = j.at("stem_kernel").get<int>();
    c.seed = j.at("seed").get<std::uint64_t>();
    return c;
}

namespace {

struct Init {
    SplitMix64 rng;

    explicit Init(std::uint64_t seed) : rng(seed) {}

    float draw(double bound) {
        const double u = rng.unit();  // [0,1)
        return static_cast<float>(bound * (2.0 * u - 1.0));
    }

    // U(+-1/sqrt(fan_in)); fan_in = inputs contributing to one output value.
    Tensor uniform(std::vector<int> shape, std::int64_t fan_in) {
        Tensor t = Tensor::zeros(shape);
        const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
        for (float& v : t.data) v = draw(bound);
        return t;
    }

    ConvBn conv_bn(int in_c, int out_c, int kh, int kw) {
        ConvBn p;
        p.w = uniform({out_c, in_c, kh, kw}, static_cast<std::int64_t>(in_c) * kh * kw);
        p.b = Tensor::zeros({out_c});
        p.bn_gamma = Tensor::zeros({out_c});
        for (float& v : p.bn_gamma.data) v = 1.0f;
        p.bn_beta = Tensor::zeros({out_c});
        p.bn_mean = Tensor::zeros({out_c});
        p.bn_var = Tensor::zeros({out_c});
        for (float& v : p.bn_var.data) v = 1.0f;
        return p;
    }

    ConvBlock conv_block(int in_c, int out_c, int k) {
        return {conv_bn(in_c, out_c, k, k), conv_bn(out_c, out_c, k, k)};
    }

    InceptionParams inception(InceptionVariant variant, int in_c, int out_c, int k) {
        InceptionParams p;
        p.variant = variant;
        const int q = out_c / 4;
        p.b1 = conv_bn(in_c, q, 1, 1);
        p.b2_reduce = conv_bn(in_c, q, 1, 1);
        p.b3_reduce = conv_bn(in_c, q, 1, 1);
        switch (variant) {
            case InceptionVariant::A:
                p.b2_chain = {conv_bn(q, q, k, k)};
                p.b3_chain = {conv_bn(q, q, k, k), conv_bn(q, q, k, k)};
                break;
            case InceptionVariant::B:
                p.b2_chain = {conv_bn(q, q, 1, k), conv_bn(q, q, k, 1)};
                p.b3_chain = {conv_bn(q, q, 1, k), conv_bn(q, q, k, 1), conv_bn(q, q, 1, k),
                              conv_bn(q, q, k, 1)};
                break;
            case InceptionVariant::C: {
                const int qh = q / 2;
                p.b2_split_h = conv_bn(q, qh, 1, k);
                p.b2_split_v = conv_bn(q, q - qh, k, 1);
                p.b3_chain = {conv_bn(q, q, k, 1), conv_bn(q, q, 1, k)};
                p.b3_split_h = conv_bn(q, qh, 1, k);
                p.b3_split_v = conv_bn(q, q - qh, k, 1);
                break;
            }
        }
        p.b4_proj = conv_bn(in_c, q, 1, 1);
        return p;
    }

    nn::TransformerLayerParams transformer_layer(int d, int mlp_ratio, int heads) {
        nn::TransformerLayerParams p;
        p.heads = heads;
        auto ones = [](int n) {
            Tensor t = Tensor::zeros({n});
            for (float& v : t.data) v = 1.0f;
            return t;
        };
        p.ln1_gamma = ones(d);
        p.ln1_beta = Tensor::zeros({d});
        p.wq = uniform({d, d}, d);
        p.bq = Tensor::zeros({d});
        p.wk = uniform({d, d}, d);
        p.bk = Tensor::zeros({d});
        p.wv = uniform({d, d}, d);
        p.bv = Tensor::zeros({d});
        p.wo = uniform({d, d}, d);
        p.bo = Tensor::zeros({d});
        p.ln2_gamma = ones(d);
        p.ln2_beta = Tensor::zeros({d});
        const int hidden = d * mlp_ratio;
        p.mlp_w1 = uniform({hidden, d}, d);
        p.mlp_b1 = Tensor::zeros({hidden});
        p.mlp_w2 = uniform({d, hidden}, hidden);
        p.mlp_b2 = Tensor::zeros({d});
        return p;
    }

    CbamParams cbam(int channels, const CbamConfig& cfg) {
        CbamParams p;
        const int mid = std::max(1, channels / cfg.reduction);
        p.mlp_w1 = uniform({mid, channels}, channels);
        p.mlp_b1 = Tensor::zeros({mid});
        p.mlp_w2 = uniform({channels, mid}, mid);
        p.mlp_b2 = Tensor::zeros({channels});
        const int k = cfg.spatial_kernel;
        p.spatial_w = uniform({1, 2, k, k}, 2LL * k * k);
        p.spatial_b = Tensor::zeros({1});
        return p;
    }

    DecoderStage decoder(int in_c, int skip_c, std::optional<InceptionVariant> variant, int k,
                         int stem_k, const CbamConfig& cbam_cfg) {
        DecoderStage s;
        s.deconv_w = uniform({in_c, skip_c, 2, 2}, in_c);
        s.deconv_b = Tensor::zeros({skip_c});
        if (variant)
            s.inception = inception(*variant, 2 * skip_c, skip_c, k);
        else
            s.conv_block = conv_block(2 * skip_c, skip_c, stem_k);
        s.cbam = cbam(skip_c, cbam_cfg);
        return s;
    }
};

}  // namespace

Model build_model(const ModelConfig& config, std::uint64_t seed) {
    config.validate();
    Model m;
    m.config = config;
    m.config.seed = seed;

    const auto& lc = config.level_channels;
    Init init(seed);
    m.stem1 = init.conv_block(config.in_channels, lc[0], config.stem_kernel);
    m.stem2 = init.conv_block(lc[0], lc[1], config.stem_kernel);
    m.enc_a = init.inception(InceptionVariant::A, lc[1], lc[2], config.inception.a_k);
    m.enc_b = init.inception(InceptionVariant::B, lc[2], lc[3], config.inception.b_k);
    m.enc_c = init.inception(InceptionVariant::C, lc[3], config.bottleneck_channels,
                             config.inception.c_k);

    const int grid = config.transformer.grid;
    m.gattn.grid = grid;
    m.gattn.pos_emb = Tensor::zeros({grid * grid, config.transformer.hidden});
    for (float& v : m.gattn.pos_emb.data) v = init.draw(0.02);
    for (int layer = 0; layer < config.transformer.layers; ++layer)
        m.gattn.layers.push_back(init.transformer_layer(
            config.transformer.hidden, config.transformer.mlp_ratio, config.transformer.heads));

    m.dec1 = init.decoder(config.bottleneck_channels, lc[3], InceptionVariant::C,
                          config.inception.c_k, config.stem_kernel, config.cbam);
    m.dec2 = init.decoder(lc[3], lc[2], InceptionVariant::B, config.inception.b_k,
                          config.stem_kernel, config.cbam);
    m.dec3 = init.decoder(lc[2], lc[1], InceptionVariant::A, config.inception.a_k,
                          config.stem_kernel, config.cbam);
    m.dec4 = init.decoder(lc[1], lc[0], std::nullopt, 0, config.stem_kernel, config.cbam);

    m.head_w = init.uniform({1, lc[0], 1, 1}, lc[0]);
    m.head_b = Tensor::zeros({1});
    return m;
}

nn::Tensor conv_bn_relu(const Tensor& x, const ConvBn& p) {
    Tensor y = nn::conv2d(x, p.w, p.b);
    y = nn::batchnorm(y, p.bn_gamma, p.bn_beta, p.bn_mean, p.bn_var);
    return nn::relu(std::move(y));
}

nn::Tensor conv_block_forward(const Tensor& x, const ConvBlock& p) {
    return conv_bn_relu(conv_bn_relu(x, p.conv1), p.conv2);
}

nn::Tensor inception_forward(const Tensor& x, const InceptionParams& p) {
    Tensor b1 = conv_bn_relu(x, p.b1);

    Tensor b2 = conv_bn_relu(x, p.b2_reduce);
    for (const ConvBn& c : p.b2_chain) b2 = conv_bn_relu(b2, c);
    if (p.variant == InceptionVariant::C) {
        Tensor h = conv_bn_relu(b2, p.b2_split_h);
        Tensor v = conv_bn_relu(b2, p.b2_split_v);
        b2 = nn::concat_channels({&h, &v});
    }

    Tensor b3 = conv_bn_relu(x, p.b3_reduce);
    for (const ConvBn& c : p.b3_chain) b3 = conv_bn_relu(b3, c);
    if (p.variant == InceptionVariant::C) {
        Tensor h = conv_bn_relu(b3, p.b3_split_h);
        Tensor v = conv_bn_relu(b3, p.b3_split_v);
        b3 = nn::concat_channels({&h, &v});
    }

    Tensor b4 = conv_bn_relu(nn::avgpool_same(x, 3), p.b4_proj);
    return nn::concat_channels({&b1, &b2, &b3, &b4});
}

nn::Tensor global_attention_forward(const Tensor& x, const GlobalAttentionParams& p) {
    const int c = x.dim(0), h = x.dim(1), w = x.dim(2);
    const int g = p.grid;
    if (!p.layers.empty() && p.layers.front().ln1_gamma.dim(0) != c)
        throw ShapeError("global attention: channel count does not match hidden size");

    Tensor small = nn::bicubic_resize(x, g, g);

    // (c,g,g) -> (g*g, c) tokens, then add the positional table.
    Tensor tokens = Tensor::zeros({g * g, c});
    for (int ch = 0; ch < c; ++ch)
        for (int y = 0; y < g; ++y)
            for (int xx = 0; xx < g; ++xx) tokens.at(y * g + xx, ch) = small.at(ch, y, xx);
    tokens = nn::add(tokens, p.pos_emb);

    Tensor t = tokens;
    for (const nn::TransformerLayerParams& layer : p.layers) t = nn::mhsa_block(t, layer);

    // Only the transformer increment flows back, so a transformer that acts
    // as identity leaves x untouched.
    Tensor delta = Tensor::zeros({c, g, g});
    for (int ch = 0; ch < c; ++ch)
        for (int y = 0; y < g; ++y)
            for (int xx = 0; xx < g; ++xx)
                delta.at(ch, y, xx) = t.at(y * g + xx, ch) - tokens.at(y * g + xx, ch);

    Tensor up = nn::bicubic_resize(delta, h, w);
    return nn::add(x, up);
}

nn::Tensor local_attention_forward(const Tensor& x, const CbamParams& p) {
    Tensor avg = nn::channel_avg(x);
    Tensor mx = nn::channel_max(x);

    auto shared_mlp = [&](const Tensor& v) {
        Tensor t = Tensor::zeros({1, v.dim(0)});
        std::copy(v.data.begin(), v.data.end(), t.data.begin());
        t = nn::relu(nn::linear(t, p.mlp_w1, p.mlp_b1));
        t = nn::linear(t, p.mlp_w2, p.mlp_b2);
        Tensor out = Tensor::zeros({t.dim(1)});
        std::copy(t.data.begin(), t.data.end(), out.data.begin());
        return out;
    };
    Tensor gate_c = nn::sigmoid(nn::add(shared_mlp(avg), shared_mlp(mx)));
    Tensor x1 = nn::mul_channel_gate(x, gate_c);

    Tensor savg = nn::spatial_avg(x1);
    Tensor smax = nn::spatial_max(x1);
    Tensor stacked = nn::concat_channels({&savg, &smax});
    Tensor gate_s = nn::sigmoid(nn::conv2d(stacked, p.spatial_w, p.spatial_b));
    Tensor x2 = nn::mul_spatial_gate(x1, gate_s);

    return nn::add(x, x2);
}

namespace {

Tensor decoder_forward(const Tensor& x, const Tensor& skip, const DecoderStage& stage) {
    Tensor up = nn::deconv2d_x2(x, stage.deconv_w, stage.deconv_b);
    Tensor merged = nn::concat_channels({&up, &skip});
    Tensor block = stage.inception ? inception_forward(merged, *stage.inception)
                                   : conv_block_forward(merged, *stage.conv_block);
    return local_attention_forward(block, stage.cbam);
}

}  // namespace

nn::Tensor forward(const Model& m, const Tensor& input) {
    if (input.rank() != 3 || input.dim(0) != m.config.in_channels)
        throw ShapeError("forward: input must be (" + std::to_string(m.config.in_channels) +
                         ",h,w)");
    const int h = input.dim(1), w = input.dim(2);
    if (h % 16 != 0 || w % 16 != 0)
        throw ShapeError("forward: spatial dims " + std::to_string(h) + "x" + std::to_string(w) +
                         " must be multiples of 16; pad or crop with adjust() first");

    Tensor s0 = conv_block_forward(input, m.stem1);
    Tensor p = nn::maxpool2(s0);
    Tensor s1 = conv_block_forward(p, m.stem2);
    p = nn::maxpool2(s1);
    Tensor s2 = inception_forward(p, m.enc_a);
    p = nn::maxpool2(s2);
    Tensor s3 = inception_forward(p, m.enc_b);
    p = nn::maxpool2(s3);
    Tensor bottleneck = inception_forward(p, m.enc_c);

    Tensor d = global_attention_forward(bottleneck, m.gattn);
    d = decoder_forward(d, s3, m.dec1);
    d = decoder_forward(d, s2, m.dec2);
    d = decoder_forward(d, s1, m.dec3);
    d = decoder_forward(d, s0, m.dec4);

    return nn::conv2d(d, m.head_w, m.head_b);
}

namespace {

template <typename ModelT, typename Fn>
void visit_impl(ModelT& m, const Fn& fn) {
    auto conv_bn = [&](const std::string& prefix, auto& p) {
        fn(prefix + ".w", p.w);
        fn(prefix + ".b", p.b);
        fn(prefix + ".bn.gamma", p.bn_gamma);
        fn(prefix + ".bn.beta", p.bn_beta);
        fn(prefix + ".bn.mean", p.bn_mean);
        fn(prefix + ".bn.var", p.bn_var);
    };
    auto conv_block = [&](const std::string& prefix, auto& p) {
        conv_bn(prefix + ".conv1", p.conv1);
        conv_bn(prefix + ".conv2", p.conv2);
    };
    auto inception = [&](const std::string& prefix, auto& p) {
        conv_bn(prefix + ".b1", p.b1);
        conv_bn(prefix + ".b2.reduce", p.b2_reduce);
        for (std::size_t i = 0; i < p.b2_chain.size(); ++i)
            conv_bn(prefix + ".b2.conv" + std::to_string(i), p.b2_chain[i]);
        conv_bn(prefix + ".b3.reduce", p.b3_reduce);
        for (std::size_t i = 0; i < p.b3_chain.size(); ++i)
            conv_bn(prefix + ".b3.conv" + std::to_string(i), p.b3_chain[i]);
        if (p.variant == InceptionVariant::C) {
            conv_bn(prefix + ".b2.split_h", p.b2_split_h);
            conv_bn(prefix + ".b2.split_v", p.b2_split_v);
            conv_bn(prefix + ".b3.split_h", p.b3_split_h);
            conv_bn(prefix + ".b3.split_v", p.b3_split_v);
        }
        conv_bn(prefix + ".b4.proj", p.b4_proj);
    };
    auto cbam = [&](const std::string& prefix, auto& p) {
        fn(prefix + ".mlp.w1", p.mlp_w1);
        fn(prefix + ".mlp.b1", p.mlp_b1);
        fn(prefix + ".mlp.w2", p.mlp_w2);
        fn(prefix + ".mlp.b2", p.mlp_b2);
        fn(prefix + ".spatial.w", p.spatial_w);
        fn(prefix + ".spatial.b", p.spatial_b);
    };
    auto decoder = [&](const std::string& prefix, auto& s) {
        fn(prefix + ".deconv.w", s.deconv_w);
        fn(prefix + ".deconv.b", s.deconv_b);
        if (s.inception) inception(prefix + ".block", *s.inception);
        if (s.conv_block) conv_block(prefix + ".block", *s.conv_block);
        cbam(prefix + ".cbam", s.cbam);
    };

    conv_block("stem1", m.stem1);
    conv_block("stem2", m.stem2);
    inception("enc_a", m.enc_a);
    inception("enc_b", m.enc_b);
    inception("enc_c", m.enc_c);

    fn("gattn.pos_emb", m.gattn.pos_emb);
    for (std::size_t i = 0; i < m.gattn.layers.size(); ++i) {
        const std::string prefix = "gattn.layer" + std::to_string(i);
        auto& layer = m.gattn.layers[i];
        fn(prefix + ".ln1.gamma", layer.ln1_gamma);
        fn(prefix + ".ln1.beta", layer.ln1_beta);
        fn(prefix + ".wq", layer.wq);
        fn(prefix + ".bq", layer.bq);
        fn(prefix + ".wk", layer.wk);
        fn(prefix + ".bk", layer.bk);
        fn(prefix + ".wv", layer.wv);
        fn(prefix + ".bv", layer.bv);
        fn(prefix + ".wo", layer.wo);
        fn(prefix + ".bo", layer.bo);
        fn(prefix + ".ln2.gamma", layer.ln2_gamma);
        fn(prefix + ".ln2.beta", layer.ln2_beta);
        fn(prefix + ".mlp.w1", layer.mlp_w1);
        fn(prefix + ".mlp.b1", layer.mlp_b1);
        fn(prefix + ".mlp.w2", layer.mlp_w2);
        fn(prefix + ".mlp.b2", layer.mlp_b2);
    }

    decoder("dec1", m.dec1);
    decoder("dec2", m.dec2);
    decoder("dec3", m.dec3);
    decoder("dec4", m.dec4);
    fn("head.w", m.head_w);
    fn("head.b", m.head_b);
}

}  // namespace

void visit_tensors(Model& m, const std::function<void(const std::string&, Tensor&)>& fn) {
    visit_impl(m, fn);
}

void visit_tensors(const Model& m,
                   const std::function<void(const std::string&, const Tensor&)>& fn) {
    visit_impl(m, fn);
}

std::int64_t Model::parameter_count() const {
    std::int64_t n = 0;
    visit_tensors(*this, [&](const std::string&, const Tensor& t) { n += t.numel(); });
    return n;
}

namespace {

constexpr char kMagic[4] = {'I', 'R', 'W', 'T'};
constexpr std::uint16_t kVersion = 1;

void put_u16(std::string& out, std::uint16_t v) {
    out.push_back(static_cast<char>(v & 0xff));
    out.push_back(static_cast<char>(v >> 8));
}

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

struct Reader {
    const std::string& buf;
    std::size_t pos = 0;

    void need(std::size_t n) const {
        if (pos + n > buf.size()) throw IoError("weights file truncated");
    }
    std::uint16_t u16() {
        need(2);
        std::uint16_t v = static_cast<std::uint8_t>(buf[pos]) |
                          (static_cast<std::uint16_t>(static_cast<std::uint8_t>(buf[pos + 1])) << 8);
        pos += 2;
        return v;
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i)
            v |= static_cast<std::uint32_t>(static_cast<std::uint8_t>(buf[pos + i])) << (8 * i);
        pos += 4;
        return v;
    }
    std::uint8_t u8() {
        need(1);
        return static_cast<std::uint8_t>(buf[pos++]);
    }
    std::string bytes(std::size_t n) {
        need(n);
        std::string s = buf.substr(pos, n);
        pos += n;
        return s;
    }
};

}  // namespace

void save_weights(const Model& model, const std::string& path) {
    std::string out;
    out.append(kMagic, 4);
    put_u16(out, kVersion);
    const std::string cfg = model.config.to_json();
    put_u32(out, static_cast<std::uint32_t>(cfg.size()));
    out += cfg;

    visit_tensors(model, [&](const std::string& name, const Tensor& t) {
        put_u32(out, static_cast<std::uint32_t>(name.size()));
        out += name;
        out.push_back(0);  // dtype f32
        put_u32(out, static_cast<std::uint32_t>(t.shape.size()));
        for (int d : t.shape) put_u32(out, static_cast<std::uint32_t>(d));
        const std::size_t off = out.size();
        out.resize(off + t.data.size() * 4);
        // Host is little-endian on every supported target; payload is f32 LE.
        std::memcpy(out.data() + off, t.data.data(), t.data.size() * 4);
    });

    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open weights file for writing: " + path);
    f.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!f) throw IoError("short write to weights file: " + path);
}

Model load_weights(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open weights file: " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    const std::string buf = ss.str();

    Reader r{buf};
    if (r.bytes(4) != std::string(kMagic, 4)) throw IoError("bad weights magic");
    if (r.u16() != kVersion) throw IoError("unsupported weights version");
    const std::uint32_t cfg_len = r.u32();
    ModelConfig config = ModelConfig::from_json(r.bytes(cfg_len));
    config.validate();

    std::map<std::string, Tensor> tensors;
    while (r.pos < buf.size()) {
        const std::uint32_t name_len = r.u32();
        const std::string name = r.bytes(name_len);
        if (r.u8() != 0) throw IoError("tensor " + name + ": unsupported dtype");
        const std::uint32_t ndim = r.u32();
        std::vector<int> dims(ndim);
        std::int64_t numel = 1;
        for (std::uint32_t i = 0; i < ndim; ++i) {
            dims[i] = static_cast<int>(r.u32());
            numel *= dims[i];
        }
        Tensor t;
        t.shape = dims;
        t.data.resize(static_cast<std::size_t>(numel));
        r.need(t.data.size() * 4);
        std::memcpy(t.data.data(), buf.data() + r.pos, t.data.size() * 4);
        r.pos += t.data.size() * 4;
        if (!tensors.emplace(name, std::move(t)).second)
            throw IoError("duplicate tensor record: " + name);
    }

    // Build the expected structure, then substitute each stored tensor after
    // a shape check.
    Model model = build_model(config, config.seed);
    std::size_t used = 0;
    visit_tensors(model, [&](const std::string& name, Tensor& dst) {
        auto it = tensors.find(name);
        if (it == tensors.end()) throw IoError("weights file missing tensor: " + name);
        if (it->second.shape != dst.shape)
            throw IoError("tensor " + name + " has mismatched shape for this config");
        dst = std::move(it->second);
        ++used;
    });
    if (used != tensors.size()) throw IoError("weights file contains unknown tensors");
    return model;
}

}  // namespace irdrop
