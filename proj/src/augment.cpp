#include "irdrop/augment.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "irdrop/errors.hpp"

namespace irdrop {

const std::array<AdjustMethod, 18> kAllAdjustMethods = [] {
    std::array<AdjustMethod, 18> out{};
    int i = 0;
    for (AdjustCategory cat : {AdjustCategory::Pad, AdjustCategory::Crop})
        for (int p = 0; p <= static_cast<int>(AdjustPosition::Random); ++p)
            out[i++] = {cat, static_cast<AdjustPosition>(p)};
    return out;
}();

std::string to_string(AdjustMethod m) {
    std::string s = m.category == AdjustCategory::Pad ? "pad-" : "crop-";
    switch (m.position) {
        case AdjustPosition::CornerTL: return s + "corner-tl";
        case AdjustPosition::CornerTR: return s + "corner-tr";
        case AdjustPosition::CornerBL: return s + "corner-bl";
        case AdjustPosition::CornerBR: return s + "corner-br";
        case AdjustPosition::EdgeTop: return s + "edge-top";
        case AdjustPosition::EdgeBottom: return s + "edge-bottom";
        case AdjustPosition::EdgeLeft: return s + "edge-left";
        case AdjustPosition::EdgeRight: return s + "edge-right";
        case AdjustPosition::Random: return s + "random";
    }
    return s + "?";
}

AdjustMethod parse_adjust_method(const std::string& name) {
    for (AdjustMethod m : kAllAdjustMethods)
        if (to_string(m) == name) return m;
    throw Error("unknown adjust method '" + name + "'");
}

namespace {

enum class Align { Near, Far, Random };

struct AxisPlan {
    int in_lo = 0;   // first copied input index
    int out_lo = 0;  // where it lands in the output
    int span = 0;    // copied length
};

AxisPlan plan_axis(int in_len, int l, Align align, SplitMix64& rng) {
    AxisPlan plan;
    plan.span = std::min(in_len, l);
    const int range = std::abs(in_len - l);
    int offset = 0;
    switch (align) {
        case Align::Near: offset = 0; break;
        case Align::Far: offset = range; break;
        case Align::Random: offset = static_cast<int>(rng.below(static_cast<std::uint32_t>(range) + 1)); break;
    }
    if (in_len > l)
        plan.in_lo = offset;  // crop: window into the input
    else
        plan.out_lo = offset;  // pad: placement inside the output
    return plan;
}

}  // namespace

MapStack adjust(const MapStack& stack, int l, AdjustMethod method, SplitMix64& rng) {
    if (l <= 0) throw ShapeError("adjust: target edge length must be positive");
    stack.check_aligned();
    if (stack.c() == 0) throw ShapeError("adjust: empty stack");

    Align row_align = Align::Near;
    Align col_align = Align::Near;
    switch (method.position) {
        case AdjustPosition::CornerTL: row_align = Align::Near; col_align = Align::Near; break;
        case AdjustPosition::CornerTR: row_align = Align::Near; col_align = Align::Far; break;
        case AdjustPosition::CornerBL: row_align = Align::Far; col_align = Align::Near; break;
        case AdjustPosition::CornerBR: row_align = Align::Far; col_align = Align::Far; break;
        case AdjustPosition::EdgeTop: row_align = Align::Near; col_align = Align::Random; break;
        case AdjustPosition::EdgeBottom: row_align = Align::Far; col_align = Align::Random; break;
        case AdjustPosition::EdgeLeft: row_align = Align::Random; col_align = Align::Near; break;
        case AdjustPosition::EdgeRight: row_align = Align::Random; col_align = Align::Far; break;
        case AdjustPosition::Random: row_align = Align::Random; col_align = Align::Random; break;
    }

    // Row offset drawn before column offset; every channel reuses the plan.
    AxisPlan rows = plan_axis(stack.h(), l, row_align, rng);
    AxisPlan cols = plan_axis(stack.w(), l, col_align, rng);

    MapStack out;
    out.channels.reserve(stack.channels.size());
    for (const FeatureMap& ch : stack.channels) {
        FeatureMap dst;
        dst.h = l;
        dst.w = l;
        dst.cell_nm = ch.cell_nm;
        dst.unit = ch.unit;
        dst.data.assign(static_cast<std::size_t>(l) * l, 0.0);
        for (int r = 0; r < rows.span; ++r) {
            const double* src = &ch.data[static_cast<std::size_t>(rows.in_lo + r) * ch.w + cols.in_lo];
            double* d = &dst.data[static_cast<std::size_t>(rows.out_lo + r) * l + cols.out_lo];
            std::copy(src, src + cols.span, d);
        }
        out.channels.push_back(std::move(dst));
    }
    return out;
}

AdjustMethod pick_method(SplitMix64& rng) {
    return kAllAdjustMethods[rng.below(18)];
}

MapStack flip(const MapStack& stack, bool horizontal, bool vertical) {
    stack.check_aligned();
    MapStack out = stack;
    if (!horizontal && !vertical) return out;
    const int h = stack.h();
    const int w = stack.w();
    for (std::size_t c = 0; c < out.channels.size(); ++c) {
        const FeatureMap& src = stack.channels[c];
        FeatureMap& dst = out.channels[c];
        for (int r = 0; r < h; ++r) {
            const int sr = vertical ? h - 1 - r : r;
            for (int col = 0; col < w; ++col) {
                const int sc = horizontal ? w - 1 - col : col;
                dst.at(r, col) = src.at(sr, sc);
            }
        }
    }
    return out;
}

std::vector<double> compute_stds(std::span<const MapStack> dataset) {
    if (dataset.empty()) throw ShapeError("compute_stds: empty dataset");
    const int c = dataset.front().c();
    for (const MapStack& s : dataset) {
        if (s.c() != c) throw ShapeError("compute_stds: inconsistent channel counts");
        s.check_aligned();
    }

    // Welford per channel across all pixels of all stacks.
    std::vector<double> mean(c, 0.0), m2(c, 0.0);
    std::vector<std::size_t> n(c, 0);
    for (const MapStack& s : dataset) {
        for (int ch = 0; ch < c; ++ch) {
            for (double x : s.channels[ch].data) {
                ++n[ch];
                const double delta = x - mean[ch];
                mean[ch] += delta / static_cast<double>(n[ch]);
                m2[ch] += delta * (x - mean[ch]);
            }
        }
    }
    std::vector<double> out(c, 0.0);
    for (int ch = 0; ch < c; ++ch)
        out[ch] = n[ch] ? std::sqrt(m2[ch] / static_cast<double>(n[ch])) : 0.0;
    return out;
}

MapStack normalize(const MapStack& stack, std::span<const double> stds,
                   std::vector<std::string>* warnings) {
    stack.check_aligned();
    if (static_cast<int>(stds.size()) != stack.c())
        throw ShapeError("normalize: std vector size does not match channel count");
    MapStack out = stack;
    for (int ch = 0; ch < stack.c(); ++ch) {
        if (!(stds[ch] > 0.0)) {
            if (warnings)
                warnings->push_back("channel " + std::to_string(ch) +
                                    " has zero std; passed through unscaled");
            continue;
        }
        for (double& x : out.channels[ch].data) x /= stds[ch];
    }
    return out;
}

std::vector<SampleRef> build_manifest(std::span<const CaseRef> cases, int fake_factor,
                                      int real_factor) {
    if (fake_factor < 1 || real_factor < 1)
        throw Error("build_manifest: oversampling factors must be >= 1");
    std::set<std::string> seen;
    for (const CaseRef& c : cases)
        if (!seen.insert(c.id).second) throw Error("build_manifest: duplicate case id '" + c.id + "'");

    std::vector<const CaseRef*> sorted;
    sorted.reserve(cases.size());
    for (const CaseRef& c : cases) sorted.push_back(&c);
    std::sort(sorted.begin(), sorted.end(),
              [](const CaseRef* a, const CaseRef* b) { return a->id < b->id; });

    std::vector<SampleRef> out;
    for (const CaseRef* c : sorted) {
        const int factor = c->kind == CaseRef::Fake ? fake_factor : real_factor;
        for (int r = 0; r < factor; ++r) out.push_back({c->id, r});
    }
    return out;
}

int draw_batch_edge(SplitMix64& rng) {
    return 496 + static_cast<int>(rng.below(17));
}

}  // namespace irdrop
