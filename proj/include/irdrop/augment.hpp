#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "irdrop/feature_map.hpp"

namespace irdrop {

// Small seedable generator used by the spatial-adjustment transforms.
// SplitMix64: 64-bit state, one multiply-xor-shift scramble per draw.
// Reproducibility is promised within this implementation only.
struct SplitMix64 {
    std::uint64_t state = 0;

    explicit SplitMix64(std::uint64_t seed) : state(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    // Uniform in [0, n) via the multiply-shift reduction.
    std::uint32_t below(std::uint32_t n) {
        return static_cast<std::uint32_t>(
            (static_cast<unsigned __int128>(next()) * n) >> 64);
    }

    // Uniform in [0, 1).
    double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
};

enum class AdjustCategory : std::uint8_t { Pad, Crop };

enum class AdjustPosition : std::uint8_t {
    CornerTL,
    CornerTR,
    CornerBL,
    CornerBR,
    EdgeTop,
    EdgeBottom,
    EdgeLeft,
    EdgeRight,
    Random,
};

struct AdjustMethod {
    AdjustCategory category = AdjustCategory::Pad;
    AdjustPosition position = AdjustPosition::CornerTL;

    bool operator==(const AdjustMethod&) const = default;
};

// All 18 methods: the 9 positions under pad, then the 9 under crop.
extern const std::array<AdjustMethod, 18> kAllAdjustMethods;

std::string to_string(AdjustMethod m);                 // e.g. "crop-corner-br"
AdjustMethod parse_adjust_method(const std::string&);  // inverse of to_string

// Resizes every channel to l x l. Per axis: shorter than l is zero-padded,
// longer is cropped, equal passes through; the method's position picks the
// alignment on each axis (row 0 is the top). Edge positions draw their free
// along-edge offset from rng (rows first), the random position draws both.
// All channels share the drawn offsets.
MapStack adjust(const MapStack& stack, int l, AdjustMethod method, SplitMix64& rng);

// Uniform over the 18 methods.
AdjustMethod pick_method(SplitMix64& rng);

// Axis reversal; both flags false is the identity.
MapStack flip(const MapStack& stack, bool horizontal, bool vertical);

// Population standard deviation per channel over all pixels of all stacks.
std::vector<double> compute_stds(std::span<const MapStack> dataset);

// Divides each channel by its std; zero pixels stay exactly zero because no
// mean is subtracted. A zero std leaves that channel unscaled and appends a
// note to `warnings` when given.
MapStack normalize(const MapStack& stack, std::span<const double> stds,
                   std::vector<std::string>* warnings = nullptr);

struct CaseRef {
    std::string id;
    enum Kind { Fake, Real } kind = Fake;
};

struct SampleRef {
    std::string id;
    int replica = 0;

    bool operator==(const SampleRef&) const = default;
};

// Oversampling manifest: each case repeated by its kind's factor, ordered by
// (id, replica). Duplicate ids are rejected.
std::vector<SampleRef> build_manifest(std::span<const CaseRef> cases, int fake_factor = 10,
                                      int real_factor = 20);

// Batch edge length drawn uniformly from [496, 512].
int draw_batch_edge(SplitMix64& rng);

}  // namespace irdrop
