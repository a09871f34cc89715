#pragma once

#include <string>

#include "irdrop/feature_map.hpp"

namespace irdrop {

// IRFM container: magic "IRFM", u16 version (=1), u32 c/h/w, u32 cell_nm,
// one unit-tag byte per channel, then per-channel little-endian f32 payloads
// in row-major order. Write -> read round-trips bit-exactly.
void write_irfm(const MapStack& stack, const std::string& path);
MapStack read_irfm(const std::string& path);

// One CSV per channel (h rows of w comma-separated values), written with
// shortest round-trip float formatting so values match the IRFM payload.
void write_csv(const FeatureMap& map, const std::string& path);
FeatureMap read_csv(const std::string& path);

}  // namespace irdrop
