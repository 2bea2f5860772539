// io.hpp — Feature-map file format (.grtt)
//
// Binary, little-endian:
//   magic "GRTT" | u16 version = 1 | u16 word_bytes = 2 |
//   u32 height | u32 width | u32 channels | H*W*C u16 words, row-major
//
// Load/store is a lossless roundtrip on any valid map.  Malformed files
// raise FormatError with the offending byte offset.
#pragma once

#include <string>

#include "gratetile/feature_map.hpp"

namespace gratetile {

void store_feature_map(const FeatureMap& map, const std::string& path);
FeatureMap load_feature_map(const std::string& path);

} // namespace gratetile
