// feature_map.hpp — Sparse 16-bit feature maps and synthetic sparsity models
// =============================================================================
//
// A FeatureMap is an H×W×C tensor of 16-bit words stored row-major
// (y, then x, then channel).  A word value of 0 is "zero" for every codec
// and statistic in this library; any other value is payload.
//
// Real activation dumps are out of scope; maps are generated synthetically
// from a SparsityModel (iid word dropout or spatially clustered blobs) and
// are deterministic for a fixed seed, independent of platform.
//
// =============================================================================
#pragma once

#include <cstdint>
#include <vector>

#include "gratetile/common.hpp"

namespace gratetile {

struct FeatureMap {
    uint32_t height = 0;
    uint32_t width = 0;
    uint32_t channels = 0;
    std::vector<uint16_t> data;   // height * width * channels words

    FeatureMap() = default;
    FeatureMap(uint32_t h, uint32_t w, uint32_t c);

    uint64_t word_count() const { return uint64_t(height) * width * channels; }

    uint64_t index(uint32_t y, uint32_t x, uint32_t c) const {
        return (uint64_t(y) * width + x) * channels + c;
    }
    uint16_t at(uint32_t y, uint32_t x, uint32_t c) const { return data[index(y, x, c)]; }
    uint16_t& at(uint32_t y, uint32_t x, uint32_t c) { return data[index(y, x, c)]; }

    bool operator==(const FeatureMap&) const = default;
};

enum class SparsityMode { iid, blob };

struct SparsityModel {
    SparsityMode mode = SparsityMode::iid;
    double zero_fraction = 0.0;   // target fraction of zero words, in [0, 1]
    uint64_t seed = 0;
    uint32_t blob_radius = 3;     // blob mode: radius of each zeroed disc
};

/// Generate a synthetic sparse map.  Pure function of (dims, model): equal
/// arguments yield equal maps, on every platform.  Nonzero words are drawn
/// uniformly from [1, 65535].  iid mode zeroes words independently; blob
/// mode zeroes circular spatial discs (through all channels) and stops
/// exactly at the target word count, so the empirical fraction is within
/// one word of the request.
FeatureMap generate_feature_map(uint32_t h, uint32_t w, uint32_t c,
                                const SparsityModel& model);

/// Fraction of words equal to zero.  This is the idealized ("optimal")
/// bandwidth-reduction bound quoted in reports.
double zero_fraction(const FeatureMap& map);

} // namespace gratetile
