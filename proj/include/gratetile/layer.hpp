// layer.hpp — Convolution layer parameters, hardware profiles, layer catalog
// =============================================================================
//
// A LayerConfig describes one convolution's fetch geometry: half-kernel k
// (kernel size 2k+1), stride s, dilation d, the output tile extents the
// accelerator processes per pass, and the input channel count.  Only the
// geometry matters here; no arithmetic on values is ever performed.
//
// PlatformProfile models the memory system of an accelerator class: the
// working-set budget for one input tile, the 16-byte cache-line alignment
// unit, and the tile shape conventions (channel fetch depth, output tile
// aspect).  Two profiles are bundled: a small-tile GPU-like configuration
// (4K-word tiles, 8-channel fetches) and a large-tile configuration
// (16K-word tiles, 16-channel fetches).
//
// The benchmark layer catalog ships as an editable text file: one layer per
// line, "network, layer, H, W, C, kernel, stride, dilation", '#' comments.
//
// =============================================================================
#pragma once

#include <cstdint>
#include <istream>
#include <string>
#include <vector>

#include "gratetile/common.hpp"

namespace gratetile {

struct LayerConfig {
    uint32_t half_kernel = 1;   // kernel size = 2k+1
    uint32_t stride = 1;
    uint32_t dilation = 1;
    uint32_t out_tile_h = 8;
    uint32_t out_tile_w = 8;
    uint32_t in_channels = 8;   // multiple of the 8-word channel block

    void validate() const;

    uint32_t kernel_size() const { return 2 * half_kernel + 1; }
    // Halo reach on each side of the output footprint, in input elements.
    uint32_t halo() const { return half_kernel * dilation; }
};

/// Output extent of a valid (unpadded) convolution along one axis,
/// floor((in - 2kd - 1)/s) + 1; zero when the kernel does not fit.
uint32_t output_extent(uint32_t in_extent, uint32_t half_kernel,
                       uint32_t stride, uint32_t dilation);

struct PlatformProfile {
    std::string name;
    uint32_t max_tile_words = 4096;            // input-tile working-set budget
    uint32_t cache_line_bytes = kCacheLineBytes;
    uint32_t word_bytes = kWordBytes;
    uint32_t tile_channels = 8;                // channel depth of one fetch pass
    uint32_t tile_aspect = 1;                  // output tile t_w / t_h

    void validate() const;
};

PlatformProfile small_platform();   // GPU-like: 4K-word tiles, 8-deep, 2:1 tiles
PlatformProfile large_platform();   // big-buffer: 16K-word tiles, 16-deep, square tiles

// =============================================================================
// Layer catalog
// =============================================================================

struct CatalogEntry {
    std::string network;
    std::string layer;
    uint32_t height = 0;
    uint32_t width = 0;
    uint32_t channels = 0;      // rounded up to a multiple of 8 on parse
    uint32_t kernel = 3;        // full kernel size, odd
    uint32_t stride = 1;
    uint32_t dilation = 1;

    uint32_t half_kernel() const { return (kernel - 1) / 2; }
    std::string id() const { return network + "/" + layer; }
};

std::vector<CatalogEntry> parse_layer_catalog(std::istream& in,
                                              const std::string& source_name = "<stream>");
std::vector<CatalogEntry> load_layer_catalog(const std::string& path);

/// The bundled benchmark catalog (data/layer_catalog.txt).
std::vector<CatalogEntry> layer_catalog();

/// Path of the bundled catalog file.
std::string bundled_catalog_path();

} // namespace gratetile
