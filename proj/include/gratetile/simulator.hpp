// simulator.hpp — Tiled-fetch DRAM bandwidth simulation
// =============================================================================
//
// Walks a layer's output tiles in raster order, resolves each tile's input
// window to subtensors, and charges cache-line traffic:
//
//   payload   — every region intersecting the window is fetched whole
//               (compressed blocks are not partially decodable), at its
//               stored size: whole lines for aligned modes, exact bytes for
//               the compact mode.
//   metadata  — each touched super-block's record, charged per tile and
//               rounded to whole 16-byte lines over the record spans the
//               tile needs (records sharing a line are counted once).
//   baseline  — the same window fetched uncompressed from a dense
//               channel-block raster layout.
//
// Overlapping halos are re-fetched per tile: there is no inter-tile cache.
// All accounting is integer byte/line counting, so a report is bit-identical
// across runs and machines.
//
// brute_force_oracle computes the same report by materializing the byte
// arenas and marking every byte each tile reads; it must agree with
// simulate_layer exactly and exists to verify it.
//
// =============================================================================
#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>

#include "gratetile/division.hpp"
#include "gratetile/layout.hpp"

namespace gratetile::sim {

using codec::Codec;

// =============================================================================
// Tile derivation
// =============================================================================

struct TileConfig {
    uint32_t out_h = 0, out_w = 0;        // output tile (t_h, t_w)
    uint32_t in_h = 0, in_w = 0;          // input tile = output + halo
    uint32_t fetch_channels = 0;          // channel depth of one fetch pass

    uint64_t input_words() const { return uint64_t(in_h) * in_w * fetch_channels; }
};

/// Largest power-of-two output tile with the platform's aspect ratio
/// (t_w = aspect * t_h, floored at the 8-wide minimum) whose input tile
/// fits the platform's working-set budget.  Throws ConfigurationError when
/// nothing fits.
TileConfig derive_tile_config(uint32_t half_kernel, uint32_t stride,
                              uint32_t dilation, uint32_t in_channels,
                              const PlatformProfile& platform);

/// Catalog entry + platform -> complete layer configuration.
LayerConfig make_layer_config(const CatalogEntry& entry,
                              const PlatformProfile& platform);

// =============================================================================
// Division-mode vocabulary
// =============================================================================

enum class ModeToken { grate4, grate8, grate16, u8, u4, u2, u1 };

const char* to_string(ModeToken token);
std::optional<ModeToken> parse_mode_token(const std::string& text);
std::span<const ModeToken> all_mode_tokens();   // report row order

/// Division mode for a layer, or nullopt when the mode is not applicable:
/// a grate period must divide both tile strides (s*t_h and s*t_w), else the
/// tile boundaries do not recur at the period and the cut derivation is
/// unsound (e.g. period 16 with an 8-tall tile).
std::optional<division::DivisionMode> division_mode_for(ModeToken token,
                                                        const LayerConfig& layer);

// =============================================================================
// Reports
// =============================================================================

struct FetchReport {
    std::string network, layer;
    std::string platform;
    ModeToken mode = ModeToken::u8;
    Codec codec = Codec::bitmask;

    uint64_t payload_bytes = 0;
    uint64_t metadata_bytes = 0;
    uint64_t baseline_bytes = 0;
    double saving_no_overhead = 0.0;    // 1 - payload/baseline
    double saving_with_overhead = 0.0;  // 1 - (payload+metadata)/baseline
    double optimal = 0.0;               // zero fraction of the map
};

struct SimOptions {
    bool baseline_exact = false;   // charge exact bytes instead of whole lines
};

FetchReport simulate_layer(const FeatureMap& map, const LayerConfig& layer,
                           const PlatformProfile& platform,
                           const division::DivisionMode& mode, Codec codec,
                           const SimOptions& options = {});

/// Independent accounting route for small instances (<= 32x32x16): marks
/// every byte actually read per tile in materialized arenas and counts
/// touched lines.  Must equal simulate_layer bit-exactly.
FetchReport brute_force_oracle(const FeatureMap& map, const LayerConfig& layer,
                               const PlatformProfile& platform,
                               const division::DivisionMode& mode, Codec codec,
                               const SimOptions& options = {});

// =============================================================================
// Aggregation
// =============================================================================

struct Summary {
    double saving_no_overhead = 0.0;
    double saving_with_overhead = 0.0;
    double optimal = 0.0;
};

/// Geometric-mean aggregation across layers: the mean of the remaining
/// traffic ratios (1 - saving), inverted back to a saving.
Summary aggregate(std::span<const FetchReport> reports);

} // namespace gratetile::sim
