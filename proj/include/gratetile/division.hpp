// division.hpp — Uneven subtensor division of feature maps
// =============================================================================
//
// Tiled convolution walks the input with windows whose left and right edges
// advance by a constant step s*t per tile, so all window boundaries along an
// axis fall on two arithmetic progressions.  Cutting the feature map at
// exactly those residues yields a grid of unevenly sized subtensors with the
// defining property that every full tile's window is a disjoint union of
// whole subtensors: no compressed block ever has to be fetched partially.
//
// A GrateConfig holds the cut residue set modulo the period N.  From the
// layer parameters (half-kernel k, stride s, dilation d, output tile width
// t) the residues are
//
//     { (-k*d) mod N,  (k*d - s + 1) mod N },   N = s * t,
//
// and any configuration valid mod N is also valid mod N' when N' divides N,
// which lets one hardware period serve many layers.
//
// Uniform n×n×8 division is the special case of a single cut residue 0 mod n.
//
// =============================================================================
#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "gratetile/feature_map.hpp"
#include "gratetile/layer.hpp"

namespace gratetile::division {

// =============================================================================
// Configurations
// =============================================================================

struct GrateConfig {
    uint32_t period = 1;              // N
    std::vector<uint32_t> cuts;       // sorted residues mod N; one or two entries

    struct Derivation {
        uint32_t half_kernel, stride, dilation, out_tile_w;
    };
    std::optional<Derivation> derivation;   // parameters the cuts came from

    bool operator==(const GrateConfig& o) const {
        return period == o.period && cuts == o.cuts;
    }
};

/// Cut residues for a layer, mod N = stride * out_tile_w.  Coinciding
/// residues collapse to a single cut.
GrateConfig grate_config(uint32_t half_kernel, uint32_t stride,
                         uint32_t dilation, uint32_t out_tile_w);

/// Same cut set folded to a divisor period.  new_period must divide
/// cfg.period; with new_period = 1 the division degenerates to per-element
/// boundaries.
GrateConfig reduce_config(const GrateConfig& cfg, uint32_t new_period);

struct DivisionMode {
    enum class Kind { uniform, grate, compact_1x1 };

    Kind kind = Kind::uniform;
    GrateConfig config;               // uniform/compact: {0} mod n

    static DivisionMode uniform(uint32_t n);
    static DivisionMode grate(GrateConfig cfg);
    static DivisionMode compact_1x1();   // 1x1x8 with byte-contiguous packing

    uint32_t period() const { return config.period; }
    bool aligned() const { return kind != Kind::compact_1x1; }
    bool operator==(const DivisionMode& o) const {
        return kind == o.kind && config == o.config;
    }
};

// =============================================================================
// Subtensor grid
// =============================================================================

/// All cut positions in [0, extent] for a config: every p in [0, extent)
/// with p mod N in the cut set, plus the implicit boundaries 0 and extent.
/// Sorted, deduplicated.
std::vector<uint32_t> spatial_cuts(const GrateConfig& cfg, uint32_t extent);

struct Region {
    uint32_t y0, y1;    // half-open element bounds
    uint32_t x0, x1;
    uint32_t cb;        // channel-block index (8 channels each)

    uint32_t spatial_area() const { return (y1 - y0) * (x1 - x0); }
    uint64_t words() const { return uint64_t(spatial_area()) * kChannelBlock; }
};

/// Partition of an H×W×C map into subtensors.  Regions are stored in raster
/// order (y-segment, then x-segment, then channel block); region ids are
/// indices into `regions`.
struct SubtensorGrid {
    uint32_t height = 0, width = 0;
    uint32_t channel_blocks = 0;
    DivisionMode mode;
    std::vector<uint32_t> y_cuts;   // segment bounds incl. 0 and extent
    std::vector<uint32_t> x_cuts;
    std::vector<Region> regions;

    uint32_t y_segments() const { return uint32_t(y_cuts.size()) - 1; }
    uint32_t x_segments() const { return uint32_t(x_cuts.size()) - 1; }
    uint32_t region_index(uint32_t yi, uint32_t xi, uint32_t cb) const {
        return (yi * x_segments() + xi) * channel_blocks + cb;
    }
};

SubtensorGrid build_grid(uint32_t height, uint32_t width, uint32_t channels,
                         const DivisionMode& mode);

// =============================================================================
// Tile windows
// =============================================================================

/// Input window of one output tile, clipped to the feature map.  All channel
/// blocks are spanned (the convolution reduces over every input channel).
struct Window {
    int64_t y0 = 0, y1 = 0;   // half-open, clipped to [0, H)
    int64_t x0 = 0, x1 = 0;
    uint32_t cb0 = 0, cb1 = 0;
    bool clipped = false;     // true when map borders trimmed the raw bounds

    int64_t height() const { return y1 - y0; }
    int64_t width() const { return x1 - x0; }
};

/// Window of output tile (ty, tx).  Edge tiles with a partial output
/// footprint get correspondingly smaller windows.  Throws std::out_of_range
/// for tiles entirely outside the output map.
Window window_for_tile(const LayerConfig& layer, uint32_t ty, uint32_t tx,
                       uint32_t map_h, uint32_t map_w);

enum class Containment { full, partial };

/// Every region intersecting the window, with full/partial containment.
std::vector<std::pair<uint32_t, Containment>>
subtensors_in_window(const SubtensorGrid& grid, const Window& window);

} // namespace gratetile::division
