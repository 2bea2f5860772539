// layout.hpp — Cache-line-aligned storage of compressed subtensors
// =============================================================================
//
// Subtensors are grouped into super-blocks: N×N×8-word cells of the division
// period, each owning one metadata record.  A record is a 28-bit cache-line
// pointer to the cell's first payload plus the compressed size (in 16-byte
// lines) of each subtensor in the cell, so resolving a subtensor is a
// two-step walk: pointer, then the sum of the preceding sizes.
//
// Every size field must be able to hold the subtensor's *raw* size, so
// compression is never mandatory: when a codec expands past raw (a dense
// block under bitmask), the subtensor is stored raw and flagged.
//
// Aligned modes round every placement up to whole cache lines.  The compact
// 1x1x8 mode packs byte-contiguously with 32-bit byte pointers instead; it
// wastes no alignment but pays for a pointer every 8 words.
//
// =============================================================================
#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "gratetile/codec.hpp"
#include "gratetile/division.hpp"
#include "gratetile/feature_map.hpp"

namespace gratetile::layout {

using codec::Codec;

inline constexpr uint32_t kAlignedPointerBits = 28;   // 32-bit space, 16-byte aligned
inline constexpr uint32_t kCompactPointerBits = 32;   // byte-granular addresses

// =============================================================================
// Metadata arithmetic
// =============================================================================

/// Size-field bit widths for one super-block of a grate configuration,
/// ordered by subtensor shape area ascending.  Each width covers the raw
/// (worst-case) size in cache lines: ceil(log2(max_lines + 1)).
std::vector<uint32_t> size_field_widths(const division::GrateConfig& cfg);

/// Fixed per-record size-field budget for grate modes: the maximum total
/// width over the kernel-size family 3..11 at period 8 (20 bits).  One
/// record format then serves every supported layer.
uint32_t grate_size_field_budget_bits();

/// Wire size of one metadata record for a division mode.
uint32_t metadata_record_bits(const division::DivisionMode& mode);

/// Metadata bits per KB (512 words) of feature map, from first principles:
/// record bits times super-blocks per 512 words.  Defined for the bundled
/// modes (grate mod 4/8/16, uniform 8/4/2, compact 1x1x8).
uint32_t metadata_bits_per_kb(const division::DivisionMode& mode);

/// Metadata overhead as a percentage of the 8192 data bits per KB, quoted
/// at two decimals.  Grate-mode figures scale the period-8 figure by the
/// super-block count ratio, keeping the quoted series consistent with the
/// fixed 48-bit record format.
double metadata_overhead_percent(const division::DivisionMode& mode);

// =============================================================================
// Packed layout
// =============================================================================

struct SuperBlockMetadata {
    uint64_t pointer = 0;              // cache-line index (aligned) or byte offset (compact)
    std::vector<uint32_t> sizes;       // per-subtensor lines (aligned) or bytes (compact)
    std::vector<uint8_t> stored_raw;   // 1 where the codec expanded and raw won
};

struct Placement {
    uint64_t offset = 0;   // bytes into the payload arena
    uint64_t length = 0;   // bytes (whole lines for aligned modes)

    bool operator==(const Placement&) const = default;
};

/// A feature map packed under one division mode and codec.  Records are in
/// raster order of super-blocks (y, then x, then channel block); slots
/// within a record follow the raster order of its regions.
struct PackedLayout {
    division::DivisionMode mode;
    Codec codec = Codec::raw;
    uint32_t cells_y = 0, cells_x = 0, channel_blocks = 0;

    std::vector<uint64_t> record_pointer;   // per record
    std::vector<uint32_t> slot_begin;       // per record, index into slot arrays; +1 sentinel
    std::vector<uint32_t> slot_size;        // lines (aligned) or bytes (compact)
    std::vector<uint8_t> slot_raw;
    std::vector<uint32_t> region_record;    // region id -> record index
    std::vector<uint32_t> region_slot;      // region id -> global slot index
    std::vector<Placement> directory;       // region id -> placement
    std::vector<uint8_t> payload;           // byte arena

    uint32_t record_count() const { return uint32_t(record_pointer.size()); }
    uint64_t payload_bytes() const { return payload.size(); }
    uint64_t metadata_bits_total() const;
    uint32_t record_of_region(uint32_t region_id) const { return region_record.at(region_id); }
    SuperBlockMetadata record(uint32_t record_index) const;
};

/// Compress every subtensor of the grid independently and place the results:
/// each super-block's payloads are contiguous from its pointer, rounded up
/// to whole cache lines (aligned modes) or byte-packed (compact mode).
PackedLayout pack(const FeatureMap& map, const division::SubtensorGrid& grid,
                  Codec codec);

/// Two-step address resolution: pointer of the owning record plus the sizes
/// of the preceding subtensors.  Agrees with the directory by construction;
/// tests assert it.  Throws std::out_of_range for unknown regions.
Placement locate(const PackedLayout& layout, uint32_t region_id);

/// Inverse of pack (for verification).
FeatureMap unpack(const PackedLayout& layout, const division::SubtensorGrid& grid);

/// Bytes fetched for a set of regions: whole stored lines for aligned
/// modes, exact stored bytes for the compact mode.
uint64_t fetch_cost_bytes(const PackedLayout& layout, std::span<const uint32_t> region_ids);

/// Same cost in cache lines; fractional for the compact mode.
double fetch_cost_lines(const PackedLayout& layout, std::span<const uint32_t> region_ids);

/// Cache lines covered by the bit spans of a sorted set of records in the
/// bit-packed metadata array (shared lines counted once).
uint64_t metadata_lines_for_records(const PackedLayout& layout,
                                    std::span<const uint32_t> sorted_records);

} // namespace gratetile::layout
