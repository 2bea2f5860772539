#include "gratetile/layout.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

namespace gratetile::layout {

using division::DivisionMode;
using division::GrateConfig;
using division::Region;
using division::SubtensorGrid;

namespace {

uint32_t bit_width_for(uint64_t max_value) {
    uint32_t bits = 0;
    while ((1ull << bits) <= max_value) ++bits;
    return bits;
}

// Cyclic gaps between cuts: the at-most-two distinct segment lengths of an
// unclipped division.
std::vector<uint32_t> cut_gaps(const GrateConfig& cfg) {
    if (cfg.cuts.size() == 1) return {cfg.period};
    const uint32_t a = cfg.cuts[0], b = cfg.cuts[1];
    return {b - a, cfg.period - (b - a)};
}

std::vector<uint16_t> extract_region_words(const FeatureMap& map, const Region& r) {
    std::vector<uint16_t> words;
    words.reserve(r.words());
    for (uint32_t y = r.y0; y < r.y1; ++y)
        for (uint32_t x = r.x0; x < r.x1; ++x)
            for (uint32_t c = r.cb * kChannelBlock; c < (r.cb + 1) * kChannelBlock; ++c)
                words.push_back(map.at(y, x, c));
    return words;
}

void scatter_region_words(FeatureMap& map, const Region& r,
                          std::span<const uint16_t> words) {
    uint64_t at = 0;
    for (uint32_t y = r.y0; y < r.y1; ++y)
        for (uint32_t x = r.x0; x < r.x1; ++x)
            for (uint32_t c = r.cb * kChannelBlock; c < (r.cb + 1) * kChannelBlock; ++c)
                map.at(y, x, c) = words[at++];
}

} // namespace

// =============================================================================
// Metadata arithmetic
// =============================================================================

std::vector<uint32_t> size_field_widths(const GrateConfig& cfg) {
    if (cfg.cuts.empty() || cfg.cuts.size() > 2)
        throw std::invalid_argument("config must have one or two cuts");

    const auto gaps = cut_gaps(cfg);
    // One 8-channel spatial position is exactly one cache line, so the raw
    // size in lines of a (gy, gx) subtensor is its spatial area.
    std::vector<std::array<uint32_t, 3>> shapes;   // {area, gy, gx}
    for (uint32_t gy : gaps)
        for (uint32_t gx : gaps)
            shapes.push_back({gy * gx, gy, gx});
    std::sort(shapes.begin(), shapes.end());

    std::vector<uint32_t> widths;
    widths.reserve(shapes.size());
    for (const auto& s : shapes) widths.push_back(bit_width_for(s[0]));
    return widths;
}

uint32_t grate_size_field_budget_bits() {
    // Kernel family 3,5,7,9,11 (half-kernels 1..5) at stride 1, period 8.
    uint32_t budget = 0;
    for (uint32_t k = 1; k <= 5; ++k) {
        const auto cfg =
            division::reduce_config(division::grate_config(k, 1, 1, 8), 8);
        uint32_t total = 0;
        for (uint32_t w : size_field_widths(cfg)) total += w;
        budget = std::max(budget, total);
    }
    return budget;
}

uint32_t metadata_record_bits(const DivisionMode& mode) {
    switch (mode.kind) {
        case DivisionMode::Kind::grate:
            return kAlignedPointerBits + grate_size_field_budget_bits();
        case DivisionMode::Kind::uniform:
            return kAlignedPointerBits;
        case DivisionMode::Kind::compact_1x1:
            return kCompactPointerBits;
    }
    throw std::invalid_argument("unknown division mode");
}

uint32_t metadata_bits_per_kb(const DivisionMode& mode) {
    const uint32_t n = mode.period();
    const uint64_t words_per_record = uint64_t(n) * n * kChannelBlock;
    const uint64_t kb_words = 512;

    switch (mode.kind) {
        case DivisionMode::Kind::grate:
            if (n != 4 && n != 8 && n != 16)
                throw std::invalid_argument("grate metadata table covers periods 4, 8, 16");
            break;
        case DivisionMode::Kind::uniform:
            if (n != 2 && n != 4 && n != 8)
                throw std::invalid_argument("uniform metadata table covers sizes 8, 4, 2");
            break;
        case DivisionMode::Kind::compact_1x1:
            break;
    }
    return uint32_t(uint64_t(metadata_record_bits(mode)) * kb_words / words_per_record);
}

double metadata_overhead_percent(const DivisionMode& mode) {
    const double data_bits_per_kb = 512.0 * 16.0;
    auto quote = [](double pct) { return std::round(pct * 100.0) / 100.0; };

    if (mode.kind == DivisionMode::Kind::grate) {
        const auto base = DivisionMode::grate(GrateConfig{8, {0}, {}});
        const double base_pct = quote(100.0 * metadata_bits_per_kb(base) / data_bits_per_kb);
        const double scale = 64.0 / (double(mode.period()) * mode.period());
        return quote(base_pct * scale);
    }
    return quote(100.0 * metadata_bits_per_kb(mode) / data_bits_per_kb);
}

// =============================================================================
// Packing
// =============================================================================

namespace {

// First segment index of each super-block cell along one axis (+ sentinel).
// Segment starts are increasing, so cells map to contiguous segment ranges.
std::vector<uint32_t> cell_segment_starts(const std::vector<uint32_t>& cuts,
                                          uint32_t period, uint32_t n_cells) {
    const uint32_t n_segments = uint32_t(cuts.size()) - 1;
    std::vector<uint32_t> first(n_cells + 1, n_segments);
    uint32_t cell = 0;
    for (uint32_t i = 0; i < n_segments; ++i) {
        const uint32_t c = cuts[i] / period;
        while (cell <= c) first[cell++] = i;
    }
    while (cell <= n_cells) first[cell++] = n_segments;
    return first;
}

} // namespace

PackedLayout pack(const FeatureMap& map, const SubtensorGrid& grid, Codec codec) {
    if (map.height != grid.height || map.width != grid.width ||
        map.channels != grid.channel_blocks * kChannelBlock)
        throw std::invalid_argument("grid does not match the feature map");

    const uint32_t period = grid.mode.period();
    const bool aligned = grid.mode.aligned();

    PackedLayout out;
    out.mode = grid.mode;
    out.codec = codec;
    out.cells_y = (grid.height - 1) / period + 1;
    out.cells_x = (grid.width - 1) / period + 1;
    out.channel_blocks = grid.channel_blocks;

    const auto y_first = cell_segment_starts(grid.y_cuts, period, out.cells_y);
    const auto x_first = cell_segment_starts(grid.x_cuts, period, out.cells_x);

    const uint64_t n_records =
        uint64_t(out.cells_y) * out.cells_x * out.channel_blocks;
    const uint64_t n_regions = grid.regions.size();
    out.record_pointer.reserve(n_records);
    out.slot_begin.reserve(n_records + 1);
    out.slot_size.reserve(n_regions);
    out.slot_raw.reserve(n_regions);
    out.region_record.assign(n_regions, 0);
    out.region_slot.assign(n_regions, 0);
    out.directory.assign(n_regions, {});

    uint64_t cursor = 0;   // lines when aligned, bytes when compact
    for (uint32_t cy = 0; cy < out.cells_y; ++cy) {
        for (uint32_t cx = 0; cx < out.cells_x; ++cx) {
            for (uint32_t cb = 0; cb < out.channel_blocks; ++cb) {
                if (aligned && cursor >= (1ull << kAlignedPointerBits))
                    throw std::length_error("payload arena exceeds the 28-bit pointer space");
                out.record_pointer.push_back(cursor);
                out.slot_begin.push_back(uint32_t(out.slot_size.size()));
                const uint32_t record_index = uint32_t(out.record_pointer.size()) - 1;

                for (uint32_t yi = y_first[cy]; yi < y_first[cy + 1]; ++yi) {
                    for (uint32_t xi = x_first[cx]; xi < x_first[cx + 1]; ++xi) {
                        const uint32_t rid = grid.region_index(yi, xi, cb);
                        const Region& region = grid.regions[rid];
                        const auto words = extract_region_words(map, region);
                        auto block = codec::encode(codec, words);

                        const uint64_t raw_bytes = 2 * words.size();
                        const bool use_raw = block.payload.size() > raw_bytes;
                        if (use_raw) block = codec::raw_encode(words);

                        uint64_t offset, length;
                        if (aligned) {
                            const uint64_t lines =
                                (block.payload.size() + kCacheLineBytes - 1) / kCacheLineBytes;
                            offset = cursor * kCacheLineBytes;
                            length = lines * kCacheLineBytes;
                            cursor += lines;
                            out.slot_size.push_back(uint32_t(lines));
                        } else {
                            offset = cursor;
                            length = block.payload.size();
                            cursor += length;
                            out.slot_size.push_back(uint32_t(length));
                        }
                        out.slot_raw.push_back(use_raw ? 1 : 0);
                        out.payload.resize(offset + length, 0);
                        std::copy(block.payload.begin(), block.payload.end(),
                                  out.payload.begin() + int64_t(offset));

                        out.region_record[rid] = record_index;
                        out.region_slot[rid] = uint32_t(out.slot_size.size()) - 1;
                        out.directory[rid] = {offset, length};
                    }
                }
            }
        }
    }
    out.slot_begin.push_back(uint32_t(out.slot_size.size()));
    return out;
}

uint64_t PackedLayout::metadata_bits_total() const {
    return uint64_t(record_count()) * metadata_record_bits(mode);
}

SuperBlockMetadata PackedLayout::record(uint32_t record_index) const {
    if (record_index >= record_count())
        throw std::out_of_range("record index out of range");
    SuperBlockMetadata meta;
    meta.pointer = record_pointer[record_index];
    const uint32_t begin = slot_begin[record_index];
    const uint32_t end = slot_begin[record_index + 1];
    meta.sizes.assign(slot_size.begin() + begin, slot_size.begin() + end);
    meta.stored_raw.assign(slot_raw.begin() + begin, slot_raw.begin() + end);
    return meta;
}

Placement locate(const PackedLayout& layout, uint32_t region_id) {
    if (region_id >= layout.directory.size())
        throw std::out_of_range("unknown region");

    const uint32_t rec = layout.region_record[region_id];
    const uint32_t slot = layout.region_slot[region_id];
    const uint32_t unit = layout.mode.aligned() ? kCacheLineBytes : 1;

    uint64_t offset = layout.record_pointer[rec] * unit;
    for (uint32_t s = layout.slot_begin[rec]; s < slot; ++s)
        offset += uint64_t(layout.slot_size[s]) * unit;
    return {offset, uint64_t(layout.slot_size[slot]) * unit};
}

FeatureMap unpack(const PackedLayout& layout, const SubtensorGrid& grid) {
    FeatureMap map(grid.height, grid.width, grid.channel_blocks * kChannelBlock);
    for (uint32_t rid = 0; rid < grid.regions.size(); ++rid) {
        const Region& region = grid.regions[rid];
        const Placement place = layout.directory[rid];

        codec::CompressedBlock block;
        block.codec = layout.slot_raw[layout.region_slot[rid]] ? Codec::raw : layout.codec;
        block.original_words = uint32_t(region.words());
        block.payload.assign(layout.payload.begin() + int64_t(place.offset),
                             layout.payload.begin() + int64_t(place.offset + place.length));
        scatter_region_words(map, region, codec::decode(block));
    }
    return map;
}

uint64_t fetch_cost_bytes(const PackedLayout& layout,
                          std::span<const uint32_t> region_ids) {
    uint64_t bytes = 0;
    for (uint32_t rid : region_ids) bytes += layout.directory.at(rid).length;
    return bytes;
}

double fetch_cost_lines(const PackedLayout& layout,
                        std::span<const uint32_t> region_ids) {
    return double(fetch_cost_bytes(layout, region_ids)) / kCacheLineBytes;
}

uint64_t metadata_lines_for_records(const PackedLayout& layout,
                                    std::span<const uint32_t> sorted_records) {
    const uint64_t record_bits = metadata_record_bits(layout.mode);
    const uint64_t line_bits = kCacheLineBytes * 8;
    uint64_t lines = 0;
    uint64_t merged_hi = 0;   // one past the last counted line
    bool any = false;
    for (uint32_t rec : sorted_records) {
        const uint64_t lo = uint64_t(rec) * record_bits / line_bits;
        const uint64_t hi = (uint64_t(rec + 1) * record_bits + line_bits - 1) / line_bits;
        if (!any) {
            lines += hi - lo;
            merged_hi = hi;
            any = true;
        } else if (hi > merged_hi) {
            lines += hi - std::max(lo, merged_hi);
            merged_hi = hi;
        }
    }
    return lines;
}

} // namespace gratetile::layout
