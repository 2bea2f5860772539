#include "gratetile/simulator.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

namespace gratetile::sim {

using division::DivisionMode;
using division::SubtensorGrid;
using division::Window;

// =============================================================================
// Tile derivation
// =============================================================================

TileConfig derive_tile_config(uint32_t half_kernel, uint32_t stride,
                              uint32_t dilation, uint32_t in_channels,
                              const PlatformProfile& platform) {
    platform.validate();
    if (stride < 1 || dilation < 1 || in_channels < 1)
        throw std::invalid_argument("bad layer parameters");

    const uint32_t fetch_ch = std::min(platform.tile_channels, in_channels);
    const uint64_t reach = 2ull * half_kernel * dilation;

    for (uint32_t th = 4096; th >= 1; th >>= 1) {
        const uint32_t tw = std::max<uint32_t>(8, th * platform.tile_aspect);
        const uint64_t in_h = uint64_t(th - 1) * stride + reach + 1;
        const uint64_t in_w = uint64_t(tw - 1) * stride + reach + 1;
        if (in_h * in_w * fetch_ch <= platform.max_tile_words)
            return TileConfig{th, tw, uint32_t(in_h), uint32_t(in_w), fetch_ch};
    }
    throw ConfigurationError("no output tile fits the platform working-set budget");
}

LayerConfig make_layer_config(const CatalogEntry& entry,
                              const PlatformProfile& platform) {
    const TileConfig tile = derive_tile_config(entry.half_kernel(), entry.stride,
                                               entry.dilation, entry.channels, platform);
    LayerConfig layer{entry.half_kernel(), entry.stride, entry.dilation,
                      tile.out_h, tile.out_w, entry.channels};
    layer.validate();
    return layer;
}

// =============================================================================
// Mode vocabulary
// =============================================================================

namespace {

constexpr std::array<ModeToken, 7> kAllTokens = {
    ModeToken::grate4, ModeToken::grate8, ModeToken::grate16, ModeToken::u8,
    ModeToken::u4,     ModeToken::u2,     ModeToken::u1};

uint32_t grate_period(ModeToken token) {
    switch (token) {
        case ModeToken::grate4: return 4;
        case ModeToken::grate8: return 8;
        case ModeToken::grate16: return 16;
        default: return 0;
    }
}

} // namespace

const char* to_string(ModeToken token) {
    switch (token) {
        case ModeToken::grate4: return "grate4";
        case ModeToken::grate8: return "grate8";
        case ModeToken::grate16: return "grate16";
        case ModeToken::u8: return "u8";
        case ModeToken::u4: return "u4";
        case ModeToken::u2: return "u2";
        case ModeToken::u1: return "u1";
    }
    return "?";
}

std::optional<ModeToken> parse_mode_token(const std::string& text) {
    for (ModeToken token : kAllTokens)
        if (text == to_string(token)) return token;
    return std::nullopt;
}

std::span<const ModeToken> all_mode_tokens() { return kAllTokens; }

std::optional<DivisionMode> division_mode_for(ModeToken token,
                                              const LayerConfig& layer) {
    layer.validate();
    switch (token) {
        case ModeToken::u8: return DivisionMode::uniform(8);
        case ModeToken::u4: return DivisionMode::uniform(4);
        case ModeToken::u2: return DivisionMode::uniform(2);
        case ModeToken::u1: return DivisionMode::compact_1x1();
        default: break;
    }
    const uint32_t period = grate_period(token);
    if ((uint64_t(layer.stride) * layer.out_tile_w) % period != 0 ||
        (uint64_t(layer.stride) * layer.out_tile_h) % period != 0)
        return std::nullopt;
    const auto native = division::grate_config(layer.half_kernel, layer.stride,
                                               layer.dilation, layer.out_tile_w);
    return DivisionMode::grate(division::reduce_config(native, period));
}

// =============================================================================
// Shared simulation geometry
// =============================================================================

namespace {

struct LayerGeometry {
    uint32_t out_h, out_w;
    uint32_t tiles_y, tiles_x;
};

LayerGeometry layer_geometry(const FeatureMap& map, const LayerConfig& layer) {
    layer.validate();
    if (map.channels != layer.in_channels)
        throw std::invalid_argument("map channels do not match the layer");
    const uint32_t out_h =
        output_extent(map.height, layer.half_kernel, layer.stride, layer.dilation);
    const uint32_t out_w =
        output_extent(map.width, layer.half_kernel, layer.stride, layer.dilation);
    if (out_h == 0 || out_w == 0)
        throw ConfigurationError("kernel does not fit the feature map");
    return {out_h, out_w, (out_h - 1) / layer.out_tile_h + 1,
            (out_w - 1) / layer.out_tile_w + 1};
}

FetchReport finish_report(const PlatformProfile& platform,
                          const DivisionMode& mode, Codec codec,
                          const FeatureMap& map, uint64_t payload,
                          uint64_t metadata, uint64_t baseline) {
    FetchReport report;
    report.platform = platform.name;
    report.codec = codec;
    // Recover the token for labeling; callers built the mode from one.
    report.mode = mode.kind == DivisionMode::Kind::grate
                      ? (mode.period() == 4    ? ModeToken::grate4
                         : mode.period() == 16 ? ModeToken::grate16
                                               : ModeToken::grate8)
                  : mode.kind == DivisionMode::Kind::compact_1x1 ? ModeToken::u1
                  : mode.period() == 2                           ? ModeToken::u2
                  : mode.period() == 4                           ? ModeToken::u4
                                                                 : ModeToken::u8;
    report.payload_bytes = payload;
    report.metadata_bytes = metadata;
    report.baseline_bytes = baseline;
    report.saving_no_overhead = 1.0 - double(payload) / double(baseline);
    report.saving_with_overhead = 1.0 - double(payload + metadata) / double(baseline);
    report.optimal = zero_fraction(map);
    return report;
}

} // namespace

// =============================================================================
// Fast path
// =============================================================================

FetchReport simulate_layer(const FeatureMap& map, const LayerConfig& layer,
                           const PlatformProfile& platform,
                           const DivisionMode& mode, Codec codec,
                           const SimOptions& options) {
    platform.validate();
    const LayerGeometry geo = layer_geometry(map, layer);
    const SubtensorGrid grid = build_grid(map.height, map.width, map.channels, mode);
    const layout::PackedLayout packed = layout::pack(map, grid, codec);

    uint64_t payload = 0, metadata = 0, baseline = 0;
    std::vector<uint32_t> records;

    for (uint32_t ty = 0; ty < geo.tiles_y; ++ty) {
        for (uint32_t tx = 0; tx < geo.tiles_x; ++tx) {
            const Window win =
                division::window_for_tile(layer, ty, tx, map.height, map.width);
            const auto touched = division::subtensors_in_window(grid, win);

            records.clear();
            for (const auto& [rid, containment] : touched) {
                payload += packed.directory[rid].length;
                records.push_back(packed.region_record[rid]);
            }
            std::sort(records.begin(), records.end());
            records.erase(std::unique(records.begin(), records.end()), records.end());
            metadata += layout::metadata_lines_for_records(packed, records) * kCacheLineBytes;

            const uint64_t window_words =
                uint64_t(win.height()) * uint64_t(win.width()) * map.channels;
            if (options.baseline_exact) {
                baseline += window_words * kWordBytes;
            } else {
                // Dense channel-block raster layout: every (y, x, channel
                // block) is one whole cache line, so each window row-run is
                // already line-aligned.
                baseline += uint64_t(win.height()) * uint64_t(win.width()) *
                            (map.channels / kChannelBlock) * kCacheLineBytes;
            }
        }
    }
    return finish_report(platform, mode, codec, map, payload, metadata, baseline);
}

// =============================================================================
// Brute-force oracle
// =============================================================================

FetchReport brute_force_oracle(const FeatureMap& map, const LayerConfig& layer,
                               const PlatformProfile& platform,
                               const DivisionMode& mode, Codec codec,
                               const SimOptions& options) {
    if (map.height > 32 || map.width > 32 || map.channels > 16)
        throw std::invalid_argument("oracle instances are capped at 32x32x16");
    platform.validate();
    const LayerGeometry geo = layer_geometry(map, layer);
    const SubtensorGrid grid = build_grid(map.height, map.width, map.channels, mode);
    const layout::PackedLayout packed = layout::pack(map, grid, codec);

    // Region id of every element, stamped region by region.
    const uint32_t ncb = map.channels / kChannelBlock;
    std::vector<uint32_t> element_region(uint64_t(map.height) * map.width * ncb);
    for (uint32_t rid = 0; rid < grid.regions.size(); ++rid) {
        const auto& r = grid.regions[rid];
        for (uint32_t y = r.y0; y < r.y1; ++y)
            for (uint32_t x = r.x0; x < r.x1; ++x)
                element_region[(uint64_t(y) * map.width + x) * ncb + r.cb] = rid;
    }

    const uint64_t record_bits = layout::metadata_record_bits(mode);
    const uint64_t metadata_bits = packed.metadata_bits_total();
    std::vector<uint8_t> payload_marks(packed.payload.size());
    std::vector<uint8_t> metadata_bit_marks(metadata_bits);
    std::vector<uint8_t> baseline_line_marks(element_region.size());

    uint64_t payload = 0, metadata = 0, baseline = 0;

    for (uint32_t ty = 0; ty < geo.tiles_y; ++ty) {
        for (uint32_t tx = 0; tx < geo.tiles_x; ++tx) {
            // Window bounds recomputed from scratch: full-tile extents, then
            // map clipping.
            const uint64_t oy0 = uint64_t(ty) * layer.out_tile_h;
            const uint64_t ox0 = uint64_t(tx) * layer.out_tile_w;
            const int64_t reach = int64_t(layer.half_kernel) * layer.dilation;
            const int64_t y0 = std::max<int64_t>(int64_t(oy0) * layer.stride - reach, 0);
            const int64_t y1 = std::min<int64_t>(
                int64_t(oy0 + layer.out_tile_h - 1) * layer.stride + reach + 1,
                map.height);
            const int64_t x0 = std::max<int64_t>(int64_t(ox0) * layer.stride - reach, 0);
            const int64_t x1 = std::min<int64_t>(
                int64_t(ox0 + layer.out_tile_w - 1) * layer.stride + reach + 1,
                map.width);

            std::fill(payload_marks.begin(), payload_marks.end(), 0);
            std::fill(metadata_bit_marks.begin(), metadata_bit_marks.end(), 0);
            std::fill(baseline_line_marks.begin(), baseline_line_marks.end(), 0);

            for (int64_t y = y0; y < y1; ++y) {
                for (int64_t x = x0; x < x1; ++x) {
                    for (uint32_t cb = 0; cb < ncb; ++cb) {
                        const uint64_t elem = (uint64_t(y) * map.width + x) * ncb + cb;
                        baseline_line_marks[elem] = 1;
                        const uint32_t rid = element_region[elem];
                        const auto place = packed.directory[rid];
                        std::fill(payload_marks.begin() + int64_t(place.offset),
                                  payload_marks.begin() + int64_t(place.offset + place.length),
                                  1);
                        const uint64_t rec = packed.region_record[rid];
                        std::fill(metadata_bit_marks.begin() + int64_t(rec * record_bits),
                                  metadata_bit_marks.begin() + int64_t((rec + 1) * record_bits),
                                  1);
                    }
                }
            }

            if (mode.aligned()) {
                for (uint64_t line = 0; line * kCacheLineBytes < payload_marks.size(); ++line) {
                    bool touched = false;
                    for (uint32_t b = 0; b < kCacheLineBytes; ++b)
                        touched |= payload_marks[line * kCacheLineBytes + b] != 0;
                    if (touched) payload += kCacheLineBytes;
                }
            } else {
                for (uint8_t m : payload_marks) payload += m;
            }

            const uint64_t line_bits = kCacheLineBytes * 8;
            for (uint64_t line = 0; line * line_bits < metadata_bits; ++line) {
                bool touched = false;
                for (uint64_t b = line * line_bits;
                     b < std::min((line + 1) * line_bits, metadata_bits); ++b)
                    touched |= metadata_bit_marks[b] != 0;
                if (touched) metadata += kCacheLineBytes;
            }

            for (uint8_t m : baseline_line_marks)
                if (m) baseline += options.baseline_exact ? kChannelBlock * kWordBytes
                                                          : kCacheLineBytes;
        }
    }
    return finish_report(platform, mode, codec, map, payload, metadata, baseline);
}

// =============================================================================
// Aggregation
// =============================================================================

Summary aggregate(std::span<const FetchReport> reports) {
    if (reports.empty()) throw std::invalid_argument("cannot aggregate zero reports");

    auto geo_saving = [&](auto field) {
        double log_sum = 0.0;
        for (const FetchReport& r : reports) log_sum += std::log(1.0 - field(r));
        return 1.0 - std::exp(log_sum / double(reports.size()));
    };
    Summary s;
    s.saving_no_overhead = geo_saving([](const FetchReport& r) { return r.saving_no_overhead; });
    s.saving_with_overhead =
        geo_saving([](const FetchReport& r) { return r.saving_with_overhead; });
    s.optimal = geo_saving([](const FetchReport& r) { return r.optimal; });
    return s;
}

} // namespace gratetile::sim
