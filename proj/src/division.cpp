#include "gratetile/division.hpp"

#include <algorithm>
#include <stdexcept>

namespace gratetile::division {

namespace {

uint32_t mod_residue(int64_t value, uint32_t period) {
    const int64_t m = value % int64_t(period);
    return uint32_t(m < 0 ? m + period : m);
}

} // namespace

GrateConfig grate_config(uint32_t half_kernel, uint32_t stride,
                         uint32_t dilation, uint32_t out_tile_w) {
    if (stride < 1 || dilation < 1 || out_tile_w < 1)
        throw std::invalid_argument("stride, dilation and tile width must be >= 1");

    GrateConfig cfg;
    cfg.period = stride * out_tile_w;
    const int64_t reach = int64_t(half_kernel) * dilation;
    const uint32_t left = mod_residue(-reach, cfg.period);
    const uint32_t right = mod_residue(reach - int64_t(stride) + 1, cfg.period);
    cfg.cuts = {left, right};
    std::sort(cfg.cuts.begin(), cfg.cuts.end());
    cfg.cuts.erase(std::unique(cfg.cuts.begin(), cfg.cuts.end()), cfg.cuts.end());
    cfg.derivation = GrateConfig::Derivation{half_kernel, stride, dilation, out_tile_w};
    return cfg;
}

GrateConfig reduce_config(const GrateConfig& cfg, uint32_t new_period) {
    if (new_period < 1 || cfg.period % new_period != 0)
        throw std::invalid_argument("new period must divide the configuration period");

    GrateConfig reduced;
    reduced.period = new_period;
    for (uint32_t cut : cfg.cuts) reduced.cuts.push_back(cut % new_period);
    std::sort(reduced.cuts.begin(), reduced.cuts.end());
    reduced.cuts.erase(std::unique(reduced.cuts.begin(), reduced.cuts.end()),
                       reduced.cuts.end());
    reduced.derivation = cfg.derivation;
    return reduced;
}

DivisionMode DivisionMode::uniform(uint32_t n) {
    if (n < 1) throw std::invalid_argument("uniform division size must be >= 1");
    DivisionMode mode;
    mode.kind = Kind::uniform;
    mode.config.period = n;
    mode.config.cuts = {0};
    return mode;
}

DivisionMode DivisionMode::grate(GrateConfig cfg) {
    if (cfg.cuts.empty() || cfg.cuts.size() > 2)
        throw std::invalid_argument("grate config must have one or two cuts");
    for (uint32_t cut : cfg.cuts)
        if (cut >= cfg.period) throw std::invalid_argument("cut residue out of range");
    DivisionMode mode;
    mode.kind = Kind::grate;
    mode.config = std::move(cfg);
    return mode;
}

DivisionMode DivisionMode::compact_1x1() {
    DivisionMode mode;
    mode.kind = Kind::compact_1x1;
    mode.config.period = 1;
    mode.config.cuts = {0};
    return mode;
}

std::vector<uint32_t> spatial_cuts(const GrateConfig& cfg, uint32_t extent) {
    if (extent < 1) throw std::invalid_argument("extent must be >= 1");

    std::vector<uint32_t> positions{0, extent};
    for (uint32_t p = 0; p < extent; ++p)
        if (std::binary_search(cfg.cuts.begin(), cfg.cuts.end(), p % cfg.period))
            positions.push_back(p);
    std::sort(positions.begin(), positions.end());
    positions.erase(std::unique(positions.begin(), positions.end()), positions.end());
    return positions;
}

SubtensorGrid build_grid(uint32_t height, uint32_t width, uint32_t channels,
                         const DivisionMode& mode) {
    if (height < 1 || width < 1 || channels < 1)
        throw std::invalid_argument("map dimensions must be >= 1");
    if (channels % kChannelBlock != 0)
        throw std::invalid_argument("channels must be a multiple of 8");

    SubtensorGrid grid;
    grid.height = height;
    grid.width = width;
    grid.channel_blocks = channels / kChannelBlock;
    grid.mode = mode;
    grid.y_cuts = spatial_cuts(mode.config, height);
    grid.x_cuts = spatial_cuts(mode.config, width);

    grid.regions.reserve(uint64_t(grid.y_segments()) * grid.x_segments() *
                         grid.channel_blocks);
    for (uint32_t yi = 0; yi < grid.y_segments(); ++yi)
        for (uint32_t xi = 0; xi < grid.x_segments(); ++xi)
            for (uint32_t cb = 0; cb < grid.channel_blocks; ++cb)
                grid.regions.push_back(Region{grid.y_cuts[yi], grid.y_cuts[yi + 1],
                                              grid.x_cuts[xi], grid.x_cuts[xi + 1], cb});
    return grid;
}

Window window_for_tile(const LayerConfig& layer, uint32_t ty, uint32_t tx,
                       uint32_t map_h, uint32_t map_w) {
    layer.validate();
    const uint32_t out_h = output_extent(map_h, layer.half_kernel, layer.stride, layer.dilation);
    const uint32_t out_w = output_extent(map_w, layer.half_kernel, layer.stride, layer.dilation);
    if (out_h == 0 || out_w == 0)
        throw std::out_of_range("layer produces no output on this map");

    const uint64_t oy0 = uint64_t(ty) * layer.out_tile_h;
    const uint64_t ox0 = uint64_t(tx) * layer.out_tile_w;
    if (oy0 >= out_h || ox0 >= out_w)
        throw std::out_of_range("tile index outside the output map");

    // Full-tile window; map clipping below trims edge tiles.
    const int64_t reach = int64_t(layer.halo());
    Window win;
    const int64_t ry0 = int64_t(oy0) * layer.stride - reach;
    const int64_t ry1 =
        int64_t(oy0 + layer.out_tile_h - 1) * layer.stride + reach + 1;
    const int64_t rx0 = int64_t(ox0) * layer.stride - reach;
    const int64_t rx1 =
        int64_t(ox0 + layer.out_tile_w - 1) * layer.stride + reach + 1;
    win.y0 = std::max<int64_t>(ry0, 0);
    win.y1 = std::min<int64_t>(ry1, map_h);
    win.x0 = std::max<int64_t>(rx0, 0);
    win.x1 = std::min<int64_t>(rx1, map_w);
    win.clipped = (win.y0 != ry0 || win.y1 != ry1 || win.x0 != rx0 || win.x1 != rx1);
    win.cb0 = 0;
    win.cb1 = layer.in_channels / kChannelBlock;
    return win;
}

namespace {

// Index of the first segment intersecting [lo, hi) and one past the last,
// given sorted segment bounds.
std::pair<uint32_t, uint32_t> segment_range(const std::vector<uint32_t>& cuts,
                                            int64_t lo, int64_t hi) {
    const auto first = std::upper_bound(cuts.begin(), cuts.end(), lo);
    const auto last = std::lower_bound(cuts.begin(), cuts.end(), hi);
    const uint32_t i0 = uint32_t(first - cuts.begin()) - 1;
    const uint32_t i1 = uint32_t(last - cuts.begin());
    return {i0, std::max(i0, i1)};
}

} // namespace

std::vector<std::pair<uint32_t, Containment>>
subtensors_in_window(const SubtensorGrid& grid, const Window& window) {
    if (window.height() <= 0 || window.width() <= 0 || window.cb1 <= window.cb0)
        return {};
    if (window.y0 < 0 || window.y1 > grid.height || window.x0 < 0 ||
        window.x1 > grid.width || window.cb1 > grid.channel_blocks)
        throw std::invalid_argument("window not clipped to the grid");

    const auto [yi0, yi1] = segment_range(grid.y_cuts, window.y0, window.y1);
    const auto [xi0, xi1] = segment_range(grid.x_cuts, window.x0, window.x1);

    std::vector<std::pair<uint32_t, Containment>> result;
    result.reserve(uint64_t(yi1 - yi0) * (xi1 - xi0) * (window.cb1 - window.cb0));
    for (uint32_t yi = yi0; yi < yi1; ++yi) {
        const bool y_full = grid.y_cuts[yi] >= window.y0 && grid.y_cuts[yi + 1] <= window.y1;
        for (uint32_t xi = xi0; xi < xi1; ++xi) {
            const bool x_full =
                grid.x_cuts[xi] >= window.x0 && grid.x_cuts[xi + 1] <= window.x1;
            const Containment c =
                (y_full && x_full) ? Containment::full : Containment::partial;
            for (uint32_t cb = window.cb0; cb < window.cb1; ++cb)
                result.emplace_back(grid.region_index(yi, xi, cb), c);
        }
    }
    return result;
}

} // namespace gratetile::division
