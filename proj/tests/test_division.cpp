// Division configurations, grids, windows, and the window-containment
// property that makes uneven division work.
#include "doctest.h"

#include <algorithm>
#include <map>
#include <random>
#include <set>

#include "gratetile/division.hpp"

using namespace gratetile;
using namespace gratetile::division;

namespace {

GrateConfig cfg_of(uint32_t period, std::vector<uint32_t> cuts) {
    GrateConfig cfg;
    cfg.period = period;
    cfg.cuts = std::move(cuts);
    return cfg;
}

// Per-element membership count over the whole map; a partition has exactly
// one owner everywhere.
bool is_partition(const SubtensorGrid& grid) {
    std::vector<uint32_t> counts(
        uint64_t(grid.height) * grid.width * grid.channel_blocks, 0);
    for (const Region& r : grid.regions)
        for (uint32_t y = r.y0; y < r.y1; ++y)
            for (uint32_t x = r.x0; x < r.x1; ++x)
                ++counts[(uint64_t(y) * grid.width + x) * grid.channel_blocks + r.cb];
    return std::all_of(counts.begin(), counts.end(),
                       [](uint32_t c) { return c == 1; });
}

} // namespace

TEST_CASE("cut derivation from layer parameters") {
    CHECK(grate_config(1, 1, 1, 8) == cfg_of(8, {1, 7}));
    CHECK(grate_config(5, 4, 1, 8) == cfg_of(32, {2, 27}));
    CHECK(grate_config(2, 1, 1, 8) == cfg_of(8, {2, 6}));
    CHECK(grate_config(1, 2, 1, 8) == cfg_of(16, {0, 15}));
    // Dilation scales the halo reach: a dilated 3x3 cuts like a dense 5x5.
    CHECK(grate_config(1, 1, 2, 8) == cfg_of(8, {2, 6}));
    // Coinciding residues collapse to a single cut.
    CHECK(grate_config(0, 1, 1, 8) == cfg_of(8, {0}));
    CHECK(grate_config(4, 1, 1, 8) == cfg_of(8, {4}));
}

TEST_CASE("divisor reduction") {
    const auto conv1 = grate_config(5, 4, 1, 8);   // {2, 27} mod 32
    CHECK(reduce_config(conv1, 8) == cfg_of(8, {2, 3}));
    CHECK(reduce_config(grate_config(1, 2, 1, 8), 8) == cfg_of(8, {0, 7}));
    CHECK(reduce_config(cfg_of(8, {1, 7}), 8) == cfg_of(8, {1, 7}));   // identity
    CHECK(reduce_config(cfg_of(8, {1, 7}), 4) == cfg_of(4, {1, 3}));
    CHECK(reduce_config(cfg_of(8, {1, 7}), 1) == cfg_of(1, {0}));
    CHECK_THROWS_AS((void)reduce_config(cfg_of(8, {1, 7}), 3), std::invalid_argument);
}

TEST_CASE("spatial cut enumeration") {
    CHECK(spatial_cuts(cfg_of(8, {1, 7}), 16) ==
          std::vector<uint32_t>{0, 1, 7, 9, 15, 16});
    CHECK(spatial_cuts(cfg_of(4, {0}), 8) == std::vector<uint32_t>{0, 4, 8});
    CHECK(spatial_cuts(cfg_of(8, {1, 7}), 1) == std::vector<uint32_t>{0, 1});
    CHECK(spatial_cuts(cfg_of(4, {0}), 1) == std::vector<uint32_t>{0, 1});
}

TEST_CASE("interior segment lengths are the cyclic gaps") {
    const auto cuts = spatial_cuts(cfg_of(8, {1, 7}), 64);
    std::set<uint32_t> interior;
    for (size_t i = 1; i + 2 < cuts.size(); ++i)
        interior.insert(cuts[i + 1] - cuts[i]);
    CHECK(interior == std::set<uint32_t>{2, 6});   // 7-1 and 8-(7-1)
}

TEST_CASE("grate grid has the four uneven shapes") {
    const auto grid = build_grid(16, 16, 8, DivisionMode::grate(cfg_of(8, {1, 7})));
    CHECK(is_partition(grid));

    std::set<std::pair<uint32_t, uint32_t>> interior_shapes;
    for (const Region& r : grid.regions)
        if (r.y0 > 0 && r.y1 < 16 && r.x0 > 0 && r.x1 < 16)
            interior_shapes.insert({r.y1 - r.y0, r.x1 - r.x0});
    for (auto [h, w] : interior_shapes) {
        CHECK((h == 2 || h == 6));
        CHECK((w == 2 || w == 6));
    }
    // At most two distinct extents per axis.
    std::set<uint32_t> widths;
    for (const Region& r : grid.regions)
        if (r.x0 > 0 && r.x1 < 16) widths.insert(r.x1 - r.x0);
    CHECK(widths.size() <= 2);
}

TEST_CASE("uniform grids") {
    const auto grid = build_grid(16, 16, 8, DivisionMode::uniform(8));
    CHECK(grid.regions.size() == 4);
    for (const Region& r : grid.regions) CHECK(r.spatial_area() == 64);
    CHECK(is_partition(grid));

    const auto clipped = build_grid(10, 10, 8, DivisionMode::uniform(4));
    CHECK(clipped.regions.size() == 9);   // 3x3 spatial, one channel block
    CHECK(is_partition(clipped));

    // Uniform(n) is the {0} mod n configuration.
    const auto direct = build_grid(10, 10, 8, DivisionMode::grate(cfg_of(4, {0})));
    CHECK(clipped.x_cuts == direct.x_cuts);
    CHECK(clipped.y_cuts == direct.y_cuts);
}

TEST_CASE("partition property over random shapes and modes") {
    std::mt19937_64 rng(21);
    for (int it = 0; it < 40; ++it) {
        const uint32_t h = 1 + rng() % 40;
        const uint32_t w = 1 + rng() % 40;
        const uint32_t c = 8 * (1 + rng() % 2);
        DivisionMode mode;
        switch (rng() % 3) {
            case 0: mode = DivisionMode::uniform(1 + rng() % 9); break;
            case 1: mode = DivisionMode::compact_1x1(); break;
            default: {
                const uint32_t n = 4 << (rng() % 3);
                std::vector<uint32_t> cuts{uint32_t(rng() % n), uint32_t(rng() % n)};
                std::sort(cuts.begin(), cuts.end());
                cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
                mode = DivisionMode::grate(cfg_of(n, std::move(cuts)));
                break;
            }
        }
        CHECK(is_partition(build_grid(h, w, c, mode)));
    }
}

TEST_CASE("tile windows") {
    LayerConfig layer{1, 1, 1, 8, 8, 8};

    SUBCASE("first tile clips at the map border") {
        const auto win = window_for_tile(layer, 0, 0, 64, 64);
        CHECK(win.y0 == 0);
        CHECK(win.y1 == 9);
        CHECK(win.x0 == 0);
        CHECK(win.x1 == 9);
        CHECK(win.clipped);
        CHECK(win.cb1 == 1);
    }
    SUBCASE("second tile advances by the tile step") {
        const auto win = window_for_tile(layer, 0, 1, 64, 64);
        CHECK(win.x0 == 7);
        CHECK(win.x1 == 17);
        CHECK(win.width() == 10);
    }
    SUBCASE("no halo for 1x1 kernels") {
        LayerConfig pointwise{0, 1, 1, 8, 8, 8};
        const auto win = window_for_tile(pointwise, 0, 0, 64, 64);
        CHECK(win.y0 == 0);
        CHECK(win.y1 == 8);
        CHECK(win.x1 == 8);
        CHECK(!win.clipped);
    }
    SUBCASE("tiles past the output map are rejected") {
        CHECK_THROWS_AS((void)window_for_tile(layer, 0, 8, 64, 64), std::out_of_range);
        CHECK_THROWS_AS((void)window_for_tile(layer, 99, 0, 64, 64), std::out_of_range);
    }
    SUBCASE("strided window") {
        LayerConfig strided{1, 2, 1, 4, 8, 8};
        const auto win = window_for_tile(strided, 0, 1, 64, 64);
        CHECK(win.x0 == 15);   // 1*2*8 - 1
        CHECK(win.x1 == 32);   // 16 + 7*2 + 1 + 1
    }
}

TEST_CASE("window decomposition: grate fully contains, uniform does not") {
    LayerConfig layer{1, 1, 1, 8, 8, 8};
    const auto grate = build_grid(64, 64, 8, DivisionMode::grate(cfg_of(8, {1, 7})));
    const auto uniform = build_grid(64, 64, 8, DivisionMode::uniform(8));
    const auto win = window_for_tile(layer, 1, 1, 64, 64);   // [7,17) x [7,17)

    const auto in_grate = subtensors_in_window(grate, win);
    REQUIRE(in_grate.size() == 9);
    std::multiset<uint32_t> areas;
    for (const auto& [rid, containment] : in_grate) {
        CHECK(containment == Containment::full);
        areas.insert(grate.regions[rid].spatial_area());
    }
    // One 6x6, two 2x6, two 6x2, four 2x2.
    CHECK(areas == std::multiset<uint32_t>{4, 4, 4, 4, 12, 12, 12, 12, 36});

    bool any_partial = false;
    for (const auto& [rid, containment] : subtensors_in_window(uniform, win))
        any_partial |= containment == Containment::partial;
    CHECK(any_partial);
}

TEST_CASE("whole-map window returns every region as full") {
    const auto grid = build_grid(24, 24, 16, DivisionMode::grate(cfg_of(8, {1, 7})));
    Window win;
    win.y0 = 0;
    win.y1 = 24;
    win.x0 = 0;
    win.x1 = 24;
    win.cb0 = 0;
    win.cb1 = 2;
    const auto touched = subtensors_in_window(grid, win);
    CHECK(touched.size() == grid.regions.size());
    for (const auto& [rid, containment] : touched)
        CHECK(containment == Containment::full);
}

TEST_CASE("window containment property over randomized layers") {
    std::mt19937_64 rng(31);
    int cases = 0;
    while (cases < 250) {
        const uint32_t k = rng() % 6;
        const uint32_t s = 1 + rng() % 4;
        const uint32_t d = 1 + rng() % 4;
        const uint32_t tw = 4u << (rng() % 3);
        const uint32_t th = tw;
        LayerConfig layer{k, s, d, th, tw, 8};

        auto native = grate_config(k, s, d, tw);
        // Optionally reduce to a random divisor of the native period.
        uint32_t period = native.period;
        if (rng() % 2) {
            std::vector<uint32_t> divisors;
            for (uint32_t div = 1; div <= period; ++div)
                if (period % div == 0) divisors.push_back(div);
            period = divisors[rng() % divisors.size()];
        }
        const auto cfg = reduce_config(native, period);

        const uint32_t map_h = s * th * (2 + rng() % 2) + 2 * k * d + 1 + rng() % 5;
        const uint32_t map_w = s * tw * (2 + rng() % 2) + 2 * k * d + 1 + rng() % 5;
        const auto grid = build_grid(map_h, map_w, 8, DivisionMode::grate(cfg));

        const uint32_t out_h = output_extent(map_h, k, s, d);
        const uint32_t out_w = output_extent(map_w, k, s, d);
        const uint32_t tiles_y = (out_h - 1) / th + 1;
        const uint32_t tiles_x = (out_w - 1) / tw + 1;
        for (uint32_t ty = 0; ty < tiles_y; ++ty) {
            for (uint32_t tx = 0; tx < tiles_x; ++tx) {
                const auto win = window_for_tile(layer, ty, tx, map_h, map_w);
                for (const auto& [rid, containment] : subtensors_in_window(grid, win)) {
                    if (containment != Containment::full) {
                        CAPTURE(k);
                        CAPTURE(s);
                        CAPTURE(d);
                        CAPTURE(tw);
                        CAPTURE(period);
                        REQUIRE(containment == Containment::full);
                    }
                }
            }
        }
        ++cases;
    }
}

TEST_CASE("mode constructors validate") {
    CHECK_THROWS_AS((void)DivisionMode::uniform(0), std::invalid_argument);
    CHECK_THROWS_AS((void)DivisionMode::grate(cfg_of(8, {9})), std::invalid_argument);
    CHECK_THROWS_AS((void)DivisionMode::grate(cfg_of(8, {})), std::invalid_argument);
    CHECK(DivisionMode::compact_1x1().period() == 1);
    CHECK(!DivisionMode::compact_1x1().aligned());
}

TEST_CASE("grids reject bad channel counts") {
    CHECK_THROWS_AS((void)build_grid(8, 8, 7, DivisionMode::uniform(8)),
                    std::invalid_argument);
    CHECK_THROWS_AS((void)build_grid(0, 8, 8, DivisionMode::uniform(8)),
                    std::invalid_argument);
}
