// Tile derivation, fetch simulation vs. the byte-marking oracle, and
// aggregation.
#include "doctest.h"

#include <array>
#include <random>

#include "gratetile/simulator.hpp"

using namespace gratetile;
using namespace gratetile::division;
using namespace gratetile::sim;

namespace {

GrateConfig cfg_of(uint32_t period, std::vector<uint32_t> cuts) {
    GrateConfig cfg;
    cfg.period = period;
    cfg.cuts = std::move(cuts);
    return cfg;
}

FeatureMap random_map(uint32_t h, uint32_t w, uint32_t c, double zf, uint64_t seed) {
    SparsityModel model;
    model.zero_fraction = zf;
    model.seed = seed;
    return generate_feature_map(h, w, c, model);
}

bool reports_equal(const FetchReport& a, const FetchReport& b) {
    return a.payload_bytes == b.payload_bytes && a.metadata_bytes == b.metadata_bytes &&
           a.baseline_bytes == b.baseline_bytes &&
           a.saving_no_overhead == b.saving_no_overhead &&
           a.saving_with_overhead == b.saving_with_overhead && a.optimal == b.optimal;
}

} // namespace

TEST_CASE("tile derivation reproduces the reference configurations") {
    const auto small = small_platform();
    const auto large = large_platform();

    auto tile = derive_tile_config(1, 1, 1, 8, small);
    CHECK(tile.in_h == 10);
    CHECK(tile.in_w == 18);
    CHECK(tile.fetch_channels == 8);
    CHECK(tile.out_h == 8);
    CHECK(tile.out_w == 16);

    tile = derive_tile_config(1, 2, 1, 8, small);
    CHECK(tile.in_h == 9);
    CHECK(tile.in_w == 17);

    tile = derive_tile_config(2, 1, 1, 8, small);
    CHECK(tile.in_h == 12);
    CHECK(tile.in_w == 20);

    tile = derive_tile_config(1, 1, 1, 16, large);
    CHECK(tile.in_h == 18);
    CHECK(tile.in_w == 18);
    CHECK(tile.fetch_channels == 16);
    CHECK(tile.out_h == 16);
    CHECK(tile.out_w == 16);

    tile = derive_tile_config(1, 2, 1, 16, large);
    CHECK(tile.in_h == 17);
    CHECK(tile.in_w == 17);

    tile = derive_tile_config(2, 1, 1, 16, large);
    CHECK(tile.in_h == 20);
    CHECK(tile.in_w == 20);

    // Large strides push the tile width down to the 8-wide floor.
    tile = derive_tile_config(5, 4, 1, 8, small);
    CHECK(tile.out_w == 8);

    // The input tile must fit the working-set budget.
    PlatformProfile tiny = small_platform();
    tiny.max_tile_words = 50;
    CHECK_THROWS_AS((void)derive_tile_config(3, 1, 1, 8, tiny), ConfigurationError);

    // Profiles are pinned to 2-byte words and 8-word cache lines.
    PlatformProfile bad = small_platform();
    bad.cache_line_bytes = 32;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = small_platform();
    bad.tile_channels = 12;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

    // Invariant: input tile = output tile plus halo.
    for (uint32_t k : {0u, 1u, 2u, 5u}) {
        const auto t = derive_tile_config(k, 1, 1, 8, small);
        CHECK(t.in_h == (t.out_h - 1) + 2 * k + 1);
        CHECK(t.in_w == (t.out_w - 1) + 2 * k + 1);
        CHECK(t.input_words() <= small.max_tile_words);
    }
}

TEST_CASE("division-mode applicability follows the tile period") {
    const auto small = small_platform();
    const auto large = large_platform();
    CatalogEntry conv3{"net", "conv", 64, 64, 8, 3, 1, 1};

    const auto layer_small = make_layer_config(conv3, small);   // 8x16 tile
    CHECK(division_mode_for(ModeToken::grate8, layer_small).has_value());
    CHECK(division_mode_for(ModeToken::grate4, layer_small).has_value());
    CHECK(!division_mode_for(ModeToken::grate16, layer_small).has_value());

    const auto layer_large = make_layer_config(conv3, large);   // 16x16 tile
    CHECK(division_mode_for(ModeToken::grate16, layer_large).has_value());

    // Stride 2 doubles the boundary period, re-enabling mod 16 tiles.
    CatalogEntry down{"net", "down", 64, 64, 16, 1, 2, 1};
    const auto layer_down = make_layer_config(down, small);
    CHECK(division_mode_for(ModeToken::grate16, layer_down).has_value());

    const auto g8 = division_mode_for(ModeToken::grate8, layer_small);
    REQUIRE(g8.has_value());
    CHECK(g8->config.cuts == std::vector<uint32_t>{1, 7});

    CHECK(division_mode_for(ModeToken::u1, layer_small)->kind ==
          DivisionMode::Kind::compact_1x1);
}

TEST_CASE("simulator equals the byte-marking oracle") {
    std::mt19937_64 rng(51);
    const auto platform = small_platform();
    int checked = 0;
    for (int it = 0; it < 60; ++it) {
        const uint32_t h = 12 + rng() % 21;   // <= 32
        const uint32_t w = 12 + rng() % 21;
        const uint32_t c = 8 * (1 + rng() % 2);
        const double zf = double(rng() % 101) / 100.0;
        const auto map = random_map(h, w, c, zf, rng());

        const uint32_t k = rng() % 3;
        const uint32_t s = 1 + rng() % 2;
        LayerConfig layer{k, s, 1, 4, 8, c};
        if (output_extent(h, k, s, 1) == 0 || output_extent(w, k, s, 1) == 0) continue;

        const ModeToken token = all_mode_tokens()[rng() % all_mode_tokens().size()];
        const auto mode = division_mode_for(token, layer);
        if (!mode) continue;
        const Codec codec = std::array{Codec::bitmask, Codec::zrlc, Codec::raw}[rng() % 3];

        const auto fast = simulate_layer(map, layer, platform, *mode, codec);
        const auto slow = brute_force_oracle(map, layer, platform, *mode, codec);
        CHECK(reports_equal(fast, slow));
        ++checked;
    }
    CHECK(checked > 30);
}

TEST_CASE("all-zero map under grate mod 8: masks only") {
    // Frozen from an independent per-line accounting of the same geometry
    // (64x64x8 all-zero, 3x3 stride-1 layer, 8x16 output tiles).
    const FeatureMap map(64, 64, 8);
    LayerConfig layer{1, 1, 1, 8, 16, 8};
    const auto mode = division_mode_for(ModeToken::grate8, layer);
    REQUIRE(mode.has_value());
    const auto report =
        simulate_layer(map, layer, small_platform(), *mode, Codec::bitmask);
    CHECK(report.payload_bytes == 9728);
    CHECK(report.baseline_bytes == 87360);
    CHECK(report.saving_no_overhead == doctest::Approx(0.888645).epsilon(1e-6));
    CHECK(report.optimal == 1.0);

    // Same accounting at oracle-checkable scale.
    const FeatureMap small_map(32, 32, 8);
    const auto fast =
        simulate_layer(small_map, layer, small_platform(), *mode, Codec::bitmask);
    const auto slow =
        brute_force_oracle(small_map, layer, small_platform(), *mode, Codec::bitmask);
    CHECK(reports_equal(fast, slow));
    CHECK(fast.saving_no_overhead > 0.85);
}

TEST_CASE("dense maps with the raw codec fetch exactly the baseline") {
    FeatureMap dense(64, 64, 8);
    for (auto& w : dense.data) w = 1;

    SUBCASE("uniform(8), pointwise kernel: aligned footprints") {
        LayerConfig layer{0, 1, 1, 8, 8, 8};
        const auto report = simulate_layer(dense, layer, small_platform(),
                                           DivisionMode::uniform(8), Codec::raw);
        CHECK(report.payload_bytes == report.baseline_bytes);
        CHECK(report.saving_no_overhead == 0.0);
        CHECK(report.optimal == 0.0);
    }
    SUBCASE("grate mod 8 with halo: full containment keeps parity") {
        FeatureMap map66(66, 66, 8);
        for (auto& w : map66.data) w = 1;
        LayerConfig layer{1, 1, 1, 8, 8, 8};
        const auto mode = division_mode_for(ModeToken::grate8, layer);
        REQUIRE(mode.has_value());
        const auto report =
            simulate_layer(map66, layer, small_platform(), *mode, Codec::raw);
        CHECK(report.payload_bytes == report.baseline_bytes);
        CHECK(report.saving_no_overhead == 0.0);
    }
}

TEST_CASE("grate mod 8 beats uniform(8) on a sparse map") {
    const auto map = random_map(56, 56, 64, 0.7, 4242);
    CatalogEntry entry{"t", "t", 56, 56, 64, 3, 1, 1};
    const auto layer = make_layer_config(entry, small_platform());
    const auto grate = division_mode_for(ModeToken::grate8, layer);
    REQUIRE(grate.has_value());

    const auto grate_report =
        simulate_layer(map, layer, small_platform(), *grate, Codec::bitmask);
    const auto uniform_report = simulate_layer(map, layer, small_platform(),
                                               DivisionMode::uniform(8), Codec::bitmask);
    CHECK(grate_report.saving_no_overhead > uniform_report.saving_no_overhead);
    CHECK(grate_report.saving_with_overhead > uniform_report.saving_with_overhead);
}

TEST_CASE("report invariants and the compact upper bound") {
    std::mt19937_64 rng(61);
    LayerConfig layer{1, 1, 1, 4, 8, 8};
    const auto platform = small_platform();
    for (int it = 0; it < 12; ++it) {
        const auto map = random_map(24, 24, 8, double(rng() % 101) / 100.0, rng());
        const auto compact = simulate_layer(map, layer, platform,
                                            DivisionMode::compact_1x1(), Codec::bitmask);
        CHECK(compact.saving_with_overhead <= compact.saving_no_overhead);
        // Compact packing wastes no alignment and never over-fetches, so it
        // upper-bounds every aligned mode under the bitmask codec.
        for (ModeToken token : {ModeToken::grate8, ModeToken::grate4, ModeToken::u8,
                                ModeToken::u4, ModeToken::u2}) {
            const auto mode = division_mode_for(token, layer);
            if (!mode) continue;
            const auto aligned =
                simulate_layer(map, layer, platform, *mode, Codec::bitmask);
            CHECK(aligned.saving_with_overhead <= aligned.saving_no_overhead);
            CHECK(compact.saving_no_overhead >= aligned.saving_no_overhead);
        }
    }
}

TEST_CASE("expected saving grows with sparsity") {
    LayerConfig layer{1, 1, 1, 8, 16, 8};
    const auto mode = division_mode_for(ModeToken::grate8, layer);
    REQUIRE(mode.has_value());
    double previous = -1.0;
    for (double zf : {0.0, 0.3, 0.7, 1.0}) {
        double mean = 0.0;
        for (uint64_t seed : {1u, 2u, 3u}) {
            const auto map = random_map(48, 48, 8, zf, seed);
            mean += simulate_layer(map, layer, small_platform(), *mode, Codec::bitmask)
                        .saving_no_overhead;
        }
        mean /= 3.0;
        CHECK(mean >= previous);
        previous = mean;
    }
}

TEST_CASE("full-map single-pass metadata matches the per-KB table") {
    // One tile covering the whole 64x64x8 map (64 KB): metadata bytes scale
    // to exactly the per-KB record arithmetic for every mode.
    const FeatureMap map(64, 64, 8);
    LayerConfig layer{0, 1, 1, 64, 64, 8};
    const double kb = double(map.word_count()) / 512.0;

    const std::vector<std::pair<DivisionMode, uint32_t>> table{
        {DivisionMode::grate(cfg_of(4, {1, 3})), 192},
        {DivisionMode::grate(cfg_of(8, {1, 7})), 48},
        {DivisionMode::grate(cfg_of(16, {1, 15})), 12},
        {DivisionMode::uniform(8), 28},
        {DivisionMode::uniform(4), 112},
        {DivisionMode::uniform(2), 448},
        {DivisionMode::compact_1x1(), 2048},
    };
    for (const auto& [mode, bits_per_kb] : table) {
        const auto report =
            simulate_layer(map, layer, small_platform(), mode, Codec::bitmask);
        CHECK(double(report.metadata_bytes) * 8.0 / kb == double(bits_per_kb));
        CHECK(layout::metadata_bits_per_kb(mode) == bits_per_kb);
    }
}

TEST_CASE("baseline toggle is consistent for channel-blocked maps") {
    const auto map = random_map(20, 20, 16, 0.5, 9);
    LayerConfig layer{1, 1, 1, 8, 8, 16};
    const auto mode = division_mode_for(ModeToken::grate8, layer);
    REQUIRE(mode.has_value());
    SimOptions exact;
    exact.baseline_exact = true;
    const auto lines =
        simulate_layer(map, layer, small_platform(), *mode, Codec::bitmask);
    const auto bytes =
        simulate_layer(map, layer, small_platform(), *mode, Codec::bitmask, exact);
    // Whole channel blocks make every baseline row-run line-aligned already.
    CHECK(lines.baseline_bytes == bytes.baseline_bytes);
}

TEST_CASE("aggregate geometric mean") {
    FetchReport a;
    a.saving_no_overhead = 0.5;
    a.saving_with_overhead = 0.4;
    a.optimal = 0.7;

    const std::vector<FetchReport> single{a};
    const auto mean = aggregate(single);
    CHECK(mean.saving_no_overhead == doctest::Approx(0.5));
    CHECK(mean.saving_with_overhead == doctest::Approx(0.4));

    FetchReport b = a;
    const std::vector<FetchReport> pair{a, b};
    CHECK(aggregate(pair).saving_no_overhead == doctest::Approx(0.5));

    FetchReport lo, hi;
    lo.saving_no_overhead = 0.2;
    hi.saving_no_overhead = 0.8;
    const std::vector<FetchReport> mixed{lo, hi};
    CHECK(aggregate(mixed).saving_no_overhead == doctest::Approx(0.6));   // 1-sqrt(0.16)

    const std::vector<FetchReport> none;
    CHECK_THROWS_AS((void)aggregate(none), std::invalid_argument);
}

TEST_CASE("oracle rejects oversized instances") {
    const FeatureMap big(64, 64, 8);
    LayerConfig layer{1, 1, 1, 8, 16, 8};
    const auto mode = division_mode_for(ModeToken::grate8, layer);
    CHECK_THROWS_AS(
        (void)brute_force_oracle(big, layer, small_platform(), *mode, Codec::bitmask),
        std::invalid_argument);
}

TEST_CASE("simulation rejects mismatched inputs") {
    const FeatureMap map(16, 16, 8);
    LayerConfig layer{1, 1, 1, 4, 8, 16};   // expects 16 channels
    CHECK_THROWS_AS((void)simulate_layer(map, layer, small_platform(),
                                         DivisionMode::uniform(8), Codec::bitmask),
                    std::invalid_argument);

    LayerConfig huge_kernel{9, 1, 1, 4, 8, 8};
    CHECK_THROWS_AS((void)simulate_layer(map, huge_kernel, small_platform(),
                                         DivisionMode::uniform(8), Codec::bitmask),
                    ConfigurationError);
}
