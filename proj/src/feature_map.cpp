#include "gratetile/feature_map.hpp"

#include <cmath>
#include <stdexcept>

namespace gratetile {

namespace {

// Hand-rolled splitmix64 so generated maps are bit-identical across
// standard libraries and platforms (std::uniform_* distributions are
// implementation-defined).
struct SplitMix64 {
    uint64_t state;

    explicit SplitMix64(uint64_t seed) : state(seed) {}

    uint64_t next() {
        state += 0x9e3779b97f4a7c15ull;
        uint64_t z = state;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1) with 53 bits of precision.
    double next_unit() { return double(next() >> 11) * 0x1.0p-53; }

    // Uniform in [1, 65535].
    uint16_t next_word() { return uint16_t(1 + next() % 65535); }

    // Uniform in [0, n).
    uint64_t next_below(uint64_t n) { return next() % n; }
};

void validate(uint32_t h, uint32_t w, uint32_t c, const SparsityModel& model) {
    if (h < 1 || w < 1 || c < 1)
        throw std::invalid_argument("feature map dimensions must be >= 1");
    if (!(model.zero_fraction >= 0.0 && model.zero_fraction <= 1.0))
        throw std::invalid_argument("zero_fraction must be in [0, 1]");
}

FeatureMap generate_iid(uint32_t h, uint32_t w, uint32_t c, const SparsityModel& model) {
    FeatureMap map(h, w, c);
    SplitMix64 rng(model.seed);
    for (auto& word : map.data) {
        const double u = rng.next_unit();
        word = (u < model.zero_fraction) ? 0 : rng.next_word();
    }
    return map;
}

FeatureMap generate_blob(uint32_t h, uint32_t w, uint32_t c, const SparsityModel& model) {
    FeatureMap map(h, w, c);
    SplitMix64 rng(model.seed);
    for (auto& word : map.data) word = rng.next_word();

    const uint64_t target = uint64_t(std::llround(model.zero_fraction * double(map.word_count())));
    const int64_t r = int64_t(model.blob_radius);
    uint64_t zeroed = 0;

    // Place discs at random centers; zero cells in raster order within each
    // disc and stop exactly at the target, so the final fraction is within
    // one word of the request.  A raster sweep finishes the job if random
    // placement keeps missing the last few nonzero cells.
    uint64_t stale_discs = 0;
    const uint64_t stale_limit = 64 + 16 * map.word_count() / (uint64_t(2 * r + 1) * (2 * r + 1) * c + 1);
    while (zeroed < target && stale_discs < stale_limit) {
        const int64_t cy = int64_t(rng.next_below(h));
        const int64_t cx = int64_t(rng.next_below(w));
        uint64_t before = zeroed;
        for (int64_t dy = -r; dy <= r && zeroed < target; ++dy) {
            for (int64_t dx = -r; dx <= r && zeroed < target; ++dx) {
                if (dy * dy + dx * dx > r * r) continue;
                const int64_t y = cy + dy, x = cx + dx;
                if (y < 0 || y >= int64_t(h) || x < 0 || x >= int64_t(w)) continue;
                for (uint32_t ch = 0; ch < c && zeroed < target; ++ch) {
                    auto& word = map.at(uint32_t(y), uint32_t(x), ch);
                    if (word != 0) {
                        word = 0;
                        ++zeroed;
                    }
                }
            }
        }
        stale_discs = (zeroed == before) ? stale_discs + 1 : 0;
    }
    for (uint64_t i = 0; i < map.data.size() && zeroed < target; ++i) {
        if (map.data[i] != 0) {
            map.data[i] = 0;
            ++zeroed;
        }
    }
    return map;
}

} // namespace

FeatureMap::FeatureMap(uint32_t h, uint32_t w, uint32_t c)
    : height(h), width(w), channels(c), data(uint64_t(h) * w * c, 0) {}

FeatureMap generate_feature_map(uint32_t h, uint32_t w, uint32_t c,
                                const SparsityModel& model) {
    validate(h, w, c, model);
    return model.mode == SparsityMode::iid ? generate_iid(h, w, c, model)
                                           : generate_blob(h, w, c, model);
}

double zero_fraction(const FeatureMap& map) {
    if (map.data.empty()) return 0.0;
    uint64_t zeros = 0;
    for (uint16_t word : map.data)
        if (word == 0) ++zeros;
    return double(zeros) / double(map.data.size());
}

} // namespace gratetile
