#include "gratetile/layer.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace gratetile {

void LayerConfig::validate() const {
    if (stride < 1) throw std::invalid_argument("stride must be >= 1");
    if (dilation < 1) throw std::invalid_argument("dilation must be >= 1");
    if (out_tile_h < 1 || out_tile_w < 1)
        throw std::invalid_argument("output tile extents must be >= 1");
    if (in_channels < 1 || in_channels % kChannelBlock != 0)
        throw std::invalid_argument("in_channels must be a positive multiple of 8");
}

uint32_t output_extent(uint32_t in_extent, uint32_t half_kernel,
                       uint32_t stride, uint32_t dilation) {
    const uint64_t reach = 2ull * half_kernel * dilation;
    if (uint64_t(in_extent) <= reach) return 0;
    return uint32_t((uint64_t(in_extent) - reach - 1) / stride + 1);
}

void PlatformProfile::validate() const {
    if (word_bytes != kWordBytes)
        throw std::invalid_argument("word size is fixed at 2 bytes");
    if (cache_line_bytes != 8 * word_bytes)
        throw std::invalid_argument("cache line must be 8 words");
    if (max_tile_words < 1) throw std::invalid_argument("max_tile_words must be >= 1");
    if (tile_channels < kChannelBlock || tile_channels % kChannelBlock != 0)
        throw std::invalid_argument("tile_channels must be a positive multiple of 8");
    if (tile_aspect < 1) throw std::invalid_argument("tile_aspect must be >= 1");
}

PlatformProfile small_platform() {
    return PlatformProfile{"small", 4096, kCacheLineBytes, kWordBytes, 8, 2};
}

PlatformProfile large_platform() {
    return PlatformProfile{"large", 16384, kCacheLineBytes, kWordBytes, 16, 1};
}

// =============================================================================
// Catalog parsing
// =============================================================================

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

uint32_t parse_u32(const std::string& field, const std::string& where) {
    size_t used = 0;
    unsigned long value = 0;
    try {
        value = std::stoul(field, &used);
    } catch (const std::exception&) {
        throw std::invalid_argument(where + ": not a number: '" + field + "'");
    }
    if (used != field.size() || value > 0xffffffffull)
        throw std::invalid_argument(where + ": bad value: '" + field + "'");
    return uint32_t(value);
}

} // namespace

std::vector<CatalogEntry> parse_layer_catalog(std::istream& in,
                                              const std::string& source_name) {
    std::vector<CatalogEntry> entries;
    std::string line;
    uint32_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;

        const std::string where = source_name + ":" + std::to_string(line_no);
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) fields.push_back(trim(field));
        if (fields.size() != 8)
            throw std::invalid_argument(where + ": expected 8 comma-separated fields, got " +
                                        std::to_string(fields.size()));

        CatalogEntry e;
        e.network = fields[0];
        e.layer = fields[1];
        e.height = parse_u32(fields[2], where);
        e.width = parse_u32(fields[3], where);
        e.channels = parse_u32(fields[4], where);
        e.kernel = parse_u32(fields[5], where);
        e.stride = parse_u32(fields[6], where);
        e.dilation = parse_u32(fields[7], where);

        if (e.height < 1 || e.width < 1 || e.channels < 1)
            throw std::invalid_argument(where + ": dimensions must be >= 1");
        if (e.kernel % 2 == 0 || e.kernel < 1)
            throw std::invalid_argument(where + ": kernel size must be odd");
        if (e.stride < 1 || e.dilation < 1)
            throw std::invalid_argument(where + ": stride and dilation must be >= 1");

        // Round channels up to the channel-block depth.
        e.channels = (e.channels + kChannelBlock - 1) / kChannelBlock * kChannelBlock;
        entries.push_back(std::move(e));
    }
    return entries;
}

std::vector<CatalogEntry> load_layer_catalog(const std::string& path) {
    std::ifstream file(path);
    if (!file) throw std::runtime_error("cannot open catalog: " + path);
    return parse_layer_catalog(file, path);
}

std::string bundled_catalog_path() {
#ifdef GRATETILE_DATA_DIR
    return std::string(GRATETILE_DATA_DIR) + "/layer_catalog.txt";
#else
    return "data/layer_catalog.txt";
#endif
}

std::vector<CatalogEntry> layer_catalog() {
    return load_layer_catalog(bundled_catalog_path());
}

} // namespace gratetile
