#include "gratetile/io.hpp"

#include <array>
#include <cstdio>
#include <fstream>
#include <vector>

namespace gratetile {

namespace {

constexpr char kMagic[4] = {'G', 'R', 'T', 'T'};
constexpr uint16_t kFormatVersion = 1;
constexpr uint64_t kMaxDim = 1u << 20;
constexpr uint64_t kMaxWords = 1ull << 31;

void put_u16(std::string& out, uint16_t v) {
    out.push_back(char(v & 0xff));
    out.push_back(char(v >> 8));
}

void put_u32(std::string& out, uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(char((v >> (8 * i)) & 0xff));
}

struct Reader {
    const std::string& bytes;
    uint64_t pos = 0;

    uint8_t u8() {
        if (pos >= bytes.size()) throw FormatError("unexpected end of file", pos);
        return uint8_t(bytes[pos++]);
    }
    uint16_t u16() {
        uint16_t lo = u8(), hi = u8();
        return uint16_t(lo | (hi << 8));
    }
    uint32_t u32() {
        uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= uint32_t(u8()) << (8 * i);
        return v;
    }
};

} // namespace

void store_feature_map(const FeatureMap& map, const std::string& path) {
    std::string out;
    out.reserve(20 + map.data.size() * 2);
    out.append(kMagic, 4);
    put_u16(out, kFormatVersion);
    put_u16(out, uint16_t(kWordBytes));
    put_u32(out, map.height);
    put_u32(out, map.width);
    put_u32(out, map.channels);
    for (uint16_t word : map.data) put_u16(out, word);

    std::ofstream file(path, std::ios::binary | std::ios::trunc);
    if (!file) throw std::runtime_error("cannot open for writing: " + path);
    file.write(out.data(), std::streamsize(out.size()));
    if (!file) throw std::runtime_error("write failed: " + path);
}

FeatureMap load_feature_map(const std::string& path) {
    std::ifstream file(path, std::ios::binary);
    if (!file) throw std::runtime_error("cannot open: " + path);
    std::string bytes((std::istreambuf_iterator<char>(file)),
                      std::istreambuf_iterator<char>());

    Reader in{bytes};
    for (char expect : kMagic) {
        const uint64_t at = in.pos;
        if (char(in.u8()) != expect) throw FormatError("bad magic", at);
    }
    {
        const uint64_t at = in.pos;
        if (in.u16() != kFormatVersion) throw FormatError("unsupported format version", at);
    }
    {
        const uint64_t at = in.pos;
        if (in.u16() != kWordBytes) throw FormatError("unsupported word size", at);
    }

    const uint64_t dims_at = in.pos;
    const uint32_t h = in.u32(), w = in.u32(), c = in.u32();
    if (h < 1 || w < 1 || c < 1 || h > kMaxDim || w > kMaxDim || c > kMaxDim ||
        uint64_t(h) * w * c > kMaxWords)
        throw FormatError("dimension overflow", dims_at);

    FeatureMap map(h, w, c);
    for (auto& word : map.data) {
        if (in.pos + 2 > bytes.size())
            throw FormatError("truncated payload", bytes.size());
        word = in.u16();
    }
    return map;
}

} // namespace gratetile
