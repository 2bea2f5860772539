#include "gratetile/codec.hpp"

#include <stdexcept>

namespace gratetile::codec {

namespace {

constexpr uint32_t kRunBits = 4;
constexpr uint32_t kValueBits = 16;
constexpr uint32_t kPairBits = kRunBits + kValueBits;
constexpr uint32_t kMaxRun = (1u << kRunBits) - 1;   // 15

// Append the low `bits` bits of `value` to the stream, LSB-first.
struct BitWriter {
    std::vector<uint8_t>& out;
    uint32_t bit_pos = 0;

    void append(uint32_t value, uint32_t bits) {
        for (uint32_t i = 0; i < bits; ++i) {
            if (bit_pos % 8 == 0) out.push_back(0);
            if ((value >> i) & 1u) out.back() |= uint8_t(1u << (bit_pos % 8));
            ++bit_pos;
        }
    }
};

struct BitReader {
    std::span<const uint8_t> bytes;
    uint64_t bit_pos = 0;

    bool exhausted(uint32_t bits) const { return bit_pos + bits > bytes.size() * 8ull; }

    uint32_t read(uint32_t bits) {
        uint32_t value = 0;
        for (uint32_t i = 0; i < bits; ++i, ++bit_pos)
            if ((bytes[bit_pos / 8] >> (bit_pos % 8)) & 1u) value |= 1u << i;
        return value;
    }
};

uint64_t zrlc_pair_count(std::span<const uint16_t> words) {
    uint64_t pairs = 0, run = 0;
    for (uint16_t w : words) {
        if (w == 0) {
            ++run;
        } else {
            pairs += run / kMaxRun + 1;
            run = 0;
        }
    }
    pairs += run / kMaxRun;
    if (run % kMaxRun != 0) ++pairs;   // terminator for the remainder
    return pairs;
}

void check_nonempty(std::span<const uint16_t> words) {
    if (words.empty()) throw std::invalid_argument("cannot encode an empty word sequence");
}

} // namespace

const char* to_string(Codec codec) {
    switch (codec) {
        case Codec::bitmask: return "bitmask";
        case Codec::zrlc: return "zrlc";
        case Codec::raw: return "raw";
    }
    return "?";
}

// =============================================================================
// Bitmask
// =============================================================================

CompressedBlock bitmask_encode(std::span<const uint16_t> words) {
    check_nonempty(words);
    CompressedBlock block;
    block.codec = Codec::bitmask;
    block.original_words = uint32_t(words.size());

    const uint64_t mask_bytes = (words.size() + 7) / 8;
    block.payload.assign(mask_bytes, 0);
    for (uint64_t i = 0; i < words.size(); ++i)
        if (words[i] != 0) block.payload[i / 8] |= uint8_t(1u << (i % 8));
    for (uint16_t w : words) {
        if (w == 0) continue;
        block.payload.push_back(uint8_t(w & 0xff));
        block.payload.push_back(uint8_t(w >> 8));
    }
    return block;
}

std::vector<uint16_t> bitmask_decode(const CompressedBlock& block) {
    if (block.codec != Codec::bitmask)
        throw std::invalid_argument("block is not bitmask-coded");
    const uint64_t n = block.original_words;
    const uint64_t mask_bytes = (n + 7) / 8;
    if (block.payload.size() < mask_bytes)
        throw CorruptionError("bitmask payload shorter than its mask");

    uint64_t nnz = 0;
    for (uint64_t i = 0; i < n; ++i)
        if ((block.payload[i / 8] >> (i % 8)) & 1u) ++nnz;
    if (block.payload.size() < mask_bytes + 2 * nnz)
        throw CorruptionError("bitmask payload shorter than mask plus values");

    std::vector<uint16_t> words(n, 0);
    uint64_t at = mask_bytes;
    for (uint64_t i = 0; i < n; ++i) {
        if ((block.payload[i / 8] >> (i % 8)) & 1u) {
            words[i] = uint16_t(block.payload[at] | (block.payload[at + 1] << 8));
            at += 2;
        }
    }
    return words;
}

// =============================================================================
// ZRLC
// =============================================================================

CompressedBlock zrlc_encode(std::span<const uint16_t> words) {
    check_nonempty(words);
    CompressedBlock block;
    block.codec = Codec::zrlc;
    block.original_words = uint32_t(words.size());

    BitWriter bits{block.payload};
    auto emit = [&](uint32_t run, uint16_t value) {
        bits.append(run, kRunBits);
        bits.append(value, kValueBits);
    };

    uint64_t run = 0;
    for (uint16_t w : words) {
        if (w == 0) {
            ++run;
            continue;
        }
        while (run >= kMaxRun) {
            emit(kMaxRun, 0);
            run -= kMaxRun;
        }
        emit(uint32_t(run), w);
        run = 0;
    }
    while (run >= kMaxRun) {
        emit(kMaxRun, 0);
        run -= kMaxRun;
    }
    if (run > 0) emit(uint32_t(run), 0);
    return block;
}

std::vector<uint16_t> zrlc_decode(const CompressedBlock& block) {
    if (block.codec != Codec::zrlc)
        throw std::invalid_argument("block is not zrlc-coded");

    const uint64_t n = block.original_words;
    std::vector<uint16_t> words;
    words.reserve(n);
    BitReader bits{block.payload};
    while (words.size() < n) {
        if (bits.exhausted(kPairBits))
            throw CorruptionError("zrlc stream ended before the declared word count");
        const uint32_t run = bits.read(kRunBits);
        const uint16_t value = uint16_t(bits.read(kValueBits));
        if (words.size() + run + (value != 0 ? 1 : 0) > n)
            throw CorruptionError("zrlc stream decodes past the declared word count");
        words.insert(words.end(), run, 0);
        if (value != 0) words.push_back(value);
    }
    return words;
}

// =============================================================================
// Raw passthrough
// =============================================================================

CompressedBlock raw_encode(std::span<const uint16_t> words) {
    check_nonempty(words);
    CompressedBlock block;
    block.codec = Codec::raw;
    block.original_words = uint32_t(words.size());
    block.payload.reserve(words.size() * 2);
    for (uint16_t w : words) {
        block.payload.push_back(uint8_t(w & 0xff));
        block.payload.push_back(uint8_t(w >> 8));
    }
    return block;
}

std::vector<uint16_t> raw_decode(const CompressedBlock& block) {
    if (block.codec != Codec::raw)
        throw std::invalid_argument("block is not raw-coded");
    const uint64_t n = block.original_words;
    if (block.payload.size() < 2 * n)
        throw CorruptionError("raw payload shorter than its word count");
    std::vector<uint16_t> words(n);
    for (uint64_t i = 0; i < n; ++i)
        words[i] = uint16_t(block.payload[2 * i] | (block.payload[2 * i + 1] << 8));
    return words;
}

// =============================================================================
// Dispatch and size accounting
// =============================================================================

CompressedBlock encode(Codec codec, std::span<const uint16_t> words) {
    switch (codec) {
        case Codec::bitmask: return bitmask_encode(words);
        case Codec::zrlc: return zrlc_encode(words);
        case Codec::raw: return raw_encode(words);
    }
    throw std::invalid_argument("unknown codec");
}

std::vector<uint16_t> decode(const CompressedBlock& block) {
    switch (block.codec) {
        case Codec::bitmask: return bitmask_decode(block);
        case Codec::zrlc: return zrlc_decode(block);
        case Codec::raw: return raw_decode(block);
    }
    throw std::invalid_argument("unknown codec");
}

uint64_t compressed_size_bytes(Codec codec, std::span<const uint16_t> words) {
    switch (codec) {
        case Codec::raw:
            return 2 * words.size();
        case Codec::bitmask: {
            uint64_t nnz = 0;
            for (uint16_t w : words)
                if (w != 0) ++nnz;
            return (words.size() + 7) / 8 + 2 * nnz;
        }
        case Codec::zrlc:
            return (zrlc_pair_count(words) * kPairBits + 7) / 8;
    }
    throw std::invalid_argument("unknown codec");
}

uint64_t compressed_size_lines(Codec codec, std::span<const uint16_t> words,
                               uint32_t cache_line_bytes) {
    return (compressed_size_bytes(codec, words) + cache_line_bytes - 1) / cache_line_bytes;
}

} // namespace gratetile::codec
