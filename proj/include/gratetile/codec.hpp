// codec.hpp — Bit-exact subtensor compression (bitmask, ZRLC, raw)
// =============================================================================
//
// Each subtensor is compressed independently so it stays randomly
// accessible.  Two hardware-style codecs are provided plus a raw
// passthrough for uncompressed baselines.
//
// Bitmask:  ceil(n/8) mask bytes (bit i set <=> word i nonzero, LSB-first
//           within each byte) followed by the nonzero words in order,
//           little-endian.  Size is exactly ceil(n/8) + 2*nnz bytes.
//
// ZRLC:     a stream of 20-bit (run, value) pairs: run is a 4-bit count of
//           zeros preceding the 16-bit nonzero value.  A run of >= 15 zeros
//           emits escape pairs (15, 0) meaning "15 zeros, no value".
//           Trailing zeros after the last nonzero are covered by escape
//           pairs plus, when a remainder r in (0, 15) is left, a final
//           terminator pair (r, 0).  Pairs are packed LSB-first, run bits
//           first, and the stream is padded to a byte boundary.
//
// Both codecs may expand on dense input; callers that need a bound use the
// raw fallback (see layout::pack).
//
// =============================================================================
#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "gratetile/common.hpp"

namespace gratetile::codec {

enum class Codec { bitmask, zrlc, raw };

const char* to_string(Codec codec);

struct CompressedBlock {
    Codec codec = Codec::raw;
    uint32_t original_words = 0;
    std::vector<uint8_t> payload;
};

CompressedBlock bitmask_encode(std::span<const uint16_t> words);
std::vector<uint16_t> bitmask_decode(const CompressedBlock& block);

CompressedBlock zrlc_encode(std::span<const uint16_t> words);
std::vector<uint16_t> zrlc_decode(const CompressedBlock& block);

CompressedBlock raw_encode(std::span<const uint16_t> words);
std::vector<uint16_t> raw_decode(const CompressedBlock& block);

CompressedBlock encode(Codec codec, std::span<const uint16_t> words);
std::vector<uint16_t> decode(const CompressedBlock& block);

/// Compressed size without materializing the payload.
uint64_t compressed_size_bytes(Codec codec, std::span<const uint16_t> words);

/// Size in cache lines: ceil(bytes / line).
uint64_t compressed_size_lines(Codec codec, std::span<const uint16_t> words,
                               uint32_t cache_line_bytes = kCacheLineBytes);

/// Decode errors (truncated payload, word-count mismatch).
class CorruptionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace gratetile::codec
