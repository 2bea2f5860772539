// common.hpp — Library-wide constants and error types
#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace gratetile {

// Storage geometry shared by every module: 16-bit words, 16-byte cache
// lines (8 words), and 8-word channel blocks as the depth granularity of
// every division mode.
inline constexpr uint32_t kWordBytes = 2;
inline constexpr uint32_t kCacheLineBytes = 16;
inline constexpr uint32_t kWordsPerLine = kCacheLineBytes / kWordBytes;
inline constexpr uint32_t kChannelBlock = 8;

/// File or stream contents violate an on-disk format.  Carries the byte
/// offset at which parsing failed.
class FormatError : public std::runtime_error {
public:
    FormatError(const std::string& what, uint64_t byte_offset)
        : std::runtime_error(what + " (byte offset " + std::to_string(byte_offset) + ")"),
          offset_(byte_offset) {}

    uint64_t byte_offset() const { return offset_; }

private:
    uint64_t offset_;
};

/// A simulation cannot be configured as requested (no tile fits the
/// working-set budget, or a division period is incompatible with the tile).
class ConfigurationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace gratetile
