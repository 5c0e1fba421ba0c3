#pragma once

#include <cstdint>
#include <string_view>

namespace gblobs {

/// FNV-1a 64-bit hash, used to fingerprint configs in manifests and reports.
inline uint64_t fnv1a64(std::string_view s) {
  uint64_t h = 0xCBF29CE484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001B3ull;
  }
  return h;
}

}  // namespace gblobs
