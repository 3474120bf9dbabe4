#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>

namespace deepemo {

inline constexpr uint64_t kFnv1aOffset = 14695981039346656037ull;
inline constexpr uint64_t kFnv1aPrime = 1099511628211ull;

inline uint64_t fnv1a64(const void* bytes, size_t len, uint64_t state = kFnv1aOffset) {
  const auto* p = static_cast<const unsigned char*>(bytes);
  for (size_t i = 0; i < len; ++i) {
    state ^= p[i];
    state *= kFnv1aPrime;
  }
  return state;
}

inline uint64_t fnv1a64(std::string_view text, uint64_t state = kFnv1aOffset) {
  return fnv1a64(text.data(), text.size(), state);
}

}  // namespace deepemo
