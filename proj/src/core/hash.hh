/*
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <string_view>

namespace reflow {

// FNV-style 64-bit stream digest. Full 8-byte words are folded with one
// multiply each (the classic byte-at-a-time loop is a serial multiply chain
// and far too slow for megabyte payloads); the tail falls back to bytes.
// Words are assembled little-endian explicitly, so digests are stable across
// runs and platforms; never replace with std::hash. Note that hashing one
// buffer as two mix_bytes calls does not equal hashing it in one call, so
// callers digest each field with a single call.
class Fnv64 {
 public:
  static constexpr uint64_t kOffset = 1469598103934665603ull;
  static constexpr uint64_t kPrime = 1099511628211ull;

  void mix_bytes(const void* data, size_t len) {
    const auto* p = static_cast<const unsigned char*>(data);
    while (len >= 8) {
      uint64_t w = static_cast<uint64_t>(p[0]) |
                   static_cast<uint64_t>(p[1]) << 8 |
                   static_cast<uint64_t>(p[2]) << 16 |
                   static_cast<uint64_t>(p[3]) << 24 |
                   static_cast<uint64_t>(p[4]) << 32 |
                   static_cast<uint64_t>(p[5]) << 40 |
                   static_cast<uint64_t>(p[6]) << 48 |
                   static_cast<uint64_t>(p[7]) << 56;
      h_ ^= w;
      h_ *= kPrime;
      p += 8;
      len -= 8;
    }
    for (size_t i = 0; i < len; ++i) {
      h_ ^= p[i];
      h_ *= kPrime;
    }
  }

  void mix_u64(uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      h_ ^= (v >> (8 * i)) & 0xff;
      h_ *= kPrime;
    }
  }

  void mix_f32(float v) { mix_u64(std::bit_cast<uint32_t>(v)); }
  void mix_f64(double v) { mix_u64(std::bit_cast<uint64_t>(v)); }

  uint64_t digest() const { return h_; }

 private:
  uint64_t h_ = kOffset;
};

inline uint64_t fnv64(const void* data, size_t len) {
  Fnv64 h;
  h.mix_bytes(data, len);
  return h.digest();
}

inline uint64_t fnv64(std::string_view s) { return fnv64(s.data(), s.size()); }

}  // namespace reflow
