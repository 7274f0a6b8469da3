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

#include <cstdint>

namespace reflow {

// splitmix64. Small, fast, and bit-identical everywhere, which matters
// because determinism traces and replay sampling depend on the stream.
// std::mt19937 + distributions would tie results to the standard library.
class SplitMix64 {
 public:
  constexpr explicit SplitMix64(uint64_t seed = 0) : state_(seed) {}

  constexpr uint64_t next_u64() {
    uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // Unbiased bounded draw (rejection on the top band).
  uint32_t bounded(uint32_t n) {
    if (n <= 1) return 0;
    uint64_t threshold = (~uint64_t{0} / n) * n;
    uint64_t v;
    do {
      v = next_u64();
    } while (v >= threshold);
    return static_cast<uint32_t>(v % n);
  }

  // Uniform in [0, 1).
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  float next_float() {
    return static_cast<float>(next_u64() >> 40) * 0x1.0p-24f;
  }

 private:
  uint64_t state_;
};

}  // namespace reflow
