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
#include <mutex>

#include "core/errors.hh"
#include "rl/envs.hh"

namespace reflow::rl {

const std::array<uint8_t, Image80Env::kBytes>& Image80Env::render(
    uint32_t latent) {
  // Latent images are fixed for the process lifetime; render each once.
  static std::array<std::array<uint8_t, kBytes>, kLatents> cache;
  static std::once_flag once;
  std::call_once(once, [] {
    for (uint32_t l = 0; l < kLatents; ++l) {
      SplitMix64 rng(0xfeedfaceull + l);
      for (auto& b : cache[l]) b = static_cast<uint8_t>(rng.next_u64());
    }
  });
  return cache[latent % kLatents];
}

Observation Image80Env::observe() const {
  const auto& img = render(latent_);
  return Observation{latent_, std::vector<uint8_t>(img.begin(), img.end())};
}

std::vector<Observation> Image80Env::reset(uint64_t seed) {
  rng_ = SplitMix64(seed * 0x9e3779b97f4a7c15ull + 0x8080ull);
  latent_ = 1 + static_cast<uint32_t>(rng_.bounded(kLatents - 1));
  steps_ = 0;
  active_ = true;
  return {observe()};
}

EnvStep Image80Env::step(std::span<const uint32_t> actions) {
  if (!active_) {
    throw RuntimeApiError("image80: step on finished episode");
  }
  if (actions.size() != 1 || actions[0] >= action_count()) {
    throw RuntimeApiError("image80: bad action");
  }

  // Walk the latent ring: actions push in different directions and a small
  // random drift keeps the chain mixing. Landing on latent 0 pays out.
  static constexpr int kMove[4] = {1, -1, 5, -5};
  int drift = static_cast<int>(rng_.bounded(3)) - 1;
  int next = static_cast<int>(latent_) + kMove[actions[0]] + drift;
  latent_ = static_cast<uint32_t>(((next % static_cast<int>(kLatents)) +
                                   static_cast<int>(kLatents)) %
                                  static_cast<int>(kLatents));
  ++steps_;

  bool hit = latent_ == 0;
  bool done = hit || steps_ >= kStepCap;
  float reward = hit ? 1.0f : 0.0f;
  if (done) active_ = false;
  return EnvStep{{observe()}, {reward}, done};
}

}  // namespace reflow::rl
