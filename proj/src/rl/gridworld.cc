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
#include "rl/envs.hh"

#include "core/errors.hh"

namespace reflow::rl {

std::vector<Observation> GridworldEnv::reset(uint64_t seed) {
  (void)seed;  // transitions are deterministic; nothing to reseed
  row_ = 0;
  col_ = 0;
  steps_ = 0;
  active_ = true;
  return {Observation{0, {}}};
}

EnvStep GridworldEnv::step(std::span<const uint32_t> actions) {
  if (!active_) {
    throw RuntimeApiError("gridworld: step on finished episode");
  }
  if (actions.size() != 1 || actions[0] >= action_count()) {
    throw RuntimeApiError("gridworld: bad action");
  }

  static constexpr int dr[4] = {-1, 1, 0, 0};
  static constexpr int dc[4] = {0, 0, -1, 1};
  int nr = row_ + dr[actions[0]];
  int nc = col_ + dc[actions[0]];
  if (nr >= 0 && nr < kSide && nc >= 0 && nc < kSide) {
    row_ = nr;
    col_ = nc;
  }
  ++steps_;

  bool at_goal = (row_ == kSide - 1 && col_ == kSide - 1);
  bool done = at_goal || steps_ >= kStepCap;
  float reward = at_goal ? 1.0f : -0.01f;
  if (done) active_ = false;

  uint32_t id = static_cast<uint32_t>(row_ * kSide + col_);
  return EnvStep{{Observation{id, {}}}, {reward}, done};
}

}  // namespace reflow::rl
