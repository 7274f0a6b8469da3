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

#include <array>

#include "core/rng.hh"
#include "rl/env.hh"

namespace reflow::rl {

class BlackjackEnv final : public Environment {
 public:
  std::string_view name() const override { return "blackjack"; }
  uint32_t action_count() const override { return 2; }
  uint32_t state_count() const override { return 200; }
  size_t obs_byte_size() const override { return 0; }

  std::vector<Observation> reset(uint64_t seed) override;
  EnvStep step(std::span<const uint32_t> actions) override;

  static uint32_t encode(int player_sum, int dealer_card, bool usable);

 private:
  std::vector<Observation> reset_from_stream();
  float resolve_dealer();
  static int draw_card(SplitMix64& rng);

  SplitMix64 rng_{0};
  int player_sum_ = 0;
  int dealer_card_ = 0;
  bool usable_ace_ = false;
  bool active_ = false;
};

// Deterministic 5x5 grid. Start at (0,0), goal at (4,4); moving off the edge
// keeps the agent in place. Reward is -0.01 per step and +1.0 on entering the
// goal; a 500-step cap ends runaway episodes.
class GridworldEnv final : public Environment {
 public:
  static constexpr int kSide = 5;
  static constexpr int kStepCap = 500;

  std::string_view name() const override { return "gridworld"; }
  uint32_t action_count() const override { return 4; }
  uint32_t state_count() const override { return kSide * kSide; }
  size_t obs_byte_size() const override { return 0; }

  std::vector<Observation> reset(uint64_t seed) override;
  EnvStep step(std::span<const uint32_t> actions) override;

 private:
  int row_ = 0;
  int col_ = 0;
  int steps_ = 0;
  bool active_ = false;
};

// Synthetic pixel environment: 64 latent states rendered as an 80x80 byte
// image (6400 bytes, deterministic per latent). Transitions walk the latent
// ring; landing on latent 0 pays +1 and ends the episode. Exists to make
// observation payload cost visible, not to be an interesting control task.
class Image80Env final : public Environment {
 public:
  static constexpr uint32_t kLatents = 64;
  static constexpr size_t kBytes = 80 * 80;
  static constexpr int kStepCap = 128;

  std::string_view name() const override { return "image80"; }
  uint32_t action_count() const override { return 4; }
  uint32_t state_count() const override { return kLatents; }
  size_t obs_byte_size() const override { return kBytes; }

  std::vector<Observation> reset(uint64_t seed) override;
  EnvStep step(std::span<const uint32_t> actions) override;

  // Deterministic rendering of a latent id, shared with the linear learner's
  // feature lookup.
  static const std::array<uint8_t, kBytes>& render(uint32_t latent);

 private:
  Observation observe() const;

  SplitMix64 rng_{0};
  uint32_t latent_ = 0;
  int steps_ = 0;
  bool active_ = false;
};

// Two one-way roads of 7 cells each crossing at cell index 3 (14 cells
// total). Agents alternate lanes, are staggered one cell apart behind the
// lane entrance, and choose gas (advance) or brake (hold) each step. Two
// cars on the same physical cell collide: both take -10 and the episode
// ends. Clearing the far end of a lane pays +1; every step costs -0.01.
class TrafficJunctionEnv final : public Environment {
 public:
  static constexpr int kLaneLen = 7;
  static constexpr int kJunction = 3;
  static constexpr int kStepCap = 60;
  static constexpr float kCollisionReward = -10.0f;
  static constexpr float kPassReward = 1.0f;
  static constexpr float kStepReward = -0.01f;

  explicit TrafficJunctionEnv(uint32_t agents);

  std::string_view name() const override { return "traffic-junction"; }
  uint32_t action_count() const override { return 2; }
  uint32_t state_count() const override;
  size_t obs_byte_size() const override { return 0; }
  uint32_t agent_count() const override { return agents_; }

  std::vector<Observation> reset(uint64_t seed) override;
  EnvStep step(std::span<const uint32_t> actions) override;

 private:
  Observation observe(uint32_t agent) const;

  uint32_t agents_;
  std::vector<int> pos_;      // cell index along own lane; negative = queued
  std::vector<bool> passed_;  // cleared the lane
  int steps_ = 0;
  bool active_ = false;
};

}  // namespace reflow::rl
