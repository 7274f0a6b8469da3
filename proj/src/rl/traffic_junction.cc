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

// Local observation for one agent: own clamped position (-4..7 mapped to
// 0..11), whether a car on the other lane is near the junction, and whether
// the cell directly ahead on the own lane is taken. 12 * 2 * 2 = 48 ids.
uint32_t TrafficJunctionEnv::state_count() const { return 12 * 2 * 2; }

TrafficJunctionEnv::TrafficJunctionEnv(uint32_t agents) : agents_(agents) {
  if (agents_ < 1 || agents_ > 16) {
    throw RuntimeApiError("traffic-junction: agent count must be 1..16");
  }
}

std::vector<Observation> TrafficJunctionEnv::reset(uint64_t seed) {
  (void)seed;  // dynamics are fully determined by the joint actions
  pos_.assign(agents_, 0);
  passed_.assign(agents_, false);
  for (uint32_t i = 0; i < agents_; ++i) {
    // Alternate lanes; queue successive cars one cell apart behind the entry.
    pos_[i] = -static_cast<int>(i / 2);
  }
  steps_ = 0;
  active_ = true;

  std::vector<Observation> obs;
  obs.reserve(agents_);
  for (uint32_t i = 0; i < agents_; ++i) obs.push_back(observe(i));
  return obs;
}

Observation TrafficJunctionEnv::observe(uint32_t agent) const {
  int clamped = pos_[agent];
  if (clamped < -4) clamped = -4;
  if (clamped > kLaneLen) clamped = kLaneLen;
  uint32_t pos_code = static_cast<uint32_t>(clamped + 4);

  uint32_t lane = agent % 2;
  bool other_near = false;
  bool ahead_taken = false;
  for (uint32_t j = 0; j < agents_; ++j) {
    if (j == agent || passed_[j]) continue;
    if (j % 2 != lane) {
      // A car on the crossing lane within two cells of the junction.
      if (pos_[j] >= kJunction - 2 && pos_[j] <= kJunction) other_near = true;
    } else if (pos_[j] == pos_[agent] + 1) {
      ahead_taken = true;
    }
  }
  return Observation{
      pos_code * 4 + (other_near ? 2u : 0u) + (ahead_taken ? 1u : 0u), {}};
}

EnvStep TrafficJunctionEnv::step(std::span<const uint32_t> actions) {
  if (!active_) {
    throw RuntimeApiError("traffic-junction: step on finished episode");
  }
  if (actions.size() != agents_) {
    throw RuntimeApiError("traffic-junction: joint action count mismatch");
  }
  for (uint32_t a : actions) {
    if (a >= action_count()) {
      throw RuntimeApiError("traffic-junction: bad action");
    }
  }

  std::vector<float> reward(agents_, kStepReward);

  // Move phase: action 1 = gas, 0 = brake. Finished cars stay parked.
  for (uint32_t i = 0; i < agents_; ++i) {
    if (passed_[i]) {
      reward[i] = 0.0f;
      continue;
    }
    if (actions[i] == 1) ++pos_[i];
    if (pos_[i] >= kLaneLen) {
      passed_[i] = true;
      reward[i] = kPassReward;
    }
  }

  // Collision phase: same lane + same cell, or both lanes on the shared
  // junction cell. Every car involved takes the collision reward.
  bool collided = false;
  std::vector<bool> hit(agents_, false);
  for (uint32_t i = 0; i < agents_; ++i) {
    if (passed_[i] || pos_[i] < 0) continue;
    for (uint32_t j = i + 1; j < agents_; ++j) {
      if (passed_[j] || pos_[j] < 0) continue;
      bool same_lane = (i % 2) == (j % 2);
      bool crash = same_lane ? pos_[i] == pos_[j]
                             : (pos_[i] == kJunction && pos_[j] == kJunction);
      if (crash) {
        hit[i] = hit[j] = true;
        collided = true;
      }
    }
  }
  if (collided) {
    for (uint32_t i = 0; i < agents_; ++i) {
      if (hit[i]) reward[i] = kCollisionReward;
    }
  }

  ++steps_;
  bool all_passed = true;
  for (uint32_t i = 0; i < agents_; ++i) all_passed = all_passed && passed_[i];
  bool done = collided || all_passed || steps_ >= kStepCap;
  if (done) active_ = false;

  std::vector<Observation> obs;
  obs.reserve(agents_);
  for (uint32_t i = 0; i < agents_; ++i) obs.push_back(observe(i));
  return EnvStep{std::move(obs), std::move(reward), done};
}

}  // namespace reflow::rl
