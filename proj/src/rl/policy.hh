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

#include "core/rng.hh"
#include "rl/qfunction.hh"

namespace reflow::rl {

// Linear anneal from `start` to `end` over `decay_steps` global steps.
struct EpsilonSchedule {
  double start = 1.0;
  double end = 0.05;
  uint64_t decay_steps = 10000;

  double at(uint64_t step) const {
    if (decay_steps == 0 || step >= decay_steps) return end;
    double frac = static_cast<double>(step) / static_cast<double>(decay_steps);
    return start + (end - start) * frac;
  }
};

// One RNG draw decides explore-vs-exploit; a second picks the random action.
// Exactly two draws max per call keeps the stream layout easy to reason about
// in determinism tests.
inline uint32_t epsilon_greedy(const QFunction& q, uint32_t state, double eps,
                               SplitMix64& rng) {
  if (eps > 0.0 && rng.next_double() < eps) {
    return rng.bounded(q.action_count());
  }
  return q.greedy_action(state);
}

}  // namespace reflow::rl
