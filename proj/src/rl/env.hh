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
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "core/hash.hh"

namespace reflow::rl {

// One observation. Every environment exposes a discrete state id so the
// tabular learner can index it; environments with pixel-like observations
// additionally fill `bytes` (the id is then a latent the bytes encode).
struct Observation {
  uint32_t id = 0;
  std::vector<uint8_t> bytes;
};

inline uint64_t hash_value(const Observation& o) {
  Fnv64 h;
  h.mix_u64(o.id);
  h.mix_bytes(o.bytes.data(), o.bytes.size());
  return h.digest();
}

inline uint64_t hash_value(const std::vector<Observation>& v) {
  Fnv64 h;
  for (const Observation& o : v) h.mix_u64(hash_value(o));
  return h.digest();
}

// Result of one environment step. Single-agent environments use vectors of
// length one so multi-agent and single-agent code paths stay identical.
struct EnvStep {
  std::vector<Observation> obs;
  std::vector<float> reward;
  bool done = false;
};

// Episodic environment. reset(seed) restarts the internal RNG stream, so two
// resets with the same seed replay the same episode under the same actions.
class Environment {
 public:
  virtual ~Environment() = default;

  virtual std::string_view name() const = 0;
  virtual uint32_t action_count() const = 0;
  // Number of distinct observation ids (size of the tabular state space).
  virtual uint32_t state_count() const = 0;
  // Byte size of Observation::bytes; 0 for purely discrete observations.
  virtual size_t obs_byte_size() const = 0;
  virtual uint32_t agent_count() const { return 1; }

  virtual std::vector<Observation> reset(uint64_t seed) = 0;
  // One joint step; `actions` must have agent_count() entries, each below
  // action_count(). Stepping a finished or never-reset episode is an error.
  virtual EnvStep step(std::span<const uint32_t> actions) = 0;
};

// Parses "blackjack", "gridworld", "image80", or "traffic-junction(N)".
// Unknown names raise RuntimeApiError.
std::unique_ptr<Environment> make_environment(const std::string& name);

}  // namespace reflow::rl
