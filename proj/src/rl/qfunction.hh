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
#include <vector>

#include "rl/replay.hh"

namespace reflow::rl {

struct QUpdateConfig {
  double alpha = 0.1;
  double gamma = 0.9;
  // Updates between target refreshes; 1 keeps the target always current.
  uint32_t sync_every = 1;
};

// Action-value estimator with a periodically synced target copy. Parameters
// travel between pipeline stages as plain double vectors.
class QFunction {
 public:
  virtual ~QFunction() = default;

  virtual uint32_t action_count() const = 0;
  virtual double value(uint32_t state, uint32_t action) const = 0;
  virtual uint32_t greedy_action(uint32_t state) const = 0;

  // One Q-learning step per transition, in batch order. Target copy refreshes
  // every sync_every updates, counting across calls.
  virtual void update_batch(std::span<const Transition> batch) = 0;

  virtual std::vector<double> snapshot_params() const = 0;
  virtual void load_params(std::span<const double> params) = 0;
  virtual uint64_t param_hash() const = 0;
  virtual uint64_t updates_applied() const = 0;
};

std::unique_ptr<QFunction> make_tabular_q(uint32_t states, uint32_t actions,
                                          const QUpdateConfig& cfg);
// Linear estimator over byte-image features (one weight row per action plus
// bias). Features come from the deterministic latent rendering.
std::unique_ptr<QFunction> make_linear_q(uint32_t latents, uint32_t actions,
                                         const QUpdateConfig& cfg);

}  // namespace reflow::rl
