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
#include <span>
#include <vector>

#include "core/errors.hh"
#include "core/hash.hh"
#include "core/rng.hh"

namespace reflow::rl {

struct Transition {
  uint32_t state = 0;
  uint32_t action = 0;
  float reward = 0.0f;
  uint32_t next_state = 0;
  bool done = false;

  bool operator==(const Transition&) const = default;
};

inline uint64_t hash_value(const Transition& t) {
  Fnv64 h;
  h.mix_u64(t.state);
  h.mix_u64(t.action);
  h.mix_f32(t.reward);
  h.mix_u64(t.next_state);
  h.mix_u64(t.done ? 1 : 0);
  return h.digest();
}

inline uint64_t hash_value(const std::vector<Transition>& batch) {
  Fnv64 h;
  for (const Transition& t : batch) h.mix_u64(hash_value(t));
  return h.digest();
}

// Fixed-capacity ring of transitions with a moving write index. Sampling is
// uniform with replacement, or priority-weighted once priorities are set.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(size_t capacity) : capacity_(capacity) {
    if (capacity_ == 0) throw RuntimeApiError("replay: capacity must be > 0");
    items_.reserve(capacity_);
  }

  size_t capacity() const { return capacity_; }
  size_t size() const { return items_.size(); }
  size_t write_index() const { return write_; }
  uint64_t total_inserts() const { return inserts_; }
  uint64_t total_overwrites() const { return overwrites_; }

  void append(std::span<const Transition> batch) {
    for (const Transition& t : batch) append_one(t);
  }

  void append_one(const Transition& t) {
    if (items_.size() < capacity_) {
      items_.push_back(t);
    } else {
      items_[write_] = t;
      if (!priorities_.empty()) priorities_[write_] = 1.0;
      ++overwrites_;
    }
    write_ = (write_ + 1) % capacity_;
    ++inserts_;
  }

  const Transition& at(size_t i) const { return items_[i]; }

  // Per-item positive weights; enables weighted sampling. Must cover the
  // current contents exactly.
  void set_priorities(std::span<const double> weights) {
    if (weights.size() != items_.size()) {
      throw RuntimeApiError("replay: priority count != buffer size");
    }
    for (double w : weights) {
      if (!(w >= 0.0)) throw RuntimeApiError("replay: negative priority");
    }
    priorities_.assign(weights.begin(), weights.end());
  }

  void clear_priorities() { priorities_.clear(); }

  std::vector<Transition> sample(size_t batch, SplitMix64& rng) const {
    if (items_.empty()) throw RuntimeApiError("replay: sample from empty buffer");
    std::vector<Transition> out;
    out.reserve(batch);
    if (priorities_.empty()) {
      for (size_t i = 0; i < batch; ++i) {
        out.push_back(items_[rng.bounded(static_cast<uint32_t>(items_.size()))]);
      }
      return out;
    }
    double total = 0.0;
    for (double w : priorities_) total += w;
    if (total <= 0.0) throw RuntimeApiError("replay: all priorities zero");
    for (size_t i = 0; i < batch; ++i) {
      double x = rng.next_double() * total;
      size_t pick = items_.size() - 1;
      for (size_t j = 0; j < priorities_.size(); ++j) {
        x -= priorities_[j];
        if (x < 0.0) {
          pick = j;
          break;
        }
      }
      out.push_back(items_[pick]);
    }
    return out;
  }

 private:
  size_t capacity_;
  std::vector<Transition> items_;
  std::vector<double> priorities_;
  size_t write_ = 0;
  uint64_t inserts_ = 0;
  uint64_t overwrites_ = 0;
};

}  // namespace reflow::rl
