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
#include <cstring>
#include <span>
#include <vector>

#include "core/errors.hh"
#include "rl/env.hh"
#include "rl/replay.hh"

namespace reflow::actor {

// Flat little-endian wire format for the payloads the RL pipelines pass
// between actors. Every message crossing an actor boundary is encoded by the
// sender and decoded by the receiver; this serialization cost is part of
// what the baseline measures, so it must not be bypassed.
class Encoder {
 public:
  void put_u32(uint32_t v) { put_raw(&v, sizeof v); }
  void put_u64(uint64_t v) { put_raw(&v, sizeof v); }
  void put_f32(float v) { put_raw(&v, sizeof v); }
  void put_f64(double v) { put_raw(&v, sizeof v); }
  void put_u8(uint8_t v) { out_.push_back(v); }

  void put_bytes(std::span<const uint8_t> b) {
    put_u64(b.size());
    out_.insert(out_.end(), b.begin(), b.end());
  }

  void put_doubles(std::span<const double> v) {
    put_u64(v.size());
    for (double d : v) put_f64(d);
  }

  void put_transitions(std::span<const rl::Transition> batch) {
    put_u64(batch.size());
    for (const rl::Transition& t : batch) {
      put_u32(t.state);
      put_u32(t.action);
      put_f32(t.reward);
      put_u32(t.next_state);
      put_u8(t.done ? 1 : 0);
    }
  }

  void put_observations(std::span<const rl::Observation> obs) {
    put_u64(obs.size());
    for (const rl::Observation& o : obs) {
      put_u32(o.id);
      put_bytes(o.bytes);
    }
  }

  std::vector<uint8_t> take() { return std::move(out_); }
  const std::vector<uint8_t>& bytes() const { return out_; }

 private:
  void put_raw(const void* p, size_t n) {
    size_t at = out_.size();
    out_.resize(at + n);
    std::memcpy(out_.data() + at, p, n);
  }

  std::vector<uint8_t> out_;
};

class Decoder {
 public:
  explicit Decoder(std::span<const uint8_t> in) : in_(in) {}

  uint32_t get_u32() { return get_raw<uint32_t>(); }
  uint64_t get_u64() { return get_raw<uint64_t>(); }
  float get_f32() { return get_raw<float>(); }
  double get_f64() { return get_raw<double>(); }
  uint8_t get_u8() { return get_raw<uint8_t>(); }

  std::vector<uint8_t> get_bytes() {
    uint64_t n = get_u64();
    need(n);
    std::vector<uint8_t> out(in_.begin() + static_cast<ptrdiff_t>(pos_),
                             in_.begin() + static_cast<ptrdiff_t>(pos_ + n));
    pos_ += n;
    return out;
  }

  std::vector<double> get_doubles() {
    uint64_t n = get_u64();
    std::vector<double> out;
    out.reserve(n);
    for (uint64_t i = 0; i < n; ++i) out.push_back(get_f64());
    return out;
  }

  std::vector<rl::Transition> get_transitions() {
    uint64_t n = get_u64();
    std::vector<rl::Transition> out;
    out.reserve(n);
    for (uint64_t i = 0; i < n; ++i) {
      rl::Transition t;
      t.state = get_u32();
      t.action = get_u32();
      t.reward = get_f32();
      t.next_state = get_u32();
      t.done = get_u8() != 0;
      out.push_back(t);
    }
    return out;
  }

  std::vector<rl::Observation> get_observations() {
    uint64_t n = get_u64();
    std::vector<rl::Observation> out;
    out.reserve(n);
    for (uint64_t i = 0; i < n; ++i) {
      rl::Observation o;
      o.id = get_u32();
      o.bytes = get_bytes();
      out.push_back(std::move(o));
    }
    return out;
  }

  bool exhausted() const { return pos_ == in_.size(); }

 private:
  template <typename T>
  T get_raw() {
    need(sizeof(T));
    T v;
    std::memcpy(&v, in_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }

  void need(uint64_t n) const {
    if (pos_ + n > in_.size()) {
      throw RuntimeApiError("codec: truncated message");
    }
  }

  std::span<const uint8_t> in_;
  size_t pos_ = 0;
};

}  // namespace reflow::actor
