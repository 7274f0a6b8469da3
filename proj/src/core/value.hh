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
#include <utility>
#include <vector>

#include "core/hash.hh"

namespace reflow {

/// Base for values carried by events and ports. Payloads are immutable once
/// emitted; fan-out to many readers shares one instance without copying.
/// hash64() must be deterministic (bit-level), it feeds determinism traces.
class Payload {
 public:
  virtual ~Payload() = default;
  virtual uint64_t hash64() const = 0;
};

using Value = std::shared_ptr<const Payload>;

class BytesPayload final : public Payload {
 public:
  explicit BytesPayload(std::vector<uint8_t> data) : data_(std::move(data)) {}

  static Value wrap(const void* data, size_t len) {
    const auto* p = static_cast<const uint8_t*>(data);
    return std::make_shared<const BytesPayload>(std::vector<uint8_t>(p, p + len));
  }

  std::span<const uint8_t> bytes() const { return data_; }
  uint64_t hash64() const override { return fnv64(data_.data(), data_.size()); }

 private:
  std::vector<uint8_t> data_;
};

// Hash hooks for Box<T>. Domain types add overloads next to their
// definition; found by ADL.
inline uint64_t hash_value(uint64_t v) {
  Fnv64 h;
  h.mix_u64(v);
  return h.digest();
}
inline uint64_t hash_value(int64_t v) { return hash_value(static_cast<uint64_t>(v)); }
inline uint64_t hash_value(uint32_t v) { return hash_value(static_cast<uint64_t>(v)); }
inline uint64_t hash_value(int32_t v) { return hash_value(static_cast<uint64_t>(static_cast<int64_t>(v))); }
inline uint64_t hash_value(double v) {
  Fnv64 h;
  h.mix_f64(v);
  return h.digest();
}
inline uint64_t hash_value(const std::vector<double>& v) {
  Fnv64 h;
  for (double d : v) h.mix_f64(d);
  return h.digest();
}
inline uint64_t hash_value(const std::vector<uint8_t>& v) {
  return fnv64(v.data(), v.size());
}
inline uint64_t hash_value(const std::vector<uint32_t>& v) {
  Fnv64 h;
  for (uint32_t x : v) h.mix_u64(x);
  return h.digest();
}

/// Wraps an arbitrary host value as a payload. T needs a hash_value(T)
/// overload visible at instantiation.
template <typename T>
class Box final : public Payload {
 public:
  explicit Box(T v) : value_(std::move(v)) {}

  static Value make(T v) { return std::make_shared<const Box<T>>(std::move(v)); }

  const T& get() const { return value_; }
  uint64_t hash64() const override { return hash_value(value_); }

 private:
  T value_;
};

/// Downcast helper for reaction bodies that know their port types.
template <typename T>
const T& unbox(const Value& v) {
  return static_cast<const Box<T>&>(*v).get();
}

inline std::span<const uint8_t> value_bytes(const Value& v) {
  return static_cast<const BytesPayload&>(*v).bytes();
}

}  // namespace reflow
