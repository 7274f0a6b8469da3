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

#include <chrono>
#include <compare>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

namespace reflow {

/// A superdense logical time point: nanoseconds since program start plus a
/// microstep index. Tags are totally ordered lexicographically; every event
/// in a program carries one and all execution follows tag order.
struct Tag {
  uint64_t time_ns = 0;
  uint32_t microstep = 0;

  friend constexpr auto operator<=>(const Tag&, const Tag&) = default;

  /// Trace form, e.g. "5000000:1".
  std::string to_string() const {
    return std::to_string(time_ns) + ":" + std::to_string(microstep);
  }
};

/// Thrown when tag arithmetic would exceed the representable program
/// lifetime (time field) or the microstep width.
class TagOverflowError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A delay applied to a tag. Zero is special: it advances the microstep
/// instead of time, so "zero delay" still yields a strictly later tag.
class LogicalDelay {
 public:
  constexpr LogicalDelay() = default;

  static constexpr LogicalDelay zero() { return LogicalDelay{}; }
  static constexpr LogicalDelay of_nanos(uint64_t ns) { return LogicalDelay{ns}; }
  static LogicalDelay of(std::chrono::nanoseconds d) {
    return LogicalDelay{static_cast<uint64_t>(d.count())};
  }

  constexpr uint64_t nanos() const { return nanos_; }
  constexpr bool is_zero() const { return nanos_ == 0; }

  friend constexpr LogicalDelay operator+(LogicalDelay a, LogicalDelay b) {
    uint64_t sum = a.nanos_ + b.nanos_;
    if (sum < a.nanos_) throw TagOverflowError("delay sum exceeds program lifetime");
    return LogicalDelay{sum};
  }

 private:
  constexpr explicit LogicalDelay(uint64_t ns) : nanos_(ns) {}
  uint64_t nanos_ = 0;
};

enum class TagOrder { less, equal, greater };

constexpr TagOrder tag_compare(const Tag& a, const Tag& b) {
  if (a == b) return TagOrder::equal;
  return a < b ? TagOrder::less : TagOrder::greater;
}

/// Tag reached after applying a delay: a strictly positive delay moves time
/// forward and resets the microstep; a zero delay bumps the microstep.
inline Tag tag_after_delay(const Tag& t, LogicalDelay d) {
  if (d.is_zero()) {
    if (t.microstep == std::numeric_limits<uint32_t>::max()) {
      throw TagOverflowError("microstep overflow at " + t.to_string() +
                             " (runaway zero-delay loop?)");
    }
    return Tag{t.time_ns, t.microstep + 1};
  }
  uint64_t next = t.time_ns + d.nanos();
  if (next < t.time_ns) {
    throw TagOverflowError("logical time overflow: program lifetime exceeded");
  }
  return Tag{next, 0};
}

/// Monotone wall-clock readings in nanoseconds relative to an origin fixed
/// at construction. Safe to read from any thread.
class PhysicalClock {
 public:
  PhysicalClock() : origin_(std::chrono::steady_clock::now()) {}

  uint64_t now_ns() const {
    auto d = std::chrono::steady_clock::now() - origin_;
    return static_cast<uint64_t>(
        std::chrono::duration_cast<std::chrono::nanoseconds>(d).count());
  }

 private:
  std::chrono::steady_clock::time_point origin_;
};

}  // namespace reflow
