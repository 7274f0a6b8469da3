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
#include "core/tag.hh"

#include <chrono>
#include <cstdint>
#include <limits>
#include <thread>
#include <vector>

#include "core/rng.hh"
#include "doctest.h"

using namespace reflow;

namespace {
constexpr uint64_t kMs = 1'000'000;
}

TEST_CASE("tag_compare is lexicographic on (time, microstep)") {
  CHECK(tag_compare(Tag{5 * kMs, 0}, Tag{5 * kMs, 1}) == TagOrder::less);
  CHECK(tag_compare(Tag{5 * kMs, 1}, Tag{6 * kMs, 0}) == TagOrder::less);
  CHECK(tag_compare(Tag{7 * kMs, 2}, Tag{7 * kMs, 2}) == TagOrder::equal);
  CHECK(tag_compare(Tag{6 * kMs, 0}, Tag{5 * kMs, 9}) == TagOrder::greater);
}

TEST_CASE("tag_after_delay applies the additive and microstep rules") {
  CHECK(tag_after_delay(Tag{20 * kMs, 0}, LogicalDelay::of_nanos(10 * kMs)) ==
        Tag{30 * kMs, 0});
  CHECK(tag_after_delay(Tag{20 * kMs, 3}, LogicalDelay::zero()) ==
        Tag{20 * kMs, 4});
  CHECK(tag_after_delay(Tag{0, 0}, LogicalDelay::zero()) == Tag{0, 1});
  // A strictly positive delay always resets the microstep.
  CHECK(tag_after_delay(Tag{20 * kMs, 7}, LogicalDelay::of_nanos(1)) ==
        Tag{20 * kMs + 1, 0});
}

TEST_CASE("tag_after_delay overflow reports program-lifetime exceeded") {
  Tag near_end{std::numeric_limits<uint64_t>::max() - 5, 0};
  CHECK_THROWS_AS(tag_after_delay(near_end, LogicalDelay::of_nanos(10)),
                  TagOverflowError);
  Tag max_micro{5, std::numeric_limits<uint32_t>::max()};
  CHECK_THROWS_AS(tag_after_delay(max_micro, LogicalDelay::zero()),
                  TagOverflowError);
}

TEST_CASE("LogicalDelay kind tracks the zero/positive split") {
  CHECK(LogicalDelay::zero().is_zero());
  CHECK(LogicalDelay::of_nanos(0).is_zero());
  CHECK_FALSE(LogicalDelay::of_nanos(1).is_zero());
  CHECK((LogicalDelay::of_nanos(2) + LogicalDelay::of_nanos(3)).nanos() == 5);
  CHECK((LogicalDelay::zero() + LogicalDelay::zero()).is_zero());
  CHECK_THROWS_AS(LogicalDelay::of_nanos(std::numeric_limits<uint64_t>::max()) +
                      LogicalDelay::of_nanos(1),
                  TagOverflowError);
}

TEST_CASE("tag order is transitive and antisymmetric on random tags") {
  SplitMix64 rng(0x7a91);
  std::vector<Tag> tags;
  for (int i = 0; i < 64; ++i) {
    tags.push_back(Tag{rng.bounded(4), static_cast<uint32_t>(rng.bounded(4))});
  }
  for (const Tag& a : tags) {
    for (const Tag& b : tags) {
      if (a < b) CHECK_FALSE(b < a);
      if (a == b) CHECK(tag_compare(a, b) == TagOrder::equal);
      for (const Tag& c : tags) {
        if (a < b && b < c) CHECK(a < c);
      }
    }
  }
}

TEST_CASE("delay application properties over random inputs") {
  SplitMix64 rng(0xbee5);
  for (int i = 0; i < 1000; ++i) {
    Tag t{rng.bounded(1'000'000'000), static_cast<uint32_t>(rng.bounded(100))};
    uint64_t d = 1 + rng.bounded(1'000'000);
    Tag strict = tag_after_delay(t, LogicalDelay::of_nanos(d));
    CHECK(t < strict);
    CHECK(strict.microstep == 0);
    CHECK(strict.time_ns == t.time_ns + d);
    Tag micro = tag_after_delay(t, LogicalDelay::zero());
    CHECK(t < micro);
    CHECK(micro.time_ns == t.time_ns);
    CHECK(micro.microstep == t.microstep + 1);
  }
}

TEST_CASE("tags serialize as time:microstep") {
  CHECK(Tag{5'000'000, 1}.to_string() == "5000000:1");
  CHECK(Tag{0, 0}.to_string() == "0:0");
}

TEST_CASE("physical clock is monotone and advances while sleeping") {
  PhysicalClock clock;
  uint64_t a = clock.now_ns();
  uint64_t b = clock.now_ns();
  CHECK(b >= a);
  std::this_thread::sleep_for(std::chrono::milliseconds(5));
  uint64_t c = clock.now_ns();
  // Sleep guarantees at least the requested duration on this platform.
  CHECK(c - a >= 5 * kMs);
}
