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
#include "core/event_queue.hh"

#include <vector>

#include "core/rng.hh"
#include "doctest.h"

using namespace reflow;

namespace {
Value val(uint64_t x) { return Box<uint64_t>::make(x); }
}  // namespace

TEST_CASE("pop releases all events at the minimal tag together") {
  EventQueue q;
  q.push(Tag{10, 0}, {TriggerKey::Kind::action, 1}, val(1));
  q.push(Tag{5, 0}, {TriggerKey::Kind::action, 2}, val(2));
  q.push(Tag{5, 0}, {TriggerKey::Kind::timer, 3}, nullptr);
  q.push(Tag{5, 1}, {TriggerKey::Kind::action, 4}, val(4));

  Tag t{};
  auto evs = q.pop_tag(t);
  CHECK(t == Tag{5, 0});
  CHECK(evs.size() == 2);
  evs = q.pop_tag(t);
  CHECK(t == Tag{5, 1});
  CHECK(evs.size() == 1);
  evs = q.pop_tag(t);
  CHECK(t == Tag{10, 0});
  CHECK(q.empty());
}

TEST_CASE("same trigger at the same tag replaces the value") {
  EventQueue q;
  CHECK_FALSE(q.push(Tag{7, 0}, {TriggerKey::Kind::action, 9}, val(1)));
  CHECK(q.push(Tag{7, 0}, {TriggerKey::Kind::action, 9}, val(2)));
  CHECK(q.size() == 1);
  Tag t{};
  auto evs = q.pop_tag(t);
  REQUIRE(evs.size() == 1);
  CHECK(unbox<uint64_t>(evs[0].value) == 2);
}

TEST_CASE("distinct triggers at one tag do not replace each other") {
  EventQueue q;
  CHECK_FALSE(q.push(Tag{7, 0}, {TriggerKey::Kind::action, 1}, val(1)));
  CHECK_FALSE(q.push(Tag{7, 0}, {TriggerKey::Kind::port, 1}, val(2)));
  CHECK_FALSE(q.push(Tag{7, 0}, {TriggerKey::Kind::action, 2}, val(3)));
  CHECK(q.size() == 3);
}

TEST_CASE("pop order is non-decreasing over random pushes") {
  EventQueue q;
  SplitMix64 rng(0x99);
  size_t pushed = 0;
  for (int i = 0; i < 500; ++i) {
    Tag t{rng.bounded(50), static_cast<uint32_t>(rng.bounded(3))};
    if (!q.push(t, {TriggerKey::Kind::action, static_cast<uint32_t>(
                                                  rng.bounded(40))},
                val(i))) {
      ++pushed;
    }
  }
  CHECK(q.size() == pushed);
  Tag prev{0, 0};
  bool first = true;
  size_t popped = 0;
  while (!q.empty()) {
    Tag t{};
    auto evs = q.pop_tag(t);
    popped += evs.size();
    if (!first) CHECK(prev < t);
    prev = t;
    first = false;
  }
  CHECK(popped == pushed);
}

TEST_CASE("count_after splits pending from beyond-stop events") {
  EventQueue q;
  q.push(Tag{5, 0}, {TriggerKey::Kind::action, 1}, nullptr);
  q.push(Tag{5, 1}, {TriggerKey::Kind::action, 2}, nullptr);
  q.push(Tag{9, 0}, {TriggerKey::Kind::action, 3}, nullptr);
  CHECK(q.count_after(Tag{5, 0}) == 2);
  CHECK(q.count_after(Tag{5, 1}) == 1);
  CHECK(q.count_after(Tag{9, 0}) == 0);
  CHECK(q.count_after(Tag{0, 0}) == 3);
}
