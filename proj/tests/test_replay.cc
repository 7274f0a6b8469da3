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
#include <algorithm>
#include <set>

#include "doctest.h"

#include "core/errors.hh"
#include "rl/replay.hh"

using namespace reflow;
using namespace reflow::rl;

namespace {

Transition mk(uint32_t tagval) {
  return Transition{tagval, tagval % 4, static_cast<float>(tagval) * 0.5f,
                    tagval + 1, false};
}

std::set<uint32_t> contents(const ReplayBuffer& b) {
  std::set<uint32_t> out;
  for (size_t i = 0; i < b.size(); ++i) out.insert(b.at(i).state);
  return out;
}

}  // namespace

TEST_CASE("ring overwrite keeps the newest items") {
  ReplayBuffer buf(4);
  for (uint32_t k = 1; k <= 6; ++k) buf.append_one(mk(k));
  CHECK(buf.size() == 4);
  CHECK(contents(buf) == std::set<uint32_t>{3, 4, 5, 6});
  CHECK(buf.write_index() == 6 % 4);
  CHECK(buf.total_inserts() == 6);
  CHECK(buf.total_overwrites() == 2);
}

TEST_CASE("append of an empty batch changes nothing") {
  ReplayBuffer buf(4);
  buf.append_one(mk(1));
  buf.append(std::span<const Transition>{});
  CHECK(buf.size() == 1);
  CHECK(buf.write_index() == 1);
  CHECK(buf.total_inserts() == 1);
}

TEST_CASE("wrap pointer advances modulo capacity") {
  ReplayBuffer buf(5);
  size_t expected = 0;
  SplitMix64 rng(3);
  for (int round = 0; round < 200; ++round) {
    uint32_t n = rng.bounded(7);
    std::vector<Transition> batch;
    for (uint32_t i = 0; i < n; ++i) batch.push_back(mk(i));
    buf.append(batch);
    expected = (expected + n) % 5;
    CHECK(buf.write_index() == expected);
  }
}

TEST_CASE("insert and overwrite counters conserve buffer size") {
  // Invariant: inserts - overwrites == size <= capacity, under any mix of
  // appends.
  SplitMix64 rng(17);
  ReplayBuffer buf(32);
  for (int round = 0; round < 500; ++round) {
    uint32_t n = rng.bounded(9);
    for (uint32_t i = 0; i < n; ++i) buf.append_one(mk(rng.bounded(1000)));
    CHECK(buf.total_inserts() - buf.total_overwrites() == buf.size());
    CHECK(buf.size() <= buf.capacity());
  }
}

TEST_CASE("sampling a singleton buffer repeats the item") {
  ReplayBuffer buf(8);
  buf.append_one(mk(42));
  SplitMix64 rng(1);
  auto got = buf.sample(3, rng);
  REQUIRE(got.size() == 3);
  for (const auto& t : got) CHECK(t == mk(42));
}

TEST_CASE("uniform sampling frequencies stay within 3 sigma") {
  ReplayBuffer buf(10);
  for (uint32_t k = 0; k < 10; ++k) buf.append_one(mk(k));
  SplitMix64 rng(2024);
  constexpr int kDraws = 100000;
  std::vector<int> count(10, 0);
  auto got = buf.sample(kDraws, rng);
  for (const auto& t : got) ++count[t.state];
  // p = 1/10 per item: expected 10000, sigma = sqrt(N p (1-p)) ~ 94.9.
  for (int c : count) {
    CHECK(c > 10000 - 285);
    CHECK(c < 10000 + 285);
  }
}

TEST_CASE("degenerate priorities select only the weighted item") {
  ReplayBuffer buf(6);
  for (uint32_t k = 0; k < 6; ++k) buf.append_one(mk(k));
  std::vector<double> w(6, 0.0);
  w[0] = 1.0;
  buf.set_priorities(w);
  SplitMix64 rng(5);
  for (const auto& t : buf.sample(200, rng)) CHECK(t.state == 0);

  // Dropping priorities restores uniform behaviour.
  buf.clear_priorities();
  std::set<uint32_t> seen;
  for (const auto& t : buf.sample(200, rng)) seen.insert(t.state);
  CHECK(seen.size() == 6);
}

TEST_CASE("weighted sampling tracks the weight ratio") {
  ReplayBuffer buf(2);
  buf.append_one(mk(0));
  buf.append_one(mk(1));
  buf.set_priorities(std::vector<double>{3.0, 1.0});
  SplitMix64 rng(7);
  int heavy = 0;
  constexpr int kDraws = 40000;
  for (const auto& t : buf.sample(kDraws, rng)) heavy += t.state == 0;
  // Expected 30000 of 40000; sigma = sqrt(N * .75 * .25) ~ 86.6.
  CHECK(heavy > 30000 - 300);
  CHECK(heavy < 30000 + 300);
}

TEST_CASE("overwriting a prioritized slot resets its weight") {
  ReplayBuffer buf(2);
  buf.append_one(mk(10));
  buf.append_one(mk(11));
  buf.set_priorities(std::vector<double>{0.0, 1.0});
  buf.append_one(mk(12));  // lands on slot 0, weight back to 1.0
  SplitMix64 rng(9);
  std::set<uint32_t> seen;
  for (const auto& t : buf.sample(400, rng)) seen.insert(t.state);
  CHECK(seen == std::set<uint32_t>{11, 12});
}

TEST_CASE("replay misuse is rejected") {
  CHECK_THROWS_AS(ReplayBuffer(0), RuntimeApiError);

  ReplayBuffer buf(4);
  SplitMix64 rng(1);
  CHECK_THROWS_AS((void)buf.sample(1, rng), RuntimeApiError);

  buf.append_one(mk(1));
  CHECK_THROWS_AS(buf.set_priorities(std::vector<double>{1.0, 2.0}),
                  RuntimeApiError);
  CHECK_THROWS_AS(buf.set_priorities(std::vector<double>{-1.0}),
                  RuntimeApiError);
  buf.set_priorities(std::vector<double>{0.0});
  CHECK_THROWS_AS((void)buf.sample(1, rng), RuntimeApiError);
}

TEST_CASE("transition hashing distinguishes every field") {
  Transition base{1, 2, 3.0f, 4, false};
  uint64_t h = hash_value(base);
  Transition t = base;
  t.state = 9;
  CHECK(hash_value(t) != h);
  t = base;
  t.action = 3;
  CHECK(hash_value(t) != h);
  t = base;
  t.reward = 3.5f;
  CHECK(hash_value(t) != h);
  t = base;
  t.next_state = 0;
  CHECK(hash_value(t) != h);
  t = base;
  t.done = true;
  CHECK(hash_value(t) != h);

  std::vector<Transition> batch{base, t};
  std::vector<Transition> swapped{t, base};
  CHECK(hash_value(batch) != hash_value(swapped));
}
