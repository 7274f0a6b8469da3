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
#include <atomic>
#include <chrono>
#include <numeric>
#include <thread>

#include "doctest.h"

#include "actor/actor_system.hh"
#include "actor/codec.hh"
#include "core/errors.hh"

using namespace reflow;
using namespace reflow::actor;

namespace {

constexpr uint64_t kSecond = 1000ull * 1000 * 1000;

std::vector<uint8_t> bytes_of(std::initializer_list<uint8_t> v) { return v; }

}  // namespace

TEST_CASE("request-reply echoes the payload back") {
  ActorSystem sys;
  ActorId echo = sys.spawn([](ActorContext& ctx, Message& m) {
    ctx.reply(m, m.bytes);
  });
  auto payload = bytes_of({1, 2, 3, 4});
  uint64_t req = sys.send_request(echo, payload);
  CHECK(sys.await_reply(req, kSecond) == payload);
  sys.shutdown();
}

TEST_CASE("spawning sixteen actors yields distinct live refs") {
  ActorSystem sys;
  std::vector<ActorId> refs;
  for (int i = 0; i < 16; ++i) {
    refs.push_back(sys.spawn([](ActorContext& ctx, Message& m) {
      ctx.reply(m, std::vector<uint8_t>{static_cast<uint8_t>(m.bytes[0] + 1)});
    }));
  }
  CHECK(sys.actor_count() == 16);
  for (size_t i = 0; i < refs.size(); ++i) {
    for (size_t j = i + 1; j < refs.size(); ++j) CHECK(refs[i] != refs[j]);
    CHECK_FALSE(sys.is_dead(refs[i]));
  }
  auto replies = sys.broadcast_gather(refs, bytes_of({7}));
  REQUIRE(replies.size() == 16);
  for (const auto& r : replies) CHECK(r == bytes_of({8}));
  sys.shutdown();
}

TEST_CASE("messages from one sender arrive in send order") {
  ActorSystem sys;
  std::vector<uint32_t> seen;
  ActorId sink = sys.spawn([&seen](ActorContext& ctx, Message& m) {
    Decoder d(m.bytes);
    uint32_t v = d.get_u32();
    if (v == 0xffffffff) {
      ctx.reply(m, {});
      return;
    }
    seen.push_back(v);
  });
  for (uint32_t i = 0; i < 500; ++i) {
    Encoder e;
    e.put_u32(i);
    sys.send(sink, e.bytes());
  }
  Encoder fin;
  fin.put_u32(0xffffffff);
  uint64_t req = sys.send_request(sink, fin.bytes());
  (void)sys.await_reply(req, 10 * kSecond);

  REQUIRE(seen.size() == 500);
  for (uint32_t i = 0; i < 500; ++i) CHECK(seen[i] == i);
  sys.shutdown();
}

TEST_CASE("payloads are copied on send: mutation after send is invisible") {
  ActorSystem sys;
  std::vector<uint8_t> got;
  ActorId sink = sys.spawn([&got](ActorContext& ctx, Message& m) {
    got = m.bytes;
    ctx.reply(m, m.bytes);
  });

  std::vector<uint8_t> payload = {10, 20, 30};
  uint64_t req = sys.send_request(sink, payload);
  payload[0] = 99;  // must not leak into the delivered message
  auto reply = sys.await_reply(req, kSecond);
  CHECK(got == bytes_of({10, 20, 30}));
  CHECK(reply == bytes_of({10, 20, 30}));

  // Replies are fresh copies too: mutating the returned buffer and asking
  // again yields the original data.
  reply[0] = 42;
  uint64_t req2 = sys.send_request(sink, bytes_of({10, 20, 30}));
  CHECK(sys.await_reply(req2, kSecond) == bytes_of({10, 20, 30}));
  sys.shutdown();
}

TEST_CASE("a dead actor fails sends, requests, and gathers") {
  ActorSystem sys;
  ActorId doomed = sys.spawn([](ActorContext&, Message&) {
    throw std::runtime_error("boom");
  });
  ActorId healthy = sys.spawn([](ActorContext& ctx, Message& m) {
    ctx.reply(m, m.bytes);
  });

  uint64_t req = sys.send_request(doomed, bytes_of({1}));
  CHECK_THROWS_AS((void)sys.await_reply(req, 2 * kSecond), ActorTimeoutError);
  CHECK(sys.is_dead(doomed));

  CHECK_THROWS_AS(sys.send(doomed, bytes_of({1})), ActorDeadError);

  std::vector<ActorId> refs{healthy, doomed};
  CHECK_THROWS_AS((void)sys.broadcast_gather(refs, bytes_of({1}), 2 * kSecond),
                  ActorTimeoutError);
  sys.shutdown();
}

TEST_CASE("await with a tiny timeout raises a timeout error") {
  ActorSystem sys;
  ActorId slow = sys.spawn([](ActorContext& ctx, Message& m) {
    std::this_thread::sleep_for(std::chrono::milliseconds(200));
    ctx.reply(m, m.bytes);
  });
  uint64_t req = sys.send_request(slow, bytes_of({1}));
  CHECK_THROWS_AS((void)sys.await_reply(req, 1000), ActorTimeoutError);
  sys.shutdown();
}

TEST_CASE("broadcast gather returns replies in ref order") {
  ActorSystem sys;
  std::vector<ActorId> refs;
  for (uint8_t i = 0; i < 8; ++i) {
    refs.push_back(sys.spawn([i](ActorContext& ctx, Message& m) {
      // Stagger replies so later actors answer first.
      std::this_thread::sleep_for(std::chrono::milliseconds((8 - i) * 5));
      ctx.reply(m, std::vector<uint8_t>{i});
    }));
  }
  auto replies = sys.broadcast_gather(refs, bytes_of({0}), 10 * kSecond);
  REQUIRE(replies.size() == 8);
  for (uint8_t i = 0; i < 8; ++i) CHECK(replies[i] == std::vector<uint8_t>{i});
  sys.shutdown();
}

TEST_CASE("bounded mailboxes exert backpressure instead of dropping") {
  ActorSystem sys;
  std::atomic<int> processed{0};
  std::atomic<bool> release{false};
  ActorId sink = sys.spawn(
      [&](ActorContext&, Message&) {
        while (!release.load()) std::this_thread::sleep_for(
            std::chrono::milliseconds(1));
        processed.fetch_add(1);
      },
      ActorOptions{.mailbox_capacity = 4});

  std::atomic<int> sent{0};
  std::thread producer([&] {
    for (int i = 0; i < 64; ++i) {
      sys.send(sink, bytes_of({1}));
      sent.fetch_add(1);
    }
  });

  // With a capacity-4 mailbox and a blocked consumer the producer cannot get
  // far ahead: at most 4 queued + 1 in processing + 1 in enqueue.
  std::this_thread::sleep_for(std::chrono::milliseconds(100));
  CHECK(sent.load() <= 6);

  release.store(true);
  producer.join();
  sys.shutdown();
  CHECK(processed.load() == 64);
  CHECK(sent.load() == 64);
}

TEST_CASE("in-flight byte accounting peaks at roughly twice the payload") {
  // One round trip of a 4 MiB payload through an echo actor: the request
  // bytes and the reply bytes both exist while the reply sits unclaimed, so
  // the high-water mark must reach at least the payload size and, with
  // several actors echoing concurrently, at least 2x one payload.
  constexpr size_t kPayload = 4ull << 20;
  ActorSystem sys;
  std::vector<ActorId> refs;
  for (int i = 0; i < 16; ++i) {
    refs.push_back(sys.spawn([](ActorContext& ctx, Message& m) {
      ctx.reply(m, m.bytes);
    }));
  }
  std::vector<uint8_t> payload(kPayload, 0xab);
  auto replies = sys.broadcast_gather(refs, payload, 30 * kSecond);
  REQUIRE(replies.size() == 16);
  for (const auto& r : replies) CHECK(r.size() == kPayload);
  CHECK(sys.high_water_bytes() >= 2 * kPayload);
  // After all replies are claimed nothing should linger.
  CHECK(sys.bytes_in_flight() == 0);
  sys.shutdown();
}

TEST_CASE("double reply to one request is an error") {
  ActorSystem sys;
  std::atomic<bool> second_failed{false};
  ActorId dup = sys.spawn([&](ActorContext& ctx, Message& m) {
    ctx.reply(m, m.bytes);
    try {
      ctx.reply(m, m.bytes);
    } catch (const RuntimeApiError&) {
      second_failed.store(true);
    }
  });
  uint64_t req = sys.send_request(dup, bytes_of({5}));
  CHECK(sys.await_reply(req, kSecond) == bytes_of({5}));
  // Give the behavior time to attempt the duplicate.
  for (int i = 0; i < 100 && !second_failed.load(); ++i) {
    std::this_thread::sleep_for(std::chrono::milliseconds(5));
  }
  CHECK(second_failed.load());
  sys.shutdown();
}

TEST_CASE("actor-to-actor sends work and carry the sender id") {
  ActorSystem sys;
  std::atomic<uint64_t> relayed_from{0};
  ActorId sink = sys.spawn([&](ActorContext&, Message& m) {
    relayed_from.store(m.sender);
  });
  ActorId relay = sys.spawn([sink](ActorContext& ctx, Message& m) {
    ctx.send(sink, m.bytes);
  });
  sys.send(relay, bytes_of({9}));
  for (int i = 0; i < 200 && relayed_from.load() == 0; ++i) {
    std::this_thread::sleep_for(std::chrono::milliseconds(2));
  }
  CHECK(relayed_from.load() == relay);
  sys.shutdown();
}

TEST_CASE("shutdown drains mailboxes and is idempotent") {
  ActorSystem sys;
  std::atomic<int> handled{0};
  ActorId slow = sys.spawn([&](ActorContext&, Message&) {
    std::this_thread::sleep_for(std::chrono::milliseconds(2));
    handled.fetch_add(1);
  });
  for (int i = 0; i < 20; ++i) sys.send(slow, bytes_of({1}));
  sys.shutdown();
  CHECK(handled.load() == 20);
  sys.shutdown();  // second call is a no-op
  CHECK_THROWS_AS(sys.send(slow, bytes_of({1})), RuntimeApiError);
}

TEST_CASE("codec round-trips every scalar and container shape") {
  Encoder e;
  e.put_u8(7);
  e.put_u32(123456);
  e.put_u64(0xdeadbeefcafef00dull);
  e.put_f32(1.5f);
  e.put_f64(-2.25);
  e.put_bytes(bytes_of({9, 8, 7}));
  e.put_doubles(std::vector<double>{0.5, -0.5});
  std::vector<rl::Transition> ts{{1, 2, 3.5f, 4, true}, {5, 6, -1.0f, 7, false}};
  e.put_transitions(ts);
  std::vector<rl::Observation> obs{{3, {1, 2}}, {4, {}}};
  e.put_observations(obs);

  Decoder d(e.bytes());
  CHECK(d.get_u8() == 7);
  CHECK(d.get_u32() == 123456);
  CHECK(d.get_u64() == 0xdeadbeefcafef00dull);
  CHECK(d.get_f32() == 1.5f);
  CHECK(d.get_f64() == -2.25);
  CHECK(d.get_bytes() == bytes_of({9, 8, 7}));
  CHECK(d.get_doubles() == std::vector<double>{0.5, -0.5});
  CHECK(d.get_transitions() == ts);
  auto obs2 = d.get_observations();
  REQUIRE(obs2.size() == 2);
  CHECK(obs2[0].id == 3);
  CHECK(obs2[0].bytes == bytes_of({1, 2}));
  CHECK(obs2[1].id == 4);
  CHECK(d.exhausted());

  // Truncated input is a hard error, not garbage data.
  auto raw = e.bytes();
  std::vector<uint8_t> cut(raw.begin(), raw.begin() + 5);
  Decoder bad(cut);
  (void)bad.get_u8();
  CHECK_THROWS_AS((void)bad.get_u64(), RuntimeApiError);
}
