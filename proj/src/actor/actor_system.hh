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

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <future>
#include <memory>
#include <mutex>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

namespace reflow::actor {

using ActorId = uint64_t;

// A reply did not arrive in time, including the case where the addressed
// actor died before (or instead of) replying.
class ActorTimeoutError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Fire-and-forget send addressed to an actor already marked dead.
class ActorDeadError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Message {
  std::vector<uint8_t> bytes;
  uint64_t request_id = 0;  // nonzero: sender waits for exactly one reply
  ActorId sender = 0;       // 0 when sent from outside any actor
};

class ActorSystem;

// Handed to a behavior for each message it processes.
class ActorContext {
 public:
  ActorId self() const { return self_; }
  ActorSystem& system() { return *system_; }

  // Deep-copies `bytes` into the reply slot of `msg`'s request.
  void reply(const Message& msg, std::span<const uint8_t> bytes);
  void send(ActorId to, std::span<const uint8_t> bytes);

 private:
  friend class ActorSystem;
  ActorContext(ActorSystem* sys, ActorId self) : system_(sys), self_(self) {}

  ActorSystem* system_;
  ActorId self_;
};

using Behavior = std::function<void(ActorContext&, Message&)>;

struct ActorOptions {
  size_t mailbox_capacity = 1024;
};

// Minimal mailbox-actor runtime: one thread per actor, bounded FIFO mailbox,
// payloads deep-copied on send and on reply. Messages from one sender arrive
// in send order; interleaving across senders is unspecified. This is the
// coordination-cost baseline the reactor runtime is measured against, so the
// copy behavior is deliberate, not an optimization target.
class ActorSystem {
 public:
  ActorSystem() = default;
  ~ActorSystem();

  ActorSystem(const ActorSystem&) = delete;
  ActorSystem& operator=(const ActorSystem&) = delete;

  ActorId spawn(Behavior behavior, ActorOptions opts = {});

  // Copies `bytes` into the target mailbox; blocks while the mailbox is
  // full. Throws ActorDeadError if the target has died.
  void send(ActorId to, std::span<const uint8_t> bytes);

  // Like send, but registers a reply slot the behavior can fulfill with
  // ActorContext::reply. Returns the request id to await.
  uint64_t send_request(ActorId to, std::span<const uint8_t> bytes);
  std::vector<uint8_t> await_reply(uint64_t request_id, uint64_t timeout_ns);

  // Copy-sends `payload` to every ref and collects one reply per ref, in ref
  // order. Throws ActorTimeoutError when any reply fails to arrive.
  std::vector<std::vector<uint8_t>> broadcast_gather(
      std::span<const ActorId> refs, std::span<const uint8_t> payload,
      uint64_t timeout_ns = 30ull * 1000 * 1000 * 1000);

  bool is_dead(ActorId id) const;
  size_t actor_count() const;

  // Stops accepting sends, lets each actor drain its mailbox, joins threads.
  void shutdown();

  // Bytes sitting in mailboxes or unclaimed reply slots right now / at peak.
  size_t bytes_in_flight() const { return bytes_in_flight_.load(); }
  size_t high_water_bytes() const { return high_water_bytes_.load(); }

 private:
  friend class ActorContext;

  struct Actor {
    Behavior behavior;
    size_t capacity = 1024;
    std::mutex mx;
    std::condition_variable can_send;
    std::condition_variable can_recv;
    std::deque<Message> mailbox;
    bool dead = false;
    bool stopping = false;
    std::jthread thread;
  };

  struct ReplySlot {
    std::promise<std::vector<uint8_t>> promise;
    std::future<std::vector<uint8_t>> future;
    size_t bytes_held = 0;
  };

  void actor_main(Actor* a, ActorId id);
  void enqueue(ActorId to, Message&& m, size_t payload_bytes);
  void fail_request(uint64_t request_id, const std::string& why);
  void fulfill_request(uint64_t request_id, std::span<const uint8_t> bytes);
  Actor* actor_for(ActorId id) const;
  void track_bytes(int64_t delta);

  mutable std::mutex registry_mx_;
  std::vector<std::unique_ptr<Actor>> actors_;
  bool shutting_down_ = false;

  std::mutex replies_mx_;
  std::unordered_map<uint64_t, ReplySlot> replies_;
  uint64_t next_request_ = 1;

  std::atomic<size_t> bytes_in_flight_{0};
  std::atomic<size_t> high_water_bytes_{0};
};

}  // namespace reflow::actor
