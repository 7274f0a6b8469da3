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
#include "actor/actor_system.hh"

#include <chrono>

#include "core/errors.hh"
#include "core/log.hh"

namespace reflow::actor {

void ActorContext::reply(const Message& msg, std::span<const uint8_t> bytes) {
  if (msg.request_id == 0) {
    throw RuntimeApiError("actor: reply to a message that expects none");
  }
  system_->fulfill_request(msg.request_id, bytes);
}

void ActorContext::send(ActorId to, std::span<const uint8_t> bytes) {
  Message m;
  m.bytes.assign(bytes.begin(), bytes.end());
  m.sender = self_;
  system_->enqueue(to, std::move(m), bytes.size());
}

ActorSystem::~ActorSystem() {
  try {
    shutdown();
  } catch (...) {
    // Destructor must not throw; threads are joined by jthread regardless.
  }
}

ActorId ActorSystem::spawn(Behavior behavior, ActorOptions opts) {
  std::lock_guard lk(registry_mx_);
  if (shutting_down_) throw RuntimeApiError("actor: spawn during shutdown");
  if (opts.mailbox_capacity == 0) {
    throw RuntimeApiError("actor: mailbox capacity must be > 0");
  }
  auto a = std::make_unique<Actor>();
  a->behavior = std::move(behavior);
  a->capacity = opts.mailbox_capacity;
  Actor* raw = a.get();
  actors_.push_back(std::move(a));
  ActorId id = actors_.size();  // ids start at 1; 0 means "no sender"
  raw->thread = std::jthread([this, raw, id] { actor_main(raw, id); });
  return id;
}

ActorSystem::Actor* ActorSystem::actor_for(ActorId id) const {
  std::lock_guard lk(registry_mx_);
  if (id == 0 || id > actors_.size()) {
    throw RuntimeApiError("actor: no such actor id");
  }
  return actors_[id - 1].get();
}

void ActorSystem::track_bytes(int64_t delta) {
  size_t now;
  if (delta >= 0) {
    now = bytes_in_flight_.fetch_add(static_cast<size_t>(delta)) +
          static_cast<size_t>(delta);
  } else {
    now = bytes_in_flight_.fetch_sub(static_cast<size_t>(-delta)) -
          static_cast<size_t>(-delta);
  }
  size_t hw = high_water_bytes_.load();
  while (now > hw && !high_water_bytes_.compare_exchange_weak(hw, now)) {
  }
}

void ActorSystem::enqueue(ActorId to, Message&& m, size_t payload_bytes) {
  Actor* a = actor_for(to);
  bool is_request = m.request_id != 0;
  {
    std::unique_lock lk(a->mx);
    a->can_send.wait(lk, [&] {
      return a->mailbox.size() < a->capacity || a->dead || a->stopping;
    });
    if (a->dead) {
      if (is_request) {
        uint64_t rid = m.request_id;
        lk.unlock();
        fail_request(rid, "actor is dead");
        return;
      }
      throw ActorDeadError("actor: send to dead actor");
    }
    if (a->stopping) {
      throw RuntimeApiError("actor: send during shutdown");
    }
    a->mailbox.push_back(std::move(m));
    a->can_recv.notify_one();
  }
  track_bytes(static_cast<int64_t>(payload_bytes));
}

void ActorSystem::send(ActorId to, std::span<const uint8_t> bytes) {
  Message m;
  m.bytes.assign(bytes.begin(), bytes.end());
  enqueue(to, std::move(m), bytes.size());
}

uint64_t ActorSystem::send_request(ActorId to, std::span<const uint8_t> bytes) {
  uint64_t rid;
  {
    std::lock_guard lk(replies_mx_);
    rid = next_request_++;
    ReplySlot& slot = replies_[rid];
    slot.future = slot.promise.get_future();
  }
  Message m;
  m.bytes.assign(bytes.begin(), bytes.end());
  m.request_id = rid;
  try {
    enqueue(to, std::move(m), bytes.size());
  } catch (const ActorDeadError& e) {
    fail_request(rid, e.what());
  }
  return rid;
}

std::vector<uint8_t> ActorSystem::await_reply(uint64_t request_id,
                                              uint64_t timeout_ns) {
  std::future<std::vector<uint8_t>> fut;
  {
    std::lock_guard lk(replies_mx_);
    auto it = replies_.find(request_id);
    if (it == replies_.end() || !it->second.future.valid()) {
      throw RuntimeApiError("actor: unknown or already-awaited request");
    }
    fut = std::move(it->second.future);
  }
  auto status = fut.wait_for(std::chrono::nanoseconds(timeout_ns));
  size_t held = 0;
  {
    std::lock_guard lk(replies_mx_);
    auto it = replies_.find(request_id);
    if (it != replies_.end()) {
      held = it->second.bytes_held;
      replies_.erase(it);
    }
  }
  if (status != std::future_status::ready) {
    throw ActorTimeoutError("actor: reply timed out");
  }
  std::vector<uint8_t> out = fut.get();  // rethrows failure, if any
  if (held > 0) track_bytes(-static_cast<int64_t>(held));
  return out;
}

void ActorSystem::fulfill_request(uint64_t request_id,
                                  std::span<const uint8_t> bytes) {
  std::lock_guard lk(replies_mx_);
  auto it = replies_.find(request_id);
  if (it == replies_.end()) {
    log_warn("actor: reply after the requester gave up; dropped");
    return;
  }
  it->second.bytes_held = bytes.size();
  try {
    it->second.promise.set_value(std::vector<uint8_t>(bytes.begin(), bytes.end()));
  } catch (const std::future_error&) {
    throw RuntimeApiError("actor: duplicate reply to one request");
  }
  track_bytes(static_cast<int64_t>(bytes.size()));
}

void ActorSystem::fail_request(uint64_t request_id, const std::string& why) {
  std::lock_guard lk(replies_mx_);
  auto it = replies_.find(request_id);
  if (it == replies_.end()) return;
  try {
    it->second.promise.set_exception(
        std::make_exception_ptr(ActorTimeoutError("actor: no reply: " + why)));
  } catch (const std::future_error&) {
    // Already satisfied; nothing to do.
  }
}

std::vector<std::vector<uint8_t>> ActorSystem::broadcast_gather(
    std::span<const ActorId> refs, std::span<const uint8_t> payload,
    uint64_t timeout_ns) {
  std::vector<uint64_t> ids;
  ids.reserve(refs.size());
  for (ActorId r : refs) ids.push_back(send_request(r, payload));

  auto deadline = std::chrono::steady_clock::now() +
                  std::chrono::nanoseconds(timeout_ns);
  std::vector<std::vector<uint8_t>> replies;
  replies.reserve(refs.size());
  for (uint64_t rid : ids) {
    auto left = deadline - std::chrono::steady_clock::now();
    uint64_t left_ns =
        left.count() > 0
            ? static_cast<uint64_t>(
                  std::chrono::duration_cast<std::chrono::nanoseconds>(left)
                      .count())
            : 0;
    replies.push_back(await_reply(rid, left_ns));
  }
  return replies;
}

bool ActorSystem::is_dead(ActorId id) const {
  Actor* a = actor_for(id);
  std::lock_guard lk(a->mx);
  return a->dead;
}

size_t ActorSystem::actor_count() const {
  std::lock_guard lk(registry_mx_);
  return actors_.size();
}

void ActorSystem::actor_main(Actor* a, ActorId id) {
  ActorContext ctx(this, id);
  for (;;) {
    Message m;
    {
      std::unique_lock lk(a->mx);
      a->can_recv.wait(lk,
                       [&] { return !a->mailbox.empty() || a->stopping; });
      if (a->mailbox.empty()) return;  // stopping and drained
      m = std::move(a->mailbox.front());
      a->mailbox.pop_front();
      a->can_send.notify_one();
    }
    size_t sz = m.bytes.size();
    try {
      a->behavior(ctx, m);
    } catch (const std::exception& e) {
      log_warn("actor died: %s", e.what());
      std::vector<uint64_t> orphaned;
      {
        std::lock_guard lk(a->mx);
        a->dead = true;
        for (Message& q : a->mailbox) {
          if (q.request_id != 0) orphaned.push_back(q.request_id);
          track_bytes(-static_cast<int64_t>(q.bytes.size()));
        }
        a->mailbox.clear();
        a->can_send.notify_all();
      }
      if (m.request_id != 0) orphaned.push_back(m.request_id);
      for (uint64_t rid : orphaned) fail_request(rid, "actor died");
      track_bytes(-static_cast<int64_t>(sz));
      return;
    }
    track_bytes(-static_cast<int64_t>(sz));
  }
}

void ActorSystem::shutdown() {
  std::vector<Actor*> all;
  {
    std::lock_guard lk(registry_mx_);
    if (shutting_down_) return;
    shutting_down_ = true;
    for (auto& a : actors_) all.push_back(a.get());
  }
  for (Actor* a : all) {
    std::lock_guard lk(a->mx);
    a->stopping = true;
    a->can_recv.notify_all();
    a->can_send.notify_all();
  }
  for (Actor* a : all) {
    if (a->thread.joinable()) a->thread.join();
  }
}

}  // namespace reflow::actor
