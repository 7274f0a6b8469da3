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
#include "core/runtime.hh"

#include <algorithm>
#include <cstring>

#include "core/hash.hh"
#include "core/log.hh"

#ifdef __linux__
#include <pthread.h>
#include <sched.h>
#endif

namespace reflow {

// ---- ReactionContext -------------------------------------------------------

uint32_t ReactionContext::bank_index() const {
  return rt_.prog_->instances()[reaction_.instance].bank_index;
}

uint32_t ReactionContext::bank_width() const {
  return rt_.prog_->instances()[reaction_.instance].bank_width;
}

const std::string& ReactionContext::instance_name() const {
  return rt_.prog_->instances()[reaction_.instance].name;
}

uint64_t ReactionContext::master_seed() const { return rt_.cfg_.seed; }

uint64_t ReactionContext::physical_now_ns() const {
  return rt_.clock_.now_ns() - rt_.start_ns_;
}

void* ReactionContext::raw_state() {
  void* s = rt_.states_[reaction_.instance].get();
  if (!s) {
    throw RuntimeApiError("instance '" + instance_name() +
                          "' declares no state");
  }
  return s;
}

uint32_t ReactionContext::resolve_port(std::string_view port, uint32_t channel,
                                       PortDir dir) const {
  const FlatInstance& inst = rt_.prog_->instances()[reaction_.instance];
  auto it = inst.ports.find(port);
  if (it == inst.ports.end()) {
    throw RuntimeApiError("unknown port '" + std::string(port) + "' on '" +
                          inst.name + "'");
  }
  const PortSpan& span = it->second;
  if (span.dir != dir) {
    throw RuntimeApiError(std::string(dir == PortDir::output
                                          ? "cannot write input port '"
                                          : "cannot read output port '") +
                          std::string(port) + "'");
  }
  if (channel >= span.width) {
    throw RuntimeApiError("channel " + std::to_string(channel) +
                          " out of range for port '" + std::string(port) +
                          "' of width " + std::to_string(span.width));
  }
  return span.first + channel;
}

uint32_t ReactionContext::resolve_action(std::string_view action) const {
  const FlatInstance& inst = rt_.prog_->instances()[reaction_.instance];
  auto it = inst.actions.find(action);
  if (it == inst.actions.end()) {
    throw RuntimeApiError("unknown action '" + std::string(action) + "' on '" +
                          inst.name + "'");
  }
  return it->second;
}

uint32_t ReactionContext::width(std::string_view port) const {
  const FlatInstance& inst = rt_.prog_->instances()[reaction_.instance];
  auto it = inst.ports.find(port);
  if (it == inst.ports.end()) {
    throw RuntimeApiError("unknown port '" + std::string(port) + "'");
  }
  return it->second.width;
}

bool ReactionContext::present(std::string_view port, uint32_t channel) const {
  uint32_t id = resolve_port(port, channel, PortDir::input);
  return rt_.port_present_[id] != 0;
}

Value ReactionContext::get(std::string_view port, uint32_t channel) const {
  uint32_t id = resolve_port(port, channel, PortDir::input);
  bool readable = false;
  for (uint32_t p : reaction_.trigger_ports) readable |= (p == id);
  for (uint32_t p : reaction_.source_ports) readable |= (p == id);
  if (!readable) {
    throw RuntimeApiError("reaction '" + reaction_.name +
                          "' reads port it neither triggers on nor sources: '" +
                          std::string(port) + "'");
  }
  return rt_.port_values_[id];
}

void ReactionContext::set(std::string_view port, uint32_t channel, Value v) {
  uint32_t id = resolve_port(port, channel, PortDir::output);
  bool writable = false;
  for (uint32_t p : reaction_.effect_ports) writable |= (p == id);
  if (!writable) {
    throw RuntimeApiError("reaction '" + reaction_.name +
                          "' writes undeclared effect port '" +
                          std::string(port) + "'");
  }
  rt_.port_values_[id] = v;
  rt_.port_present_[id] = 1;
  for (uint32_t li : rt_.prog_->links_of_port(id)) {
    const FlatLink& l = rt_.prog_->links()[li];
    if (l.is_direct()) {
      // Fan-out shares the value; no copy is made.
      rt_.port_values_[l.to_port] = v;
      rt_.port_present_[l.to_port] = 1;
      for (uint32_t rid : rt_.prog_->reactions_of_port(l.to_port)) {
        rt_.stage_reaction(rid);
      }
    } else {
      Tag at;
      if (l.physical) {
        Tag base = std::max(tag_, Tag{physical_now_ns(), 0});
        at = tag_after_delay(base, l.delay.value_or(LogicalDelay::zero()));
      } else {
        at = tag_after_delay(tag_, *l.delay);
      }
      std::lock_guard<std::mutex> lk(rt_.qmx_);
      rt_.schedule_event_locked({TriggerKey::Kind::port, l.to_port}, at, v);
    }
  }
}

void ReactionContext::broadcast(std::string_view port, const Value& v) {
  uint32_t w = width(port);
  for (uint32_t c = 0; c < w; ++c) set(port, c, v);
}

bool ReactionContext::action_present(std::string_view action) const {
  return rt_.action_present_[resolve_action(action)] != 0;
}

Value ReactionContext::action_value(std::string_view action) const {
  return rt_.action_values_[resolve_action(action)];
}

Tag ReactionContext::schedule(std::string_view action, Value v,
                              LogicalDelay extra) {
  uint32_t id = resolve_action(action);
  bool allowed = false;
  for (uint32_t a : reaction_.effect_actions) allowed |= (a == id);
  if (!allowed) {
    throw RuntimeApiError("reaction '" + reaction_.name +
                          "' schedules undeclared action '" +
                          std::string(action) + "'");
  }
  LogicalDelay total = rt_.prog_->actions()[id].min_delay + extra;
  Tag at = tag_after_delay(tag_, total);
  std::lock_guard<std::mutex> lk(rt_.qmx_);
  return rt_.schedule_event_locked({TriggerKey::Kind::action, id}, at,
                                   std::move(v));
}

Tag ReactionContext::request_shutdown() { return rt_.request_shutdown(); }

// ---- Runtime construction --------------------------------------------------

Runtime::Runtime(std::shared_ptr<const Program> program, RuntimeConfig cfg)
    : prog_(std::move(program)),
      cfg_(cfg),
      n_workers_(std::max<uint32_t>(1, cfg.workers)),
      ready_(prog_->levels().max_per_level) {
  const LevelMap& lm = prog_->levels();
  max_level_ = lm.max_level;
  level_of_ = lm.level;

  states_.resize(prog_->instances().size());
  port_values_.resize(prog_->ports().size());
  port_present_.assign(prog_->ports().size(), 0);
  action_values_.resize(prog_->actions().size());
  action_present_.assign(prog_->actions().size(), 0);

  buckets_.resize(max_level_ + 1);
  for (uint32_t l = 0; l <= max_level_; ++l) {
    uint32_t cap =
        l < lm.per_level_count.size() ? lm.per_level_count[l] : 0;
    buckets_[l].resize(cap);
  }
  bucket_size_ = std::make_unique<std::atomic<uint32_t>[]>(max_level_ + 1);
  for (uint32_t l = 0; l <= max_level_; ++l) bucket_size_[l].store(0);
  staged_flag_ =
      std::make_unique<std::atomic<uint8_t>[]>(prog_->reactions().size());
  for (size_t i = 0; i < prog_->reactions().size(); ++i) {
    staged_flag_[i].store(0);
  }

  if (cfg_.timeout_ns) stop_tag_ = Tag{*cfg_.timeout_ns, 0};
}

Runtime::~Runtime() {
  if (started_ && !finished_) {
    request_shutdown();
    for (auto& t : threads_) {
      if (t.joinable()) t.join();
    }
  }
}

ExecutionReport Runtime::run() {
  start();
  return await();
}

void Runtime::start() {
  if (started_) throw RuntimeApiError("runtime already started");
  started_ = true;
  start_ns_ = clock_.now_ns();

  for (uint32_t i = 0; i < prog_->instances().size(); ++i) {
    if (StateFactory f = prog_->state_factory_of(i)) {
      const FlatInstance& inst = prog_->instances()[i];
      states_[i] = f(InstanceInfo{inst.name, inst.bank_index, inst.bank_width,
                                  cfg_.seed});
    }
  }
  {
    std::lock_guard<std::mutex> lk(qmx_);
    for (uint32_t ti = 0; ti < prog_->timers().size(); ++ti) {
      const FlatTimer& t = prog_->timers()[ti];
      schedule_event_locked({TriggerKey::Kind::timer, ti},
                            Tag{t.offset_ns, 0}, nullptr);
    }
  }

  per_worker_.clear();
  for (uint32_t w = 0; w < n_workers_; ++w) {
    auto pw = std::make_unique<PerWorker>();
    pw->per_level.assign(max_level_ + 1, 0);
    per_worker_.push_back(std::move(pw));
  }
  threads_.reserve(n_workers_);
  for (uint32_t w = 0; w < n_workers_; ++w) {
    threads_.emplace_back([this, w] { worker_main(w); });
  }

  // Hand the first advance to whichever worker grabs the gate first; doing
  // it here would block the caller when keepalive waits for injections.
  bootstrap_pending_.store(true, std::memory_order_release);
  gate_.release(1);
}

ExecutionReport Runtime::await() {
  if (!started_) throw RuntimeApiError("runtime not started");
  for (auto& t : threads_) {
    if (t.joinable()) t.join();
  }
  if (finished_) return report_;
  finished_ = true;

  report_.tags_processed = tags_processed_;
  report_.events_enqueued = events_enqueued_;
  report_.events_executed = events_executed_;
  report_.events_pending = events_pending_end_;
  report_.events_beyond_stop = events_beyond_end_ + events_dropped_beyond_;
  report_.wall_ns = wall_ns_;
  report_.final_tag = final_tag_;
  report_.per_level_occupancy.assign(max_level_ + 1, 0);
  for (const auto& pw : per_worker_) {
    report_.reactions_executed += pw->executed;
    for (uint32_t l = 0; l <= max_level_; ++l) {
      report_.per_level_occupancy[l] += pw->per_level[l];
    }
    report_.trace.insert(report_.trace.end(), pw->trace.begin(),
                         pw->trace.end());
  }
  std::sort(report_.trace.begin(), report_.trace.end(),
            [](const TraceRow& a, const TraceRow& b) {
              if (a.tag != b.tag) return a.tag < b.tag;
              return a.reaction_id < b.reaction_id;
            });
  report_.faulted = fault_flag_.load();
  {
    std::lock_guard<std::mutex> lk(fault_mx_);
    report_.fault_message = fault_message_;
  }
  return report_;
}

// ---- worker protocol -------------------------------------------------------

void Runtime::worker_main(uint32_t wid) {
#ifdef __linux__
  if (cfg_.pin_fast_cores) {
    unsigned cores = std::max(1u, std::thread::hardware_concurrency());
    cpu_set_t cs;
    CPU_ZERO(&cs);
    CPU_SET(wid % cores, &cs);
    pthread_setaffinity_np(pthread_self(), sizeof(cs), &cs);  // best effort
  }
#endif
  for (;;) {
    gate_.acquire();
    if (done_.load(std::memory_order_acquire)) return;
    if (bootstrap_pending_.exchange(false, std::memory_order_acq_rel)) {
      advance(/*from_worker=*/true);
      if (done_.load(std::memory_order_acquire)) return;
    }
    work_until_empty(wid);
  }
}

void Runtime::work_until_empty(uint32_t wid) {
  for (;;) {
    std::optional<uint32_t> rid = ready_.pop();
    if (!rid) return;
    execute(*rid, wid);
    if (outstanding_.fetch_sub(1, std::memory_order_acq_rel) == 1) {
      advance(/*from_worker=*/true);
      if (done_.load(std::memory_order_acquire)) return;
    }
  }
}

void Runtime::execute(uint32_t rid, uint32_t wid) {
  const FlatReaction& r = prog_->reactions()[rid];
  // Level-safety check, kept on in all builds: a staged reaction must belong
  // to the level currently being drained.
  if (static_cast<int64_t>(level_of_[rid]) != cursor_) {
    mark_fault("level safety violation: " + r.name + " staged at level " +
               std::to_string(level_of_[rid]) + " ran during level " +
               std::to_string(cursor_));
  }

  PerWorker& pw = *per_worker_[wid];
  Tag tag = current_tag_;

  uint64_t vhash = 0;
  if (cfg_.collect_trace) {
    Fnv64 h;
    auto mix_port = [&](uint32_t p) {
      if (!port_present_[p]) return;
      h.mix_u64(p + 1);
      h.mix_u64(port_values_[p] ? port_values_[p]->hash64() : 0);
    };
    for (uint32_t p : r.trigger_ports) mix_port(p);
    for (uint32_t p : r.source_ports) mix_port(p);
    for (uint32_t a : r.trigger_actions) {
      if (!action_present_[a]) continue;
      h.mix_u64(0x100000000ull + a);
      h.mix_u64(action_values_[a] ? action_values_[a]->hash64() : 0);
    }
    vhash = h.digest();
  }

  const ReactionBody* body = &prog_->body_of(r);
  if (r.deadline) {
    uint64_t phys = clock_.now_ns() - start_ns_;
    if (phys > tag.time_ns && phys - tag.time_ns > r.deadline->threshold_ns) {
      body = &r.deadline->handler;
    }
  }

  ReactionContext ctx(*this, r, tag);
  try {
    (*body)(ctx);
  } catch (const std::exception& e) {
    mark_fault("reaction '" + r.name + "' faulted: " + e.what());
  } catch (...) {
    mark_fault("reaction '" + r.name + "' faulted: unknown exception");
  }

  ++pw.executed;
  ++pw.per_level[level_of_[rid]];
  if (cfg_.collect_trace) pw.trace.push_back({tag, rid, vhash});
}

void Runtime::advance(bool from_worker) {
  for (;;) {
    if (stage_scan(from_worker)) return;
    finish_tag();
    std::unique_lock<std::mutex> lk(qmx_);
    if (!select_next_tag(lk)) {
      terminate_locked();
      return;
    }
  }
}

bool Runtime::stage_scan(bool from_worker) {
  while (cursor_ + 1 <= static_cast<int64_t>(max_level_)) {
    ++cursor_;
    uint32_t n = bucket_size_[cursor_].load(std::memory_order_acquire);
    if (n == 0) continue;
    outstanding_.store(n, std::memory_order_relaxed);
    ready_.stage(buckets_[cursor_].data(), n);
    int64_t release = std::min<int64_t>(n_workers_, n) - (from_worker ? 1 : 0);
    if (release > 0) gate_.release(release);
    return true;
  }
  return false;
}

void Runtime::finish_tag() {
  for (uint32_t l = 0; l <= max_level_; ++l) {
    uint32_t n = bucket_size_[l].load(std::memory_order_acquire);
    for (uint32_t i = 0; i < n; ++i) {
      staged_flag_[buckets_[l][i]].store(0, std::memory_order_relaxed);
    }
    bucket_size_[l].store(0, std::memory_order_relaxed);
  }
  for (size_t p = 0; p < port_present_.size(); ++p) {
    if (port_present_[p]) {
      port_values_[p].reset();
      port_present_[p] = 0;
    }
  }
  for (size_t a = 0; a < action_present_.size(); ++a) {
    if (action_present_[a]) {
      action_values_[a].reset();
      action_present_[a] = 0;
    }
  }
}

bool Runtime::select_next_tag(std::unique_lock<std::mutex>& lk) {
  if (fault_flag_.load(std::memory_order_acquire)) return false;
  if (shutdown_staged_) return false;

  if (startup_pending_) {
    startup_pending_ = false;
    current_tag_ = Tag{0, 0};
    cursor_ = -1;
    size_t delivered = 0;
    if (auto t = queue_.peek_tag(); t && *t == current_tag_) {
      Tag tt;
      for (const auto& ev : queue_.pop_tag(tt)) {
        deliver_event(ev);
        ++delivered;
      }
    }
    for (uint32_t rid : prog_->startup_reactions()) stage_reaction(rid);
    if (stop_tag_ && *stop_tag_ == current_tag_) {
      for (uint32_t rid : prog_->shutdown_reactions()) stage_reaction(rid);
      shutdown_staged_ = true;
    }
    events_executed_ += delivered;
    if (delivered + prog_->startup_reactions().size() > 0) ++tags_processed_;
    return true;
  }

  for (;;) {
    std::optional<Tag> next = queue_.peek_tag();

    if (!next && cfg_.keepalive && !stop_tag_) {
      qcv_.wait(lk);
      continue;
    }
    if (!next && !cfg_.keepalive) {
      // Queue drained: stop one microstep past the current tag, even if a
      // later timeout was configured.
      Tag auto_stop = tag_after_delay(current_tag_, LogicalDelay::zero());
      if (!stop_tag_ || auto_stop < *stop_tag_) stop_tag_ = auto_stop;
    }

    if (next && (!stop_tag_ || *next <= *stop_tag_)) {
      Tag t;
      auto evs = queue_.pop_tag(t);
      current_tag_ = t;
      cursor_ = -1;
      for (const auto& ev : evs) deliver_event(ev);
      events_executed_ += evs.size();
      if (stop_tag_ && t == *stop_tag_) {
        for (uint32_t rid : prog_->shutdown_reactions()) stage_reaction(rid);
        shutdown_staged_ = true;
      }
      ++tags_processed_;
      return true;
    }

    if (stop_tag_) {
      current_tag_ = *stop_tag_;
      cursor_ = -1;
      for (uint32_t rid : prog_->shutdown_reactions()) stage_reaction(rid);
      shutdown_staged_ = true;
      if (!prog_->shutdown_reactions().empty()) ++tags_processed_;
      return true;
    }
    // Keepalive with a freshly arrived event race: loop and re-peek.
  }
}

void Runtime::deliver_event(const QueuedEvent& ev) {
  switch (ev.trigger.kind) {
    case TriggerKey::Kind::action: {
      uint32_t id = ev.trigger.id;
      action_values_[id] = ev.value;
      action_present_[id] = 1;
      for (uint32_t rid : prog_->reactions_of_action(id)) stage_reaction(rid);
      break;
    }
    case TriggerKey::Kind::timer: {
      uint32_t id = ev.trigger.id;
      for (uint32_t rid : prog_->reactions_of_timer(id)) stage_reaction(rid);
      const FlatTimer& t = prog_->timers()[id];
      if (t.period_ns > 0) {
        schedule_event_locked({TriggerKey::Kind::timer, id},
                              Tag{current_tag_.time_ns + t.period_ns, 0},
                              nullptr);
      }
      break;
    }
    case TriggerKey::Kind::port: {
      uint32_t id = ev.trigger.id;
      port_values_[id] = ev.value;
      port_present_[id] = 1;
      for (uint32_t rid : prog_->reactions_of_port(id)) stage_reaction(rid);
      break;
    }
  }
}

void Runtime::stage_reaction(uint32_t rid) {
  if (staged_flag_[rid].exchange(1, std::memory_order_acq_rel) != 0) return;
  uint32_t lvl = level_of_[rid];
  uint32_t idx = bucket_size_[lvl].fetch_add(1, std::memory_order_acq_rel);
  buckets_[lvl][idx] = rid;
}

void Runtime::terminate_locked() {
  final_tag_ = current_tag_;
  wall_ns_ = clock_.now_ns() - start_ns_;
  size_t remaining = queue_.size();
  events_beyond_end_ = stop_tag_ ? queue_.count_after(*stop_tag_) : 0;
  events_pending_end_ = remaining - events_beyond_end_;
  done_.store(true, std::memory_order_release);
  qcv_.notify_all();
  gate_.release(n_workers_);
}

void Runtime::mark_fault(const std::string& msg) {
  {
    std::lock_guard<std::mutex> lk(fault_mx_);
    if (fault_message_.empty()) fault_message_ = msg;
  }
  fault_flag_.store(true, std::memory_order_release);
}

Tag Runtime::schedule_event_locked(TriggerKey key, Tag at, Value v) {
  if (stop_tag_ && at > *stop_tag_) {
    ++events_enqueued_;
    ++events_dropped_beyond_;
    return at;
  }
  bool replaced = queue_.push(at, key, std::move(v));
  if (replaced) {
    log_warn("event replaced at tag %s (same trigger, same tag; last write wins)",
             at.to_string().c_str());
  } else {
    ++events_enqueued_;
  }
  return at;
}

// ---- external control ------------------------------------------------------

Tag Runtime::request_shutdown() {
  std::lock_guard<std::mutex> lk(qmx_);
  if (done_.load(std::memory_order_acquire)) {
    return stop_tag_.value_or(current_tag_);
  }
  Tag t = tag_after_delay(current_tag_, LogicalDelay::zero());
  if (!stop_tag_ || t < *stop_tag_) stop_tag_ = t;
  qcv_.notify_all();
  return *stop_tag_;
}

Tag Runtime::inject_physical(std::string_view instance,
                             std::string_view action, Value v) {
  uint32_t inst = find_instance(instance);
  const FlatInstance& fi = prog_->instances()[inst];
  auto it = fi.actions.find(action);
  if (it == fi.actions.end()) {
    throw RuntimeApiError("unknown action '" + std::string(action) + "' on '" +
                          fi.name + "'");
  }
  uint32_t id = it->second;
  const FlatAction& fa = prog_->actions()[id];
  if (fa.kind != ActionKind::physical) {
    throw RuntimeApiError("action '" + std::string(action) +
                          "' is logical; only physical actions accept "
                          "external injection");
  }
  std::lock_guard<std::mutex> lk(qmx_);
  if (done_.load(std::memory_order_acquire)) {
    throw RuntimeApiError("runtime already terminated");
  }
  Tag base = std::max(current_tag_, Tag{clock_.now_ns() - start_ns_, 0});
  Tag at = tag_after_delay(base, fa.min_delay);
  Tag res = schedule_event_locked({TriggerKey::Kind::action, id}, at,
                                  std::move(v));
  qcv_.notify_all();
  return res;
}

uint32_t Runtime::find_instance(std::string_view name) const {
  for (uint32_t i = 0; i < prog_->instances().size(); ++i) {
    if (prog_->instances()[i].name == name) return i;
  }
  throw RuntimeApiError("unknown reactor instance '" + std::string(name) +
                        "'");
}

std::shared_ptr<void> Runtime::raw_state_of(std::string_view instance) const {
  return states_[find_instance(instance)];
}

}  // namespace reflow
