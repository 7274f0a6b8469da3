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
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <string>
#include <thread>
#include <vector>

#include "core/event_queue.hh"
#include "core/program.hh"
#include "core/ready_queue.hh"
#include "core/tag.hh"
#include "core/value.hh"

namespace reflow {

struct RuntimeConfig {
  uint32_t workers = 1;
  bool keepalive = false;  // wait for physical events when the queue drains
  std::optional<uint64_t> timeout_ns;  // inclusive final tag (timeout, 0)
  bool pin_fast_cores = false;
  uint64_t seed = 1;
  bool collect_trace = false;
};

struct TraceRow {
  Tag tag;
  uint32_t reaction_id;
  uint64_t value_hash;  // over the values the reaction could read at its tag
};

struct ExecutionReport {
  uint64_t tags_processed = 0;
  uint64_t reactions_executed = 0;
  uint64_t events_enqueued = 0;
  uint64_t events_executed = 0;
  uint64_t events_pending = 0;      // at or before the stop tag, undelivered
  uint64_t events_beyond_stop = 0;  // past the stop tag, never delivered
  uint64_t wall_ns = 0;
  Tag final_tag{0, 0};
  std::vector<uint64_t> per_level_occupancy;
  bool faulted = false;
  std::string fault_message;
  std::vector<TraceRow> trace;  // sorted by (tag, reaction id)
};

class Runtime;

/// Handed to reaction bodies. Port and action references use the declaring
/// class's local names. Only valid during the body invocation.
class ReactionContext {
 public:
  Tag tag() const { return tag_; }
  uint32_t bank_index() const;
  uint32_t bank_width() const;
  const std::string& instance_name() const;
  uint64_t master_seed() const;
  uint64_t physical_now_ns() const;

  template <class T>
  T& state() {
    return *static_cast<T*>(raw_state());
  }

  uint32_t width(std::string_view port) const;
  bool present(std::string_view port, uint32_t channel = 0) const;
  Value get(std::string_view port, uint32_t channel = 0) const;
  void set(std::string_view port, uint32_t channel, Value v);
  void set(std::string_view port, Value v) { set(port, 0, std::move(v)); }
  void broadcast(std::string_view port, const Value& v);

  bool action_present(std::string_view action) const;
  Value action_value(std::string_view action) const;
  /// Enqueues a future occurrence of the action and returns its tag. A total
  /// delay of zero advances by one microstep. Events past the stop tag are
  /// dropped (counted, not delivered).
  Tag schedule(std::string_view action, Value v,
               LogicalDelay extra = LogicalDelay::zero());

  Tag request_shutdown();

 private:
  friend class Runtime;
  ReactionContext(Runtime& rt, const FlatReaction& r, Tag tag)
      : rt_(rt), reaction_(r), tag_(tag) {}
  void* raw_state();
  uint32_t resolve_port(std::string_view port, uint32_t channel,
                        PortDir dir) const;
  uint32_t resolve_action(std::string_view action) const;

  Runtime& rt_;
  const FlatReaction& reaction_;
  Tag tag_;
};

/// Executes a validated program on a pool of workers. Reactions at one level
/// run in parallel; the worker that finishes a level's last reaction stages
/// the next level or advances the tag, so no dedicated scheduler thread
/// exists. See ReadyQueue for the pop protocol.
class Runtime {
 public:
  Runtime(std::shared_ptr<const Program> program, RuntimeConfig cfg);
  ~Runtime();

  Runtime(const Runtime&) = delete;
  Runtime& operator=(const Runtime&) = delete;

  /// start() + await().
  ExecutionReport run();

  void start();
  ExecutionReport await();

  /// Thread safe; callable while the runtime is running. Throws
  /// RuntimeApiError if the runtime already terminated, the action is
  /// unknown, or the action is not physical.
  Tag inject_physical(std::string_view instance, std::string_view action,
                      Value v);

  /// Thread safe. Sets the stop tag one microstep after the current tag and
  /// returns it.
  Tag request_shutdown();

  /// State object of a flattened instance (for inspection after run()).
  template <class T>
  std::shared_ptr<T> state_of(std::string_view instance) const {
    return std::static_pointer_cast<T>(raw_state_of(instance));
  }

 private:
  friend class ReactionContext;

  struct PerWorker {
    uint64_t executed = 0;
    std::vector<uint64_t> per_level;
    std::vector<TraceRow> trace;
    char pad[64] = {};  // keep hot counters on separate cache lines
  };

  void worker_main(uint32_t wid);
  void work_until_empty(uint32_t wid);
  void execute(uint32_t rid, uint32_t wid);
  void advance(bool from_worker);
  bool stage_scan(bool from_worker);
  bool select_next_tag(std::unique_lock<std::mutex>& lk);  // false: terminate
  void deliver_event(const QueuedEvent& ev);
  void stage_reaction(uint32_t rid);
  void finish_tag();
  void terminate_locked();
  void mark_fault(const std::string& msg);
  Tag schedule_event_locked(TriggerKey key, Tag at, Value v);

  std::shared_ptr<void> raw_state_of(std::string_view instance) const;
  uint32_t find_instance(std::string_view name) const;

  std::shared_ptr<const Program> prog_;
  RuntimeConfig cfg_;
  PhysicalClock clock_;

  // Immutable after construction.
  uint32_t n_workers_;
  uint32_t max_level_ = 0;
  std::vector<uint32_t> level_of_;

  std::vector<std::shared_ptr<void>> states_;

  // Tag-scoped presence and values. A channel is written by at most one
  // reaction per level and read only at strictly later levels.
  std::vector<Value> port_values_;
  std::vector<uint8_t> port_present_;
  std::vector<Value> action_values_;
  std::vector<uint8_t> action_present_;

  // Per-level staging buckets; slots reserved with an atomic cursor so
  // several finishing reactions can stage downstream work concurrently.
  std::vector<std::vector<uint32_t>> buckets_;
  std::unique_ptr<std::atomic<uint32_t>[]> bucket_size_;
  std::unique_ptr<std::atomic<uint8_t>[]> staged_flag_;

  ReadyQueue ready_;
  std::atomic<int64_t> outstanding_{0};
  std::counting_semaphore<> gate_{0};
  std::atomic<bool> done_{false};
  std::atomic<bool> fault_flag_{false};
  std::atomic<bool> bootstrap_pending_{false};

  // Event queue and tag state, guarded by qmx_.
  std::mutex qmx_;
  std::condition_variable qcv_;
  EventQueue queue_;
  Tag current_tag_{0, 0};
  std::optional<Tag> stop_tag_;
  bool startup_pending_ = true;
  bool shutdown_staged_ = false;
  int64_t cursor_ = -1;  // level scan position within the current tag

  // Counters; the scalar ones are only mutated under qmx_ or by the single
  // advancing worker.
  uint64_t events_enqueued_ = 0;
  uint64_t events_executed_ = 0;
  uint64_t events_dropped_beyond_ = 0;
  uint64_t events_pending_end_ = 0;
  uint64_t events_beyond_end_ = 0;
  uint64_t tags_processed_ = 0;
  Tag final_tag_{0, 0};
  uint64_t wall_ns_ = 0;
  uint64_t start_ns_ = 0;

  std::mutex fault_mx_;
  std::string fault_message_;

  std::vector<std::thread> threads_;
  std::vector<std::unique_ptr<PerWorker>> per_worker_;
  bool started_ = false;
  bool finished_ = false;
  ExecutionReport report_;
};

}  // namespace reflow
