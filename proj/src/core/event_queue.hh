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
#include <map>
#include <optional>
#include <vector>

#include "core/tag.hh"
#include "core/value.hh"

namespace reflow {

struct TriggerKey {
  enum class Kind : uint8_t { action, timer, port } kind;
  uint32_t id;

  friend bool operator==(const TriggerKey&, const TriggerKey&) = default;
};

struct QueuedEvent {
  TriggerKey trigger;
  Value value;
};

/// Tag-ordered event queue. All events at the minimal tag are released
/// together. Not thread safe; callers hold the runtime's queue mutex.
class EventQueue {
 public:
  /// Returns true if an event for the same trigger already existed at this
  /// tag and was replaced (last write wins).
  bool push(Tag tag, TriggerKey trigger, Value value) {
    auto& bucket = by_tag_[tag];
    for (auto& ev : bucket) {
      if (ev.trigger == trigger) {
        ev.value = std::move(value);
        return true;
      }
    }
    bucket.push_back({trigger, std::move(value)});
    ++size_;
    return false;
  }

  std::optional<Tag> peek_tag() const {
    if (by_tag_.empty()) return std::nullopt;
    return by_tag_.begin()->first;
  }

  /// Removes and returns all events at the minimal tag.
  std::vector<QueuedEvent> pop_tag(Tag& tag_out) {
    auto it = by_tag_.begin();
    tag_out = it->first;
    std::vector<QueuedEvent> evs = std::move(it->second);
    by_tag_.erase(it);
    size_ -= evs.size();
    return evs;
  }

  bool empty() const { return by_tag_.empty(); }
  size_t size() const { return size_; }

  size_t count_after(Tag t) const {
    size_t n = 0;
    for (auto it = by_tag_.upper_bound(t); it != by_tag_.end(); ++it) {
      n += it->second.size();
    }
    return n;
  }

 private:
  std::map<Tag, std::vector<QueuedEvent>> by_tag_;
  size_t size_ = 0;
};

}  // namespace reflow
