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
#include <cstdint>
#include <optional>
#include <vector>

namespace reflow {

/// Fixed-size multi-consumer pop-only queue: a buffer plus one atomic
/// counter. Staging refills the buffer and stores the item count; each pop
/// decrements the counter, and the decremented value is either a unique
/// buffer index (non-negative) or an empty signal (negative). Staging must
/// not overlap pops of a previous batch; the level-stepping protocol
/// guarantees that because a batch is only replaced after every item in it
/// has been both popped and fully processed.
class ReadyQueue {
 public:
  explicit ReadyQueue(size_t capacity) : buf_(capacity ? capacity : 1), count_(0) {}

  void stage(const uint32_t* items, size_t n) {
    for (size_t i = 0; i < n; ++i) buf_[i] = items[i];
    count_.store(static_cast<int64_t>(n), std::memory_order_release);
  }

  std::optional<uint32_t> pop() {
    int64_t observed = count_.fetch_sub(1, std::memory_order_acquire) - 1;
    if (observed < 0) return std::nullopt;
    return buf_[static_cast<size_t>(observed)];
  }

  void reset() { count_.store(0, std::memory_order_relaxed); }

  size_t capacity() const { return buf_.size(); }

 private:
  std::vector<uint32_t> buf_;
  std::atomic<int64_t> count_;
};

}  // namespace reflow
