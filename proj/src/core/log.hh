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

#include <cstdio>
#include <cstdlib>
#include <string>

namespace reflow {

// stderr logging, gated by REFLOW_LOG (silent|warn|info). Default: warn.
enum class LogLevel { silent = 0, warn = 1, info = 2 };

inline LogLevel log_level() {
  static LogLevel lvl = [] {
    const char* e = std::getenv("REFLOW_LOG");
    if (e == nullptr) return LogLevel::warn;
    std::string s(e);
    if (s == "silent") return LogLevel::silent;
    if (s == "info") return LogLevel::info;
    return LogLevel::warn;
  }();
  return lvl;
}

template <typename... Args>
void log_warn(const char* fmt, Args... args) {
  if (log_level() >= LogLevel::warn) {
    std::fprintf(stderr, "[reflow warn] ");
    if constexpr (sizeof...(Args) == 0) {
      std::fputs(fmt, stderr);
    } else {
      std::fprintf(stderr, fmt, args...);
    }
    std::fprintf(stderr, "\n");
  }
}

template <typename... Args>
void log_info(const char* fmt, Args... args) {
  if (log_level() >= LogLevel::info) {
    std::fprintf(stderr, "[reflow] ");
    if constexpr (sizeof...(Args) == 0) {
      std::fputs(fmt, stderr);
    } else {
      std::fprintf(stderr, fmt, args...);
    }
    std::fprintf(stderr, "\n");
  }
}

}  // namespace reflow
