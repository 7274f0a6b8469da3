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

#include <stdexcept>
#include <string>
#include <vector>

namespace reflow {

enum class IssueCode {
  instantiation_cycle,
  width_mismatch,
  multiple_writers,
  unresolved_reference,
  bad_declaration,
  nesting_too_deep,
};

inline const char* issue_code_name(IssueCode c) {
  switch (c) {
    case IssueCode::instantiation_cycle: return "InstantiationCycle";
    case IssueCode::width_mismatch: return "WidthMismatch";
    case IssueCode::multiple_writers: return "MultipleWriters";
    case IssueCode::unresolved_reference: return "UnresolvedReference";
    case IssueCode::bad_declaration: return "BadDeclaration";
    case IssueCode::nesting_too_deep: return "NestingTooDeep";
  }
  return "Unknown";
}

struct ValidationIssue {
  IssueCode code;
  std::string message;
};

/// Program construction failed; carries every issue found, not just the first.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(std::vector<ValidationIssue> issues)
      : std::runtime_error(render(issues)), issues_(std::move(issues)) {}

  const std::vector<ValidationIssue>& issues() const { return issues_; }

  bool has(IssueCode c) const {
    for (const auto& i : issues_) {
      if (i.code == c) return true;
    }
    return false;
  }

 private:
  static std::string render(const std::vector<ValidationIssue>& issues) {
    std::string s = "program validation failed:";
    for (const auto& i : issues) {
      s += "\n  [";
      s += issue_code_name(i.code);
      s += "] ";
      s += i.message;
    }
    return s;
  }

  std::vector<ValidationIssue> issues_;
};

/// Zero-delay dependency cycle among reactions; path lists reaction names
/// in cycle order, first element repeated at the end.
class CycleError : public std::runtime_error {
 public:
  explicit CycleError(std::vector<std::string> path)
      : std::runtime_error(render(path)), path_(std::move(path)) {}

  const std::vector<std::string>& path() const { return path_; }

 private:
  static std::string render(const std::vector<std::string>& path) {
    std::string s = "zero-delay dependency cycle: ";
    for (size_t i = 0; i < path.size(); ++i) {
      if (i > 0) s += " -> ";
      s += path[i];
    }
    return s;
  }

  std::vector<std::string> path_;
};

/// Errors raised by runtime operations outside reaction bodies (bad action
/// refs, scheduling after termination, injection into logical actions).
class RuntimeApiError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Filesystem failures while persisting reports, curves, or traces.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace reflow
