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
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "core/errors.hh"
#include "core/tag.hh"

namespace reflow {

class ReactionContext;
using ReactionBody = std::function<void(ReactionContext&)>;

/// Passed to state factories when an instance is brought up.
struct InstanceInfo {
  std::string name;
  uint32_t bank_index = 0;
  uint32_t bank_width = 1;
  uint64_t master_seed = 0;
};

using StateFactory = std::function<std::shared_ptr<void>(const InstanceInfo&)>;

enum class PortDir : uint8_t { input, output };
enum class ActionKind : uint8_t { logical, physical };

struct PortDecl {
  std::string name;
  PortDir dir;
  uint32_t width;
};

struct ActionDecl {
  std::string name;
  ActionKind kind;
  LogicalDelay min_delay;
};

struct TimerDecl {
  std::string name;
  uint64_t offset_ns;
  uint64_t period_ns;  // 0 means fire exactly once at the offset
};

struct ChildDecl {
  std::string class_name;
  std::string instance_name;
  uint32_t bank_width;
};

struct TriggerRef {
  enum class Kind : uint8_t { startup, shutdown, named } kind;
  std::string name;  // port, action, or timer; empty for startup/shutdown
};

struct DeadlineDecl {
  uint64_t threshold_ns;
  ReactionBody handler;
};

struct ReactionDecl {
  std::string name;
  std::vector<TriggerRef> triggers;
  std::vector<std::string> sources;        // extra read-only ports
  std::vector<std::string> effect_ports;   // outputs this reaction may write
  std::vector<std::string> effect_actions; // actions this reaction may schedule
  ReactionBody body;
  std::optional<DeadlineDecl> deadline;
};

class ProgramBuilder;
class ReactorClass;

/// Fluent helper returned by ReactorClass::reaction(); finalized by body().
class ReactionBuilder {
 public:
  ReactionBuilder& on_startup();
  ReactionBuilder& on_shutdown();
  ReactionBuilder& triggered_by(std::string_view name);
  ReactionBuilder& reads(std::string_view port);
  ReactionBuilder& writes(std::string_view port);
  ReactionBuilder& schedules(std::string_view action);
  ReactionBuilder& with_deadline(uint64_t threshold_ns, ReactionBody handler);
  ReactorClass& body(ReactionBody fn);

 private:
  friend class ReactorClass;
  ReactionBuilder(ReactorClass& owner, ReactionDecl& decl)
      : owner_(owner), decl_(decl) {}
  ReactorClass& owner_;
  ReactionDecl& decl_;
};

class ReactorClass {
 public:
  ReactorClass& input(std::string name, uint32_t width = 1);
  ReactorClass& output(std::string name, uint32_t width = 1);
  ReactorClass& logical_action(std::string name,
                               LogicalDelay min_delay = LogicalDelay::zero());
  ReactorClass& physical_action(std::string name,
                                LogicalDelay min_delay = LogicalDelay::zero());
  ReactorClass& timer(std::string name, uint64_t offset_ns, uint64_t period_ns);
  ReactorClass& state(StateFactory factory);
  /// Contained reactor. Only the main reactor may have children; declaring
  /// children on an instantiated class is rejected at build time, and the
  /// containment relation is checked for cycles.
  ReactorClass& child(std::string class_name, std::string instance_name,
                      uint32_t bank_width = 1);
  ReactionBuilder reaction(std::string name = "");

  const std::string& name() const { return name_; }

 private:
  friend class ProgramBuilder;
  explicit ReactorClass(std::string name) : name_(std::move(name)) {}

  std::string name_;
  std::vector<PortDecl> ports_;
  std::vector<ActionDecl> actions_;
  std::vector<TimerDecl> timers_;
  std::vector<ChildDecl> children_;
  std::vector<ReactionDecl> reactions_;
  StateFactory state_factory_;
};

struct PortRef {
  std::string instance;  // bank base name; the connection covers all members
  std::string port;
};

struct ConnectOptions {
  bool broadcast = false;  // repeat the source channel list cyclically
  bool physical = false;   // excluded from causality analysis
  std::optional<LogicalDelay> delay;  // engaged (even zero) means delayed
};

struct ConnectionDecl {
  PortRef from;
  PortRef to;
  ConnectOptions opts;
};

// ---- flattened program ----------------------------------------------------

struct PortSpan {
  uint32_t first = 0;  // global id of channel 0
  uint32_t width = 0;
  PortDir dir = PortDir::input;
};

struct FlatInstance {
  std::string name;       // "rollout[3]" or "coordinator"
  std::string base_name;  // instantiation name without the bank suffix
  std::string class_name;
  uint32_t class_index = 0;
  uint32_t bank_index = 0;
  uint32_t bank_width = 1;
  std::map<std::string, PortSpan, std::less<>> ports;
  std::map<std::string, uint32_t, std::less<>> actions;  // name -> global id
};

struct FlatPort {
  uint32_t instance;
  uint32_t decl_index;  // into the class's port list
  uint32_t channel;
  PortDir dir;
};

struct FlatLink {
  uint32_t from_port;  // output channel
  uint32_t to_port;    // input channel
  bool physical;
  std::optional<LogicalDelay> delay;

  bool is_direct() const { return !physical && !delay.has_value(); }
};

struct FlatAction {
  uint32_t instance;
  std::string name;
  ActionKind kind;
  LogicalDelay min_delay;
};

struct FlatTimer {
  uint32_t instance;
  std::string name;
  uint64_t offset_ns;
  uint64_t period_ns;
};

struct FlatReaction {
  uint32_t id;
  uint32_t instance;
  uint32_t class_reaction_index;
  std::string name;  // "inst[k].rname"
  bool on_startup = false;
  bool on_shutdown = false;
  std::vector<uint32_t> trigger_ports;
  std::vector<uint32_t> trigger_actions;
  std::vector<uint32_t> trigger_timers;
  std::vector<uint32_t> source_ports;
  std::vector<uint32_t> effect_ports;
  std::vector<uint32_t> effect_actions;
  std::optional<DeadlineDecl> deadline;
};

enum class DepKind : uint8_t { order, data };

struct DepEdge {
  uint32_t from;  // reaction ids
  uint32_t to;
  DepKind kind;
};

struct LevelMap {
  std::vector<uint32_t> level;  // indexed by reaction id
  std::vector<uint32_t> per_level_count;
  uint32_t max_level = 0;
  uint32_t max_per_level = 0;
};

/// Immutable flattened program. Structure is fixed after build(); causality
/// validation and level assignment are explicit follow-up steps so that a
/// structurally valid but cyclic program can still be inspected and exported.
class Program {
 public:
  const std::vector<FlatInstance>& instances() const { return instances_; }
  const std::vector<FlatPort>& ports() const { return ports_; }
  const std::vector<FlatLink>& links() const { return links_; }
  const std::vector<FlatAction>& actions() const { return actions_; }
  const std::vector<FlatTimer>& timers() const { return timers_; }
  const std::vector<FlatReaction>& reactions() const { return reactions_; }
  const std::vector<DepEdge>& dependency_edges() const { return dep_edges_; }

  /// Throws CycleError naming the reaction cycle if the zero-delay
  /// dependency graph is cyclic.
  void validate_causality() const;

  /// Longest-path levels over the zero-delay dependency graph. Validates
  /// causality on first use and caches the result.
  const LevelMap& levels() const;
  bool levels_assigned() const { return level_map_.has_value(); }

  std::string export_graph(std::string_view format) const;  // "dot" | "json"

  std::string port_name(uint32_t port_id) const;       // "inst[k].port[ch]"
  const std::string& reaction_name(uint32_t id) const { return reactions_[id].name; }

  // Runtime lookups, precomputed at build time.
  const std::vector<uint32_t>& reactions_of_port(uint32_t port_id) const {
    return port_readers_[port_id];
  }
  const std::vector<uint32_t>& links_of_port(uint32_t port_id) const {
    return port_links_[port_id];
  }
  const std::vector<uint32_t>& reactions_of_action(uint32_t action_id) const {
    return action_readers_[action_id];
  }
  const std::vector<uint32_t>& reactions_of_timer(uint32_t timer_id) const {
    return timer_readers_[timer_id];
  }
  const std::vector<uint32_t>& startup_reactions() const { return startup_; }
  const std::vector<uint32_t>& shutdown_reactions() const { return shutdown_; }

  const ReactionBody& body_of(const FlatReaction& r) const;
  StateFactory state_factory_of(uint32_t instance) const;

 private:
  friend class ProgramBuilder;
  Program() = default;

  std::vector<FlatInstance> instances_;
  std::vector<FlatPort> ports_;
  std::vector<FlatLink> links_;
  std::vector<FlatAction> actions_;
  std::vector<FlatTimer> timers_;
  std::vector<FlatReaction> reactions_;
  std::vector<DepEdge> dep_edges_;

  std::vector<std::vector<uint32_t>> port_readers_;  // triggered or sourced
  std::vector<std::vector<uint32_t>> port_links_;    // outgoing link ids
  std::vector<std::vector<uint32_t>> action_readers_;
  std::vector<std::vector<uint32_t>> timer_readers_;
  std::vector<uint32_t> startup_;
  std::vector<uint32_t> shutdown_;

  // Bodies and state factories live in the class table; flat reactions
  // reference them by index so std::function objects are not duplicated
  // per bank member.
  struct ClassTable {
    std::vector<ReactionDecl> reactions;
    StateFactory state_factory;
  };
  std::vector<ClassTable> class_tables_;

  mutable std::optional<LevelMap> level_map_;
};

class ProgramBuilder {
 public:
  ReactorClass& reactor_class(std::string name);
  ProgramBuilder& instantiate(std::string class_name, std::string instance_name,
                              uint32_t bank_width = 1);
  ProgramBuilder& connect(PortRef from, PortRef to, ConnectOptions opts = {});

  /// Flattens and validates structure. Throws ValidationError carrying every
  /// issue found. Does not check causality; see Program::validate_causality.
  std::shared_ptr<Program> build() const;

 private:
  std::vector<ReactorClass> classes_;
  std::vector<ChildDecl> main_children_;
  std::vector<ConnectionDecl> main_connections_;
};

}  // namespace reflow
