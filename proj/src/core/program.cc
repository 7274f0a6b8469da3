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
#include "core/program.hh"

#include <algorithm>
#include <deque>
#include <unordered_map>
#include <unordered_set>

namespace reflow {

// ---- fluent builders --------------------------------------------------------

ReactionBuilder& ReactionBuilder::on_startup() {
  decl_.triggers.push_back({TriggerRef::Kind::startup, {}});
  return *this;
}

ReactionBuilder& ReactionBuilder::on_shutdown() {
  decl_.triggers.push_back({TriggerRef::Kind::shutdown, {}});
  return *this;
}

ReactionBuilder& ReactionBuilder::triggered_by(std::string_view name) {
  decl_.triggers.push_back({TriggerRef::Kind::named, std::string(name)});
  return *this;
}

ReactionBuilder& ReactionBuilder::reads(std::string_view port) {
  decl_.sources.emplace_back(port);
  return *this;
}

ReactionBuilder& ReactionBuilder::writes(std::string_view port) {
  decl_.effect_ports.emplace_back(port);
  return *this;
}

ReactionBuilder& ReactionBuilder::schedules(std::string_view action) {
  decl_.effect_actions.emplace_back(action);
  return *this;
}

ReactionBuilder& ReactionBuilder::with_deadline(uint64_t threshold_ns,
                                                ReactionBody handler) {
  decl_.deadline = DeadlineDecl{threshold_ns, std::move(handler)};
  return *this;
}

ReactorClass& ReactionBuilder::body(ReactionBody fn) {
  decl_.body = std::move(fn);
  return owner_;
}

ReactorClass& ReactorClass::input(std::string name, uint32_t width) {
  ports_.push_back({std::move(name), PortDir::input, width});
  return *this;
}

ReactorClass& ReactorClass::output(std::string name, uint32_t width) {
  ports_.push_back({std::move(name), PortDir::output, width});
  return *this;
}

ReactorClass& ReactorClass::logical_action(std::string name,
                                           LogicalDelay min_delay) {
  actions_.push_back({std::move(name), ActionKind::logical, min_delay});
  return *this;
}

ReactorClass& ReactorClass::physical_action(std::string name,
                                            LogicalDelay min_delay) {
  actions_.push_back({std::move(name), ActionKind::physical, min_delay});
  return *this;
}

ReactorClass& ReactorClass::timer(std::string name, uint64_t offset_ns,
                                  uint64_t period_ns) {
  timers_.push_back({std::move(name), offset_ns, period_ns});
  return *this;
}

ReactorClass& ReactorClass::state(StateFactory factory) {
  state_factory_ = std::move(factory);
  return *this;
}

ReactorClass& ReactorClass::child(std::string class_name,
                                  std::string instance_name,
                                  uint32_t bank_width) {
  children_.push_back({std::move(class_name), std::move(instance_name),
                       bank_width});
  return *this;
}

ReactionBuilder ReactorClass::reaction(std::string name) {
  if (name.empty()) name = "r" + std::to_string(reactions_.size() + 1);
  reactions_.push_back(ReactionDecl{});
  reactions_.back().name = std::move(name);
  return ReactionBuilder(*this, reactions_.back());
}

ReactorClass& ProgramBuilder::reactor_class(std::string name) {
  classes_.push_back(ReactorClass(std::move(name)));
  return classes_.back();
}

ProgramBuilder& ProgramBuilder::instantiate(std::string class_name,
                                            std::string instance_name,
                                            uint32_t bank_width) {
  main_children_.push_back({std::move(class_name), std::move(instance_name),
                            bank_width});
  return *this;
}

ProgramBuilder& ProgramBuilder::connect(PortRef from, PortRef to,
                                        ConnectOptions opts) {
  main_connections_.push_back({std::move(from), std::move(to), opts});
  return *this;
}

// ---- build ------------------------------------------------------------------

namespace {

struct IssueSink {
  std::vector<ValidationIssue> issues;
  void add(IssueCode code, std::string msg) {
    issues.push_back({code, std::move(msg)});
  }
  void raise_if_any() {
    if (!issues.empty()) throw ValidationError(std::move(issues));
  }
};

// Walks the class containment relation looking for a cycle; on hit, fills
// `path` with class names in cycle order.
bool find_containment_cycle(
    const std::string& cls,
    const std::unordered_map<std::string, std::vector<std::string>>& contains,
    std::unordered_set<std::string>& entered,
    std::unordered_set<std::string>& done, std::vector<std::string>& path) {
  if (done.count(cls)) return false;
  if (entered.count(cls)) {
    path.push_back(cls);
    return true;
  }
  entered.insert(cls);
  auto it = contains.find(cls);
  if (it != contains.end()) {
    for (const auto& sub : it->second) {
      if (find_containment_cycle(sub, contains, entered, done, path)) {
        if (path.size() < 2 || path.front() != path.back()) {
          path.push_back(cls);
        }
        return true;
      }
    }
  }
  entered.erase(cls);
  done.insert(cls);
  return false;
}

}  // namespace

std::shared_ptr<Program> ProgramBuilder::build() const {
  IssueSink sink;

  std::unordered_map<std::string, uint32_t> class_index;
  for (uint32_t i = 0; i < classes_.size(); ++i) {
    const auto& c = classes_[i];
    if (!class_index.emplace(c.name_, i).second) {
      sink.add(IssueCode::bad_declaration,
               "duplicate reactor class name '" + c.name_ + "'");
    }
  }

  // Per-class declaration checks. Ports, actions, and timers share one
  // namespace so that trigger references stay unambiguous.
  for (const auto& c : classes_) {
    std::unordered_set<std::string> names;
    auto claim = [&](const std::string& n, const char* what) {
      if (n.empty()) {
        sink.add(IssueCode::bad_declaration,
                 std::string("empty ") + what + " name in class '" + c.name_ +
                     "'");
        return;
      }
      if (!names.insert(n).second) {
        sink.add(IssueCode::bad_declaration,
                 "duplicate declaration '" + n + "' in class '" + c.name_ +
                     "'");
      }
    };
    for (const auto& p : c.ports_) {
      claim(p.name, "port");
      if (p.width < 1) {
        sink.add(IssueCode::bad_declaration,
                 "port '" + c.name_ + "." + p.name + "' has width 0");
      }
    }
    for (const auto& a : c.actions_) claim(a.name, "action");
    for (const auto& t : c.timers_) claim(t.name, "timer");

    auto find_port = [&](const std::string& n) -> const PortDecl* {
      for (const auto& p : c.ports_) {
        if (p.name == n) return &p;
      }
      return nullptr;
    };
    auto is_action = [&](const std::string& n) {
      return std::any_of(c.actions_.begin(), c.actions_.end(),
                         [&](const ActionDecl& a) { return a.name == n; });
    };
    auto is_timer = [&](const std::string& n) {
      return std::any_of(c.timers_.begin(), c.timers_.end(),
                         [&](const TimerDecl& t) { return t.name == n; });
    };

    for (const auto& r : c.reactions_) {
      std::string where = c.name_ + "." + r.name;
      if (!r.body) {
        sink.add(IssueCode::bad_declaration,
                 "reaction '" + where + "' has no body");
      }
      if (r.triggers.empty()) {
        sink.add(IssueCode::bad_declaration,
                 "reaction '" + where + "' has no triggers");
      }
      for (const auto& t : r.triggers) {
        if (t.kind != TriggerRef::Kind::named) continue;
        if (const PortDecl* p = find_port(t.name)) {
          if (p->dir != PortDir::input) {
            sink.add(IssueCode::bad_declaration,
                     "reaction '" + where + "' triggered by output port '" +
                         t.name + "'");
          }
        } else if (!is_action(t.name) && !is_timer(t.name)) {
          sink.add(IssueCode::unresolved_reference,
                   "reaction '" + where + "' trigger '" + t.name +
                       "' is not a port, action, or timer");
        }
      }
      for (const auto& s : r.sources) {
        const PortDecl* p = find_port(s);
        if (!p) {
          sink.add(IssueCode::unresolved_reference,
                   "reaction '" + where + "' source port '" + s +
                       "' not declared");
        } else if (p->dir != PortDir::input) {
          sink.add(IssueCode::bad_declaration,
                   "reaction '" + where + "' source '" + s +
                       "' must be an input port");
        }
      }
      for (const auto& e : r.effect_ports) {
        const PortDecl* p = find_port(e);
        if (!p) {
          sink.add(IssueCode::unresolved_reference,
                   "reaction '" + where + "' effect port '" + e +
                       "' not declared");
        } else if (p->dir != PortDir::output) {
          sink.add(IssueCode::bad_declaration,
                   "reaction '" + where + "' writes input port '" + e + "'");
        }
      }
      for (const auto& e : r.effect_actions) {
        if (!is_action(e)) {
          sink.add(IssueCode::unresolved_reference,
                   "reaction '" + where + "' schedules unknown action '" + e +
                       "'");
        }
      }
    }
  }

  // Containment cycles over the class relation, then the one-level limit.
  {
    std::unordered_map<std::string, std::vector<std::string>> contains;
    for (const auto& c : classes_) {
      for (const auto& ch : c.children_) {
        contains[c.name_].push_back(ch.class_name);
        if (!class_index.count(ch.class_name)) {
          sink.add(IssueCode::unresolved_reference,
                   "class '" + c.name_ + "' contains unknown class '" +
                       ch.class_name + "'");
        }
      }
    }
    std::unordered_set<std::string> entered, done;
    for (const auto& c : classes_) {
      std::vector<std::string> path;
      if (find_containment_cycle(c.name_, contains, entered, done, path)) {
        std::reverse(path.begin(), path.end());
        std::string msg = "reactor containment cycle: ";
        for (size_t i = 0; i < path.size(); ++i) {
          if (i > 0) msg += " -> ";
          msg += path[i];
        }
        sink.add(IssueCode::instantiation_cycle, msg);
        break;
      }
    }
  }

  std::unordered_set<std::string> child_names;
  for (const auto& ch : main_children_) {
    if (!child_names.insert(ch.instance_name).second) {
      sink.add(IssueCode::bad_declaration,
               "duplicate instance name '" + ch.instance_name + "'");
    }
    if (ch.bank_width < 1) {
      sink.add(IssueCode::bad_declaration,
               "instance '" + ch.instance_name + "' has bank width 0");
    }
    auto it = class_index.find(ch.class_name);
    if (it == class_index.end()) {
      sink.add(IssueCode::unresolved_reference,
               "instance '" + ch.instance_name + "' references unknown class '" +
                   ch.class_name + "'");
    } else if (!classes_[it->second].children_.empty()) {
      sink.add(IssueCode::nesting_too_deep,
               "class '" + ch.class_name +
                   "' declares contained reactors; only the main reactor may "
                   "contain others");
    }
  }

  sink.raise_if_any();

  // ---- flatten instances, ports, actions, timers, reactions ----
  auto prog = std::shared_ptr<Program>(new Program());

  prog->class_tables_.resize(classes_.size());
  for (uint32_t i = 0; i < classes_.size(); ++i) {
    prog->class_tables_[i].reactions = classes_[i].reactions_;
    prog->class_tables_[i].state_factory = classes_[i].state_factory_;
  }

  for (const auto& ch : main_children_) {
    uint32_t ci = class_index.at(ch.class_name);
    const ReactorClass& cls = classes_[ci];
    for (uint32_t b = 0; b < ch.bank_width; ++b) {
      FlatInstance inst;
      inst.base_name = ch.instance_name;
      inst.name = ch.bank_width == 1
                      ? ch.instance_name
                      : ch.instance_name + "[" + std::to_string(b) + "]";
      inst.class_name = ch.class_name;
      inst.class_index = ci;
      inst.bank_index = b;
      inst.bank_width = ch.bank_width;
      uint32_t inst_id = static_cast<uint32_t>(prog->instances_.size());

      for (uint32_t pi = 0; pi < cls.ports_.size(); ++pi) {
        const PortDecl& p = cls.ports_[pi];
        PortSpan span{static_cast<uint32_t>(prog->ports_.size()), p.width,
                      p.dir};
        inst.ports.emplace(p.name, span);
        for (uint32_t chn = 0; chn < p.width; ++chn) {
          prog->ports_.push_back({inst_id, pi, chn, p.dir});
        }
      }
      for (const auto& a : cls.actions_) {
        inst.actions.emplace(a.name,
                             static_cast<uint32_t>(prog->actions_.size()));
        prog->actions_.push_back({inst_id, a.name, a.kind, a.min_delay});
      }
      for (const auto& t : cls.timers_) {
        prog->timers_.push_back({inst_id, t.name, t.offset_ns, t.period_ns});
      }
      for (uint32_t ri = 0; ri < cls.reactions_.size(); ++ri) {
        const ReactionDecl& r = cls.reactions_[ri];
        FlatReaction fr;
        fr.id = static_cast<uint32_t>(prog->reactions_.size());
        fr.instance = inst_id;
        fr.class_reaction_index = ri;
        fr.name = inst.name + "." + r.name;
        for (const auto& t : r.triggers) {
          switch (t.kind) {
            case TriggerRef::Kind::startup:
              fr.on_startup = true;
              break;
            case TriggerRef::Kind::shutdown:
              fr.on_shutdown = true;
              break;
            case TriggerRef::Kind::named: {
              auto pit = inst.ports.find(t.name);
              if (pit != inst.ports.end()) {
                for (uint32_t chn = 0; chn < pit->second.width; ++chn) {
                  fr.trigger_ports.push_back(pit->second.first + chn);
                }
                break;
              }
              auto ait = inst.actions.find(t.name);
              if (ait != inst.actions.end()) {
                fr.trigger_actions.push_back(ait->second);
                break;
              }
              for (uint32_t ti = 0; ti < prog->timers_.size(); ++ti) {
                if (prog->timers_[ti].instance == inst_id &&
                    prog->timers_[ti].name == t.name) {
                  fr.trigger_timers.push_back(ti);
                  break;
                }
              }
              break;
            }
          }
        }
        for (const auto& s : r.sources) {
          const PortSpan& span = inst.ports.at(s);
          for (uint32_t chn = 0; chn < span.width; ++chn) {
            fr.source_ports.push_back(span.first + chn);
          }
        }
        for (const auto& e : r.effect_ports) {
          const PortSpan& span = inst.ports.at(e);
          for (uint32_t chn = 0; chn < span.width; ++chn) {
            fr.effect_ports.push_back(span.first + chn);
          }
        }
        for (const auto& e : r.effect_actions) {
          fr.effect_actions.push_back(inst.actions.at(e));
        }
        fr.deadline = r.deadline;
        prog->reactions_.push_back(std::move(fr));
      }
      prog->instances_.push_back(std::move(inst));
    }
  }

  // ---- expand connections into channel links ----
  auto channels_of = [&](const PortRef& ref, PortDir want,
                         std::vector<uint32_t>& out) -> bool {
    bool found = false;
    for (const auto& inst : prog->instances_) {
      if (inst.base_name != ref.instance) continue;
      found = true;
      auto pit = inst.ports.find(ref.port);
      if (pit == inst.ports.end()) {
        sink.add(IssueCode::unresolved_reference,
                 "connection references unknown port '" + ref.instance + "." +
                     ref.port + "'");
        return false;
      }
      if (pit->second.dir != want) {
        sink.add(IssueCode::bad_declaration,
                 "connection uses '" + ref.instance + "." + ref.port +
                     (want == PortDir::output ? "' as a source but it is an input"
                                              : "' as a destination but it is an output"));
        return false;
      }
      for (uint32_t chn = 0; chn < pit->second.width; ++chn) {
        out.push_back(pit->second.first + chn);
      }
    }
    if (!found) {
      sink.add(IssueCode::unresolved_reference,
               "connection references unknown instance '" + ref.instance + "'");
    }
    return found;
  };

  for (const auto& conn : main_connections_) {
    std::vector<uint32_t> from_ch, to_ch;
    if (!channels_of(conn.from, PortDir::output, from_ch)) continue;
    if (!channels_of(conn.to, PortDir::input, to_ch)) continue;
    if (from_ch.empty() || to_ch.empty()) continue;

    if (!conn.opts.broadcast && from_ch.size() != to_ch.size()) {
      sink.add(IssueCode::width_mismatch,
               "connection " + conn.from.instance + "." + conn.from.port +
                   " -> " + conn.to.instance + "." + conn.to.port + " maps " +
                   std::to_string(from_ch.size()) + " channels onto " +
                   std::to_string(to_ch.size()) +
                   " (use broadcast for cyclic fill)");
      continue;
    }
    for (size_t i = 0; i < to_ch.size(); ++i) {
      uint32_t src = from_ch[i % from_ch.size()];
      prog->links_.push_back(
          {src, to_ch[i], conn.opts.physical, conn.opts.delay});
    }
  }

  // Single writer per input channel, counting both connections and nothing
  // else (reactions write outputs only, enforced above).
  {
    std::vector<uint32_t> writer_count(prog->ports_.size(), 0);
    for (const auto& l : prog->links_) {
      if (++writer_count[l.to_port] == 2) {
        sink.add(IssueCode::multiple_writers,
                 "input channel '" + prog->port_name(l.to_port) +
                     "' has more than one writer");
      }
    }
  }

  sink.raise_if_any();

  // ---- runtime lookup tables ----
  prog->port_readers_.resize(prog->ports_.size());
  prog->port_links_.resize(prog->ports_.size());
  prog->action_readers_.resize(prog->actions_.size());
  prog->timer_readers_.resize(prog->timers_.size());
  for (const auto& r : prog->reactions_) {
    for (uint32_t p : r.trigger_ports) prog->port_readers_[p].push_back(r.id);
    for (uint32_t a : r.trigger_actions)
      prog->action_readers_[a].push_back(r.id);
    for (uint32_t t : r.trigger_timers) prog->timer_readers_[t].push_back(r.id);
    if (r.on_startup) prog->startup_.push_back(r.id);
    if (r.on_shutdown) prog->shutdown_.push_back(r.id);
  }
  for (uint32_t li = 0; li < prog->links_.size(); ++li) {
    prog->port_links_[prog->links_[li].from_port].push_back(li);
  }

  // ---- dependency edges ----
  // Declaration order within an instance forms a chain; a zero-delay logical
  // link adds writer -> reader edges (readers include non-triggering sources).
  {
    std::unordered_map<uint64_t, bool> seen;  // dedupe (from<<32|to)
    auto add_edge = [&](uint32_t from, uint32_t to, DepKind kind) {
      uint64_t key = (static_cast<uint64_t>(from) << 32) | to;
      if (seen.emplace(key, true).second) {
        prog->dep_edges_.push_back({from, to, kind});
      }
    };

    uint32_t first = 0;
    for (uint32_t ii = 0; ii < prog->instances_.size(); ++ii) {
      uint32_t count = 0;
      for (const auto& r : prog->reactions_) {
        if (r.instance == ii) ++count;
      }
      for (uint32_t k = 0; k + 1 < count; ++k) {
        add_edge(first + k, first + k + 1, DepKind::order);
      }
      first += count;
    }

    std::vector<std::vector<uint32_t>> writers(prog->ports_.size());
    std::vector<std::vector<uint32_t>> readers(prog->ports_.size());
    for (const auto& r : prog->reactions_) {
      for (uint32_t p : r.effect_ports) writers[p].push_back(r.id);
      for (uint32_t p : r.trigger_ports) readers[p].push_back(r.id);
      for (uint32_t p : r.source_ports) readers[p].push_back(r.id);
    }
    for (const auto& l : prog->links_) {
      if (!l.is_direct()) continue;
      for (uint32_t w : writers[l.from_port]) {
        for (uint32_t rd : readers[l.to_port]) {
          add_edge(w, rd, DepKind::data);
        }
      }
    }
  }

  return prog;
}

// ---- causality and levels -----------------------------------------------

void Program::validate_causality() const {
  std::vector<uint32_t> indegree(reactions_.size(), 0);
  std::vector<std::vector<uint32_t>> succ(reactions_.size());
  for (const auto& e : dep_edges_) {
    succ[e.from].push_back(e.to);
    ++indegree[e.to];
  }
  std::deque<uint32_t> ready;
  for (uint32_t i = 0; i < reactions_.size(); ++i) {
    if (indegree[i] == 0) ready.push_back(i);
  }
  size_t visited = 0;
  std::vector<uint32_t> deg = indegree;
  while (!ready.empty()) {
    uint32_t n = ready.front();
    ready.pop_front();
    ++visited;
    for (uint32_t s : succ[n]) {
      if (--deg[s] == 0) ready.push_back(s);
    }
  }
  if (visited == reactions_.size()) return;

  // Nodes the topological pass could not remove either sit on a cycle or
  // hang off one downstream; each keeps at least one unremoved predecessor,
  // so walking predecessors must revisit a node and close a cycle.
  std::vector<bool> residual(reactions_.size(), false);
  uint32_t start = 0;
  for (uint32_t i = 0; i < reactions_.size(); ++i) {
    if (deg[i] > 0) {
      residual[i] = true;
      start = i;
    }
  }
  std::vector<std::vector<uint32_t>> pred(reactions_.size());
  for (const auto& e : dep_edges_) pred[e.to].push_back(e.from);

  std::vector<int32_t> pos(reactions_.size(), -1);
  std::vector<uint32_t> walk;
  uint32_t cur = start;
  while (pos[cur] < 0) {
    pos[cur] = static_cast<int32_t>(walk.size());
    walk.push_back(cur);
    for (uint32_t p : pred[cur]) {
      if (residual[p]) {
        cur = p;
        break;
      }
    }
  }
  // walk[i+1] precedes walk[i]; the revisited node closes the loop. Reverse
  // the segment to list the cycle in edge direction.
  std::vector<std::string> names;
  names.push_back(reactions_[cur].name);
  for (size_t i = walk.size(); i-- > static_cast<size_t>(pos[cur]) + 1;) {
    names.push_back(reactions_[walk[i]].name);
  }
  names.push_back(reactions_[cur].name);
  throw CycleError(std::move(names));
}

const LevelMap& Program::levels() const {
  if (level_map_) return *level_map_;
  validate_causality();

  LevelMap lm;
  lm.level.assign(reactions_.size(), 0);
  std::vector<uint32_t> indegree(reactions_.size(), 0);
  std::vector<std::vector<uint32_t>> succ(reactions_.size());
  for (const auto& e : dep_edges_) {
    succ[e.from].push_back(e.to);
    ++indegree[e.to];
  }
  std::deque<uint32_t> ready;
  for (uint32_t i = 0; i < reactions_.size(); ++i) {
    if (indegree[i] == 0) ready.push_back(i);
  }
  while (!ready.empty()) {
    uint32_t n = ready.front();
    ready.pop_front();
    for (uint32_t s : succ[n]) {
      lm.level[s] = std::max(lm.level[s], lm.level[n] + 1);
      if (--indegree[s] == 0) ready.push_back(s);
    }
  }
  for (uint32_t l : lm.level) lm.max_level = std::max(lm.max_level, l);
  lm.per_level_count.assign(lm.max_level + 1, 0);
  if (reactions_.empty()) lm.per_level_count.clear();
  for (uint32_t l : lm.level) ++lm.per_level_count[l];
  for (uint32_t c : lm.per_level_count) {
    lm.max_per_level = std::max(lm.max_per_level, c);
  }
  level_map_ = std::move(lm);
  return *level_map_;
}

std::string Program::port_name(uint32_t port_id) const {
  const FlatPort& p = ports_[port_id];
  const FlatInstance& inst = instances_[p.instance];
  std::string decl_name;
  for (const auto& [name, span] : inst.ports) {
    if (port_id >= span.first && port_id < span.first + span.width) {
      decl_name = name;
      break;
    }
  }
  std::string s = inst.name + "." + decl_name;
  if (inst.ports.at(decl_name).width > 1) {
    s += "[" + std::to_string(p.channel) + "]";
  }
  return s;
}

const ReactionBody& Program::body_of(const FlatReaction& r) const {
  const FlatInstance& inst = instances_[r.instance];
  return class_tables_[inst.class_index]
      .reactions[r.class_reaction_index]
      .body;
}

StateFactory Program::state_factory_of(uint32_t instance) const {
  return class_tables_[instances_[instance].class_index].state_factory;
}

}  // namespace reflow
