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
#include <functional>
#include <set>
#include <string>
#include <vector>

#include "core/rng.hh"
#include "doctest.h"

using namespace reflow;

namespace {

const ReactionBody kNop = [](ReactionContext&) {};

// Distributed training loop: a learner bank feeding a rollout bank feeding a
// replay bank feeding back into the learner, every link a full broadcast.
// With `break_cycle`, the learner's parameter emission goes through a
// zero-delay logical action, shifting it one microstep and cutting the
// feedback loop; the emitting reaction is declared first so the intra-reactor
// order chain does not recreate the cycle.
std::shared_ptr<Program> build_training_loop(bool break_cycle,
                                             uint32_t banks = 6,
                                             uint32_t width = 6) {
  ProgramBuilder b;

  auto& rollout = b.reactor_class("RolloutReactor");
  rollout.input("gradients", width).output("trajectories", width);
  rollout.reaction("init").on_startup().body(kNop);
  rollout.reaction("step")
      .triggered_by("gradients")
      .writes("trajectories")
      .body(kNop);

  auto& replay = b.reactor_class("ReplayBufferReactor");
  replay.input("trajectories", width).output("dataset", width);
  replay.reaction("init").on_startup().body(kNop);
  replay.reaction("append")
      .triggered_by("trajectories")
      .writes("dataset")
      .body(kNop);

  auto& learner = b.reactor_class("LearnerReactor");
  learner.output("gradients", width).input("dataset", width);
  if (break_cycle) {
    learner.logical_action("emit");
    learner.reaction("publish")
        .triggered_by("emit")
        .writes("gradients")
        .body(kNop);
    learner.reaction("init").on_startup().schedules("emit").body(kNop);
    learner.reaction("update")
        .triggered_by("dataset")
        .schedules("emit")
        .body(kNop);
  } else {
    learner.reaction("init").on_startup().writes("gradients").body(kNop);
    learner.reaction("update")
        .triggered_by("dataset")
        .writes("gradients")
        .body(kNop);
  }

  b.instantiate("RolloutReactor", "rollout", banks);
  b.instantiate("ReplayBufferReactor", "replay", banks);
  b.instantiate("LearnerReactor", "learner", banks);
  b.connect({"learner", "gradients"}, {"rollout", "gradients"},
            {.broadcast = true});
  b.connect({"rollout", "trajectories"}, {"replay", "trajectories"},
            {.broadcast = true});
  b.connect({"replay", "dataset"}, {"learner", "dataset"},
            {.broadcast = true});
  return b.build();
}

// Independent oracle: longest dependency path ending at each reaction,
// computed by memoized depth-first search over the edge list.
std::vector<uint32_t> brute_force_levels(const Program& p) {
  size_t n = p.reactions().size();
  std::vector<std::vector<uint32_t>> preds(n);
  for (const auto& e : p.dependency_edges()) preds[e.to].push_back(e.from);
  std::vector<int64_t> memo(n, -1);
  std::function<uint32_t(uint32_t)> depth = [&](uint32_t v) -> uint32_t {
    if (memo[v] >= 0) return static_cast<uint32_t>(memo[v]);
    uint32_t best = 0;
    for (uint32_t u : preds[v]) best = std::max(best, depth(u) + 1);
    memo[v] = best;
    return best;
  };
  std::vector<uint32_t> out(n);
  for (uint32_t v = 0; v < n; ++v) out[v] = depth(v);
  return out;
}

bool has_issue(const ValidationError& e, IssueCode c) { return e.has(c); }

}  // namespace

TEST_CASE("training loop flattens to 18 instances and 108 channel links") {
  auto p = build_training_loop(false);
  CHECK(p->instances().size() == 18);
  CHECK(p->links().size() == 108);  // 36 channels per side, three links
  // Channel conservation: each broadcast fans 6 banks x width 6 onto the
  // same count of destination channels.
  size_t in_channels = 0;
  for (const auto& fp : p->ports()) {
    if (fp.dir == PortDir::input) ++in_channels;
  }
  CHECK(in_channels == 108);
  // Each instance carries its bank index.
  std::set<std::string> names;
  for (const auto& i : p->instances()) names.insert(i.name);
  CHECK(names.count("rollout[0]"));
  CHECK(names.count("learner[5]"));
  CHECK(p->instances()[0].bank_width == 6);
}

TEST_CASE("single reactor without connections yields only order edges") {
  ProgramBuilder b;
  auto& c = b.reactor_class("Solo");
  c.reaction("first").on_startup().body(kNop);
  c.reaction("second").on_startup().body(kNop);
  b.instantiate("Solo", "solo");
  auto p = b.build();
  CHECK(p->instances().size() == 1);
  CHECK(p->links().empty());
  REQUIRE(p->dependency_edges().size() == 1);
  CHECK(p->dependency_edges()[0].kind == DepKind::order);
  const LevelMap& lm = p->levels();
  CHECK(lm.level[0] == 0);
  CHECK(lm.level[1] == 1);
}

TEST_CASE("width mismatch without broadcast is rejected") {
  ProgramBuilder b;
  auto& src = b.reactor_class("Src");
  src.output("out", 2);
  src.reaction().on_startup().writes("out").body(kNop);
  auto& dst = b.reactor_class("Dst");
  dst.input("in", 3);
  dst.reaction().triggered_by("in").body(kNop);
  b.instantiate("Src", "s").instantiate("Dst", "d");
  b.connect({"s", "out"}, {"d", "in"});
  try {
    b.build();
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(has_issue(e, IssueCode::width_mismatch));
  }
}

TEST_CASE("broadcast repeats source channels cyclically until filled") {
  ProgramBuilder b;
  auto& src = b.reactor_class("Src");
  src.output("out", 2);
  src.reaction().on_startup().writes("out").body(kNop);
  auto& dst = b.reactor_class("Dst");
  dst.input("in", 3);
  dst.reaction().triggered_by("in").body(kNop);
  b.instantiate("Src", "s").instantiate("Dst", "d");
  b.connect({"s", "out"}, {"d", "in"}, {.broadcast = true});
  auto p = b.build();
  REQUIRE(p->links().size() == 3);
  // Source channel ids are 0,1; destinations 2,3,4 in declaration order.
  CHECK(p->links()[0].from_port == 0);
  CHECK(p->links()[0].to_port == 2);
  CHECK(p->links()[1].from_port == 1);
  CHECK(p->links()[1].to_port == 3);
  CHECK(p->links()[2].from_port == 0);  // wraps around
  CHECK(p->links()[2].to_port == 4);
}

TEST_CASE("two outputs into one input channel is rejected") {
  ProgramBuilder b;
  auto& src = b.reactor_class("Src");
  src.output("out");
  src.reaction().on_startup().writes("out").body(kNop);
  auto& dst = b.reactor_class("Dst");
  dst.input("in");
  dst.reaction().triggered_by("in").body(kNop);
  b.instantiate("Src", "a").instantiate("Src", "b").instantiate("Dst", "d");
  b.connect({"a", "out"}, {"d", "in"});
  b.connect({"b", "out"}, {"d", "in"});
  try {
    b.build();
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(has_issue(e, IssueCode::multiple_writers));
  }
}

TEST_CASE("self and mutual containment are reported as instantiation cycles") {
  {
    ProgramBuilder b;
    auto& a = b.reactor_class("A");
    a.child("A", "inner");
    a.reaction().on_startup().body(kNop);
    b.instantiate("A", "a");
    try {
      b.build();
      FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
      CHECK(has_issue(e, IssueCode::instantiation_cycle));
    }
  }
  {
    ProgramBuilder b;
    auto& a = b.reactor_class("A");
    a.child("B", "b");
    a.reaction().on_startup().body(kNop);
    auto& bb = b.reactor_class("B");
    bb.child("A", "a");
    bb.reaction().on_startup().body(kNop);
    b.instantiate("A", "root");
    try {
      b.build();
      FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
      CHECK(has_issue(e, IssueCode::instantiation_cycle));
    }
  }
}

TEST_CASE("containment deeper than one level under main is rejected") {
  ProgramBuilder b;
  auto& leaf = b.reactor_class("Leaf");
  leaf.reaction().on_startup().body(kNop);
  auto& mid = b.reactor_class("Mid");
  mid.child("Leaf", "leaf");
  mid.reaction().on_startup().body(kNop);
  b.instantiate("Mid", "m");
  try {
    b.build();
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(has_issue(e, IssueCode::nesting_too_deep));
  }
}

TEST_CASE("unresolved references are collected, not thrown one at a time") {
  ProgramBuilder b;
  auto& c = b.reactor_class("C");
  c.input("in");
  c.reaction().triggered_by("nope").body(kNop);
  c.reaction().triggered_by("in").writes("ghost").body(kNop);
  b.instantiate("C", "c").instantiate("Missing", "m");
  b.connect({"c", "badport"}, {"c", "in"});
  try {
    b.build();
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(e.issues().size() >= 3);
    CHECK(has_issue(e, IssueCode::unresolved_reference));
  }
}

TEST_CASE("cyclic training loop is rejected with the offending path") {
  auto p = build_training_loop(false);
  try {
    p->validate_causality();
    FAIL("expected CycleError");
  } catch (const CycleError& e) {
    REQUIRE(e.path().size() >= 4);
    CHECK(e.path().front() == e.path().back());
    // The reported cycle walks learner -> rollout -> replay and back.
    auto touches = [&](const std::string& base) {
      return std::any_of(e.path().begin(), e.path().end(),
                         [&](const std::string& n) {
                           return n.rfind(base, 0) == 0;
                         });
    };
    CHECK(touches("learner"));
    CHECK(touches("rollout"));
    CHECK(touches("replay"));
    // Every consecutive pair must be an actual dependency edge.
    for (size_t i = 0; i + 1 < e.path().size(); ++i) {
      bool edge_exists = false;
      for (const auto& de : p->dependency_edges()) {
        if (p->reaction_name(de.from) == e.path()[i] &&
            p->reaction_name(de.to) == e.path()[i + 1]) {
          edge_exists = true;
          break;
        }
      }
      CHECK(edge_exists);
    }
  }
}

TEST_CASE("microstep break renders the training loop acyclic") {
  auto p = build_training_loop(true);
  CHECK_NOTHROW(p->validate_causality());
  const LevelMap& lm = p->levels();
  // All six rollout step reactions land on one level.
  std::vector<uint32_t> rollout_levels;
  for (const auto& r : p->reactions()) {
    if (r.name.find("rollout") == 0 && r.name.find(".step") != std::string::npos) {
      rollout_levels.push_back(lm.level[r.id]);
    }
  }
  REQUIRE(rollout_levels.size() == 6);
  CHECK(std::set<uint32_t>(rollout_levels.begin(), rollout_levels.end())
            .size() == 1);
  CHECK(lm.per_level_count[rollout_levels[0]] >= 6);
}

TEST_CASE("bank triggered by one upstream source shares a level of count 6") {
  ProgramBuilder b;
  auto& drv = b.reactor_class("Driver");
  drv.output("cmd").logical_action("tick");
  drv.reaction("emit").triggered_by("tick").writes("cmd").body(kNop);
  auto& w = b.reactor_class("Rollout");
  w.input("in");
  w.reaction("step").triggered_by("in").body(kNop);
  b.instantiate("Driver", "drv").instantiate("Rollout", "bank", 6);
  b.connect({"drv", "cmd"}, {"bank", "in"}, {.broadcast = true});
  auto p = b.build();
  const LevelMap& lm = p->levels();
  std::set<uint32_t> bank_levels;
  for (const auto& r : p->reactions()) {
    if (r.name.find("bank") == 0) bank_levels.insert(lm.level[r.id]);
  }
  REQUIRE(bank_levels.size() == 1);
  CHECK(lm.per_level_count[*bank_levels.begin()] == 6);
}

TEST_CASE("two unconnected reactors pass causality validation") {
  ProgramBuilder b;
  auto& c = b.reactor_class("C");
  c.reaction().on_startup().body(kNop);
  b.instantiate("C", "x").instantiate("C", "y");
  auto p = b.build();
  CHECK_NOTHROW(p->validate_causality());
  CHECK(p->levels().level == std::vector<uint32_t>{0, 0});
}

TEST_CASE("chain of three reactors levels 0, 1, 2") {
  ProgramBuilder b;
  auto& head = b.reactor_class("Head");
  head.output("out");
  head.reaction("r").on_startup().writes("out").body(kNop);
  auto& mid = b.reactor_class("Mid");
  mid.input("in").output("out");
  mid.reaction("r").triggered_by("in").writes("out").body(kNop);
  auto& tail = b.reactor_class("Tail");
  tail.input("in");
  tail.reaction("r").triggered_by("in").body(kNop);
  b.instantiate("Head", "a").instantiate("Mid", "b").instantiate("Tail", "c");
  b.connect({"a", "out"}, {"b", "in"});
  b.connect({"b", "out"}, {"c", "in"});
  auto p = b.build();
  const LevelMap& lm = p->levels();
  std::vector<uint32_t> want{0, 1, 2};
  CHECK(lm.level == want);
  CHECK(lm.max_level == 2);
}

TEST_CASE("declaration order alone separates levels inside a reactor") {
  ProgramBuilder b;
  auto& c = b.reactor_class("C");
  c.reaction("r1").on_startup().body(kNop);
  c.reaction("r2").on_startup().body(kNop);
  b.instantiate("C", "c");
  auto p = b.build();
  CHECK(p->levels().level == std::vector<uint32_t>{0, 1});
}

TEST_CASE("startup reactions of different reactors share level zero") {
  ProgramBuilder b;
  auto& c = b.reactor_class("C");
  c.reaction("boot").on_startup().body(kNop);
  b.instantiate("C", "x").instantiate("C", "y").instantiate("C", "z");
  auto p = b.build();
  for (uint32_t l : p->levels().level) CHECK(l == 0);
  CHECK(p->levels().per_level_count[0] == 3);
}

TEST_CASE("delayed and physical connections are excluded from causality") {
  ProgramBuilder b;
  auto& c = b.reactor_class("Node");
  c.input("in").output("out");
  c.reaction("fwd").triggered_by("in").writes("out").body(kNop);
  b.instantiate("Node", "a").instantiate("Node", "b");
  b.connect({"a", "out"}, {"b", "in"});
  // Feedback with an explicit zero delay: one microstep, no cycle.
  b.connect({"b", "out"}, {"a", "in"}, {.delay = LogicalDelay::zero()});
  auto p = b.build();
  CHECK_NOTHROW(p->validate_causality());

  ProgramBuilder b2;
  auto& c2 = b2.reactor_class("Node");
  c2.input("in").output("out");
  c2.reaction("fwd").triggered_by("in").writes("out").body(kNop);
  b2.instantiate("Node", "a").instantiate("Node", "b");
  b2.connect({"a", "out"}, {"b", "in"});
  b2.connect({"b", "out"}, {"a", "in"}, {.physical = true});
  CHECK_NOTHROW(b2.build()->validate_causality());
}

TEST_CASE("levels match the brute-force oracle on random forward programs") {
  SplitMix64 rng(0x5eed);
  for (int iter = 0; iter < 300; ++iter) {
    ProgramBuilder b;
    uint32_t n = 2 + static_cast<uint32_t>(rng.bounded(11));  // up to 12
    for (uint32_t i = 0; i < n; ++i) {
      auto& c = b.reactor_class("C" + std::to_string(i));
      c.input("in").output("out");
      uint32_t reactions = 1 + static_cast<uint32_t>(rng.bounded(2));
      for (uint32_t r = 0; r < reactions; ++r) {
        auto rb = c.reaction();
        if (rng.bounded(2) == 0) {
          rb.on_startup();
        } else {
          rb.triggered_by("in");
        }
        rb.writes("out").body(kNop);
      }
      b.instantiate("C" + std::to_string(i), "n" + std::to_string(i));
    }
    // Forward-only connections keep the graph acyclic by construction; an
    // input accepts at most one writer.
    std::vector<bool> wired(n, false);
    for (uint32_t j = 1; j < n; ++j) {
      if (rng.bounded(4) == 0) continue;  // leave some nodes unconnected
      uint32_t i = static_cast<uint32_t>(rng.bounded(j));
      b.connect({"n" + std::to_string(i), "out"},
                {"n" + std::to_string(j), "in"});
      wired[j] = true;
    }
    auto p = b.build();
    REQUIRE_NOTHROW(p->validate_causality());
    const LevelMap& lm = p->levels();
    std::vector<uint32_t> oracle = brute_force_levels(*p);
    CHECK(lm.level == oracle);
    for (const auto& e : p->dependency_edges()) {
      CHECK(lm.level[e.from] < lm.level[e.to]);
    }
    // Level zero exactly for predecessor-free reactions.
    std::vector<bool> has_pred(p->reactions().size(), false);
    for (const auto& e : p->dependency_edges()) has_pred[e.to] = true;
    for (uint32_t r = 0; r < p->reactions().size(); ++r) {
      CHECK((lm.level[r] == 0) == !has_pred[r]);
    }
  }
}

TEST_CASE("random backward wiring is either acyclic or reports a true cycle") {
  SplitMix64 rng(0xc1c1e);
  int cycles_seen = 0;
  for (int iter = 0; iter < 200; ++iter) {
    ProgramBuilder b;
    uint32_t n = 2 + static_cast<uint32_t>(rng.bounded(6));
    for (uint32_t i = 0; i < n; ++i) {
      auto& c = b.reactor_class("C" + std::to_string(i));
      c.input("in").output("out");
      c.reaction("fwd").triggered_by("in").writes("out").body(kNop);
      b.instantiate("C" + std::to_string(i), "n" + std::to_string(i));
    }
    std::vector<bool> used(n, false);
    for (uint32_t j = 0; j < n; ++j) {
      uint32_t i = static_cast<uint32_t>(rng.bounded(n));
      if (used[j] || i == j) continue;
      b.connect({"n" + std::to_string(i), "out"},
                {"n" + std::to_string(j), "in"});
      used[j] = true;
    }
    auto p = b.build();
    try {
      p->validate_causality();
      const LevelMap& lm = p->levels();
      for (const auto& e : p->dependency_edges()) {
        CHECK(lm.level[e.from] < lm.level[e.to]);
      }
    } catch (const CycleError& e) {
      ++cycles_seen;
      REQUIRE(e.path().size() >= 2);
      CHECK(e.path().front() == e.path().back());
      for (size_t i = 0; i + 1 < e.path().size(); ++i) {
        bool edge_exists = false;
        for (const auto& de : p->dependency_edges()) {
          if (p->reaction_name(de.from) == e.path()[i] &&
              p->reaction_name(de.to) == e.path()[i + 1]) {
            edge_exists = true;
            break;
          }
        }
        CHECK(edge_exists);
      }
    }
  }
  CHECK(cycles_seen > 0);  // the generator must actually exercise both arms
}

TEST_CASE("building twice yields structurally equal graphs") {
  ProgramBuilder b;
  auto& c = b.reactor_class("C");
  c.input("in", 2).output("out", 2).logical_action("a").timer("t", 0, 1000);
  c.reaction("r1").on_startup().writes("out").schedules("a").body(kNop);
  c.reaction("r2").triggered_by("in").triggered_by("a").body(kNop);
  b.instantiate("C", "x", 3).instantiate("C", "y");
  b.connect({"x", "out"}, {"y", "in"}, {.broadcast = true});
  auto p1 = b.build();
  auto p2 = b.build();
  CHECK(p1->export_graph("json") == p2->export_graph("json"));
  CHECK(p1->export_graph("dot") == p2->export_graph("dot"));
}

TEST_CASE("export contains instances and channel edges, byte stable") {
  auto p = build_training_loop(true);
  std::string json = p->export_graph("json");
  CHECK(json == p->export_graph("json"));
  size_t logical_edges = 0;
  size_t pos = 0;
  while ((pos = json.find("\"logical\"", pos)) != std::string::npos) {
    ++logical_edges;
    pos += 9;
  }
  CHECK(logical_edges == 108);
  for (int i = 0; i < 6; ++i) {
    CHECK(json.find("rollout[" + std::to_string(i) + "]") !=
          std::string::npos);
    CHECK(json.find("replay[" + std::to_string(i) + "]") != std::string::npos);
    CHECK(json.find("learner[" + std::to_string(i) + "]") !=
          std::string::npos);
  }
  std::string dot = p->export_graph("dot");
  CHECK(dot.find("digraph") == 0);
  CHECK(dot.find("learner[0].publish") != std::string::npos);
}

TEST_CASE("empty program exports header and footer only") {
  ProgramBuilder b;
  auto p = b.build();
  std::string dot = p->export_graph("dot");
  CHECK(dot ==
        "digraph program {\n  rankdir=LR;\n  node [shape=box];\n}\n");
  std::string json = p->export_graph("json");
  CHECK(json.find("\"reactors\": []") != std::string::npos);
}

TEST_CASE("unsupported export format raises") {
  ProgramBuilder b;
  auto p = b.build();
  CHECK_THROWS_AS((void)p->export_graph("yaml"), RuntimeApiError);
}

TEST_CASE("channel conservation over random widths and banks") {
  SplitMix64 rng(0xabcd);
  for (int iter = 0; iter < 50; ++iter) {
    uint32_t src_bank = 1 + static_cast<uint32_t>(rng.bounded(4));
    uint32_t src_width = 1 + static_cast<uint32_t>(rng.bounded(4));
    uint32_t dst_bank = 1 + static_cast<uint32_t>(rng.bounded(4));
    uint32_t dst_width = 1 + static_cast<uint32_t>(rng.bounded(4));
    ProgramBuilder b;
    auto& s = b.reactor_class("S");
    s.output("out", src_width);
    s.reaction().on_startup().writes("out").body(kNop);
    auto& d = b.reactor_class("D");
    d.input("in", dst_width);
    d.reaction().triggered_by("in").body(kNop);
    b.instantiate("S", "s", src_bank).instantiate("D", "d", dst_bank);
    b.connect({"s", "out"}, {"d", "in"}, {.broadcast = true});
    auto p = b.build();
    size_t total_out = size_t{src_bank} * src_width;
    size_t total_in = size_t{dst_bank} * dst_width;
    CHECK(p->links().size() == total_in);
    size_t outs = 0, ins = 0;
    for (const auto& fp : p->ports()) {
      (fp.dir == PortDir::output ? outs : ins) += 1;
    }
    CHECK(outs == total_out);
    CHECK(ins == total_in);
  }
}
