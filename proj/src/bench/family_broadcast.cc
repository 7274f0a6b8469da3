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
#include <chrono>
#include <new>

#include "bench/bench.hh"

#include "actor/actor_system.hh"
#include "core/errors.hh"
#include "core/program.hh"
#include "core/runtime.hh"
#include "core/value.hh"

namespace reflow::bench {

namespace {

struct GatherConfig {
  uint32_t fanout;
  uint64_t payload;
  std::string param_name;
  double param_value;
};

struct CoordState {
  uint32_t rounds_total = 0;
  uint64_t payload_bytes = 0;
  Value payload;
  std::vector<uint64_t> marks;  // physical time at each completed gather
};

// One scatter-gather round per microstep: kick broadcasts the shared payload
// to N echo members, each bounces the same value back, gather checks all N
// channels and timestamps the round. The payload is never copied; the cost
// measured here is pure coordination.
std::vector<uint64_t> reactor_rounds(const GatherConfig& gc, uint32_t rounds,
                                     uint32_t workers, uint64_t seed) {
  ProgramBuilder b;

  auto& coord = b.reactor_class("Coordinator");
  coord.output("req", gc.fanout)
      .input("rsp", gc.fanout)
      .logical_action("next")
      .state([rounds, payload = gc.payload](const InstanceInfo&) {
        auto st = std::make_shared<CoordState>();
        st->rounds_total = rounds;
        st->payload_bytes = payload;
        st->payload = Box<std::vector<uint8_t>>::make(
            std::vector<uint8_t>(payload, 0xa5));
        st->marks.reserve(rounds + 2);
        return st;
      });
  coord.reaction("init").on_startup().schedules("next").body(
      [](ReactionContext& ctx) {
        auto& st = ctx.state<CoordState>();
        st.marks.push_back(ctx.physical_now_ns());
        ctx.schedule("next", Value{});
      });
  coord.reaction("kick").triggered_by("next").writes("req").body(
      [](ReactionContext& ctx) {
        ctx.broadcast("req", ctx.state<CoordState>().payload);
      });
  coord.reaction("gather").triggered_by("rsp").schedules("next").body(
      [](ReactionContext& ctx) {
        auto& st = ctx.state<CoordState>();
        for (uint32_t ch = 0; ch < ctx.width("rsp"); ++ch) {
          if (!ctx.present("rsp", ch)) {
            throw RuntimeApiError("gather: missing echo channel");
          }
        }
        if (st.marks.size() == 1) {
          // One-time fairness check: the bounced payload is intact.
          const auto& v = unbox<std::vector<uint8_t>>(ctx.get("rsp", 0));
          if (v.size() != st.payload_bytes) {
            throw RuntimeApiError("gather: wrong payload size bounced");
          }
        }
        st.marks.push_back(ctx.physical_now_ns());
        if (st.marks.size() <= st.rounds_total) ctx.schedule("next", Value{});
      });

  auto& echo = b.reactor_class("Echo");
  echo.input("req").output("rsp");
  echo.reaction("bounce").triggered_by("req").writes("rsp").body(
      [](ReactionContext& ctx) { ctx.set("rsp", ctx.get("req")); });

  b.instantiate("Coordinator", "coord");
  b.instantiate("Echo", "echo", gc.fanout);
  b.connect({"coord", "req"}, {"echo", "req"});
  b.connect({"echo", "rsp"}, {"coord", "rsp"});

  Runtime rt(b.build(), {.workers = workers, .seed = seed});
  ExecutionReport rep = rt.run();
  if (rep.faulted) {
    throw RuntimeApiError("broadcast-gather reactor fault: " +
                          rep.fault_message);
  }
  auto st = rt.state_of<CoordState>("coord");
  std::vector<uint64_t> spans;
  for (size_t i = 1; i < st->marks.size(); ++i) {
    spans.push_back(st->marks[i] - st->marks[i - 1]);
  }
  return spans;
}

// The same N-way round over mailbox actors: every request and every reply is
// deep-copied by the system, so the measured span includes 2N payload copies
// plus wakeups.
std::vector<uint64_t> actor_rounds(const GatherConfig& gc, uint32_t rounds) {
  using Clock = std::chrono::steady_clock;
  actor::ActorSystem sys;
  std::vector<actor::ActorId> refs;
  refs.reserve(gc.fanout);
  for (uint32_t i = 0; i < gc.fanout; ++i) {
    refs.push_back(sys.spawn([](actor::ActorContext& ctx, actor::Message& m) {
      ctx.reply(m, m.bytes);
    }));
  }
  std::vector<uint8_t> payload(gc.payload, 0xa5);
  std::vector<uint64_t> spans;
  spans.reserve(rounds);
  constexpr uint64_t kTimeout = 300ull * 1000 * 1000 * 1000;
  for (uint32_t r = 0; r < rounds; ++r) {
    auto t0 = Clock::now();
    auto replies = sys.broadcast_gather(refs, payload, kTimeout);
    auto t1 = Clock::now();
    if (replies.size() != gc.fanout || replies[0].size() != gc.payload) {
      throw RuntimeApiError("broadcast-gather: bad actor replies");
    }
    spans.push_back(static_cast<uint64_t>(
        std::chrono::duration_cast<std::chrono::nanoseconds>(t1 - t0).count()));
  }
  sys.shutdown();
  return spans;
}

}  // namespace

BenchReport bench_broadcast_gather(const BenchSpec& spec) {
  BenchReport out;

  std::vector<GatherConfig> cfgs;
  if (spec.actors.size() > 1 || spec.bytes.size() == 1) {
    for (uint32_t n : spec.actors) {
      cfgs.push_back({n, spec.bytes.front(), "actors", static_cast<double>(n)});
    }
  }
  if (spec.bytes.size() > 1) {
    for (uint64_t bsz : spec.bytes) {
      cfgs.push_back(
          {spec.actors.back(), bsz, "bytes", static_cast<double>(bsz)});
    }
  }

  const uint32_t rounds = spec.reps + spec.warmup;
  for (const GatherConfig& gc : cfgs) {
    std::vector<uint64_t> reactor, actor;
    try {
      if (spec.runtime != "actor") {
        reactor = reactor_rounds(gc, rounds, spec.workers, spec.seed);
      }
      if (spec.runtime != "reactor") {
        actor = actor_rounds(gc, rounds);
      }
    } catch (const std::bad_alloc&) {
      out.notes.push_back("skipped " + gc.param_name + "=" +
                          std::to_string(static_cast<uint64_t>(gc.param_value)) +
                          ": out of memory");
      continue;
    }

    auto emit = [&](const char* runtime, const std::vector<uint64_t>& spans) {
      for (uint32_t rep = 0; rep < spec.reps && spec.warmup + rep < spans.size();
           ++rep) {
        ResultRow row;
        row.family = "broadcast-gather";
        row.runtime = runtime;
        row.param_name = gc.param_name;
        row.param_value = gc.param_value;
        row.rep = rep;
        row.wall_ns = spans[spec.warmup + rep];
        row.metric_name = "bytes_per_round";
        row.metric_value = 2.0 * static_cast<double>(gc.fanout) *
                           static_cast<double>(gc.payload);
        row.seed = spec.seed;
        row.workers = spec.workers;
        row.reps = spec.reps;
        row.warmup = spec.warmup;
        out.rows.push_back(row);
      }
    };
    if (!reactor.empty()) emit("reactor", reactor);
    if (!actor.empty()) emit("actor", actor);

    if (!reactor.empty() && !actor.empty()) {
      std::vector<double> rm(reactor.begin() + spec.warmup, reactor.end());
      std::vector<double> am(actor.begin() + spec.warmup, actor.end());
      char buf[160];
      std::snprintf(buf, sizeof buf,
                    "broadcast-gather %s=%.0f fanout=%u bytes=%llu: "
                    "actor/reactor mean ratio %.2fx",
                    gc.param_name.c_str(), gc.param_value, gc.fanout,
                    static_cast<unsigned long long>(gc.payload),
                    mean(am) / mean(rm));
      out.notes.push_back(buf);
    }
  }
  return out;
}

}  // namespace reflow::bench
