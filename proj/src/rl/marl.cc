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

#include "actor/actor_system.hh"
#include "actor/codec.hh"
#include "core/errors.hh"
#include "rl/envs.hh"
#include "rl/pipeline.hh"

namespace reflow::rl {

namespace {

// Policy side of one agent: local observation in, one action out.
struct AgentCore {
  std::unique_ptr<QFunction> q;
  SplitMix64 rng{0};
  double eps = 0.2;
  uint64_t actions = 0;

  uint32_t decide(uint32_t obs_id) {
    ++actions;
    return epsilon_greedy(*q, obs_id, eps, rng);
  }
};

// Environment side: owns the shared junction and the episode budget.
struct JunctionCore {
  std::unique_ptr<Environment> env;
  SplitMix64 reset_rng{0};
  uint32_t agents = 0;
  uint32_t episode_target = 0;
  std::vector<Observation> pending;
  std::vector<uint32_t> joint;
  double episode_return = 0.0;
  std::vector<double> episode_returns;
  uint64_t env_steps = 0;
  uint64_t episodes = 0;
  uint64_t collisions = 0;
  uint64_t joint_actions = 0;

  void begin_episode() {
    pending = env->reset(reset_rng.next_u64());
    episode_return = 0.0;
  }

  // Applies one joint step; returns false once the episode budget is spent.
  bool apply(std::span<const uint32_t> actions) {
    EnvStep st = env->step(actions);
    ++env_steps;
    joint_actions += actions.size();
    bool crashed = false;
    for (float r : st.reward) {
      episode_return += static_cast<double>(r);
      if (r == TrafficJunctionEnv::kCollisionReward) crashed = true;
    }
    if (crashed) ++collisions;
    if (!st.done) {
      pending = std::move(st.obs);
      return true;
    }
    ++episodes;
    episode_returns.push_back(episode_return);
    if (episodes < episode_target) {
      begin_episode();
      return true;
    }
    return false;
  }

  double mean_return() const {
    if (episode_returns.empty()) return 0.0;
    double acc = 0.0;
    for (double r : episode_returns) acc += r;
    return acc / static_cast<double>(episode_returns.size());
  }
};

AgentCore make_agent_core(const MarlConfig& cfg, uint32_t agent) {
  AgentCore c;
  auto probe = make_environment("traffic-junction(" +
                                std::to_string(cfg.agents) + ")");
  c.q = make_tabular_q(probe->state_count(), probe->action_count(),
                       QUpdateConfig{0.1, 0.9, 1});
  c.rng = SplitMix64(cfg.seed + agent);
  c.eps = cfg.eps;
  return c;
}

JunctionCore make_junction_core(const MarlConfig& cfg) {
  JunctionCore c;
  c.env = make_environment("traffic-junction(" + std::to_string(cfg.agents) +
                           ")");
  c.reset_rng = SplitMix64(cfg.seed ^ 0x4a4e4354494f4eull);
  c.agents = cfg.agents;
  c.episode_target = cfg.episodes;
  return c;
}

void validate_marl(const MarlConfig& cfg) {
  if (cfg.agents < 1) throw RuntimeApiError("marl: agents must be >= 1");
  if (cfg.episodes < 1) throw RuntimeApiError("marl: episodes must be >= 1");
  if (cfg.workers < 1) throw RuntimeApiError("marl: workers must be >= 1");
}

void fill_marl_result(const JunctionCore& core, MarlResult& out) {
  out.env_steps = core.env_steps;
  out.episodes = core.episodes;
  out.collisions = core.collisions;
  out.joint_actions = core.joint_actions;
  out.mean_return = core.mean_return();
}

}  // namespace

std::shared_ptr<const Program> build_marl_program(const MarlConfig& cfg) {
  validate_marl(cfg);
  ProgramBuilder b;

  // Same microstep-break shape as the training loop: the junction publishes
  // observations from a zero-delay action scheduled by the collector.
  auto& junction = b.reactor_class("Junction");
  junction.output("obs", cfg.agents)
      .input("act", cfg.agents)
      .logical_action("kick")
      .state([cfg](const InstanceInfo&) {
        return std::make_shared<JunctionCore>(make_junction_core(cfg));
      });
  junction.reaction("publish")
      .triggered_by("kick")
      .writes("obs")
      .body([agents = cfg.agents](ReactionContext& ctx) {
        auto& core = ctx.state<JunctionCore>();
        for (uint32_t i = 0; i < agents; ++i) {
          ctx.set("obs", i, Box<uint32_t>::make(core.pending[i].id));
        }
      });
  junction.reaction("init").on_startup().schedules("kick").body(
      [](ReactionContext& ctx) {
        ctx.state<JunctionCore>().begin_episode();
        ctx.schedule("kick", Value{});
      });
  junction.reaction("collect")
      .triggered_by("act")
      .schedules("kick")
      .body([agents = cfg.agents](ReactionContext& ctx) {
        auto& core = ctx.state<JunctionCore>();
        core.joint.clear();
        for (uint32_t i = 0; i < agents; ++i) {
          core.joint.push_back(unbox<uint32_t>(ctx.get("act", i)));
        }
        if (core.apply(core.joint)) ctx.schedule("kick", Value{});
      });

  auto& agent = b.reactor_class("AgentPolicy");
  agent.input("obs").output("act").state([cfg](const InstanceInfo& info) {
    return std::make_shared<AgentCore>(make_agent_core(cfg, info.bank_index));
  });
  agent.reaction("decide")
      .triggered_by("obs")
      .writes("act")
      .body([](ReactionContext& ctx) {
        auto& core = ctx.state<AgentCore>();
        uint32_t a = core.decide(unbox<uint32_t>(ctx.get("obs")));
        ctx.set("act", Box<uint32_t>::make(a));
      });

  b.instantiate("Junction", "junction");
  b.instantiate("AgentPolicy", "agents", cfg.agents);
  b.connect({"junction", "obs"}, {"agents", "obs"});
  b.connect({"agents", "act"}, {"junction", "act"});
  return b.build();
}

MarlResult run_reactor_marl(const MarlConfig& cfg) {
  auto prog = build_marl_program(cfg);
  RuntimeConfig rc;
  rc.workers = cfg.workers;
  rc.seed = cfg.seed;
  rc.collect_trace = cfg.collect_trace;
  Runtime rt(prog, rc);
  ExecutionReport rep = rt.run();

  MarlResult out;
  out.report = rep;
  out.wall_ns = rep.wall_ns;
  if (rep.faulted) return out;
  auto core = rt.state_of<JunctionCore>("junction");
  fill_marl_result(*core, out);
  return out;
}

MarlResult run_actor_marl(const MarlConfig& cfg) {
  validate_marl(cfg);

  actor::ActorSystem sys;
  std::vector<std::shared_ptr<AgentCore>> agents;
  std::vector<actor::ActorId> refs;
  for (uint32_t i = 0; i < cfg.agents; ++i) {
    agents.push_back(std::make_shared<AgentCore>(make_agent_core(cfg, i)));
    refs.push_back(sys.spawn([core = agents.back()](actor::ActorContext& ctx,
                                                    actor::Message& msg) {
      actor::Decoder dec(msg.bytes);
      uint32_t obs_id = dec.get_u32();
      actor::Encoder enc;
      enc.put_u32(core->decide(obs_id));
      ctx.reply(msg, enc.bytes());
    }));
  }

  JunctionCore core = make_junction_core(cfg);
  auto t0 = std::chrono::steady_clock::now();
  core.begin_episode();
  std::vector<uint64_t> requests(cfg.agents);
  std::vector<uint32_t> joint(cfg.agents);
  bool more = true;
  while (more) {
    // Decentralized decision round: one observation out and one action back
    // per agent, each crossing the mailbox boundary as a copy.
    for (uint32_t i = 0; i < cfg.agents; ++i) {
      actor::Encoder enc;
      enc.put_u32(core.pending[i].id);
      requests[i] = sys.send_request(refs[i], enc.bytes());
    }
    for (uint32_t i = 0; i < cfg.agents; ++i) {
      auto reply = sys.await_reply(requests[i], 10ull * 1000 * 1000 * 1000);
      actor::Decoder dec(reply);
      joint[i] = dec.get_u32();
    }
    more = core.apply(joint);
  }
  uint64_t wall = static_cast<uint64_t>(
      std::chrono::duration_cast<std::chrono::nanoseconds>(
          std::chrono::steady_clock::now() - t0)
          .count());
  sys.shutdown();

  MarlResult out;
  out.wall_ns = wall;
  fill_marl_result(core, out);
  return out;
}

}  // namespace reflow::rl
