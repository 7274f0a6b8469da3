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
#include "rl/pipeline.hh"

#include <chrono>
#include <cstdio>
#include <fstream>

#include "json.hpp"

#include "actor/actor_system.hh"
#include "actor/codec.hh"
#include "core/errors.hh"
#include "core/hash.hh"

namespace reflow::rl {

namespace {

constexpr size_t kReturnWindow = 20;

std::unique_ptr<QFunction> make_q_for(const TrainConfig& cfg,
                                      const Environment& env) {
  QUpdateConfig qc{cfg.alpha, cfg.gamma, cfg.sync_every};
  if (env.name() == "image80") {
    return make_linear_q(env.state_count(), env.action_count(), qc);
  }
  return make_tabular_q(env.state_count(), env.action_count(), qc);
}

void validate_config(const TrainConfig& cfg) {
  if (cfg.banks < 1) throw RuntimeApiError("train: banks must be >= 1");
  if (cfg.rollout_len < 1) {
    throw RuntimeApiError("train: rollout_len must be >= 1");
  }
  if (cfg.batch_size < 1) {
    throw RuntimeApiError("train: batch_size must be >= 1");
  }
  if (cfg.iterations < 1) {
    throw RuntimeApiError("train: iterations must be >= 1");
  }
  if (cfg.workers < 1) throw RuntimeApiError("train: workers must be >= 1");
}

uint64_t combine_hashes(std::span<const uint64_t> hs) {
  Fnv64 h;
  for (uint64_t x : hs) h.mix_u64(x);
  return h.digest();
}

double rolling_mean(const std::deque<double>& window) {
  if (window.empty()) return 0.0;
  double acc = 0.0;
  for (double r : window) acc += r;
  return acc / static_cast<double>(window.size());
}

std::string bank_member(const std::string& base, uint32_t bank,
                        uint32_t width) {
  if (width == 1) return base;
  return base + "[" + std::to_string(bank) + "]";
}

}  // namespace

TrainConfig train_config_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw RuntimeApiError(std::string("train config: ") + e.what());
  }
  if (!j.is_object()) {
    throw RuntimeApiError("train config: top level must be an object");
  }

  TrainConfig cfg;
  try {
    for (const auto& [key, val] : j.items()) {
      if (key == "env") cfg.env = val.get<std::string>();
      else if (key == "banks") cfg.banks = val.get<uint32_t>();
      else if (key == "rollout_len") cfg.rollout_len = val.get<uint32_t>();
      else if (key == "batch_size") cfg.batch_size = val.get<uint32_t>();
      else if (key == "alpha") cfg.alpha = val.get<double>();
      else if (key == "gamma") cfg.gamma = val.get<double>();
      else if (key == "eps_start") cfg.eps.start = val.get<double>();
      else if (key == "eps_end") cfg.eps.end = val.get<double>();
      else if (key == "eps_decay_steps") cfg.eps.decay_steps = val.get<uint64_t>();
      else if (key == "capacity") cfg.capacity = val.get<uint32_t>();
      else if (key == "sync_every") cfg.sync_every = val.get<uint32_t>();
      else if (key == "seed") cfg.seed = val.get<uint64_t>();
      else if (key == "iterations") cfg.iterations = val.get<uint32_t>();
      else if (key == "workers") cfg.workers = val.get<uint32_t>();
      else if (key == "average_params") cfg.average_params = val.get<bool>();
      else if (key == "collect_trace") cfg.collect_trace = val.get<bool>();
      else throw RuntimeApiError("train config: unknown key '" + key + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw RuntimeApiError(std::string("train config: ") + e.what());
  }
  return cfg;
}

std::string train_config_to_json(const TrainConfig& cfg) {
  nlohmann::ordered_json j;
  j["env"] = cfg.env;
  j["banks"] = cfg.banks;
  j["rollout_len"] = cfg.rollout_len;
  j["batch_size"] = cfg.batch_size;
  j["alpha"] = cfg.alpha;
  j["gamma"] = cfg.gamma;
  j["eps_start"] = cfg.eps.start;
  j["eps_end"] = cfg.eps.end;
  j["eps_decay_steps"] = cfg.eps.decay_steps;
  j["capacity"] = cfg.capacity;
  j["sync_every"] = cfg.sync_every;
  j["seed"] = cfg.seed;
  j["iterations"] = cfg.iterations;
  j["workers"] = cfg.workers;
  j["average_params"] = cfg.average_params;
  j["collect_trace"] = cfg.collect_trace;
  return j.dump(2) + "\n";
}

std::string learning_curve_csv(const TrainResult& result) {
  std::string text = "iteration,mean_return,wall_ms\n";
  char line[128];
  for (const IterationPoint& p : result.curve) {
    std::snprintf(line, sizeof line, "%llu,%.6f,%.3f\n",
                  static_cast<unsigned long long>(p.iteration), p.mean_return,
                  static_cast<double>(p.wall_ns) / 1e6);
    text += line;
  }
  return text;
}

void write_learning_curve_csv(const TrainResult& result,
                              const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write learning curve: " + path);
  out << learning_curve_csv(result);
}

RolloutCore make_rollout_core(const TrainConfig& cfg, uint32_t bank) {
  RolloutCore c;
  c.env = make_environment(cfg.env);
  c.q = make_q_for(cfg, *c.env);
  uint64_t bank_seed = cfg.seed + bank;
  c.policy_rng = SplitMix64(bank_seed);
  c.reset_rng = SplitMix64(bank_seed ^ 0x5eedba5e5eedba5eull);
  c.eps = cfg.eps;
  c.steps_per_iter = cfg.rollout_len;
  return c;
}

ReplayCore make_replay_core(const TrainConfig& cfg, uint32_t bank) {
  ReplayCore c{ReplayBuffer(cfg.capacity),
               SplitMix64((cfg.seed + bank) ^ 0x7ab1e5a317ab1e5aull),
               cfg.batch_size, 0};
  return c;
}

LearnerCore make_learner_core(const TrainConfig& cfg, uint32_t bank) {
  (void)bank;  // learners differ only through the batches they receive
  LearnerCore c;
  auto probe = make_environment(cfg.env);
  c.q = make_q_for(cfg, *probe);
  c.iteration_limit = cfg.iterations;
  return c;
}

std::vector<Transition> rollout_collect(RolloutCore& core,
                                        std::span<const double> params) {
  core.q->load_params(params);
  uint32_t agents = core.env->agent_count();
  std::vector<Transition> out;
  out.reserve(static_cast<size_t>(core.steps_per_iter) * agents);

  for (uint32_t k = 0; k < core.steps_per_iter; ++k) {
    if (!core.episode_active) {
      core.obs = core.env->reset(core.reset_rng.next_u64());
      core.episode_active = true;
      core.episode_return = 0.0;
    }
    double eps = core.eps.at(core.global_steps);
    core.action_buf.clear();
    for (uint32_t i = 0; i < agents; ++i) {
      core.action_buf.push_back(
          epsilon_greedy(*core.q, core.obs[i].id, eps, core.policy_rng));
    }
    EnvStep st = core.env->step(core.action_buf);
    for (uint32_t i = 0; i < agents; ++i) {
      out.push_back(Transition{core.obs[i].id, core.action_buf[i],
                               st.reward[i], st.obs[i].id, st.done});
      core.episode_return += static_cast<double>(st.reward[i]);
    }
    core.obs = std::move(st.obs);
    ++core.global_steps;
    if (st.done) {
      core.episode_active = false;
      ++core.episodes;
      core.recent_returns.push_back(core.episode_return);
      if (core.recent_returns.size() > kReturnWindow) {
        core.recent_returns.pop_front();
      }
    }
  }
  core.iter_return.push_back(rolling_mean(core.recent_returns));
  return out;
}

std::vector<Transition> replay_ingest(ReplayCore& core,
                                      std::span<const Transition> batch) {
  core.buf.append(batch);
  core.appended += batch.size();
  return core.buf.sample(core.batch_size, core.sample_rng);
}

std::vector<double> learner_apply(LearnerCore& core,
                                  std::span<const Transition> batch,
                                  uint64_t wall_ns) {
  core.q->update_batch(batch);
  ++core.iterations_done;
  core.iter_hash.push_back(core.q->param_hash());
  core.iter_wall_ns.push_back(wall_ns);
  return core.q->snapshot_params();
}

std::shared_ptr<const Program> build_training_program(const TrainConfig& cfg) {
  validate_config(cfg);
  ProgramBuilder b;

  auto& rollout = b.reactor_class("Rollout");
  rollout.input("gradients")
      .output("trajectories")
      .state([cfg](const InstanceInfo& info) {
        return std::make_shared<RolloutCore>(
            make_rollout_core(cfg, info.bank_index));
      });
  rollout.reaction("step")
      .triggered_by("gradients")
      .writes("trajectories")
      .body([](ReactionContext& ctx) {
        auto& core = ctx.state<RolloutCore>();
        const auto& params = unbox<std::vector<double>>(ctx.get("gradients"));
        auto batch = rollout_collect(core, params);
        ctx.set("trajectories",
                Box<std::vector<Transition>>::make(std::move(batch)));
      });

  auto& replay = b.reactor_class("Replay");
  replay.input("trajectories")
      .output("dataset")
      .state([cfg](const InstanceInfo& info) {
        return std::make_shared<ReplayCore>(
            make_replay_core(cfg, info.bank_index));
      });
  replay.reaction("sample")
      .triggered_by("trajectories")
      .writes("dataset")
      .body([](ReactionContext& ctx) {
        auto& core = ctx.state<ReplayCore>();
        const auto& batch =
            unbox<std::vector<Transition>>(ctx.get("trajectories"));
        auto sampled = replay_ingest(core, batch);
        ctx.set("dataset",
                Box<std::vector<Transition>>::make(std::move(sampled)));
      });

  // The learner's parameter emission goes through the zero-delay logical
  // action "emit", with the publishing reaction declared first. That keeps
  // the learner -> rollout -> replay -> learner loop off the zero-delay
  // dependency graph; each round advances one microstep instead.
  auto& learner = b.reactor_class("Learner");
  learner.output("gradients")
      .input("dataset")
      .logical_action("emit")
      .state([cfg](const InstanceInfo& info) {
        return std::make_shared<LearnerCore>(
            make_learner_core(cfg, info.bank_index));
      });
  learner.reaction("publish")
      .triggered_by("emit")
      .writes("gradients")
      .body([](ReactionContext& ctx) {
        ctx.set("gradients", ctx.action_value("emit"));
      });
  learner.reaction("init").on_startup().schedules("emit").body(
      [](ReactionContext& ctx) {
        auto& core = ctx.state<LearnerCore>();
        ctx.schedule("emit",
                     Box<std::vector<double>>::make(core.q->snapshot_params()));
      });
  if (cfg.average_params) {
    // Declared ahead of "update" so each round loads the cross-bank average
    // of the previous round first and applies the local batch on top of it.
    learner.input("avg_in");
    learner.reaction("load").triggered_by("avg_in").body(
        [](ReactionContext& ctx) {
          auto& core = ctx.state<LearnerCore>();
          core.q->load_params(unbox<std::vector<double>>(ctx.get("avg_in")));
        });
  }
  learner.reaction("update")
      .triggered_by("dataset")
      .schedules("emit")
      .body([](ReactionContext& ctx) {
        auto& core = ctx.state<LearnerCore>();
        const auto& batch =
            unbox<std::vector<Transition>>(ctx.get("dataset"));
        auto params = learner_apply(core, batch, ctx.physical_now_ns());
        if (core.iterations_done < core.iteration_limit) {
          ctx.schedule("emit",
                       Box<std::vector<double>>::make(std::move(params)));
        }
      });

  if (cfg.average_params) {
    auto& avg = b.reactor_class("Averager");
    avg.input("params_in", cfg.banks).output("params_out");
    avg.reaction("mix")
        .triggered_by("params_in")
        .writes("params_out")
        .body([banks = cfg.banks](ReactionContext& ctx) {
          std::vector<double> acc;
          uint32_t n = 0;
          for (uint32_t ch = 0; ch < banks; ++ch) {
            if (!ctx.present("params_in", ch)) continue;
            const auto& p =
                unbox<std::vector<double>>(ctx.get("params_in", ch));
            if (acc.empty()) acc.assign(p.size(), 0.0);
            for (size_t i = 0; i < p.size(); ++i) acc[i] += p[i];
            ++n;
          }
          for (double& x : acc) x /= static_cast<double>(n);
          ctx.set("params_out", Box<std::vector<double>>::make(std::move(acc)));
        });
  }

  b.instantiate("Rollout", "rollout", cfg.banks);
  b.instantiate("Replay", "replay", cfg.banks);
  b.instantiate("Learner", "learner", cfg.banks);
  if (cfg.average_params) {
    b.instantiate("Averager", "averager");
    b.connect({"learner", "gradients"}, {"averager", "params_in"});
    b.connect({"averager", "params_out"}, {"rollout", "gradients"},
              {.broadcast = true});
    b.connect({"averager", "params_out"}, {"learner", "avg_in"},
              {.broadcast = true});
  } else {
    b.connect({"learner", "gradients"}, {"rollout", "gradients"});
  }
  b.connect({"rollout", "trajectories"}, {"replay", "trajectories"});
  b.connect({"replay", "dataset"}, {"learner", "dataset"});
  return b.build();
}

namespace {

// Folds per-bank core records into the cross-bank result.
struct BankRecords {
  std::vector<const RolloutCore*> rollouts;
  std::vector<const LearnerCore*> learners;
  std::vector<const ReplayCore*> replays;
};

void fill_result_from_cores(const TrainConfig& cfg, const BankRecords& banks,
                            TrainResult& out) {
  for (uint32_t i = 0; i < cfg.iterations; ++i) {
    IterationPoint p;
    p.iteration = i;
    Fnv64 h;
    double ret = 0.0;
    uint64_t wall = 0;
    for (uint32_t bk = 0; bk < cfg.banks; ++bk) {
      h.mix_u64(banks.learners[bk]->iter_hash[i]);
      ret += banks.rollouts[bk]->iter_return[i];
      wall = std::max(wall, banks.learners[bk]->iter_wall_ns[i]);
    }
    p.param_hash = h.digest();
    p.mean_return = ret / static_cast<double>(cfg.banks);
    p.wall_ns = wall;
    out.curve.push_back(p);
  }
  for (uint32_t bk = 0; bk < cfg.banks; ++bk) {
    out.bank_param_hashes.push_back(banks.learners[bk]->q->param_hash());
    out.bank_params.push_back(banks.learners[bk]->q->snapshot_params());
    out.env_steps += banks.rollouts[bk]->global_steps;
    out.episodes += banks.rollouts[bk]->episodes;
    out.updates += banks.learners[bk]->q->updates_applied();
  }
  out.param_hash = combine_hashes(out.bank_param_hashes);
}

}  // namespace

TrainResult run_reactor_training(const TrainConfig& cfg) {
  auto prog = build_training_program(cfg);
  RuntimeConfig rc;
  rc.workers = cfg.workers;
  rc.seed = cfg.seed;
  rc.collect_trace = cfg.collect_trace;
  Runtime rt(prog, rc);
  ExecutionReport rep = rt.run();

  TrainResult out;
  out.report = rep;
  out.wall_ns = rep.wall_ns;
  out.faulted = rep.faulted;
  out.fault_message = rep.fault_message;
  if (rep.faulted) return out;

  BankRecords banks;
  std::vector<std::shared_ptr<RolloutCore>> rkeep;
  std::vector<std::shared_ptr<LearnerCore>> lkeep;
  std::vector<std::shared_ptr<ReplayCore>> pkeep;
  for (uint32_t bk = 0; bk < cfg.banks; ++bk) {
    rkeep.push_back(rt.state_of<RolloutCore>(
        bank_member("rollout", bk, cfg.banks)));
    lkeep.push_back(rt.state_of<LearnerCore>(
        bank_member("learner", bk, cfg.banks)));
    pkeep.push_back(rt.state_of<ReplayCore>(
        bank_member("replay", bk, cfg.banks)));
    banks.rollouts.push_back(rkeep.back().get());
    banks.learners.push_back(lkeep.back().get());
    banks.replays.push_back(pkeep.back().get());
  }
  fill_result_from_cores(cfg, banks, out);
  return out;
}

TrainResult run_actor_training(const TrainConfig& cfg) {
  validate_config(cfg);
  if (cfg.average_params) {
    throw RuntimeApiError(
        "train: parameter averaging is only wired on the reactor runtime");
  }

  // One rollout/replay/learner actor ring per bank. Every hop encodes its
  // payload and the receiver decodes a deep copy, so the baseline pays the
  // serialization cost its design promises.
  enum : uint8_t { kStart = 0, kParams = 1, kTrajectories = 2, kBatch = 3 };

  actor::ActorSystem sys;
  auto t0 = std::chrono::steady_clock::now();
  auto since_start = [t0] {
    return static_cast<uint64_t>(
        std::chrono::duration_cast<std::chrono::nanoseconds>(
            std::chrono::steady_clock::now() - t0)
            .count());
  };

  struct BankActors {
    std::shared_ptr<RolloutCore> rollout;
    std::shared_ptr<ReplayCore> replay;
    std::shared_ptr<LearnerCore> learner;
    actor::ActorId rollout_id = 0;
    actor::ActorId replay_id = 0;
    actor::ActorId learner_id = 0;
  };
  std::vector<BankActors> banks(cfg.banks);

  for (uint32_t bk = 0; bk < cfg.banks; ++bk) {
    BankActors& ba = banks[bk];
    ba.rollout = std::make_shared<RolloutCore>(make_rollout_core(cfg, bk));
    ba.replay = std::make_shared<ReplayCore>(make_replay_core(cfg, bk));
    ba.learner = std::make_shared<LearnerCore>(make_learner_core(cfg, bk));
  }

  for (uint32_t bk = 0; bk < cfg.banks; ++bk) {
    BankActors& ba = banks[bk];

    ba.replay_id = sys.spawn([core = ba.replay, &banks, bk](
                                 actor::ActorContext& ctx,
                                 actor::Message& msg) {
      actor::Decoder dec(msg.bytes);
      if (dec.get_u8() != kTrajectories) {
        throw RuntimeApiError("replay actor: unexpected message");
      }
      auto batch = dec.get_transitions();
      auto sampled = replay_ingest(*core, batch);
      actor::Encoder enc;
      enc.put_u8(kBatch);
      enc.put_transitions(sampled);
      auto bytes = enc.take();
      ctx.send(banks[bk].learner_id, bytes);
    });

    ba.rollout_id = sys.spawn([core = ba.rollout, &banks, bk](
                                  actor::ActorContext& ctx,
                                  actor::Message& msg) {
      actor::Decoder dec(msg.bytes);
      if (dec.get_u8() != kParams) {
        throw RuntimeApiError("rollout actor: unexpected message");
      }
      auto params = dec.get_doubles();
      auto batch = rollout_collect(*core, params);
      actor::Encoder enc;
      enc.put_u8(kTrajectories);
      enc.put_transitions(batch);
      auto bytes = enc.take();
      ctx.send(banks[bk].replay_id, bytes);
    });

    ba.learner_id = sys.spawn(
        [core = ba.learner, &banks, bk, since_start, watch = uint64_t{0}](
            actor::ActorContext& ctx, actor::Message& msg) mutable {
          auto publish = [&](std::vector<double> params) {
            actor::Encoder enc;
            enc.put_u8(kParams);
            enc.put_doubles(params);
            auto bytes = enc.take();
            ctx.send(banks[bk].rollout_id, bytes);
          };
          actor::Decoder dec(msg.bytes);
          uint8_t kind = dec.get_u8();
          if (kind == kStart) {
            // The watch request is answered once the iteration budget is
            // done.
            core->iter_hash.reserve(core->iteration_limit);
            watch = msg.request_id;
            publish(core->q->snapshot_params());
            return;
          }
          if (kind != kBatch) {
            throw RuntimeApiError("learner actor: unexpected message");
          }
          auto batch = dec.get_transitions();
          auto params = learner_apply(*core, batch, since_start());
          if (core->iterations_done < core->iteration_limit) {
            publish(std::move(params));
          } else {
            actor::Message done;
            done.request_id = watch;
            std::vector<uint8_t> ok{1};
            ctx.reply(done, ok);
          }
        });
  }

  std::vector<uint64_t> watches;
  for (uint32_t bk = 0; bk < cfg.banks; ++bk) {
    std::vector<uint8_t> start{kStart};
    watches.push_back(sys.send_request(banks[bk].learner_id, start));
  }
  for (uint64_t w : watches) {
    sys.await_reply(w, 10ull * 60 * 1000 * 1000 * 1000);
  }
  uint64_t wall = since_start();
  sys.shutdown();

  TrainResult out;
  out.wall_ns = wall;
  BankRecords recs;
  for (uint32_t bk = 0; bk < cfg.banks; ++bk) {
    recs.rollouts.push_back(banks[bk].rollout.get());
    recs.learners.push_back(banks[bk].learner.get());
    recs.replays.push_back(banks[bk].replay.get());
  }
  fill_result_from_cores(cfg, recs, out);
  return out;
}

std::shared_ptr<const Program> build_showcase_program(bool break_cycle) {
  ProgramBuilder b;
  auto nop = [](ReactionContext&) {};

  auto& rollout = b.reactor_class("RolloutReactor");
  rollout.input("gradients", 6).output("trajectories", 6);
  rollout.reaction("r1").on_startup().body(nop);
  rollout.reaction("r2").triggered_by("gradients").writes("trajectories").body(
      nop);

  auto& replay = b.reactor_class("ReplayBufferReactor");
  replay.input("trajectories", 6).output("dataset", 6);
  replay.reaction("r1").on_startup().body(nop);
  replay.reaction("r2").triggered_by("trajectories").writes("dataset").body(
      nop);

  auto& learner = b.reactor_class("LearnerReactor");
  learner.output("gradients", 6).input("dataset", 6);
  if (break_cycle) {
    learner.logical_action("emit");
    learner.reaction("publish").triggered_by("emit").writes("gradients").body(
        nop);
    learner.reaction("init").on_startup().schedules("emit").body(nop);
    learner.reaction("update").triggered_by("dataset").schedules("emit").body(
        nop);
  } else {
    learner.reaction("r1").on_startup().writes("gradients").body(nop);
    learner.reaction("r2").triggered_by("dataset").writes("gradients").body(
        nop);
  }

  b.instantiate("RolloutReactor", "rollout", 6);
  b.instantiate("ReplayBufferReactor", "replay", 6);
  b.instantiate("LearnerReactor", "learner", 6);
  b.connect({"learner", "gradients"}, {"rollout", "gradients"},
            {.broadcast = true});
  b.connect({"rollout", "trajectories"}, {"replay", "trajectories"},
            {.broadcast = true});
  b.connect({"replay", "dataset"}, {"learner", "dataset"},
            {.broadcast = true});
  return b.build();
}

}  // namespace reflow::rl
