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

#include <deque>
#include <memory>
#include <string>
#include <vector>

#include "core/program.hh"
#include "core/runtime.hh"
#include "rl/env.hh"
#include "rl/policy.hh"
#include "rl/qfunction.hh"
#include "rl/replay.hh"

namespace reflow::rl {

// Training run description. Serializable to and from JSON so runs can be
// configured from a file.
struct TrainConfig {
  std::string env = "blackjack";
  uint32_t banks = 6;          // parallel pipelines
  uint32_t rollout_len = 32;   // environment steps per rollout reaction
  uint32_t batch_size = 100;   // transitions sampled per learner update
  double alpha = 0.1;
  double gamma = 0.9;
  EpsilonSchedule eps;
  uint32_t capacity = 10000;   // replay ring capacity
  uint32_t sync_every = 100;   // updates between target refreshes
  uint64_t seed = 1;
  uint32_t iterations = 100;   // learner updates per bank
  uint32_t workers = 1;        // scheduler worker threads (reactor runtime)
  bool average_params = false;  // cross-bank parameter averaging each round
  bool collect_trace = false;
};

TrainConfig train_config_from_json(const std::string& text);
std::string train_config_to_json(const TrainConfig& cfg);

struct IterationPoint {
  uint64_t iteration = 0;
  double mean_return = 0.0;  // rolling mean of completed episodes, over banks
  uint64_t wall_ns = 0;      // physical time since run start
  uint64_t param_hash = 0;   // combined over banks after this update round
};

struct TrainResult {
  std::vector<uint64_t> bank_param_hashes;
  std::vector<std::vector<double>> bank_params;  // final learner parameters
  uint64_t param_hash = 0;  // combined over banks
  std::vector<IterationPoint> curve;
  uint64_t env_steps = 0;
  uint64_t episodes = 0;
  uint64_t updates = 0;  // transitions consumed by learners
  uint64_t wall_ns = 0;
  bool faulted = false;
  std::string fault_message;
  ExecutionReport report;  // reactor runs only; default for the baseline
};

// "iteration,mean_return,wall_ms" rows, as a string or written to a file.
std::string learning_curve_csv(const TrainResult& result);
void write_learning_curve_csv(const TrainResult& result,
                              const std::string& path);

// Per-stage cores shared by both runtimes so the arithmetic and RNG streams
// are bit-identical; only the transport differs.
struct RolloutCore {
  std::unique_ptr<Environment> env;
  std::unique_ptr<QFunction> q;
  SplitMix64 policy_rng{0};
  SplitMix64 reset_rng{0};
  EpsilonSchedule eps;
  uint32_t steps_per_iter = 32;
  uint64_t global_steps = 0;
  uint64_t episodes = 0;
  std::vector<Observation> obs;
  bool episode_active = false;
  double episode_return = 0.0;
  std::deque<double> recent_returns;  // last 20 completed episodes
  std::vector<double> iter_return;    // rolling mean after each iteration
  std::vector<uint32_t> action_buf;
};

struct ReplayCore {
  ReplayBuffer buf;
  SplitMix64 sample_rng{0};
  uint32_t batch_size = 100;
  uint64_t appended = 0;
};

struct LearnerCore {
  std::unique_ptr<QFunction> q;
  uint32_t iteration_limit = 0;
  uint64_t iterations_done = 0;
  std::vector<uint64_t> iter_hash;
  std::vector<uint64_t> iter_wall_ns;
};

RolloutCore make_rollout_core(const TrainConfig& cfg, uint32_t bank);
ReplayCore make_replay_core(const TrainConfig& cfg, uint32_t bank);
LearnerCore make_learner_core(const TrainConfig& cfg, uint32_t bank);

// Runs K environment steps under epsilon-greedy over `params` and returns
// the collected transitions (K per agent for multi-agent environments).
std::vector<Transition> rollout_collect(RolloutCore& core,
                                        std::span<const double> params);
// Appends a trajectory batch and samples the next training batch.
std::vector<Transition> replay_ingest(ReplayCore& core,
                                      std::span<const Transition> batch);
// Applies one update round and returns the parameter snapshot to publish.
std::vector<double> learner_apply(LearnerCore& core,
                                  std::span<const Transition> batch,
                                  uint64_t wall_ns);

// Bank-parallel rollout -> replay -> learner loop, one iteration per
// microstep, learner emission routed through a zero-delay logical action.
std::shared_ptr<const Program> build_training_program(const TrainConfig& cfg);
TrainResult run_reactor_training(const TrainConfig& cfg);
// Same dataflow as a token ring over mailbox actors with copy-on-send
// payload encoding. Parameter averaging is not offered here.
TrainResult run_actor_training(const TrainConfig& cfg);

// The six-bank showcase wiring with 6-wide multiports and cyclic broadcast
// links: learner -> rollout -> replay -> learner. With `break_cycle` the
// learner's emission goes through its logical action (accepted); without it
// the zero-delay loop is closed directly (rejected by validate_causality).
std::shared_ptr<const Program> build_showcase_program(bool break_cycle);

// Decentralized multi-agent inference over a shared junction environment.
struct MarlConfig {
  uint32_t agents = 4;
  uint32_t episodes = 50;
  double eps = 0.2;
  uint64_t seed = 1;
  uint32_t workers = 1;
  bool collect_trace = false;
};

struct MarlResult {
  uint64_t env_steps = 0;
  uint64_t episodes = 0;
  uint64_t collisions = 0;
  uint64_t joint_actions = 0;
  double mean_return = 0.0;  // mean per-episode team return
  uint64_t wall_ns = 0;
  ExecutionReport report;
};

std::shared_ptr<const Program> build_marl_program(const MarlConfig& cfg);
MarlResult run_reactor_marl(const MarlConfig& cfg);
MarlResult run_actor_marl(const MarlConfig& cfg);

// Observation throughput over a fixed step budget: parallel sources step
// their environments in fixed chunks and ship each chunk's observations to
// one sink.
struct ThroughputConfig {
  std::string env = "blackjack";
  uint32_t parallel = 8;      // source pipelines (actors or bank members)
  uint64_t total_steps = 100000;
  uint32_t chunk = 64;        // env steps per shipped message
  uint64_t seed = 1;
  uint32_t workers = 1;
};

struct ThroughputResult {
  uint64_t env_steps = 0;
  uint64_t payload_bytes = 0;  // observation bytes that crossed the boundary
  uint64_t obs_hash = 0;       // order-independent digest, for fairness checks
  uint64_t wall_ns = 0;
  double obs_per_sec = 0.0;
};

ThroughputResult run_reactor_throughput(const ThroughputConfig& cfg);
ThroughputResult run_actor_throughput(const ThroughputConfig& cfg);

}  // namespace reflow::rl
