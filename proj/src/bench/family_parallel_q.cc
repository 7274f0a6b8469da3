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
#include <cstdio>

#include "bench/bench.hh"

#include "core/errors.hh"
#include "core/rng.hh"
#include "rl/pipeline.hh"

namespace reflow::bench {

namespace {

// Mean per-episode return of a fixed policy. With `params` the greedy policy
// of the loaded table plays; without, actions are drawn uniformly. Evaluation
// runs its own environment and RNG and never touches training state.
double eval_policy(const std::string& env_name,
                   const std::vector<double>* params, uint64_t eval_seed,
                   int episodes) {
  auto env = rl::make_environment(env_name);
  std::unique_ptr<rl::QFunction> q;
  if (params != nullptr) {
    q = rl::make_tabular_q(env->state_count(), env->action_count(),
                           {0.1, 0.9, 1});
    q->load_params(*params);
  }
  SplitMix64 rng(eval_seed);
  double total = 0.0;
  for (int e = 0; e < episodes; ++e) {
    auto obs = env->reset(eval_seed * 1000003ull + static_cast<uint64_t>(e));
    uint32_t state = obs[0].id;
    bool done = false;
    int guard = 0;
    while (!done && guard++ < 1000) {
      uint32_t a[1];
      a[0] = params ? q->greedy_action(state)
                    : rng.bounded(env->action_count());
      rl::EnvStep st = env->step(a);
      total += st.reward[0];
      state = st.obs[0].id;
      done = st.done;
    }
  }
  return total / episodes;
}

}  // namespace

BenchReport bench_parallel_q(const BenchSpec& spec) {
  if (spec.env == "image80") {
    throw RuntimeApiError("parallel-q: tabular environments only");
  }
  BenchReport out;

  for (uint32_t batch : spec.batch) {
    std::vector<double> rwall, awall;
    double greedy_last = 0.0, random_last = 0.0;
    for (uint32_t iter = 0; iter < spec.warmup + spec.reps; ++iter) {
      rl::TrainConfig cfg;
      cfg.env = spec.env;
      cfg.banks = 6;  // matches the training topology's six-wide bank
      cfg.rollout_len = 64;
      cfg.batch_size = batch;
      cfg.iterations = 40;
      cfg.capacity = 10000;
      cfg.sync_every = 50;
      cfg.alpha = 0.1;
      cfg.gamma = 0.9;
      cfg.eps = rl::EpsilonSchedule{1.0, 0.05, 2000};
      cfg.seed = spec.seed + iter;
      cfg.workers = spec.workers;

      rl::TrainResult reactor{}, actor{};
      bool have_reactor = spec.runtime != "actor";
      bool have_actor = spec.runtime != "reactor";
      if (have_reactor) reactor = rl::run_reactor_training(cfg);
      if (have_actor) actor = rl::run_actor_training(cfg);
      if (have_reactor && have_actor &&
          (reactor.param_hash != actor.param_hash ||
           reactor.env_steps != actor.env_steps)) {
        throw RuntimeApiError("parallel-q: runtimes diverged on identical work");
      }
      if (iter < spec.warmup) continue;
      uint32_t rep = iter - spec.warmup;

      auto emit = [&](const char* runtime, const rl::TrainResult& r) {
        ResultRow row;
        row.family = "parallel-q";
        row.runtime = runtime;
        row.param_name = "batch";
        row.param_value = static_cast<double>(batch);
        row.rep = rep;
        row.wall_ns = r.wall_ns;
        row.metric_name = "mean_return_final";
        row.metric_value = r.curve.empty() ? 0.0 : r.curve.back().mean_return;
        row.seed = cfg.seed;
        row.workers = spec.workers;
        row.reps = spec.reps;
        row.warmup = spec.warmup;
        out.rows.push_back(row);
      };
      if (have_reactor) {
        emit("reactor", reactor);
        rwall.push_back(static_cast<double>(reactor.wall_ns));
      }
      if (have_actor) {
        emit("actor", actor);
        awall.push_back(static_cast<double>(actor.wall_ns));
      }

      // Learned-policy quality versus a random baseline, evaluated on the
      // parameters the run actually produced.
      const rl::TrainResult& src = have_reactor ? reactor : actor;
      if (!src.bank_params.empty()) {
        double greedy =
            eval_policy(spec.env, &src.bank_params[0], spec.seed + 900, 2000);
        double rnd = eval_policy(spec.env, nullptr, spec.seed + 901, 2000);
        greedy_last = greedy;
        random_last = rnd;
        const char* rt = have_reactor ? "reactor" : "actor";
        ResultRow g;
        g.family = "parallel-q";
        g.runtime = rt;
        g.param_name = "batch";
        g.param_value = static_cast<double>(batch);
        g.rep = rep;
        g.wall_ns = src.wall_ns;
        g.metric_name = "greedy_return";
        g.metric_value = greedy;
        g.seed = cfg.seed;
        g.workers = spec.workers;
        g.reps = spec.reps;
        g.warmup = spec.warmup;
        out.rows.push_back(g);
        g.metric_name = "random_return";
        g.metric_value = rnd;
        out.rows.push_back(g);
      }
    }
    if (!rwall.empty() && !awall.empty()) {
      char buf[200];
      std::snprintf(buf, sizeof buf,
                    "parallel-q batch=%u: reactor %.2f ms, actor %.2f ms; "
                    "greedy %.3f vs random %.3f (+%.1f%%)",
                    batch, mean(rwall) / 1e6, mean(awall) / 1e6, greedy_last,
                    random_last,
                    (greedy_last - random_last) * 100.0);
      out.notes.push_back(buf);
    }
  }

  if (!out.rows.empty() && spec.runtime == "both" && spec.batch.size() > 1) {
    LinearFit fr = wall_slope(out.rows, "reactor");
    LinearFit fa = wall_slope(out.rows, "actor");
    char buf[200];
    std::snprintf(buf, sizeof buf,
                  "parallel-q wall slope: reactor %.0f ns/batch vs actor "
                  "%.0f ns/batch (%.2fx)",
                  fr.slope, fa.slope,
                  fr.slope != 0.0 ? fa.slope / fr.slope : 0.0);
    out.notes.push_back(buf);
  }
  return out;
}

}  // namespace reflow::bench
