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
#include "rl/pipeline.hh"

namespace reflow::bench {

namespace {

struct MarlSweep {
  uint32_t agents;
  uint32_t episodes;
  std::string param_name;
  double param_value;
};

}  // namespace

BenchReport bench_marl_inference(const BenchSpec& spec) {
  BenchReport out;

  std::vector<MarlSweep> cfgs;
  if (spec.agents.size() > 1 || spec.episodes.size() == 1) {
    for (uint32_t n : spec.agents) {
      cfgs.push_back(
          {n, spec.episodes.front(), "agents", static_cast<double>(n)});
    }
  }
  if (spec.episodes.size() > 1) {
    for (uint32_t ep : spec.episodes) {
      cfgs.push_back(
          {spec.agents.front(), ep, "episodes", static_cast<double>(ep)});
    }
  }

  for (const MarlSweep& sw : cfgs) {
    std::vector<double> rwall, awall;
    for (uint32_t iter = 0; iter < spec.warmup + spec.reps; ++iter) {
      rl::MarlConfig cfg;
      cfg.agents = sw.agents;
      cfg.episodes = sw.episodes;
      cfg.eps = 0.2;
      cfg.seed = spec.seed + iter;
      cfg.workers = spec.workers;

      rl::MarlResult reactor{}, actor{};
      bool have_reactor = spec.runtime != "actor";
      bool have_actor = spec.runtime != "reactor";
      if (have_reactor) reactor = rl::run_reactor_marl(cfg);
      if (have_actor) actor = rl::run_actor_marl(cfg);
      if (have_reactor && have_actor &&
          (reactor.env_steps != actor.env_steps ||
           reactor.joint_actions != actor.joint_actions ||
           reactor.collisions != actor.collisions)) {
        throw RuntimeApiError("marl-inference: runtimes diverged");
      }
      if (iter < spec.warmup) continue;
      uint32_t rep = iter - spec.warmup;

      auto emit = [&](const char* runtime, const rl::MarlResult& r) {
        ResultRow row;
        row.family = "marl-inference";
        row.runtime = runtime;
        row.param_name = sw.param_name;
        row.param_value = sw.param_value;
        row.rep = rep;
        row.wall_ns = r.wall_ns;
        row.metric_name = "steps_per_sec";
        row.metric_value =
            r.wall_ns > 0
                ? static_cast<double>(r.env_steps) * 1e9 / r.wall_ns
                : 0.0;
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
    }
    if (!rwall.empty() && !awall.empty()) {
      char buf[160];
      std::snprintf(buf, sizeof buf,
                    "marl-inference %s=%.0f: reactor %.2f ms, actor %.2f ms "
                    "(%.2fx)",
                    sw.param_name.c_str(), sw.param_value, mean(rwall) / 1e6,
                    mean(awall) / 1e6, mean(awall) / mean(rwall));
      out.notes.push_back(buf);
    }
  }
  return out;
}

}  // namespace reflow::bench
