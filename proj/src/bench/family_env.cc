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

BenchReport bench_env_throughput(const BenchSpec& spec) {
  BenchReport out;

  for (uint32_t par : spec.parallel) {
    std::vector<double> rx, ax;  // measured obs/sec per rep
    for (uint32_t iter = 0; iter < spec.warmup + spec.reps; ++iter) {
      rl::ThroughputConfig cfg;
      cfg.env = spec.env;
      cfg.parallel = par;
      cfg.total_steps = spec.total_steps;
      cfg.chunk = spec.chunk;
      cfg.seed = spec.seed + iter;
      cfg.workers = spec.workers;

      rl::ThroughputResult reactor{}, actor{};
      bool have_reactor = spec.runtime != "actor";
      bool have_actor = spec.runtime != "reactor";
      if (have_reactor) reactor = rl::run_reactor_throughput(cfg);
      if (have_actor) actor = rl::run_actor_throughput(cfg);
      if (have_reactor && have_actor) {
        // Both sides must have stepped the same environments through the
        // same states; otherwise the comparison is meaningless.
        if (reactor.env_steps != actor.env_steps ||
            reactor.obs_hash != actor.obs_hash ||
            reactor.payload_bytes != actor.payload_bytes) {
          throw RuntimeApiError(
              "env-throughput: runtimes processed different work");
        }
      }
      if (iter < spec.warmup) continue;
      uint32_t rep = iter - spec.warmup;

      auto emit = [&](const char* runtime, const rl::ThroughputResult& r) {
        ResultRow row;
        row.family = "env-throughput";
        row.runtime = runtime;
        row.param_name = "parallel";
        row.param_value = static_cast<double>(par);
        row.rep = rep;
        row.wall_ns = r.wall_ns;
        row.metric_name = "obs_per_sec";
        row.metric_value = r.obs_per_sec;
        row.seed = cfg.seed;
        row.workers = spec.workers;
        row.reps = spec.reps;
        row.warmup = spec.warmup;
        out.rows.push_back(row);
      };
      if (have_reactor) {
        emit("reactor", reactor);
        rx.push_back(reactor.obs_per_sec);
      }
      if (have_actor) {
        emit("actor", actor);
        ax.push_back(actor.obs_per_sec);
      }
    }
    if (!rx.empty() && !ax.empty()) {
      char buf[160];
      std::snprintf(buf, sizeof buf,
                    "env-throughput %s parallel=%u: reactor %.0f obs/s, "
                    "actor %.0f obs/s (%.2fx)",
                    spec.env.c_str(), par, mean(rx), mean(ax),
                    mean(rx) / mean(ax));
      out.notes.push_back(buf);
    }
  }
  return out;
}

}  // namespace reflow::bench
