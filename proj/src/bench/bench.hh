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
#include <string>
#include <vector>

#include "bench/stats.hh"

namespace reflow::bench {

// One benchmark invocation. Families read the parameter lists they sweep and
// ignore the rest; `runtime` selects which side(s) to measure.
struct BenchSpec {
  std::string family;            // broadcast-gather | env-throughput |
                                 // parallel-q | marl-inference
  std::string runtime = "both";  // reactor | actor | both
  std::vector<uint32_t> actors = {2, 4, 8, 16};   // gather fan-out
  std::vector<uint64_t> bytes = {10ull << 20};    // gather payload sizes
  std::vector<uint32_t> parallel = {8};           // throughput sources
  std::vector<uint32_t> batch = {100, 200, 300, 400, 500};
  std::vector<uint32_t> agents = {4};
  std::vector<uint32_t> episodes = {50};
  uint32_t workers = 8;
  uint32_t reps = 10;   // measured repetitions, >= 3
  uint32_t warmup = 2;  // extra repetitions discarded up front
  uint64_t seed = 42;
  std::string env = "blackjack";
  uint64_t total_steps = 100000;  // env-throughput budget
  uint32_t chunk = 64;            // env-throughput steps per message
  std::string out_dir;            // empty: no files written
};

// One measured repetition of one configuration. `rep` counts measured reps
// only; warmups never produce rows but are recorded in the `warmup` column so
// every row states the full R + warmup protocol it came from.
struct ResultRow {
  std::string family;
  std::string runtime;
  std::string param_name;
  double param_value = 0.0;
  uint32_t rep = 0;
  uint64_t wall_ns = 0;
  std::string metric_name;
  double metric_value = 0.0;
  uint64_t seed = 0;
  uint32_t workers = 0;
  uint32_t reps = 0;
  uint32_t warmup = 0;
};

struct BenchReport {
  std::vector<ResultRow> rows;
  // Human-oriented one-liners: fairness confirmations, fitted slopes,
  // configurations skipped for memory.
  std::vector<std::string> notes;
};

BenchReport run_bench(const BenchSpec& spec);

// Serializes rows in construction order; throws on an empty set.
std::string csv_text(const std::vector<ResultRow>& rows);
// csv_text persisted to disk; never leaves a partial file behind.
void write_csv(const std::vector<ResultRow>& rows, const std::string& path);
// Mean-wall-versus-parameter chart, one polyline per runtime. Output bytes
// depend only on the rows, so identical inputs give identical files.
void write_svg(const std::vector<ResultRow>& rows, const std::string& title,
               const std::string& path);
// write_csv + write_svg under spec.out_dir, named after the family. Returns
// the paths written.
std::vector<std::string> emit_report(const BenchSpec& spec,
                                     const BenchReport& report);

// Least-squares slope of mean wall_ns against param_value for one runtime's
// rows, using each configuration's mean over reps.
LinearFit wall_slope(const std::vector<ResultRow>& rows,
                     const std::string& runtime);
// Mean of a named metric for one runtime at one parameter value.
double mean_metric(const std::vector<ResultRow>& rows,
                   const std::string& runtime, const std::string& metric,
                   double param_value);
// Mean wall_ns per rep for one runtime at one parameter value.
double mean_wall(const std::vector<ResultRow>& rows, const std::string& runtime,
                 double param_value);

// Family entry points (used directly by the acceptance harness).
BenchReport bench_broadcast_gather(const BenchSpec& spec);
BenchReport bench_env_throughput(const BenchSpec& spec);
BenchReport bench_parallel_q(const BenchSpec& spec);
BenchReport bench_marl_inference(const BenchSpec& spec);

}  // namespace reflow::bench
