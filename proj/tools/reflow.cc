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

// Command-line front end. Talks to the runtime exclusively through the
// public C interface so it doubles as a living example of that boundary.
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "reflow/reflow.h"

namespace {

// Wraps a char* from the library so every exit path frees it.
struct OwnedString {
  char* ptr = nullptr;
  ~OwnedString() { rf_string_free(ptr); }
  std::string str() const { return ptr ? std::string(ptr) : std::string(); }
};

int report_failure(const char* verb, rf_status st) {
  std::cerr << "reflow " << verb << ": " << rf_last_error() << "\n";
  // Mid-run faults exit 2 so scripts can tell them from usage errors.
  return st == RF_ERROR_FAULT ? 2 : 1;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CLI::ValidationError("--config", "cannot read " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    std::cerr << "reflow: cannot write " << path << "\n";
    std::exit(1);
  }
  out << content;
}

// Sweep lists come in as "2,4,8,16", "100..500" (step defaults to the low
// bound), or "100..500..50"; pieces can be mixed with commas.
std::vector<uint64_t> parse_sweep(const std::string& text) {
  std::vector<uint64_t> out;
  std::stringstream ss(text);
  std::string piece;
  while (std::getline(ss, piece, ',')) {
    if (piece.empty()) throw CLI::ConversionError("empty sweep entry");
    size_t dots = piece.find("..");
    if (dots == std::string::npos) {
      out.push_back(std::stoull(piece));
      continue;
    }
    uint64_t lo = std::stoull(piece.substr(0, dots));
    std::string rest = piece.substr(dots + 2);
    uint64_t hi = 0, step = 0;
    size_t dots2 = rest.find("..");
    if (dots2 == std::string::npos) {
      hi = std::stoull(rest);
      step = lo;  // "100..500" -> 100,200,...,500
    } else {
      hi = std::stoull(rest.substr(0, dots2));
      step = std::stoull(rest.substr(dots2 + 2));
    }
    if (step == 0 || hi < lo) {
      throw CLI::ConversionError("bad sweep range '" + piece + "'");
    }
    for (uint64_t v = lo; v <= hi; v += step) out.push_back(v);
  }
  if (out.empty()) throw CLI::ConversionError("empty sweep '" + text + "'");
  return out;
}

uint32_t env_workers_override(uint32_t fallback) {
  const char* raw = std::getenv("REACTOR_WORKERS");
  if (!raw || !*raw) return fallback;
  char* end = nullptr;
  unsigned long v = std::strtoul(raw, &end, 10);
  if (end == raw || *end != '\0' || v == 0) {
    std::cerr << "reflow: ignoring REACTOR_WORKERS='" << raw
              << "' (want a positive integer)\n";
    return fallback;
  }
  return static_cast<uint32_t>(v);
}

int run_graph(const std::string& name, const std::string& format,
              const std::string& out_path) {
  OwnedString text;
  rf_status st = rf_graph_render(name.c_str(), format.c_str(), &text.ptr);
  if (st != RF_OK) return report_failure("graph", st);
  if (out_path.empty()) {
    std::cout << text.str();
  } else {
    write_file(out_path, text.str());
    std::cout << "graph written to " << out_path << "\n";
  }
  return 0;
}

struct TrainArgs {
  std::string config_path;
  std::string runtime = "reactor";
  uint32_t workers = 0;  // 0: leave the config value alone
  std::string out_path;
  std::string curve_path;
  std::string trace_path;
};

int run_train(const TrainArgs& args) {
  std::string config = "{}";
  if (!args.config_path.empty()) config = read_file(args.config_path);

  // Priority for the worker count: config file < --workers < REACTOR_WORKERS.
  uint32_t workers = args.workers;
  workers = env_workers_override(workers);
  if (workers > 0) {
    nlohmann::json j = nlohmann::json::parse(config, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
      std::cerr << "reflow train: config is not a JSON object\n";
      return 1;
    }
    j["workers"] = workers;
    config = j.dump();
  }

  OwnedString summary, curve, trace;
  rf_status st = rf_train_run(
      config.c_str(), args.runtime.c_str(), &summary.ptr, &curve.ptr,
      args.trace_path.empty() ? nullptr : &trace.ptr);

  // Persist whatever the run produced before deciding the exit code, so a
  // faulted run still leaves its curve behind for inspection.
  if (summary.ptr) {
    if (args.out_path.empty()) {
      std::cout << summary.str();
    } else {
      write_file(args.out_path, summary.str());
      std::cout << "summary written to " << args.out_path << "\n";
    }
  }
  if (curve.ptr && !args.curve_path.empty()) {
    write_file(args.curve_path, curve.str());
    std::cout << "learning curve written to " << args.curve_path << "\n";
  }
  if (trace.ptr && !args.trace_path.empty()) {
    write_file(args.trace_path, trace.str());
    std::cout << "trace written to " << args.trace_path << "\n";
  }

  if (st != RF_OK) return report_failure("train", st);
  return 0;
}

struct BenchArgs {
  std::string family;
  std::string runtime = "both";
  std::string actors, bytes, parallel, batch, agents, episodes;
  std::string env;
  uint64_t total_steps = 0;
  uint32_t chunk = 0;
  uint32_t workers = 0;
  uint32_t reps = 0;
  uint32_t warmup_plus_one = 0;  // CLI11 cannot tell 0 from unset; offset by 1
  uint64_t seed_plus_one = 0;
  std::string out_dir;
  bool print_csv = false;
};

int run_bench(const BenchArgs& args) {
  nlohmann::json spec;
  spec["family"] = args.family;
  spec["runtime"] = args.runtime;
  auto put_sweep = [&spec](const char* key, const std::string& text) {
    if (text.empty()) return;
    spec[key] = parse_sweep(text);
  };
  put_sweep("actors", args.actors);
  put_sweep("bytes", args.bytes);
  put_sweep("parallel", args.parallel);
  put_sweep("batch", args.batch);
  put_sweep("agents", args.agents);
  put_sweep("episodes", args.episodes);
  if (!args.env.empty()) spec["env"] = args.env;
  if (args.total_steps > 0) spec["total_steps"] = args.total_steps;
  if (args.chunk > 0) spec["chunk"] = args.chunk;
  uint32_t workers = env_workers_override(args.workers);
  if (workers > 0) spec["workers"] = workers;
  if (args.reps > 0) spec["reps"] = args.reps;
  if (args.warmup_plus_one > 0) spec["warmup"] = args.warmup_plus_one - 1;
  if (args.seed_plus_one > 0) spec["seed"] = args.seed_plus_one - 1;
  if (!args.out_dir.empty()) spec["out_dir"] = args.out_dir;

  const std::string spec_text = spec.dump();
  OwnedString csv, notes;
  rf_status st = rf_bench_run(spec_text.c_str(), &csv.ptr, &notes.ptr);
  if (st != RF_OK) return report_failure("bench", st);

  if (args.print_csv && csv.ptr) std::cout << csv.str();
  if (notes.ptr && *notes.ptr) std::cout << notes.str();
  if (!args.out_dir.empty()) {
    std::cout << "report written to " << args.out_dir << "/" << args.family
              << ".csv and " << args.out_dir << "/" << args.family << ".svg\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"reflow: deterministic reactor runtime, mailbox actor "
               "baseline, and RL dataflow benchmarks"};
  app.require_subcommand(1);
  app.set_version_flag("--version", []() { return std::string(rf_version()); });

  // graph -------------------------------------------------------------
  std::string graph_name;
  std::string graph_format = "dot";
  std::string graph_out;
  CLI::App* graph = app.add_subcommand(
      "graph", "Render a built-in program graph (reactors, reactions with "
               "levels, dependency and port edges)");
  graph
      ->add_option("name", graph_name,
                   "pipeline | pipeline-avg | showcase | showcase-cyclic | "
                   "marl")
      ->required();
  graph->add_option("--format", graph_format, "dot or json")
      ->check(CLI::IsMember({"dot", "json"}));
  graph->add_option("-o,--out", graph_out, "write to a file instead of stdout");

  // train -------------------------------------------------------------
  TrainArgs train_args;
  CLI::App* train = app.add_subcommand(
      "train", "Run the rollout/replay/learner training dataflow once");
  train->add_option("--config", train_args.config_path,
                    "JSON file with env, banks, rollout_len, batch_size, "
                    "alpha, gamma, eps_*, capacity, sync_every, seed, "
                    "iterations, workers, average_params");
  train->add_option("--runtime", train_args.runtime, "reactor or actor")
      ->check(CLI::IsMember({"reactor", "actor"}));
  train->add_option("--workers", train_args.workers,
                    "override the config's worker count (the REACTOR_WORKERS "
                    "environment variable beats both)");
  train->add_option("--out", train_args.out_path,
                    "write the run summary JSON here instead of stdout");
  train->add_option("--curve", train_args.curve_path,
                    "write iteration,mean_return,wall_ms rows here");
  train->add_option("--trace", train_args.trace_path,
                    "write the determinism trace (tag,reaction_id,value_hash) "
                    "here; reactor runtime only");

  // bench -------------------------------------------------------------
  BenchArgs bench_args;
  CLI::App* bench = app.add_subcommand(
      "bench", "Measure one experiment family on one or both runtimes");
  bench
      ->add_option("family", bench_args.family,
                   "broadcast-gather | env-throughput | parallel-q | "
                   "marl-inference")
      ->required()
      ->check(CLI::IsMember({"broadcast-gather", "env-throughput",
                             "parallel-q", "marl-inference"}));
  bench->add_option("--runtime", bench_args.runtime, "reactor, actor, or both")
      ->check(CLI::IsMember({"reactor", "actor", "both"}));
  const char* sweep_help = "comma list or lo..hi[..step] range";
  bench->add_option("--actors", bench_args.actors, sweep_help);
  bench->add_option("--bytes", bench_args.bytes, sweep_help);
  bench->add_option("--parallel", bench_args.parallel, sweep_help);
  bench->add_option("--batch", bench_args.batch, sweep_help);
  bench->add_option("--agents", bench_args.agents, sweep_help);
  bench->add_option("--episodes", bench_args.episodes, sweep_help);
  bench->add_option("--env", bench_args.env,
                    "blackjack, gridworld, or image80");
  bench->add_option("--total-steps", bench_args.total_steps,
                    "step budget for env-throughput");
  bench->add_option("--chunk", bench_args.chunk,
                    "env steps per shipped message");
  bench->add_option("--workers", bench_args.workers,
                    "scheduler threads for reactor runs");
  bench->add_option("--reps", bench_args.reps, "measured repetitions (>= 3)");
  uint32_t warmup_opt = 0;
  auto* warm = bench->add_option("--warmup", warmup_opt,
                                 "discarded leading repetitions");
  uint64_t seed_opt = 0;
  auto* seed = bench->add_option("--seed", seed_opt, "base seed");
  bench->add_option("--out", bench_args.out_dir,
                    "directory for <family>.csv and <family>.svg");
  bench->add_flag("--print-csv", bench_args.print_csv,
                  "dump the raw sample rows to stdout");

  CLI11_PARSE(app, argc, argv);

  if (*warm) bench_args.warmup_plus_one = warmup_opt + 1;
  if (*seed) bench_args.seed_plus_one = seed_opt + 1;

  if (graph->parsed()) return run_graph(graph_name, graph_format, graph_out);
  if (train->parsed()) return run_train(train_args);
  if (bench->parsed()) return run_bench(bench_args);
  return 0;
}
