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
#include "reflow/reflow.h"

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <string>

#include "bench/bench.hh"
#include "core/errors.hh"
#include "core/program.hh"
#include "core/tag.hh"
#include "rl/pipeline.hh"
#include "json.hpp"

namespace {

thread_local std::string g_last_error;

rf_status fail(rf_status code, const std::string& message) {
  g_last_error = message;
  return code;
}

// All entry points funnel through here so no exception ever crosses the C
// boundary and every failure leaves a message behind.
template <typename Fn>
rf_status guarded(Fn&& fn) noexcept {
  try {
    rf_status st = fn();
    if (st == RF_OK) g_last_error.clear();
    return st;
  } catch (const reflow::CycleError& e) {
    return fail(RF_ERROR_CYCLE, e.what());
  } catch (const reflow::ValidationError& e) {
    return fail(RF_ERROR_CYCLE, e.what());
  } catch (const reflow::TagOverflowError& e) {
    return fail(RF_ERROR_FAULT, e.what());
  } catch (const reflow::IoError& e) {
    return fail(RF_ERROR_IO, e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    return fail(RF_ERROR_IO, e.what());
  } catch (const nlohmann::json::exception& e) {
    return fail(RF_ERROR_ARGUMENT, e.what());
  } catch (const reflow::RuntimeApiError& e) {
    return fail(RF_ERROR_ARGUMENT, e.what());
  } catch (const std::bad_alloc&) {
    return fail(RF_ERROR_NO_MEMORY, "out of memory");
  } catch (const std::exception& e) {
    return fail(RF_ERROR_INTERNAL, e.what());
  } catch (...) {
    return fail(RF_ERROR_INTERNAL, "unknown failure");
  }
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.data(), s.size());
  out[s.size()] = '\0';
  return out;
}

std::shared_ptr<const reflow::Program> builtin_program(const std::string& n) {
  using namespace reflow::rl;
  if (n == "pipeline") return build_training_program(TrainConfig{});
  if (n == "pipeline-avg") {
    TrainConfig cfg;
    cfg.average_params = true;
    return build_training_program(cfg);
  }
  if (n == "showcase") return build_showcase_program(/*break_cycle=*/true);
  if (n == "showcase-cyclic") return build_showcase_program(false);
  if (n == "marl") return build_marl_program(MarlConfig{});
  throw reflow::RuntimeApiError(
      "unknown program '" + n +
      "' (expected pipeline, pipeline-avg, showcase, showcase-cyclic, marl)");
}

std::string trace_csv_text(const std::vector<reflow::TraceRow>& trace) {
  std::string text = "tag,reaction_id,value_hash\n";
  for (const reflow::TraceRow& row : trace) {
    text += row.tag.to_string();
    text += ',';
    text += std::to_string(row.reaction_id);
    text += ',';
    text += std::to_string(row.value_hash);
    text += '\n';
  }
  return text;
}

std::string summary_json(const reflow::rl::TrainConfig& cfg,
                         const reflow::rl::TrainResult& result,
                         const std::string& runtime) {
  nlohmann::ordered_json j;
  j["runtime"] = runtime;
  j["env"] = cfg.env;
  j["banks"] = cfg.banks;
  j["iterations"] = cfg.iterations;
  j["workers"] = cfg.workers;
  j["seed"] = cfg.seed;
  j["env_steps"] = result.env_steps;
  j["episodes"] = result.episodes;
  j["updates"] = result.updates;
  j["wall_ns"] = result.wall_ns;
  // Digests are 64-bit; strings keep them exact for consumers that read
  // JSON numbers as doubles.
  j["param_hash"] = std::to_string(result.param_hash);
  auto hashes = nlohmann::ordered_json::array();
  for (uint64_t h : result.bank_param_hashes) hashes.push_back(std::to_string(h));
  j["bank_param_hashes"] = hashes;
  j["final_mean_return"] =
      result.curve.empty() ? 0.0 : result.curve.back().mean_return;
  j["curve_points"] = result.curve.size();
  j["faulted"] = result.faulted;
  j["fault_message"] = result.fault_message;
  return j.dump(2) + "\n";
}

std::vector<uint32_t> u32_list(const nlohmann::json& v, const char* key) {
  if (!v.is_array() || v.empty()) {
    throw reflow::RuntimeApiError(std::string("bench spec: '") + key +
                                  "' must be a non-empty array");
  }
  std::vector<uint32_t> out;
  for (const auto& x : v) out.push_back(x.get<uint32_t>());
  return out;
}

reflow::bench::BenchSpec bench_spec_from_json(const std::string& text) {
  using reflow::RuntimeApiError;
  nlohmann::json j = nlohmann::json::parse(text);
  if (!j.is_object()) throw RuntimeApiError("bench spec: expected an object");
  reflow::bench::BenchSpec spec;
  for (const auto& [key, val] : j.items()) {
    if (key == "family") spec.family = val.get<std::string>();
    else if (key == "runtime") spec.runtime = val.get<std::string>();
    else if (key == "actors") spec.actors = u32_list(val, "actors");
    else if (key == "bytes") {
      if (!val.is_array() || val.empty())
        throw RuntimeApiError("bench spec: 'bytes' must be a non-empty array");
      spec.bytes.clear();
      for (const auto& x : val) spec.bytes.push_back(x.get<uint64_t>());
    }
    else if (key == "parallel") spec.parallel = u32_list(val, "parallel");
    else if (key == "batch") spec.batch = u32_list(val, "batch");
    else if (key == "agents") spec.agents = u32_list(val, "agents");
    else if (key == "episodes") spec.episodes = u32_list(val, "episodes");
    else if (key == "env") spec.env = val.get<std::string>();
    else if (key == "total_steps") spec.total_steps = val.get<uint64_t>();
    else if (key == "chunk") spec.chunk = val.get<uint32_t>();
    else if (key == "workers") spec.workers = val.get<uint32_t>();
    else if (key == "reps") spec.reps = val.get<uint32_t>();
    else if (key == "warmup") spec.warmup = val.get<uint32_t>();
    else if (key == "seed") spec.seed = val.get<uint64_t>();
    else if (key == "out_dir") spec.out_dir = val.get<std::string>();
    else throw RuntimeApiError("bench spec: unknown key '" + key + "'");
  }
  if (spec.family.empty())
    throw RuntimeApiError("bench spec: 'family' is required");
  return spec;
}

}  // namespace

extern "C" {

const char* rf_version(void) { return "reflow 1.0.0"; }

const char* rf_last_error(void) { return g_last_error.c_str(); }

void rf_string_free(char* s) { std::free(s); }

rf_status rf_graph_render(const char* name, const char* format, char** out) {
  return guarded([&]() -> rf_status {
    if (!name || !format || !out) {
      return fail(RF_ERROR_ARGUMENT, "rf_graph_render: null argument");
    }
    *out = nullptr;
    auto program = builtin_program(name);
    *out = dup_string(program->export_graph(format));
    return RF_OK;
  });
}

rf_status rf_train_run(const char* config_json, const char* runtime,
                       char** out_summary_json, char** out_curve_csv,
                       char** out_trace_csv) {
  return guarded([&]() -> rf_status {
    if (!config_json || !runtime) {
      return fail(RF_ERROR_ARGUMENT, "rf_train_run: null argument");
    }
    if (out_summary_json) *out_summary_json = nullptr;
    if (out_curve_csv) *out_curve_csv = nullptr;
    if (out_trace_csv) *out_trace_csv = nullptr;

    const std::string rt = runtime;
    if (rt != "reactor" && rt != "actor") {
      return fail(RF_ERROR_ARGUMENT,
                  "rf_train_run: runtime must be 'reactor' or 'actor'");
    }
    if (out_trace_csv && rt != "reactor") {
      return fail(RF_ERROR_ARGUMENT,
                  "rf_train_run: trace capture requires the reactor runtime");
    }

    reflow::rl::TrainConfig cfg =
        reflow::rl::train_config_from_json(config_json);
    cfg.collect_trace = out_trace_csv != nullptr;

    reflow::rl::TrainResult result = rt == "reactor"
                                         ? reflow::rl::run_reactor_training(cfg)
                                         : reflow::rl::run_actor_training(cfg);

    if (out_summary_json)
      *out_summary_json = dup_string(summary_json(cfg, result, rt));
    if (out_curve_csv)
      *out_curve_csv = dup_string(reflow::rl::learning_curve_csv(result));
    if (out_trace_csv)
      *out_trace_csv = dup_string(trace_csv_text(result.report.trace));

    if (result.faulted) return fail(RF_ERROR_FAULT, result.fault_message);
    return RF_OK;
  });
}

rf_status rf_bench_run(const char* spec_json, char** out_csv,
                       char** out_notes) {
  return guarded([&]() -> rf_status {
    if (!spec_json) {
      return fail(RF_ERROR_ARGUMENT, "rf_bench_run: null argument");
    }
    if (out_csv) *out_csv = nullptr;
    if (out_notes) *out_notes = nullptr;

    reflow::bench::BenchSpec spec = bench_spec_from_json(spec_json);
    reflow::bench::BenchReport report = reflow::bench::run_bench(spec);

    if (out_csv) *out_csv = dup_string(reflow::bench::csv_text(report.rows));
    if (out_notes) {
      std::string notes;
      for (const std::string& n : report.notes) {
        notes += n;
        notes += '\n';
      }
      *out_notes = dup_string(notes);
    }
    return RF_OK;
  });
}

}  // extern "C"
