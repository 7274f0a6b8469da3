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

/*
 * C interface to the reflow runtime. Every entry point is callable from
 * plain C: no exceptions cross this boundary, results come back as heap
 * strings the caller releases with rf_string_free(), and failures return a
 * status code with a human-readable message in rf_last_error().
 */
#ifndef REFLOW_REFLOW_H_
#define REFLOW_REFLOW_H_

#ifdef __cplusplus
extern "C" {
#endif

typedef enum rf_status {
  RF_OK = 0,
  RF_ERROR_ARGUMENT = 1,  /* bad input: unknown name, malformed JSON, ... */
  RF_ERROR_CYCLE = 2,     /* program rejected: zero-delay dependency cycle */
  RF_ERROR_FAULT = 3,     /* a reaction or actor behavior failed mid-run */
  RF_ERROR_IO = 4,        /* filesystem problem while emitting reports */
  RF_ERROR_NO_MEMORY = 5, /* allocation failure */
  RF_ERROR_INTERNAL = 6   /* anything else; see rf_last_error() */
} rf_status;

/* Static version string, never freed. */
const char* rf_version(void);

/* Message for the most recent failing rf_* call on this thread, or "" when
 * the last call succeeded. The pointer stays valid until the next rf_* call
 * on the same thread. */
const char* rf_last_error(void);

/* Releases a string returned through any char** out-parameter below.
 * Passing NULL is a no-op. */
void rf_string_free(char* s);

/*
 * Renders one of the built-in program graphs.
 *
 * name:
 *   "pipeline"         bank-parallel rollout/replay/learner training graph
 *   "pipeline-avg"     the same graph with cross-bank parameter averaging
 *   "showcase"         multiport broadcast wiring, learner emission routed
 *                      through a microstep delay (schedulable)
 *   "showcase-cyclic"  the same wiring with the zero-delay loop left closed
 *                      (exports with all levels rendered as 0)
 *   "marl"             decentralized multi-agent inference graph
 * format: "dot" or "json". The JSON document has the shape
 *   {reactors:[{name,bank_index}], reactions:[{id,reactor,level}],
 *    edges:[{from,to,kind}]}.
 *
 * On RF_OK, *out owns the rendered text. */
rf_status rf_graph_render(const char* name, const char* format, char** out);

/*
 * Runs one training job described by a JSON configuration document and
 * returns a JSON summary. Accepted configuration keys (all optional):
 *   env            "blackjack" | "gridworld" | "image80"   (default blackjack)
 *   banks          parallel pipelines                      (default 6)
 *   rollout_len    environment steps per rollout round     (default 32)
 *   batch_size     transitions per learner update          (default 100)
 *   alpha, gamma   learning rate and discount              (0.1, 0.9)
 *   eps_start, eps_end, eps_decay_steps   exploration schedule (1.0, 0.05, 2000)
 *   capacity       replay ring capacity                    (default 10000)
 *   sync_every     updates between target refreshes        (default 100)
 *   seed           master seed                             (default 1)
 *   iterations     learner updates per bank                (default 100)
 *   workers        scheduler worker threads                (default 1)
 *   average_params cross-bank averaging each round         (default false)
 * Unknown keys are rejected.
 *
 * runtime selects the engine: "reactor" (deterministic scheduler) or
 * "actor" (mailbox baseline with copy-on-send transport).
 *
 * out_summary_json  run counters, parameter digests, learning curve
 * out_curve_csv     "iteration,mean_return,wall_ms" rows   (may be NULL)
 * out_trace_csv     "tag,reaction_id,value_hash" rows with tags rendered as
 *                   "time_ns:microstep"; reactor runtime only (may be NULL)
 *
 * Returns RF_ERROR_FAULT when the run aborted mid-flight; the summary is
 * still produced and carries the fault message. */
rf_status rf_train_run(const char* config_json, const char* runtime,
                       char** out_summary_json, char** out_curve_csv,
                       char** out_trace_csv);

/*
 * Runs one benchmark family on one or both runtimes and returns the raw
 * sample rows as CSV plus human-readable summary notes (one per line).
 * Accepted specification keys (all optional except "family"):
 *   family      "broadcast-gather" | "env-throughput" | "parallel-q" |
 *               "marl-inference"
 *   runtime     "reactor" | "actor" | "both"             (default both)
 *   actors      fan-out sweep, e.g. [2,4,8,16]
 *   bytes       payload sweep in bytes, e.g. [10485760]
 *   parallel    source pipelines for env-throughput, e.g. [8]
 *   batch       learner batch sweep, e.g. [100,200,300,400,500]
 *   agents      agent-count sweep, e.g. [2,4,6,8,10]
 *   episodes    episode-count sweep, e.g. [50]
 *   env         environment for env-throughput / parallel-q
 *   total_steps step budget for env-throughput            (default 100000)
 *   chunk       env steps per shipped message             (default 64)
 *   workers     scheduler threads for reactor runs        (default 8)
 *   reps        measured repetitions, >= 3                (default 10)
 *   warmup      discarded leading repetitions             (default 2)
 *   seed        base seed; repetition i runs seed+i       (default 42)
 *   out_dir     when set, also writes <family>.csv and <family>.svg there
 *
 * The CSV schema is
 *   family,runtime,param_name,param_value,rep,wall_ns,metric_name,
 *   metric_value,seed,workers,reps,warmup
 * with one row per (configuration, repetition, metric); warmup repetitions
 * are excluded from the rows and from all derived statistics. */
rf_status rf_bench_run(const char* spec_json, char** out_csv,
                       char** out_notes);

#ifdef __cplusplus
}
#endif

#endif /* REFLOW_REFLOW_H_ */
