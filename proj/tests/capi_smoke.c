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

/* Compiled as plain C to prove the public header needs no C++ compiler and
 * that no exception escapes the library boundary. */
#include <stdio.h>
#include <string.h>

#include "reflow/reflow.h"

static int failures = 0;

#define CHECK(cond, label)                                   \
  do {                                                       \
    if (cond) {                                              \
      printf("ok   %s\n", label);                            \
    } else {                                                 \
      printf("FAIL %s (%s)\n", label, rf_last_error());      \
      failures++;                                            \
    }                                                        \
  } while (0)

int main(void) {
  CHECK(rf_version() != NULL && strlen(rf_version()) > 0, "version string");

  /* Graph rendering: DOT and JSON for a built-in program. */
  char* dot = NULL;
  rf_status st = rf_graph_render("pipeline", "dot", &dot);
  CHECK(st == RF_OK && dot != NULL && strstr(dot, "digraph") != NULL,
        "pipeline DOT render");
  rf_string_free(dot);

  char* json = NULL;
  st = rf_graph_render("marl", "json", &json);
  CHECK(st == RF_OK && json != NULL && strstr(json, "\"reactors\"") != NULL &&
            strstr(json, "\"edges\"") != NULL,
        "marl JSON render");
  rf_string_free(json);

  /* The cyclic showcase still renders (levels degrade to 0). */
  char* cyclic = NULL;
  st = rf_graph_render("showcase-cyclic", "dot", &cyclic);
  CHECK(st == RF_OK && cyclic != NULL, "cyclic showcase renders");
  rf_string_free(cyclic);

  /* Unknown names and formats come back as argument errors with messages. */
  char* bogus = NULL;
  st = rf_graph_render("no-such-program", "dot", &bogus);
  CHECK(st == RF_ERROR_ARGUMENT && bogus == NULL &&
            strlen(rf_last_error()) > 0,
        "unknown program rejected");
  st = rf_graph_render("pipeline", "png", &bogus);
  CHECK(st == RF_ERROR_ARGUMENT && bogus == NULL, "unknown format rejected");

  /* A small training run on both runtimes; digests must agree. */
  const char* cfg =
      "{\"env\":\"blackjack\",\"banks\":2,\"rollout_len\":8,"
      "\"batch_size\":16,\"capacity\":256,\"sync_every\":5,"
      "\"iterations\":10,\"seed\":7,\"workers\":2}";
  char* summary_r = NULL;
  char* curve = NULL;
  char* trace = NULL;
  st = rf_train_run(cfg, "reactor", &summary_r, &curve, &trace);
  CHECK(st == RF_OK && summary_r != NULL && curve != NULL && trace != NULL,
        "reactor training runs");
  CHECK(curve != NULL &&
            strncmp(curve, "iteration,mean_return,wall_ms", 29) == 0,
        "curve header");
  CHECK(trace != NULL && strncmp(trace, "tag,reaction_id,value_hash", 26) == 0
            && strstr(trace, ":") != NULL,
        "trace header and tag format");

  char* summary_a = NULL;
  st = rf_train_run(cfg, "actor", &summary_a, NULL, NULL);
  CHECK(st == RF_OK && summary_a != NULL, "actor training runs");

  /* Pull "param_hash":"..." out of both summaries and compare. */
  if (summary_r != NULL && summary_a != NULL) {
    const char* pr = strstr(summary_r, "\"param_hash\"");
    const char* pa = strstr(summary_a, "\"param_hash\"");
    int same = 0;
    if (pr != NULL && pa != NULL) {
      char hr[64] = {0};
      char ha[64] = {0};
      if (sscanf(pr, "\"param_hash\": \"%63[0-9]\"", hr) == 1 &&
          sscanf(pa, "\"param_hash\": \"%63[0-9]\"", ha) == 1) {
        same = strlen(hr) > 0 && strcmp(hr, ha) == 0;
      }
    }
    CHECK(same, "runtimes agree on the parameter digest");
  } else {
    CHECK(0, "runtimes agree on the parameter digest");
  }
  rf_string_free(summary_r);
  rf_string_free(summary_a);
  rf_string_free(curve);
  rf_string_free(trace);

  /* Malformed config and invalid runtime are argument errors. */
  char* ignored = NULL;
  st = rf_train_run("{\"bogus\":1}", "reactor", &ignored, NULL, NULL);
  CHECK(st == RF_ERROR_ARGUMENT && ignored == NULL, "unknown config key");
  st = rf_train_run(cfg, "quantum", &ignored, NULL, NULL);
  CHECK(st == RF_ERROR_ARGUMENT, "invalid runtime name");
  st = rf_train_run(cfg, "actor", &ignored, NULL, &ignored);
  CHECK(st == RF_ERROR_ARGUMENT, "trace rejected on the actor runtime");

  /* A tiny benchmark through the C surface. */
  const char* bench =
      "{\"family\":\"marl-inference\",\"agents\":[2],\"episodes\":[4],"
      "\"reps\":3,\"warmup\":0,\"workers\":1,\"runtime\":\"reactor\"}";
  char* csv = NULL;
  char* notes = NULL;
  st = rf_bench_run(bench, &csv, &notes);
  CHECK(st == RF_OK && csv != NULL &&
            strncmp(csv, "family,runtime,param_name,param_value,rep,wall_ns,",
                    50) == 0,
        "bench runs and emits the CSV schema");
  rf_string_free(csv);
  rf_string_free(notes);

  st = rf_bench_run("{\"family\":\"no-such-family\"}", &csv, &notes);
  CHECK(st == RF_ERROR_ARGUMENT && csv == NULL, "unknown family rejected");

  st = rf_bench_run("not json at all", &csv, &notes);
  CHECK(st == RF_ERROR_ARGUMENT, "malformed spec rejected");

  if (failures == 0) {
    printf("capi_smoke: all checks passed\n");
    return 0;
  }
  printf("capi_smoke: %d check(s) failed\n", failures);
  return 1;
}
