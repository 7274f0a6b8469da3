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
#include <chrono>

#include "actor/actor_system.hh"
#include "actor/codec.hh"
#include "core/errors.hh"
#include "core/hash.hh"
#include "rl/pipeline.hh"

namespace reflow::rl {

namespace {

// One observation producer: steps its environment under a random policy and
// hands off fixed-size chunks of observations.
struct SourceCore {
  std::unique_ptr<Environment> env;
  SplitMix64 action_rng{0};
  SplitMix64 reset_rng{0};
  uint64_t remaining = 0;
  uint32_t chunk = 64;
  uint64_t steps_done = 0;
  std::vector<Observation> obs;
  bool active = false;

  std::vector<Observation> run_chunk() {
    std::vector<Observation> out;
    uint64_t n = std::min<uint64_t>(chunk, remaining);
    out.reserve(n);
    uint32_t actions[1];
    for (uint64_t k = 0; k < n; ++k) {
      if (!active) {
        obs = env->reset(reset_rng.next_u64());
        active = true;
      }
      actions[0] = action_rng.bounded(env->action_count());
      EnvStep st = env->step(std::span<const uint32_t>(actions, 1));
      if (st.done) active = false;
      out.push_back(std::move(st.obs[0]));
      ++steps_done;
    }
    remaining -= n;
    return out;
  }
};

struct SinkTally {
  uint64_t count = 0;
  uint64_t bytes = 0;
  uint64_t digest = 0;  // xor of per-chunk hashes: order-independent
};

uint64_t chunk_digest(std::span<const Observation> chunk) {
  Fnv64 h;
  for (const Observation& o : chunk) {
    h.mix_u64(o.id);
    h.mix_bytes(o.bytes.data(), o.bytes.size());
  }
  return h.digest();
}

void tally_chunk(SinkTally& t, std::span<const Observation> chunk) {
  t.count += chunk.size();
  for (const Observation& o : chunk) t.bytes += 4 + o.bytes.size();
  t.digest ^= chunk_digest(chunk);
}

SourceCore make_source_core(const ThroughputConfig& cfg, uint32_t index) {
  SourceCore c;
  c.env = make_environment(cfg.env);
  uint64_t seed = cfg.seed + index;
  c.action_rng = SplitMix64(seed ^ 0xac710aac710aull);
  c.reset_rng = SplitMix64(seed ^ 0x0b5e55ed0b5e55edull);
  uint64_t share = cfg.total_steps / cfg.parallel;
  if (index < cfg.total_steps % cfg.parallel) ++share;
  c.remaining = share;
  c.chunk = cfg.chunk;
  return c;
}

void validate_tp(const ThroughputConfig& cfg) {
  if (cfg.parallel < 1) {
    throw RuntimeApiError("throughput: parallel must be >= 1");
  }
  if (cfg.chunk < 1) throw RuntimeApiError("throughput: chunk must be >= 1");
  if (cfg.workers < 1) {
    throw RuntimeApiError("throughput: workers must be >= 1");
  }
}

ThroughputResult result_from(const SinkTally& t, uint64_t wall_ns) {
  ThroughputResult out;
  out.env_steps = t.count;
  out.payload_bytes = t.bytes;
  out.obs_hash = t.digest;
  out.wall_ns = wall_ns;
  out.obs_per_sec = wall_ns == 0 ? 0.0
                                 : static_cast<double>(t.count) /
                                       (static_cast<double>(wall_ns) / 1e9);
  return out;
}

}  // namespace

ThroughputResult run_reactor_throughput(const ThroughputConfig& cfg) {
  validate_tp(cfg);
  ProgramBuilder b;

  auto& source = b.reactor_class("Source");
  source.output("obs").logical_action("tick").state(
      [cfg](const InstanceInfo& info) {
        return std::make_shared<SourceCore>(
            make_source_core(cfg, info.bank_index));
      });
  source.reaction("init").on_startup().schedules("tick").body(
      [](ReactionContext& ctx) {
        if (ctx.state<SourceCore>().remaining > 0) {
          ctx.schedule("tick", Value{});
        }
      });
  source.reaction("pump")
      .triggered_by("tick")
      .writes("obs")
      .schedules("tick")
      .body([](ReactionContext& ctx) {
        auto& core = ctx.state<SourceCore>();
        auto chunk = core.run_chunk();
        ctx.set("obs", Box<std::vector<Observation>>::make(std::move(chunk)));
        if (core.remaining > 0) ctx.schedule("tick", Value{});
      });

  auto& sink = b.reactor_class("SinkReactor");
  sink.input("obs", cfg.parallel).state([](const InstanceInfo&) {
    return std::make_shared<SinkTally>();
  });
  sink.reaction("drain")
      .triggered_by("obs")
      .body([parallel = cfg.parallel](ReactionContext& ctx) {
        auto& tally = ctx.state<SinkTally>();
        for (uint32_t ch = 0; ch < parallel; ++ch) {
          if (!ctx.present("obs", ch)) continue;
          const auto& chunk =
              unbox<std::vector<Observation>>(ctx.get("obs", ch));
          tally_chunk(tally, chunk);
        }
      });

  b.instantiate("Source", "source", cfg.parallel);
  b.instantiate("SinkReactor", "sink");
  b.connect({"source", "obs"}, {"sink", "obs"});
  auto prog = b.build();

  RuntimeConfig rc;
  rc.workers = cfg.workers;
  rc.seed = cfg.seed;
  Runtime rt(prog, rc);
  ExecutionReport rep = rt.run();
  if (rep.faulted) {
    throw RuntimeApiError("throughput run faulted: " + rep.fault_message);
  }
  auto tally = rt.state_of<SinkTally>("sink");
  return result_from(*tally, rep.wall_ns);
}

ThroughputResult run_actor_throughput(const ThroughputConfig& cfg) {
  validate_tp(cfg);

  // Sources self-message to keep pumping; the sink answers the watch request
  // once the expected number of observations has arrived.
  actor::ActorSystem sys;
  auto t0 = std::chrono::steady_clock::now();

  auto sink_tally = std::make_shared<SinkTally>();
  actor::ActorId sink_id = sys.spawn(
      [tally = sink_tally, watch = uint64_t{0}, expected = uint64_t{0}](
          actor::ActorContext& ctx, actor::Message& msg) mutable {
        actor::Decoder dec(msg.bytes);
        uint8_t kind = dec.get_u8();
        if (kind == 0) {  // watch: carries the expected total
          expected = dec.get_u64();
          watch = msg.request_id;
        } else {
          auto chunk = dec.get_observations();
          tally_chunk(*tally, chunk);
        }
        if (watch != 0 && tally->count >= expected) {
          actor::Message done;
          done.request_id = watch;
          std::vector<uint8_t> ok{1};
          ctx.reply(done, ok);
          watch = 0;
        }
      });

  std::vector<std::shared_ptr<SourceCore>> cores;
  std::vector<actor::ActorId> sources;
  for (uint32_t i = 0; i < cfg.parallel; ++i) {
    cores.push_back(std::make_shared<SourceCore>(make_source_core(cfg, i)));
    sources.push_back(sys.spawn([core = cores.back(), sink_id](
                                    actor::ActorContext& ctx,
                                    actor::Message&) {
      auto chunk = core->run_chunk();
      actor::Encoder enc;
      enc.put_u8(1);
      enc.put_observations(chunk);
      auto bytes = enc.take();
      ctx.send(sink_id, bytes);
      if (core->remaining > 0) {
        std::vector<uint8_t> again{2};
        ctx.send(ctx.self(), again);
      }
    }));
  }

  actor::Encoder watch_enc;
  watch_enc.put_u8(0);
  watch_enc.put_u64(cfg.total_steps);
  uint64_t watch = sys.send_request(sink_id, watch_enc.bytes());
  for (uint32_t i = 0; i < cfg.parallel; ++i) {
    if (cores[i]->remaining > 0) {
      std::vector<uint8_t> go{2};
      sys.send(sources[i], go);
    }
  }
  sys.await_reply(watch, 10ull * 60 * 1000 * 1000 * 1000);
  uint64_t wall = static_cast<uint64_t>(
      std::chrono::duration_cast<std::chrono::nanoseconds>(
          std::chrono::steady_clock::now() - t0)
          .count());
  sys.shutdown();

  return result_from(*sink_tally, wall);
}

}  // namespace reflow::rl
