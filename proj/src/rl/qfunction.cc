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
#include "rl/qfunction.hh"

#include <cmath>

#include "core/errors.hh"
#include "core/hash.hh"
#include "rl/envs.hh"

namespace reflow::rl {

namespace {

void check_config(const QUpdateConfig& cfg) {
  if (!(cfg.alpha > 0.0 && cfg.alpha <= 1.0)) {
    throw RuntimeApiError("q-function: alpha must be in (0, 1]");
  }
  if (!(cfg.gamma >= 0.0 && cfg.gamma <= 1.0)) {
    throw RuntimeApiError("q-function: gamma must be in [0, 1]");
  }
  if (cfg.sync_every == 0) {
    throw RuntimeApiError("q-function: sync_every must be > 0");
  }
}

uint64_t hash_doubles(const std::vector<double>& v) {
  Fnv64 h;
  for (double d : v) h.mix_f64(d);
  return h.digest();
}

class TabularQ final : public QFunction {
 public:
  TabularQ(uint32_t states, uint32_t actions, const QUpdateConfig& cfg)
      : states_(states),
        actions_(actions),
        cfg_(cfg),
        table_(static_cast<size_t>(states) * actions, 0.0),
        target_(table_),
        visits_(table_.size(), 0) {
    check_config(cfg);
    if (states_ == 0 || actions_ == 0) {
      throw RuntimeApiError("q-function: empty state or action space");
    }
  }

  uint32_t action_count() const override { return actions_; }

  double value(uint32_t s, uint32_t a) const override {
    return table_[index(s, a)];
  }

  uint32_t greedy_action(uint32_t s) const override {
    uint32_t best = 0;
    double best_v = table_[index(s, 0)];
    for (uint32_t a = 1; a < actions_; ++a) {
      double v = table_[index(s, a)];
      if (v > best_v) {
        best_v = v;
        best = a;
      }
    }
    return best;
  }

  void update_batch(std::span<const Transition> batch) override {
    for (const Transition& t : batch) {
      if (t.state >= states_ || t.next_state >= states_ ||
          t.action >= actions_) {
        throw RuntimeApiError("q-function: transition outside table");
      }
      double bootstrap = 0.0;
      if (!t.done) {
        bootstrap = target_[index(t.next_state, 0)];
        for (uint32_t a = 1; a < actions_; ++a) {
          bootstrap = std::max(bootstrap, target_[index(t.next_state, a)]);
        }
      }
      size_t i = index(t.state, t.action);
      double delta =
          static_cast<double>(t.reward) + cfg_.gamma * bootstrap - table_[i];
      table_[i] += cfg_.alpha * delta;
      if (!std::isfinite(table_[i])) {
        throw RuntimeApiError("q-function: update produced a non-finite value");
      }
      ++visits_[i];
      ++updates_;
      if (updates_ % cfg_.sync_every == 0) target_ = table_;
    }
  }

  std::vector<double> snapshot_params() const override { return table_; }

  void load_params(std::span<const double> params) override {
    if (params.size() != table_.size()) {
      throw RuntimeApiError("q-function: parameter size mismatch");
    }
    table_.assign(params.begin(), params.end());
  }

  uint64_t param_hash() const override { return hash_doubles(table_); }
  uint64_t updates_applied() const override { return updates_; }

 private:
  size_t index(uint32_t s, uint32_t a) const {
    return static_cast<size_t>(s) * actions_ + a;
  }

  uint32_t states_;
  uint32_t actions_;
  QUpdateConfig cfg_;
  std::vector<double> table_;
  std::vector<double> target_;
  std::vector<uint64_t> visits_;
  uint64_t updates_ = 0;
};

// Q(s, a) = w_a . [bytes/255, 1]; states are image latents rendered on
// demand. The same Q-learning rule applies to the weight row of the taken
// action.
class LinearQ final : public QFunction {
 public:
  static constexpr size_t kDim = Image80Env::kBytes + 1;

  LinearQ(uint32_t latents, uint32_t actions, const QUpdateConfig& cfg)
      : latents_(latents),
        actions_(actions),
        cfg_(cfg),
        weights_(static_cast<size_t>(actions) * kDim, 0.0),
        target_(weights_),
        visits_(actions, 0) {
    check_config(cfg);
  }

  uint32_t action_count() const override { return actions_; }

  double value(uint32_t s, uint32_t a) const override {
    return dot(weights_, a, s);
  }

  uint32_t greedy_action(uint32_t s) const override {
    uint32_t best = 0;
    double best_v = dot(weights_, 0, s);
    for (uint32_t a = 1; a < actions_; ++a) {
      double v = dot(weights_, a, s);
      if (v > best_v) {
        best_v = v;
        best = a;
      }
    }
    return best;
  }

  void update_batch(std::span<const Transition> batch) override {
    for (const Transition& t : batch) {
      if (t.state >= latents_ || t.next_state >= latents_ ||
          t.action >= actions_) {
        throw RuntimeApiError("q-function: transition outside latent space");
      }
      double bootstrap = 0.0;
      if (!t.done) {
        bootstrap = dot(target_, 0, t.next_state);
        for (uint32_t a = 1; a < actions_; ++a) {
          bootstrap = std::max(bootstrap, dot(target_, a, t.next_state));
        }
      }
      double delta = static_cast<double>(t.reward) + cfg_.gamma * bootstrap -
                     dot(weights_, t.action, t.state);
      double scale = cfg_.alpha * delta;
      const auto& img = Image80Env::render(t.state);
      double* row = &weights_[static_cast<size_t>(t.action) * kDim];
      for (size_t i = 0; i < Image80Env::kBytes; ++i) {
        row[i] += scale * (static_cast<double>(img[i]) / 255.0);
      }
      row[kDim - 1] += scale;
      if (!std::isfinite(row[kDim - 1])) {
        throw RuntimeApiError("q-function: update produced a non-finite value");
      }
      ++visits_[t.action];
      ++updates_;
      if (updates_ % cfg_.sync_every == 0) target_ = weights_;
    }
  }

  std::vector<double> snapshot_params() const override { return weights_; }

  void load_params(std::span<const double> params) override {
    if (params.size() != weights_.size()) {
      throw RuntimeApiError("q-function: parameter size mismatch");
    }
    weights_.assign(params.begin(), params.end());
  }

  uint64_t param_hash() const override { return hash_doubles(weights_); }
  uint64_t updates_applied() const override { return updates_; }

 private:
  double dot(const std::vector<double>& w, uint32_t action,
             uint32_t latent) const {
    const auto& img = Image80Env::render(latent);
    const double* row = &w[static_cast<size_t>(action) * kDim];
    double acc = 0.0;
    for (size_t i = 0; i < Image80Env::kBytes; ++i) {
      acc += row[i] * (static_cast<double>(img[i]) / 255.0);
    }
    return acc + row[kDim - 1];
  }

  uint32_t latents_;
  uint32_t actions_;
  QUpdateConfig cfg_;
  std::vector<double> weights_;
  std::vector<double> target_;
  std::vector<uint64_t> visits_;
  uint64_t updates_ = 0;
};

}  // namespace

std::unique_ptr<QFunction> make_tabular_q(uint32_t states, uint32_t actions,
                                          const QUpdateConfig& cfg) {
  return std::make_unique<TabularQ>(states, actions, cfg);
}

std::unique_ptr<QFunction> make_linear_q(uint32_t latents, uint32_t actions,
                                         const QUpdateConfig& cfg) {
  return std::make_unique<LinearQ>(latents, actions, cfg);
}

}  // namespace reflow::rl
