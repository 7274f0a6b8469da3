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
#include "rl/envs.hh"

#include "core/errors.hh"

namespace reflow::rl {

// Tabular blackjack: infinite deck, dealer stands on all 17s, ace usable as
// 11 when it does not bust. The player is dealt up to a sum of at least 12
// (hitting below 12 is free, so those states are folded away), leaving
// 10 sums x 10 dealer cards x 2 ace flags = 200 states.
//
// Actions: 0 = stand, 1 = hit. Reaching exactly 21 on a hit stands
// automatically. Rewards: +1 win, 0 push, -1 loss/bust.
namespace {

constexpr uint32_t kStand = 0;

struct Hand {
  int sum = 0;        // best total counting a usable ace as 11
  bool usable = false;  // an ace currently counted as 11
};

void add_card(Hand& h, int card) {
  if (card == 1 && h.sum + 11 <= 21) {
    h.sum += 11;
    h.usable = true;
  } else {
    h.sum += card;
  }
  if (h.sum > 21 && h.usable) {
    h.sum -= 10;
    h.usable = false;
  }
}

}  // namespace

uint32_t BlackjackEnv::encode(int player_sum, int dealer_card, bool usable) {
  return static_cast<uint32_t>((player_sum - 12) * 20 + (dealer_card - 1) * 2 +
                               (usable ? 1 : 0));
}

int BlackjackEnv::draw_card(SplitMix64& rng) {
  // Ranks 1..13; face cards count 10, so the 10-value mass is 4/13.
  int rank = static_cast<int>(rng.bounded(13)) + 1;
  return rank > 10 ? 10 : rank;
}

std::vector<Observation> BlackjackEnv::reset(uint64_t seed) {
  rng_ = SplitMix64(seed * 0x9e3779b97f4a7c15ull + 0x1234abcdull);
  return reset_from_stream();
}

std::vector<Observation> BlackjackEnv::reset_from_stream() {
  Hand player;
  while (player.sum < 12) add_card(player, draw_card(rng_));
  player_sum_ = player.sum;
  usable_ace_ = player.usable;
  dealer_card_ = draw_card(rng_);
  active_ = true;
  return {Observation{encode(player_sum_, dealer_card_, usable_ace_), {}}};
}

EnvStep BlackjackEnv::step(std::span<const uint32_t> actions) {
  if (!active_) {
    throw RuntimeApiError("blackjack: step on finished episode");
  }
  if (actions.size() != 1 || actions[0] >= action_count()) {
    throw RuntimeApiError("blackjack: bad action");
  }

  float reward = 0.0f;
  bool done = false;

  if (actions[0] != kStand) {
    Hand h{player_sum_, usable_ace_};
    add_card(h, draw_card(rng_));
    player_sum_ = h.sum;
    usable_ace_ = h.usable;
    if (player_sum_ > 21) {
      reward = -1.0f;
      done = true;
    } else if (player_sum_ == 21) {
      reward = resolve_dealer();
      done = true;
    }
  } else {
    reward = resolve_dealer();
    done = true;
  }

  if (done) active_ = false;
  uint32_t id = done ? 0 : encode(player_sum_, dealer_card_, usable_ace_);
  return EnvStep{{Observation{id, {}}}, {reward}, done};
}

float BlackjackEnv::resolve_dealer() {
  Hand dealer;
  add_card(dealer, dealer_card_);
  while (dealer.sum < 17) add_card(dealer, draw_card(rng_));
  if (dealer.sum > 21 || player_sum_ > dealer.sum) return 1.0f;
  if (player_sum_ < dealer.sum) return -1.0f;
  return 0.0f;
}

}  // namespace reflow::rl
