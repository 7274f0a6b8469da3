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
#include "rl/env.hh"

#include <charconv>

#include "core/errors.hh"
#include "rl/envs.hh"

namespace reflow::rl {

std::unique_ptr<Environment> make_environment(const std::string& name) {
  if (name == "blackjack") return std::make_unique<BlackjackEnv>();
  if (name == "gridworld") return std::make_unique<GridworldEnv>();
  if (name == "image80") return std::make_unique<Image80Env>();

  constexpr std::string_view kTraffic = "traffic-junction";
  if (name.starts_with(kTraffic)) {
    uint32_t agents = 4;
    std::string_view rest = std::string_view(name).substr(kTraffic.size());
    if (!rest.empty()) {
      if (rest.front() != '(' || rest.back() != ')') {
        throw RuntimeApiError("bad environment name: " + name);
      }
      rest = rest.substr(1, rest.size() - 2);
      auto [ptr, ec] =
          std::from_chars(rest.data(), rest.data() + rest.size(), agents);
      if (ec != std::errc{} || ptr != rest.data() + rest.size()) {
        throw RuntimeApiError("bad environment name: " + name);
      }
    }
    return std::make_unique<TrafficJunctionEnv>(agents);
  }

  throw RuntimeApiError("unknown environment: " + name);
}

}  // namespace reflow::rl
