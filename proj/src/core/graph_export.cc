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
#include <sstream>

#include "core/program.hh"
#include "json.hpp"

namespace reflow {

namespace {

const char* link_kind(const FlatLink& l) {
  if (l.physical) return "physical";
  if (l.delay.has_value()) return "delayed";
  return "logical";
}

std::vector<uint32_t> levels_or_zero(const Program& p) {
  // Cyclic programs are still exportable; levels render as 0 for them.
  try {
    return p.levels().level;
  } catch (const CycleError&) {
    return std::vector<uint32_t>(p.reactions().size(), 0);
  }
}

std::string export_json(const Program& p) {
  const std::vector<uint32_t> lv = levels_or_zero(p);
  nlohmann::ordered_json j;
  j["reactors"] = nlohmann::ordered_json::array();
  for (const auto& inst : p.instances()) {
    j["reactors"].push_back(
        {{"name", inst.name}, {"bank_index", inst.bank_index}});
  }
  j["reactions"] = nlohmann::ordered_json::array();
  for (const auto& r : p.reactions()) {
    j["reactions"].push_back({{"id", r.id},
                              {"reactor", p.instances()[r.instance].name},
                              {"level", lv[r.id]}});
  }
  j["edges"] = nlohmann::ordered_json::array();
  for (const auto& e : p.dependency_edges()) {
    j["edges"].push_back(
        {{"from", p.reaction_name(e.from)},
         {"to", p.reaction_name(e.to)},
         {"kind", e.kind == DepKind::order ? "order" : "data"}});
  }
  for (const auto& l : p.links()) {
    j["edges"].push_back({{"from", p.port_name(l.from_port)},
                          {"to", p.port_name(l.to_port)},
                          {"kind", link_kind(l)}});
  }
  return j.dump(2) + "\n";
}

std::string export_dot(const Program& p) {
  const std::vector<uint32_t> lv = levels_or_zero(p);
  std::ostringstream os;
  os << "digraph program {\n  rankdir=LR;\n  node [shape=box];\n";
  for (uint32_t ii = 0; ii < p.instances().size(); ++ii) {
    const auto& inst = p.instances()[ii];
    os << "  subgraph \"cluster_" << inst.name << "\" {\n    label=\""
       << inst.name << "\";\n";
    for (const auto& r : p.reactions()) {
      if (r.instance != ii) continue;
      os << "    \"" << r.name << "\" [label=\"" << r.name << "\\nL"
         << lv[r.id] << "\"];\n";
    }
    os << "  }\n";
  }
  for (const auto& e : p.dependency_edges()) {
    os << "  \"" << p.reaction_name(e.from) << "\" -> \""
       << p.reaction_name(e.to) << "\""
       << (e.kind == DepKind::order ? " [style=dotted]" : "") << ";\n";
  }
  for (const auto& l : p.links()) {
    os << "  \"" << p.port_name(l.from_port) << "\" -> \""
       << p.port_name(l.to_port) << "\" [style=dashed, label=\""
       << link_kind(l) << "\"];\n";
  }
  os << "}\n";
  return os.str();
}

}  // namespace

std::string Program::export_graph(std::string_view format) const {
  if (format == "json") return export_json(*this);
  if (format == "dot") return export_dot(*this);
  throw RuntimeApiError("unsupported graph format '" + std::string(format) +
                        "' (expected dot or json)");
}

}  // namespace reflow
