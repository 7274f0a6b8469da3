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
#include "bench/bench.hh"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "core/errors.hh"

namespace reflow::bench {

namespace {

void validate_spec(const BenchSpec& spec) {
  if (spec.reps < 3) {
    throw RuntimeApiError("bench: at least 3 measured repetitions required");
  }
  if (spec.runtime != "reactor" && spec.runtime != "actor" &&
      spec.runtime != "both") {
    throw RuntimeApiError("bench: runtime must be reactor, actor, or both");
  }
  if (spec.workers < 1) throw RuntimeApiError("bench: workers must be >= 1");
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

std::string fmt3(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

void write_atomically(const std::string& path, const std::string& content) {
  std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(path, std::ios::trunc | std::ios::binary);
  if (!out) throw IoError("bench: cannot open '" + path + "'");
  out << content;
  if (!out.good()) throw IoError("bench: short write to '" + path + "'");
}

}  // namespace

BenchReport run_bench(const BenchSpec& spec) {
  validate_spec(spec);
  BenchReport report;
  if (spec.family == "broadcast-gather") {
    report = bench_broadcast_gather(spec);
  } else if (spec.family == "env-throughput") {
    report = bench_env_throughput(spec);
  } else if (spec.family == "parallel-q") {
    report = bench_parallel_q(spec);
  } else if (spec.family == "marl-inference") {
    report = bench_marl_inference(spec);
  } else {
    throw RuntimeApiError("bench: unknown family '" + spec.family + "'");
  }
  if (!spec.out_dir.empty()) emit_report(spec, report);
  return report;
}

std::string csv_text(const std::vector<ResultRow>& rows) {
  if (rows.empty()) throw RuntimeApiError("bench: no rows to write");
  std::ostringstream os;
  os << "family,runtime,param_name,param_value,rep,wall_ns,metric_name,"
        "metric_value,seed,workers,reps,warmup\n";
  for (const ResultRow& r : rows) {
    os << r.family << ',' << r.runtime << ',' << r.param_name << ','
       << fmt(r.param_value) << ',' << r.rep << ',' << r.wall_ns << ','
       << r.metric_name << ',' << fmt(r.metric_value) << ',' << r.seed << ','
       << r.workers << ',' << r.reps << ',' << r.warmup << '\n';
  }
  return os.str();
}

void write_csv(const std::vector<ResultRow>& rows, const std::string& path) {
  write_atomically(path, csv_text(rows));
}

void write_svg(const std::vector<ResultRow>& rows, const std::string& title,
               const std::string& path) {
  if (rows.empty()) throw RuntimeApiError("bench: no rows to chart");

  // Mean wall per (runtime, param_value), params on the x axis.
  std::map<std::string, std::map<double, std::pair<double, uint64_t>>> series;
  for (const ResultRow& r : rows) {
    auto& cell = series[r.runtime][r.param_value];
    cell.first += static_cast<double>(r.wall_ns);
    cell.second += 1;
  }
  double xmin = 0.0, xmax = 0.0, ymax = 0.0;
  bool first = true;
  for (auto& [rt, pts] : series) {
    for (auto& [x, cell] : pts) {
      double y = cell.first / static_cast<double>(cell.second);
      if (first) {
        xmin = xmax = x;
        first = false;
      }
      xmin = std::min(xmin, x);
      xmax = std::max(xmax, x);
      ymax = std::max(ymax, y);
    }
  }
  if (xmax == xmin) xmax = xmin + 1.0;
  if (ymax <= 0.0) ymax = 1.0;

  constexpr double kW = 640, kH = 400, kL = 70, kR = 20, kT = 40, kB = 50;
  auto sx = [&](double x) {
    return kL + (x - xmin) / (xmax - xmin) * (kW - kL - kR);
  };
  auto sy = [&](double y) { return kH - kB - y / ymax * (kH - kT - kB); };

  std::ostringstream os;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
     << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" "
        "height=\"400\" viewBox=\"0 0 640 400\">\n"
     << "<rect width=\"640\" height=\"400\" fill=\"white\"/>\n"
     << "<text x=\"320\" y=\"24\" text-anchor=\"middle\" font-size=\"16\" "
        "font-family=\"sans-serif\">"
     << title << "</text>\n"
     << "<line x1=\"" << fmt3(kL) << "\" y1=\"" << fmt3(kH - kB) << "\" x2=\""
     << fmt3(kW - kR) << "\" y2=\"" << fmt3(kH - kB)
     << "\" stroke=\"black\"/>\n"
     << "<line x1=\"" << fmt3(kL) << "\" y1=\"" << fmt3(kT) << "\" x2=\""
     << fmt3(kL) << "\" y2=\"" << fmt3(kH - kB) << "\" stroke=\"black\"/>\n";
  // Y axis labels: 0 and max (milliseconds).
  os << "<text x=\"" << fmt3(kL - 8) << "\" y=\"" << fmt3(kH - kB + 4)
     << "\" text-anchor=\"end\" font-size=\"11\" "
        "font-family=\"sans-serif\">0</text>\n"
     << "<text x=\"" << fmt3(kL - 8) << "\" y=\"" << fmt3(kT + 4)
     << "\" text-anchor=\"end\" font-size=\"11\" font-family=\"sans-serif\">"
     << fmt3(ymax / 1e6) << " ms</text>\n";

  const char* colors[] = {"#cc3333", "#3366cc", "#33aa55", "#aa7722"};
  size_t ci = 0;
  double legend_y = kT + 10;
  for (auto& [rt, pts] : series) {
    const char* color = colors[ci % 4];
    std::ostringstream line;
    for (auto& [x, cell] : pts) {
      double y = cell.first / static_cast<double>(cell.second);
      line << fmt3(sx(x)) << ',' << fmt3(sy(y)) << ' ';
      os << "<circle cx=\"" << fmt3(sx(x)) << "\" cy=\"" << fmt3(sy(y))
         << "\" r=\"3\" fill=\"" << color << "\"/>\n"
         << "<text x=\"" << fmt3(sx(x)) << "\" y=\"" << fmt3(kH - kB + 16)
         << "\" text-anchor=\"middle\" font-size=\"10\" "
            "font-family=\"sans-serif\">"
         << fmt(x) << "</text>\n";
    }
    os << "<polyline fill=\"none\" stroke=\"" << color
       << "\" stroke-width=\"1.5\" points=\"" << line.str() << "\"/>\n"
       << "<text x=\"" << fmt3(kW - kR - 6) << "\" y=\"" << fmt3(legend_y)
       << "\" text-anchor=\"end\" font-size=\"12\" font-family=\"sans-serif\" "
          "fill=\""
       << color << "\">" << rt << "</text>\n";
    legend_y += 16;
    ++ci;
  }
  os << "</svg>\n";
  write_atomically(path, os.str());
}

std::vector<std::string> emit_report(const BenchSpec& spec,
                                     const BenchReport& report) {
  if (report.rows.empty()) {
    throw RuntimeApiError("bench: nothing to report for '" + spec.family + "'");
  }
  std::filesystem::path dir(spec.out_dir);
  std::string csv = (dir / (spec.family + ".csv")).string();
  std::string svg = (dir / (spec.family + ".svg")).string();
  write_csv(report.rows, csv);
  write_svg(report.rows, spec.family, svg);
  return {csv, svg};
}

LinearFit wall_slope(const std::vector<ResultRow>& rows,
                     const std::string& runtime) {
  std::map<double, std::pair<double, uint64_t>> agg;
  std::set<std::pair<double, uint32_t>> seen;  // one wall sample per rep
  for (const ResultRow& r : rows) {
    if (r.runtime != runtime) continue;
    if (!seen.insert({r.param_value, r.rep}).second) continue;
    auto& cell = agg[r.param_value];
    cell.first += static_cast<double>(r.wall_ns);
    cell.second += 1;
  }
  std::vector<double> xs, ys;
  for (auto& [x, cell] : agg) {
    xs.push_back(x);
    ys.push_back(cell.first / static_cast<double>(cell.second));
  }
  return fit_line(xs, ys);
}

double mean_metric(const std::vector<ResultRow>& rows,
                   const std::string& runtime, const std::string& metric,
                   double param_value) {
  std::vector<double> xs;
  for (const ResultRow& r : rows) {
    if (r.runtime == runtime && r.metric_name == metric &&
        r.param_value == param_value) {
      xs.push_back(r.metric_value);
    }
  }
  return mean(xs);
}

double mean_wall(const std::vector<ResultRow>& rows, const std::string& runtime,
                 double param_value) {
  std::vector<double> xs;
  std::set<uint32_t> reps_seen;
  for (const ResultRow& r : rows) {
    if (r.runtime == runtime && r.param_value == param_value &&
        reps_seen.insert(r.rep).second) {
      xs.push_back(static_cast<double>(r.wall_ns));
    }
  }
  return mean(xs);
}

}  // namespace reflow::bench
