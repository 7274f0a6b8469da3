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
#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "core/errors.hh"

namespace reflow::bench {

inline double mean(std::span<const double> xs) {
  if (xs.empty()) throw RuntimeApiError("stats: mean of empty sample");
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

inline double sample_stddev(std::span<const double> xs) {
  if (xs.size() < 2) {
    throw RuntimeApiError("stats: stddev needs at least two samples");
  }
  double m = mean(xs);
  double acc = 0.0;
  for (double x : xs) acc += (x - m) * (x - m);
  return std::sqrt(acc / static_cast<double>(xs.size() - 1));
}

inline double median(std::vector<double> xs) {
  if (xs.empty()) throw RuntimeApiError("stats: median of empty sample");
  std::sort(xs.begin(), xs.end());
  size_t n = xs.size();
  return n % 2 == 1 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

// Two-sided 99% critical value of Student's t for the given degrees of
// freedom; the table covers 1..30, then 40, then the normal limit.
inline double t_critical_99(size_t df) {
  static constexpr double kTable[30] = {
      63.657, 9.925, 5.841, 4.604, 4.032, 3.707, 3.499, 3.355, 3.250, 3.169,
      3.106,  3.055, 3.012, 2.977, 2.947, 2.921, 2.898, 2.878, 2.861, 2.845,
      2.831,  2.819, 2.807, 2.797, 2.787, 2.779, 2.771, 2.763, 2.756, 2.750};
  if (df == 0) throw RuntimeApiError("stats: zero degrees of freedom");
  if (df <= 30) return kTable[df - 1];
  if (df <= 40) return 2.704;
  return 2.576;
}

struct ConfidenceInterval {
  double lo = 0.0;
  double hi = 0.0;
  double center = 0.0;
};

// 99% confidence interval for the mean of an i.i.d. sample.
inline ConfidenceInterval ci99(std::span<const double> xs) {
  double m = mean(xs);
  double s = sample_stddev(xs);
  double half =
      t_critical_99(xs.size() - 1) * s / std::sqrt(static_cast<double>(xs.size()));
  return {m - half, m + half, m};
}

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

// Ordinary least squares over (x, y) pairs.
inline LinearFit fit_line(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw RuntimeApiError("stats: fit needs >= 2 matching points");
  }
  double n = static_cast<double>(x.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
    syy += y[i] * y[i];
  }
  double denom = n * sxx - sx * sx;
  if (denom == 0.0) throw RuntimeApiError("stats: degenerate x values in fit");
  LinearFit f;
  f.slope = (n * sxy - sx * sy) / denom;
  f.intercept = (sy - f.slope * sx) / n;
  double ss_tot = syy - sy * sy / n;
  if (ss_tot > 0.0) {
    double ss_res = 0.0;
    for (size_t i = 0; i < x.size(); ++i) {
      double e = y[i] - (f.intercept + f.slope * x[i]);
      ss_res += e * e;
    }
    f.r2 = 1.0 - ss_res / ss_tot;
  } else {
    f.r2 = 1.0;
  }
  return f;
}

}  // namespace reflow::bench
