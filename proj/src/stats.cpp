// Copyright 2026 The drlqr Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "drlqr/stats.hpp"

#include <algorithm>
#include <cmath>

#include "drlqr/errors.hpp"

namespace drlqr {

double percentile(std::vector<double> values, double q) {
  if (values.empty()) throw ArgumentError("percentile: no values");
  if (!(q >= 0.0 && q <= 100.0)) throw ArgumentError("percentile: q must lie in [0, 100]");
  for (double v : values) {
    if (std::isnan(v)) throw ArgumentError("percentile: NaN sample");
  }
  std::sort(values.begin(), values.end());
  const double pos = q / 100.0 * static_cast<double>(values.size() - 1);
  const auto i = static_cast<std::size_t>(std::floor(pos));
  const double frac = pos - static_cast<double>(i);
  const double lo = values[i];
  if (frac == 0.0 || i + 1 >= values.size()) return lo;
  const double hi = values[i + 1];
  if (lo == hi) return lo;
  return lo + (hi - lo) * frac;
}

std::vector<double> log_edges(double lo, double hi, std::size_t bins) {
  if (bins < 1) throw ArgumentError("log_edges: need at least one bin");
  if (!(lo > 0.0) || !(hi >= lo) || !std::isfinite(hi)) {
    throw ArgumentError("log_edges: need 0 < lo <= hi < inf");
  }
  if (lo == hi) {
    lo *= 0.99;
    hi *= 1.01;
  }
  const double a = std::log10(lo);
  const double b = std::log10(hi);
  std::vector<double> edges(bins + 1);
  for (std::size_t k = 0; k <= bins; ++k) {
    edges[k] = std::pow(10.0, a + (b - a) * static_cast<double>(k) / static_cast<double>(bins));
  }
  edges.front() = lo;
  edges.back() = hi;
  return edges;
}

Histogram histogram(std::span<const double> values, const std::vector<double>& edges) {
  if (edges.size() < 2) throw ArgumentError("histogram: need at least two edges");
  Histogram h{edges, std::vector<long>(edges.size() - 1, 0)};
  for (double v : values) {
    if (!(v > 0.0) || !std::isfinite(v) || v < edges.front() || v > edges.back()) continue;
    auto it = std::upper_bound(edges.begin(), edges.end(), v);
    auto k = static_cast<std::size_t>(it - edges.begin());
    k = std::min(k, edges.size() - 1);
    ++h.counts[k - 1];
  }
  return h;
}

}  // namespace drlqr
