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

#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace drlqr {

/// Inclusive linear interpolation between order statistics (q in [0, 100]).
/// Infinite samples sort last and propagate.
double percentile(std::vector<double> values, double q);

struct Histogram {
  std::vector<double> edges;  // bins + 1 increasing edges
  std::vector<long> counts;
};

/// Log-spaced edges spanning [lo, hi]. A degenerate range is widened by 1%.
std::vector<double> log_edges(double lo, double hi, std::size_t bins);

/// Counts values into the given edges; the last bin is closed on the right.
/// Nonpositive or non-finite values are not counted.
Histogram histogram(std::span<const double> values, const std::vector<double>& edges);

}  // namespace drlqr
