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

#include "drlqr/distribution.hpp"

#include "drlqr/errors.hpp"

namespace drlqr {

std::vector<PlantSample> PlantDistribution::sample_many(Rng& rng,
                                                        std::size_t count) const {
  std::vector<PlantSample> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(sample(rng));
  return out;
}

FiniteDistribution::FiniteDistribution(std::vector<PlantSample> atoms)
    : atoms_(std::move(atoms)) {
  if (atoms_.empty()) throw ArgumentError("FiniteDistribution: no atoms");
  for (const auto& a : atoms_) {
    if (a.nx() != atoms_.front().nx() || a.nu() != atoms_.front().nu() ||
        a.A.cols() != a.A.rows() || static_cast<std::size_t>(a.B.rows()) != a.nx()) {
      throw ArgumentError("FiniteDistribution: inconsistent atom shapes");
    }
  }
}

PlantSample FiniteDistribution::sample(Rng& rng) const {
  return atoms_[rng.index(atoms_.size())];
}

}  // namespace drlqr
