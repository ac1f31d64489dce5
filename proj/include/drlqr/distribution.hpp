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

#include "drlqr/rng.hpp"
#include "drlqr/system.hpp"

namespace drlqr {

/// Source of random plants. The optimizers only ever see this interface, so
/// the same code runs on the cart-pole domain and on small hand-built
/// ensembles used in tests.
class PlantDistribution {
 public:
  virtual ~PlantDistribution() = default;

  virtual PlantSample sample(Rng& rng) const = 0;
  virtual std::size_t nx() const = 0;
  virtual std::size_t nu() const = 0;

  std::vector<PlantSample> sample_many(Rng& rng, std::size_t count) const;
};

/// Uniform distribution over a fixed list of plants.
class FiniteDistribution final : public PlantDistribution {
 public:
  explicit FiniteDistribution(std::vector<PlantSample> atoms);

  PlantSample sample(Rng& rng) const override;
  std::size_t nx() const override { return atoms_.front().nx(); }
  std::size_t nu() const override { return atoms_.front().nu(); }

  std::span<const PlantSample> atoms() const { return atoms_; }

 private:
  std::vector<PlantSample> atoms_;
};

}  // namespace drlqr
