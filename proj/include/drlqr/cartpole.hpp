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

#include <array>
#include <cstddef>
#include <cstdint>
#include <utility>

#include "drlqr/distribution.hpp"
#include "drlqr/rng.hpp"
#include "drlqr/system.hpp"

namespace drlqr {

struct CartpoleParams {
  double m_c = 1.0;    // cart mass, kg
  double m_p = 0.1;    // pole mass, kg
  double l = 0.5;      // pole length, m
  double g = 9.81;     // m/s^2
  double mu_c = 0.25;  // cart-track friction
  double mu_p = 0.01;  // joint friction, N m s
  // When set, the length entering the equations of motion is l / 2.
  bool half_length = false;

  double lhat() const { return half_length ? 0.5 * l : l; }
  void validate() const;
};

struct DomainSpec {
  CartpoleParams base;
  double l_min = 0.2;
  double l_max = 0.8;
  double dt = 0.02;  // s
  std::uint64_t seed = 0;

  void validate() const;
};

/// State is [x, xdot, theta, thetadot]; theta = 0 is upright, u pushes right.
using CartpoleState = std::array<double, 4>;

CartpoleState nonlinear_dynamics(const CartpoleState& state, double u,
                                 const CartpoleParams& p);

struct ContinuousModel {
  Matrix A_c;  // 4 x 4
  Matrix B_c;  // 4 x 1
};

/// Jacobians at the upright equilibrium by central differences. The
/// kinematic rows (xdot and thetadot) are filled in exactly.
ContinuousModel linearize(const CartpoleParams& p, double h = 1e-7);

/// Zero-order-hold exact discretization. A = exp(dt A_c), so every pole maps
/// to exp(dt lambda). B comes from the same augmented exponential, which also
/// covers singular A_c.
PlantSample discretize(const Matrix& A_c, const Matrix& B_c, double dt);

PlantSample plant_for_length(const DomainSpec& spec, double l);

PlantSample sample_theta(const DomainSpec& spec, Rng& rng);

struct DomainExtent {
  double diam = 0.0;       // max pairwise ||[A_i B_i] - [A_j B_j]||_2
  double theta_bar = 0.0;  // max ||[A_i B_i]||_2
};

/// Grid estimate over `grid` evenly spaced lengths in [l_min, l_max].
DomainExtent estimate_diam(const DomainSpec& spec, std::size_t grid);

class CartpoleDistribution final : public PlantDistribution {
 public:
  explicit CartpoleDistribution(DomainSpec spec);

  PlantSample sample(Rng& rng) const override { return sample_theta(spec_, rng); }
  std::size_t nx() const override { return 4; }
  std::size_t nu() const override { return 1; }

  const DomainSpec& spec() const { return spec_; }

 private:
  DomainSpec spec_;
};

}  // namespace drlqr
