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

#include <cstdint>
#include <span>
#include <vector>

#include "drlqr/distribution.hpp"
#include "drlqr/system.hpp"

namespace drlqr {

struct AnnealConfig {
  double gamma_tol = 1e-4;
  long inner_budget = 5000;  // max gradient steps per stage
  double inner_eps = 0.0;    // suboptimality target; 0 selects n_x
  long max_stages = 100;
  long ensemble_size = 32;
  long validation_size = 1000;
  std::uint64_t seed = 0;
  double bound_factor = 8.0;  // initial discount: J(0, gamma) <= bound_factor n_x

  void validate() const;
};

/// Cost of K on the plant scaled by sqrt(gamma), i.e. the fixed point of
/// P = Q_K + gamma (A - BK)' P (A - BK). Returns +inf when that is unstable.
double discounted_cost(const Matrix& K, const PlantSample& theta, const CostSpec& cost,
                       double gamma);

double discounted_dr_cost(const Matrix& K, std::span<const PlantSample> ensemble,
                          const CostSpec& cost, double gamma);

PlantSample discount_plant(const PlantSample& theta, double gamma);

/// Largest gamma (within gamma_tol) with J_DR(0, gamma) <= bound_factor n_x.
/// Throws SolverError if even gamma_tol violates the bound.
double find_initial_gamma(std::span<const PlantSample> ensemble, const CostSpec& cost,
                          const AnnealConfig& cfg);

/// Next discount factor. Returns 1 when J_DR(K, 1) <= 2 J_DR(K, gamma);
/// otherwise some gamma' in (gamma, 1] with
/// 2 J_DR(K, gamma) < J_DR(K, gamma') <= 4 J_DR(K, gamma).
double gamma_update(const Matrix& K, std::span<const PlantSample> ensemble,
                    const CostSpec& cost, double gamma, const AnnealConfig& cfg);

struct InnerSolve {
  Matrix K;
  double cost = 0.0;
  double grad_norm = 0.0;
  long steps = 0;
  bool converged = false;  // gradient proxy reached before the budget ran out
};

/// Gradient descent with backtracking on the discounted ensemble cost. Stops
/// once ||g||_F <= inner_eps sigma_min(Sigma_w) / (2 J).
InnerSolve anneal_inner_solve(const Matrix& K0, std::span<const PlantSample> ensemble,
                              const CostSpec& cost, double gamma, const AnnealConfig& cfg);

struct AnnealResult {
  Matrix K;
  std::vector<double> gamma_history;  // gamma_0, ..., 1
  std::vector<double> stage_costs;    // discounted ensemble cost after each inner solve
  std::vector<Matrix> stage_gains;
  std::vector<double> stage_grad_norms;
  std::vector<long> inner_steps;
  std::vector<bool> inner_converged;
  long validation_failures = 0;       // fresh plants not stabilized by K
  long validation_size = 0;
};

/// Starts from K = 0 and raises the discount to 1. Throws SolverError when
/// max_stages is exceeded.
AnnealResult discount_annealing(const PlantDistribution& dist, const CostSpec& cost,
                                const AnnealConfig& cfg);

}  // namespace drlqr
