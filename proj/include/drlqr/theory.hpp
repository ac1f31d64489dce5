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

#include "drlqr/system.hpp"

namespace drlqr {

/// Closed-form constants for step size, batch size, and step count. All
/// suprema over the randomization domain are taken over finite ensembles or
/// grids supplied by the caller.
struct TheoryConstants {
  double L_K = 0.0;
  double c_g = 0.0;
  double L_cost = 0.0;
  double r_g = 0.0;
  double G_bar = 0.0;
  double sigma_sq = 0.0;
  double eps_grad = 0.0;
  long M = 1;
  long N = 1;
  double mu = 0.125;
  double het_budget = 0.0;
};

inline constexpr double kDominanceMu = 0.125;

/// Smoothness of J_DR on the sublevel set of J0.
double compute_LK(double J0, double theta_bar_norm, const CostSpec& cost);

/// Operator-norm radius around K inside which every ensemble member stays
/// stable. Throws ArgumentError when theta_bar_norm is zero.
double compute_cg(double J_dr_K, double theta_bar_norm, const CostSpec& cost);

/// Lipschitz constant of J_DR in K (operator norm) inside the c_g ball.
double compute_Lcost(double J_dr_K, double K_norm, double theta_bar_norm,
                     const CostSpec& cost);

/// Guard radius over a finite ensemble. Throws InfeasibleError if K_gd
/// destabilizes a member.
double compute_rg(std::span<const PlantSample> ensemble, const Matrix& K_gd,
                  const CostSpec& cost);

/// Lipschitz constant of the policy gradient with respect to the plant.
double grad_lipschitz_theta(double J, double theta_bar_norm, const CostSpec& cost);

struct GradientSpread {
  double G_bar = 0.0;
  double sigma_sq = 0.0;
};

/// Mean-value bound: G_bar = lipschitz * diam and sigma_sq = G_bar^2.
GradientSpread compute_Gbar_sigma(double diam, double grad_lipschitz);

/// Spread of observed gradients around their sample mean, Frobenius norm.
GradientSpread compute_Gbar_sigma_empirical(std::span<const Matrix> gradients);

enum class BernsteinVariant {
  kStandard,       // 4(s2 + G e/3)/e^2
  kSqrt2Variance,  // 4(sqrt2 s2 + G e/3)/e^2
  kSqrt2Range,     // 4(3 sqrt2 s2 + G e)/(3 sqrt2 e^2)
};

/// Minibatch size so that all N gradient errors stay below eps_grad with
/// probability 1 - delta. The union bound over N is folded into the log for
/// every variant.
long batch_size(double eps_grad, double G_bar, double sigma_sq, double delta, long N,
                std::size_t nx, std::size_t nu,
                BernsteinVariant variant = BernsteinVariant::kSqrt2Range);

/// Unrounded value of batch_size, for reporting.
double batch_size_raw(double eps_grad, double G_bar, double sigma_sq, double delta,
                      long N, std::size_t nx, std::size_t nu, BernsteinVariant variant);

enum class ContractionRate {
  kExact,     // 1 - 1/(8 L_K)
  kDegraded,  // 1 - mu/(2 L_K) with mu = 1/8
};

/// Steps to shrink an initial gap to eps. Returns 0 when gap0 <= eps.
long num_steps(double gap0, double eps, double L_K,
               ContractionRate rate = ContractionRate::kExact);

enum class BudgetNorm {
  kThetaBar,  // max(||[A B]||, 1)
  kInputMap,  // max(||B||, 1)
};

struct HeterogeneityCheck {
  bool ok = false;
  double budget = 0.0;
  double norm_factor = 1.0;
  double worst_optimal_cost = 0.0;
};

/// Compares diam against 1 / (50000 max(norm, 1) J*^6), minimized over the
/// ensemble. DARE failures propagate as InfeasibleError with the member index.
HeterogeneityCheck check_heterogeneity(std::span<const PlantSample> ensemble,
                                       const CostSpec& cost, double diam,
                                       BudgetNorm norm = BudgetNorm::kThetaBar);

struct SMembership {
  bool in_S = false;
  double cost = 0.0;
  double grad_norm = 0.0;
  double cost_margin = 0.0;  // 8 J_opt - J, must be >= 0
  double grad_margin = 0.0;  // gradient bound - ||grad||_F, must be >= 0
};

SMembership check_S_membership(const Matrix& K, std::span<const PlantSample> ensemble,
                               const CostSpec& cost, double J_dr_opt_estimate);

/// Largest operator norm of [A B] across the ensemble.
double ensemble_theta_bar(std::span<const PlantSample> ensemble);

struct TheoryInputs {
  Matrix K0;
  std::vector<PlantSample> ensemble;  // stands in for the domain
  CostSpec cost;
  double diam = 0.0;
  double theta_bar = 0.0;
  double eps = 1.0;    // target suboptimality
  double delta = 0.05;
  double J_opt = 0.0;  // estimate of the optimal DR cost
  BernsteinVariant variant = BernsteinVariant::kSqrt2Range;
  ContractionRate rate = ContractionRate::kDegraded;
};

/// Evaluates every constant at K0.
TheoryConstants derive_constants(const TheoryInputs& in);

}  // namespace drlqr
