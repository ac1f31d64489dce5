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
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "drlqr/system.hpp"

namespace drlqr {

/// Cost value reported for gains that do not stabilize the plant.
inline constexpr double kInfiniteCost = std::numeric_limits<double>::infinity();

/// Cost-to-go P(K) = dlyap((A - BK)', [I; -K]' Q [I; -K]).
/// Empty when K does not stabilize the plant.
std::optional<Matrix> cost_to_go(const Matrix& K, const PlantSample& theta,
                                 const CostSpec& cost);

/// Average infinite-horizon cost tr(P(K) Sigma_w), or kInfiniteCost.
double lqr_cost(const Matrix& K, const PlantSample& theta, const CostSpec& cost);

/// Stationary state covariance Sigma(K) = dlyap(A - BK, Sigma_w).
std::optional<Matrix> state_cov(const Matrix& K, const PlantSample& theta,
                                const CostSpec& cost);

/// E(K) = (R + B'PB) K - B'PA - S'.
std::optional<Matrix> advantage_op(const Matrix& K, const PlantSample& theta,
                                   const CostSpec& cost);

/// Exact policy gradient 2 E(K) Sigma(K).
std::optional<Matrix> policy_gradient(const Matrix& K, const PlantSample& theta,
                                      const CostSpec& cost);

// Directional derivatives in plant space, each built from dlyap solves of a
// perturbed right-hand side.
std::optional<Matrix> dtheta_P(const Matrix& K, const PlantSample& theta,
                               const CostSpec& cost, const ThetaDirection& dir);
std::optional<Matrix> dtheta_Sigma(const Matrix& K, const PlantSample& theta,
                                   const CostSpec& cost, const ThetaDirection& dir);
std::optional<Matrix> dtheta_E(const Matrix& K, const PlantSample& theta,
                               const CostSpec& cost, const ThetaDirection& dir);

/// Every per-plant quantity at once, sharing the two Lyapunov solves.
struct LqrEvaluation {
  Matrix P;
  Matrix Sigma;
  Matrix E;
  Matrix gradient;
  double cost = 0.0;
};

std::optional<LqrEvaluation> evaluate(const Matrix& K, const PlantSample& theta,
                                      const CostSpec& cost);

/// Sample mean of lqr_cost; kInfiniteCost if any member is destabilized.
/// Throws ArgumentError on an empty list.
double dr_cost_estimate(const Matrix& K, std::span<const PlantSample> thetas,
                        const CostSpec& cost);

/// Minibatch gradient (1/M) sum_i grad J(K, theta_i), accumulated in list
/// order with compensated summation.
///
/// Throws InfeasibleError carrying the first destabilized member's index.
Matrix minibatch_gradient(const Matrix& K, std::span<const PlantSample> thetas,
                          const CostSpec& cost);

struct SkippingGradient {
  Matrix gradient;  // mean over the stabilized members; zero if none
  std::size_t used = 0;
  std::vector<std::size_t> skipped;
  double mean_cost = 0.0;  // mean cost over the stabilized members
};

/// Like minibatch_gradient, but drops destabilized members and renormalizes
/// the mean over the remaining ones.
SkippingGradient minibatch_gradient_skipping(const Matrix& K,
                                             std::span<const PlantSample> thetas,
                                             const CostSpec& cost);

/// Neumaier-compensated running sum of equally shaped matrices.
class CompensatedSum {
 public:
  CompensatedSum(Eigen::Index rows, Eigen::Index cols)
      : sum_(Matrix::Zero(rows, cols)), carry_(Matrix::Zero(rows, cols)) {}

  void add(const Matrix& term);
  Matrix value() const { return sum_ + carry_; }

 private:
  Matrix sum_;
  Matrix carry_;
};

/// Scalar Neumaier sum.
class CompensatedScalar {
 public:
  void add(double term);
  double value() const { return sum_ + carry_; }

 private:
  double sum_ = 0.0;
  double carry_ = 0.0;
};

}  // namespace drlqr
