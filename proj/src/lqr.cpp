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

#include "drlqr/lqr.hpp"

#include <cmath>

#include "drlqr/errors.hpp"
#include "drlqr/linalg.hpp"

namespace drlqr {

namespace {

bool stabilizes(const Matrix& a_cl) { return is_stable(a_cl); }

Matrix cost_to_go_unchecked(const Matrix& K, const Matrix& a_cl, const CostSpec& cost) {
  return detail::dlyap_prechecked(a_cl.transpose(), cost.closed_loop_weight(K));
}

Matrix state_cov_unchecked(const Matrix& a_cl, const CostSpec& cost) {
  return detail::dlyap_prechecked(a_cl, cost.Sigma_w);
}

Matrix advantage_from(const Matrix& K, const PlantSample& theta, const CostSpec& cost,
                      const Matrix& P) {
  const Matrix BtP = theta.B.transpose() * P;
  return (cost.R + BtP * theta.B) * K - BtP * theta.A - cost.S.transpose();
}

}  // namespace

std::optional<Matrix> cost_to_go(const Matrix& K, const PlantSample& theta,
                                 const CostSpec& cost) {
  const Matrix a_cl = closed_loop(theta, K);
  if (!stabilizes(a_cl)) return std::nullopt;
  return cost_to_go_unchecked(K, a_cl, cost);
}

double lqr_cost(const Matrix& K, const PlantSample& theta, const CostSpec& cost) {
  const auto P = cost_to_go(K, theta, cost);
  if (!P) return kInfiniteCost;
  return (*P * cost.Sigma_w).trace();
}

std::optional<Matrix> state_cov(const Matrix& K, const PlantSample& theta,
                                const CostSpec& cost) {
  const Matrix a_cl = closed_loop(theta, K);
  if (!stabilizes(a_cl)) return std::nullopt;
  return state_cov_unchecked(a_cl, cost);
}

std::optional<Matrix> advantage_op(const Matrix& K, const PlantSample& theta,
                                   const CostSpec& cost) {
  const auto P = cost_to_go(K, theta, cost);
  if (!P) return std::nullopt;
  return advantage_from(K, theta, cost, *P);
}

std::optional<LqrEvaluation> evaluate(const Matrix& K, const PlantSample& theta,
                                      const CostSpec& cost) {
  const Matrix a_cl = closed_loop(theta, K);
  if (!stabilizes(a_cl)) return std::nullopt;
  LqrEvaluation out;
  out.P = cost_to_go_unchecked(K, a_cl, cost);
  out.Sigma = state_cov_unchecked(a_cl, cost);
  out.E = advantage_from(K, theta, cost, out.P);
  out.gradient = 2.0 * out.E * out.Sigma;
  out.cost = (out.P * cost.Sigma_w).trace();
  return out;
}

std::optional<Matrix> policy_gradient(const Matrix& K, const PlantSample& theta,
                                      const CostSpec& cost) {
  auto eval = evaluate(K, theta, cost);
  if (!eval) return std::nullopt;
  return std::move(eval->gradient);
}

std::optional<Matrix> dtheta_P(const Matrix& K, const PlantSample& theta,
                               const CostSpec& cost, const ThetaDirection& dir) {
  const Matrix a_cl = closed_loop(theta, K);
  if (!stabilizes(a_cl)) return std::nullopt;
  const Matrix P = cost_to_go_unchecked(K, a_cl, cost);
  const Matrix d_cl = dir.dA - dir.dB * K;
  const Matrix half = a_cl.transpose() * P * d_cl;
  return detail::dlyap_prechecked(a_cl.transpose(), half + half.transpose());
}

std::optional<Matrix> dtheta_Sigma(const Matrix& K, const PlantSample& theta,
                                   const CostSpec& cost, const ThetaDirection& dir) {
  const Matrix a_cl = closed_loop(theta, K);
  if (!stabilizes(a_cl)) return std::nullopt;
  const Matrix Sigma = state_cov_unchecked(a_cl, cost);
  const Matrix d_cl = dir.dA - dir.dB * K;
  const Matrix half = a_cl * Sigma * d_cl.transpose();
  return detail::dlyap_prechecked(a_cl, half + half.transpose());
}

std::optional<Matrix> dtheta_E(const Matrix& K, const PlantSample& theta,
                               const CostSpec& cost, const ThetaDirection& dir) {
  const Matrix a_cl = closed_loop(theta, K);
  if (!stabilizes(a_cl)) return std::nullopt;
  const Matrix P = cost_to_go_unchecked(K, a_cl, cost);
  const Matrix d_cl = dir.dA - dir.dB * K;
  const Matrix half = a_cl.transpose() * P * d_cl;
  const Matrix dP = detail::dlyap_prechecked(a_cl.transpose(), half + half.transpose());
  // E = -[0 I] (Q + [A B]' P [A B]) [I; -K]; differentiate each factor.
  return -(dir.dB.transpose() * P * a_cl + theta.B.transpose() * dP * a_cl +
           theta.B.transpose() * P * d_cl);
}

double dr_cost_estimate(const Matrix& K, std::span<const PlantSample> thetas,
                        const CostSpec& cost) {
  if (thetas.empty()) throw ArgumentError("dr_cost_estimate: empty plant list");
  CompensatedScalar sum;
  for (const auto& theta : thetas) {
    const double j = lqr_cost(K, theta, cost);
    if (j == kInfiniteCost) return kInfiniteCost;
    sum.add(j);
  }
  return sum.value() / static_cast<double>(thetas.size());
}

Matrix minibatch_gradient(const Matrix& K, std::span<const PlantSample> thetas,
                          const CostSpec& cost) {
  if (thetas.empty()) throw ArgumentError("minibatch_gradient: empty minibatch");
  CompensatedSum sum(K.rows(), K.cols());
  for (std::size_t i = 0; i < thetas.size(); ++i) {
    const auto g = policy_gradient(K, thetas[i], cost);
    if (!g) throw InfeasibleError("minibatch_gradient: gain destabilizes plant", i);
    sum.add(*g);
  }
  return sum.value() / static_cast<double>(thetas.size());
}

SkippingGradient minibatch_gradient_skipping(const Matrix& K,
                                             std::span<const PlantSample> thetas,
                                             const CostSpec& cost) {
  SkippingGradient out;
  CompensatedSum sum(K.rows(), K.cols());
  CompensatedScalar cost_sum;
  for (std::size_t i = 0; i < thetas.size(); ++i) {
    const auto eval = evaluate(K, thetas[i], cost);
    if (!eval) {
      out.skipped.push_back(i);
      continue;
    }
    sum.add(eval->gradient);
    cost_sum.add(eval->cost);
    ++out.used;
  }
  if (out.used == 0) {
    out.gradient = Matrix::Zero(K.rows(), K.cols());
    out.mean_cost = kInfiniteCost;
  } else {
    out.gradient = sum.value() / static_cast<double>(out.used);
    out.mean_cost = cost_sum.value() / static_cast<double>(out.used);
  }
  return out;
}

void CompensatedSum::add(const Matrix& term) {
  for (Eigen::Index j = 0; j < sum_.cols(); ++j) {
    for (Eigen::Index i = 0; i < sum_.rows(); ++i) {
      const double s = sum_(i, j);
      const double x = term(i, j);
      const double t = s + x;
      carry_(i, j) += (std::abs(s) >= std::abs(x)) ? (s - t) + x : (x - t) + s;
      sum_(i, j) = t;
    }
  }
}

void CompensatedScalar::add(double term) {
  const double t = sum_ + term;
  carry_ += (std::abs(sum_) >= std::abs(term)) ? (sum_ - t) + term : (term - t) + sum_;
  sum_ = t;
}

}  // namespace drlqr
