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

#include "drlqr/theory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "drlqr/errors.hpp"
#include "drlqr/linalg.hpp"
#include "drlqr/lqr.hpp"

namespace drlqr {

namespace {

void require_nonnegative(double v, const char* what) {
  if (!(v >= 0.0) || !std::isfinite(v)) {
    throw ArgumentError(std::string(what) + " must be finite and nonnegative");
  }
}

long saturating_ceil(double v) {
  if (!(v < static_cast<double>(std::numeric_limits<long>::max()))) {
    return std::numeric_limits<long>::max();
  }
  return static_cast<long>(std::ceil(v));
}

}  // namespace

double compute_LK(double J0, double theta_bar_norm, const CostSpec& cost) {
  require_nonnegative(J0, "compute_LK: J0");
  require_nonnegative(theta_bar_norm, "compute_LK: theta_bar_norm");
  const double q_norm = op_norm(cost.block());
  const double s_q = sigma_min(cost.block());
  const double s_w = sigma_min(cost.Sigma_w);
  const double t2 = theta_bar_norm * theta_bar_norm;
  return 4.0 * (q_norm + 2.0 * t2 * J0 / s_w) * (1.0 + 4.0 * t2 * J0 / (s_w * s_w)) *
         2.0 * J0 / s_q;
}

double compute_cg(double J_dr_K, double theta_bar_norm, const CostSpec& cost) {
  if (!(J_dr_K > 0.0) || !std::isfinite(J_dr_K)) {
    throw ArgumentError("compute_cg: cost must be positive and finite");
  }
  if (!(theta_bar_norm > 0.0)) throw ArgumentError("compute_cg: theta_bar_norm must be positive");
  return sigma_min(cost.Q) * sigma_min(cost.Sigma_w) /
         (4.0 * J_dr_K * theta_bar_norm * (theta_bar_norm + 1.0));
}

double compute_Lcost(double J_dr_K, double K_norm, double theta_bar_norm,
                     const CostSpec& cost) {
  if (!(J_dr_K > 0.0) || !(theta_bar_norm > 0.0)) {
    throw ArgumentError("compute_Lcost: cost and theta_bar_norm must be positive");
  }
  require_nonnegative(K_norm, "compute_Lcost: K_norm");
  const double J = J_dr_K;
  const double t = theta_bar_norm;
  const double s_q = sigma_min(cost.block());
  const double s_w = sigma_min(cost.Sigma_w);
  const double root = std::sqrt(s_q * s_w);
  const double first = 4.0 * J * op_norm(cost.block()) * (2.0 * K_norm + 1.0 / (4.0 * t));
  const double second = 8.0 * std::pow(J, 2.5) * t / root *
                        (t * std::sqrt(2.0 * J) / root + 1.0);
  return first + second;
}

double compute_rg(std::span<const PlantSample> ensemble, const Matrix& K_gd,
                  const CostSpec& cost) {
  if (ensemble.empty()) throw ArgumentError("compute_rg: empty ensemble");
  const double k_norm = op_norm(K_gd);
  const double num = sigma_min(cost.block()) * sigma_min(cost.Sigma_w);
  double out = k_norm;
  for (std::size_t i = 0; i < ensemble.size(); ++i) {
    const auto& th = ensemble[i];
    const double J = lqr_cost(K_gd, th, cost);
    if (!std::isfinite(J)) throw InfeasibleError("compute_rg: gain destabilizes member", i);
    const double den = 4.0 * J * op_norm(th.B) * (op_norm(closed_loop(th, K_gd)) + 1.0);
    // A zero input map puts no constraint on the radius.
    if (den > 0.0) out = std::min(out, num / den);
  }
  return out;
}

double grad_lipschitz_theta(double J, double theta_bar_norm, const CostSpec& cost) {
  require_nonnegative(J, "grad_lipschitz_theta: J");
  require_nonnegative(theta_bar_norm, "grad_lipschitz_theta: theta_bar_norm");
  const double s_q = sigma_min(cost.block());
  const double s_w = sigma_min(cost.Sigma_w);
  const double t = theta_bar_norm;
  const double a = std::pow(2.0, 2.5) * std::pow(J, 2.5) * t /
                   (std::pow(s_w, 1.5) * std::pow(s_q, 1.5));
  const double b = std::pow(2.0, 3.5) * std::pow(J, 3.5) * t * op_norm(cost.block()) /
                   (std::pow(s_w, 2.5) * std::pow(s_q, 3.5));
  const double c = std::pow(2.0, 5.5) * std::pow(J, 4.5) * t * t * t /
                   (std::pow(s_w, 3.5) * std::pow(s_q, 3.5));
  return 4.0 * (a + b + c);
}

GradientSpread compute_Gbar_sigma(double diam, double grad_lipschitz) {
  require_nonnegative(diam, "compute_Gbar_sigma: diam");
  require_nonnegative(grad_lipschitz, "compute_Gbar_sigma: lipschitz");
  const double g = grad_lipschitz * diam;
  return {g, g * g};
}

GradientSpread compute_Gbar_sigma_empirical(std::span<const Matrix> gradients) {
  if (gradients.empty()) throw ArgumentError("compute_Gbar_sigma_empirical: no samples");
  CompensatedSum mean_sum(gradients.front().rows(), gradients.front().cols());
  for (const auto& g : gradients) mean_sum.add(g);
  const Matrix mean = mean_sum.value() / static_cast<double>(gradients.size());
  GradientSpread out;
  CompensatedScalar sq;
  for (const auto& g : gradients) {
    const double d = (g - mean).norm();
    out.G_bar = std::max(out.G_bar, d);
    sq.add(d * d);
  }
  out.sigma_sq = sq.value() / static_cast<double>(gradients.size());
  return out;
}

double batch_size_raw(double eps_grad, double G_bar, double sigma_sq, double delta,
                      long N, std::size_t nx, std::size_t nu, BernsteinVariant variant) {
  if (!(eps_grad > 0.0)) throw ArgumentError("batch_size: eps_grad must be positive");
  if (!(delta > 0.0 && delta < 1.0)) throw ArgumentError("batch_size: delta must lie in (0, 1)");
  if (N < 1) throw ArgumentError("batch_size: N must be positive");
  require_nonnegative(G_bar, "batch_size: G_bar");
  require_nonnegative(sigma_sq, "batch_size: sigma_sq");
  const double d = static_cast<double>(nx * nu) + 1.0;
  const double log_term = std::log(2.0 * static_cast<double>(N) * d / delta);
  const double e = eps_grad;
  const double r2 = std::sqrt(2.0);
  switch (variant) {
    case BernsteinVariant::kStandard:
      return 4.0 * (sigma_sq + G_bar * e / 3.0) / (e * e) * log_term;
    case BernsteinVariant::kSqrt2Variance:
      return 4.0 * (r2 * sigma_sq + G_bar * e / 3.0) / (e * e) * log_term;
    case BernsteinVariant::kSqrt2Range:
      return 4.0 * (3.0 * r2 * sigma_sq + G_bar * e) / (3.0 * r2 * e * e) * log_term;
  }
  throw ArgumentError("batch_size: unknown variant");
}

long batch_size(double eps_grad, double G_bar, double sigma_sq, double delta, long N,
                std::size_t nx, std::size_t nu, BernsteinVariant variant) {
  return std::max(1L, saturating_ceil(
                          batch_size_raw(eps_grad, G_bar, sigma_sq, delta, N, nx, nu, variant)));
}

long num_steps(double gap0, double eps, double L_K, ContractionRate rate) {
  if (!(eps > 0.0)) throw ArgumentError("num_steps: eps must be positive");
  if (!(L_K > 0.125)) throw ArgumentError("num_steps: L_K must exceed 1/8");
  if (!(gap0 > eps)) return 0;
  const double shrink = rate == ContractionRate::kExact ? 1.0 / (8.0 * L_K)
                                                        : kDominanceMu / (2.0 * L_K);
  return saturating_ceil(std::log(gap0 / eps) / -std::log1p(-shrink));
}

double ensemble_theta_bar(std::span<const PlantSample> ensemble) {
  double out = 0.0;
  for (const auto& th : ensemble) {
    Matrix ab(th.A.rows(), th.A.cols() + th.B.cols());
    ab << th.A, th.B;
    out = std::max(out, op_norm(ab));
  }
  return out;
}

HeterogeneityCheck check_heterogeneity(std::span<const PlantSample> ensemble,
                                       const CostSpec& cost, double diam, BudgetNorm norm) {
  if (ensemble.empty()) throw ArgumentError("check_heterogeneity: empty ensemble");
  require_nonnegative(diam, "check_heterogeneity: diam");
  double factor = 1.0;
  if (norm == BudgetNorm::kThetaBar) {
    factor = std::max(ensemble_theta_bar(ensemble), 1.0);
  } else {
    for (const auto& th : ensemble) factor = std::max(factor, op_norm(th.B));
  }
  HeterogeneityCheck out;
  out.norm_factor = factor;
  for (std::size_t i = 0; i < ensemble.size(); ++i) {
    double J_star = 0.0;
    try {
      const auto dare = solve_dare(ensemble[i], cost);
      J_star = (dare.P * cost.Sigma_w).trace();
    } catch (const SynthesisError& e) {
      throw InfeasibleError(std::string("check_heterogeneity: ") + e.what(), i);
    }
    out.worst_optimal_cost = std::max(out.worst_optimal_cost, J_star);
  }
  out.budget = 1.0 / (50000.0 * factor * std::pow(out.worst_optimal_cost, 6));
  out.ok = diam <= out.budget;
  return out;
}

SMembership check_S_membership(const Matrix& K, std::span<const PlantSample> ensemble,
                               const CostSpec& cost, double J_dr_opt_estimate) {
  SMembership out;
  const Matrix g = minibatch_gradient(K, ensemble, cost);
  out.cost = dr_cost_estimate(K, ensemble, cost);
  out.grad_norm = g.norm();
  double b_factor = 1.0;
  for (const auto& th : ensemble) b_factor = std::max(b_factor, op_norm(th.B));
  const double bound = 1.0 / (256.0 * b_factor * std::pow(out.cost, 3));
  out.cost_margin = 8.0 * J_dr_opt_estimate - out.cost;
  out.grad_margin = bound - out.grad_norm;
  out.in_S = out.cost_margin >= 0.0 && out.grad_margin >= 0.0;
  return out;
}

TheoryConstants derive_constants(const TheoryInputs& in) {
  if (in.ensemble.empty()) throw ArgumentError("derive_constants: empty ensemble");
  const double J0 = dr_cost_estimate(in.K0, in.ensemble, in.cost);
  if (!std::isfinite(J0)) throw InstabilityError("derive_constants: K0 destabilizes the ensemble");

  TheoryConstants out;
  out.mu = kDominanceMu;
  out.L_K = compute_LK(J0, in.theta_bar, in.cost);
  out.c_g = compute_cg(J0, in.theta_bar, in.cost);
  out.L_cost = compute_Lcost(J0, op_norm(in.K0), in.theta_bar, in.cost);
  out.r_g = compute_rg(in.ensemble, in.K0, in.cost);
  const auto spread =
      compute_Gbar_sigma(in.diam, grad_lipschitz_theta(J0, in.theta_bar, in.cost));
  out.G_bar = spread.G_bar;
  out.sigma_sq = spread.sigma_sq;
  out.N = num_steps(std::max(J0 - in.J_opt, 0.0), in.eps, out.L_K, in.rate);
  out.eps_grad = std::min(out.mu * in.eps / (2.0 * out.L_cost), out.c_g);
  out.M = batch_size(out.eps_grad, out.G_bar, out.sigma_sq, in.delta, std::max(out.N, 1L),
                     in.cost.nx(), in.cost.nu(), in.variant);
  out.het_budget = check_heterogeneity(in.ensemble, in.cost, in.diam).budget;
  return out;
}

}  // namespace drlqr
