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

#include "drlqr/anneal.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "drlqr/errors.hpp"
#include "drlqr/linalg.hpp"
#include "drlqr/lqr.hpp"

namespace drlqr {

void AnnealConfig::validate() const {
  if (!(gamma_tol > 0.0 && gamma_tol <= 1e-2)) {
    throw ArgumentError("AnnealConfig: gamma_tol must lie in (0, 0.01]");
  }
  if (inner_budget < 1 || max_stages < 1 || ensemble_size < 1 || validation_size < 0) {
    throw ArgumentError("AnnealConfig: budgets must be positive");
  }
  if (!(inner_eps >= 0.0)) throw ArgumentError("AnnealConfig: inner_eps must be nonnegative");
  if (!(bound_factor > 1.0)) throw ArgumentError("AnnealConfig: bound_factor must exceed 1");
}

PlantSample discount_plant(const PlantSample& theta, double gamma) {
  const double s = std::sqrt(gamma);
  return PlantSample{s * theta.A, s * theta.B};
}

double discounted_cost(const Matrix& K, const PlantSample& theta, const CostSpec& cost,
                       double gamma) {
  if (!(gamma > 0.0 && gamma <= 1.0)) throw ArgumentError("discounted_cost: gamma must lie in (0, 1]");
  return lqr_cost(K, discount_plant(theta, gamma), cost);
}

namespace {

std::vector<PlantSample> discount_all(std::span<const PlantSample> ensemble, double gamma) {
  std::vector<PlantSample> out;
  out.reserve(ensemble.size());
  for (const auto& th : ensemble) out.push_back(discount_plant(th, gamma));
  return out;
}

}  // namespace

double discounted_dr_cost(const Matrix& K, std::span<const PlantSample> ensemble,
                          const CostSpec& cost, double gamma) {
  if (!(gamma > 0.0 && gamma <= 1.0)) {
    throw ArgumentError("discounted_dr_cost: gamma must lie in (0, 1]");
  }
  return dr_cost_estimate(K, discount_all(ensemble, gamma), cost);
}

double find_initial_gamma(std::span<const PlantSample> ensemble, const CostSpec& cost,
                          const AnnealConfig& cfg) {
  cfg.validate();
  const Matrix K0 = Matrix::Zero(static_cast<Eigen::Index>(cost.nu()),
                                 static_cast<Eigen::Index>(cost.nx()));
  const double bound = cfg.bound_factor * static_cast<double>(cost.nx());
  auto ok = [&](double g) { return discounted_dr_cost(K0, ensemble, cost, g) <= bound; };

  if (ok(1.0)) return 1.0;
  if (!ok(cfg.gamma_tol)) {
    throw SolverError("find_initial_gamma: bound violated at the smallest discount", 0);
  }
  double lo = cfg.gamma_tol;
  double hi = 1.0;
  while (hi - lo > cfg.gamma_tol) {
    const double mid = 0.5 * (lo + hi);
    (ok(mid) ? lo : hi) = mid;
  }
  return lo;
}

double gamma_update(const Matrix& K, std::span<const PlantSample> ensemble,
                    const CostSpec& cost, double gamma, const AnnealConfig& cfg) {
  cfg.validate();
  const double base = discounted_dr_cost(K, ensemble, cost, gamma);
  if (!std::isfinite(base)) {
    throw InstabilityError("gamma_update: K is infeasible at the current discount");
  }
  const double at_one = discounted_dr_cost(K, ensemble, cost, 1.0);
  if (at_one <= 4.0 * base) return 1.0;  // terminal, or 1 already lies in the band

  double lo = gamma;
  double hi = 1.0;
  constexpr long kMaxIters = 200;
  for (long it = 0; it < kMaxIters; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (!(mid > lo && mid < hi)) break;
    const double j = discounted_dr_cost(K, ensemble, cost, mid);
    if (j <= 2.0 * base) {
      lo = mid;
    } else if (j > 4.0 * base) {
      hi = mid;
    } else {
      return mid;
    }
  }
  std::ostringstream msg;
  msg.precision(17);
  msg << "gamma_update: bisection exhausted with bracket [" << lo << ", " << hi
      << "], base cost " << base;
  throw SolverError(msg.str(), kMaxIters);
}

InnerSolve anneal_inner_solve(const Matrix& K0, std::span<const PlantSample> ensemble,
                              const CostSpec& cost, double gamma, const AnnealConfig& cfg) {
  cfg.validate();
  const auto plants = discount_all(ensemble, gamma);
  const double eps = cfg.inner_eps > 0.0 ? cfg.inner_eps : static_cast<double>(cost.nx());
  const double s_w = sigma_min(cost.Sigma_w);
  constexpr double kArmijo = 1e-4;

  InnerSolve out;
  out.K = K0;
  auto mb = minibatch_gradient_skipping(out.K, plants, cost);
  if (!mb.skipped.empty()) {
    throw InfeasibleError("anneal_inner_solve: start is infeasible", mb.skipped.front());
  }
  double t = 0.1 * (1.0 + out.K.norm()) / std::max(mb.gradient.norm(), 1e-300);

  while (true) {
    out.cost = mb.mean_cost;
    out.grad_norm = mb.gradient.norm();
    if (out.grad_norm <= eps * s_w / (2.0 * out.cost)) {
      out.converged = true;
      break;
    }
    if (out.steps >= cfg.inner_budget) break;

    const double g2 = out.grad_norm * out.grad_norm;
    bool accepted = false;
    Matrix trial;
    for (int k = 0; k < 80; ++k) {
      trial = out.K - t * mb.gradient;
      const double j = dr_cost_estimate(trial, plants, cost);
      if (std::isfinite(j) && j <= out.cost - kArmijo * t * g2) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) break;  // no further progress at machine precision
    out.K = trial;
    ++out.steps;
    mb = minibatch_gradient_skipping(out.K, plants, cost);
    t *= 2.0;
  }
  return out;
}

AnnealResult discount_annealing(const PlantDistribution& dist, const CostSpec& cost,
                                const AnnealConfig& cfg) {
  cfg.validate();
  const Rng root = Rng(cfg.seed).split("anneal");
  Rng train = root.split("train");
  const auto ensemble = dist.sample_many(train, static_cast<std::size_t>(cfg.ensemble_size));

  AnnealResult out;
  double gamma = find_initial_gamma(ensemble, cost, cfg);
  out.gamma_history.push_back(gamma);
  Matrix K = Matrix::Zero(static_cast<Eigen::Index>(cost.nu()),
                          static_cast<Eigen::Index>(cost.nx()));

  for (long stage = 0;; ++stage) {
    if (stage > cfg.max_stages) {
      std::ostringstream msg;
      msg.precision(17);
      msg << "discount_annealing: stage limit reached at gamma " << gamma << "; history";
      for (double g : out.gamma_history) msg << ' ' << g;
      throw SolverError(msg.str(), stage);
    }
    auto inner = anneal_inner_solve(K, ensemble, cost, gamma, cfg);
    K = inner.K;
    out.stage_costs.push_back(inner.cost);
    out.stage_gains.push_back(inner.K);
    out.stage_grad_norms.push_back(inner.grad_norm);
    out.inner_steps.push_back(inner.steps);
    out.inner_converged.push_back(inner.converged);
    if (gamma == 1.0) break;
    gamma = gamma_update(K, ensemble, cost, gamma, cfg);
    out.gamma_history.push_back(gamma);
  }

  Rng validation = root.split("validation");
  out.validation_size = cfg.validation_size;
  for (long i = 0; i < cfg.validation_size; ++i) {
    if (!is_stable(closed_loop(dist.sample(validation), K))) ++out.validation_failures;
  }
  out.K = K;
  return out;
}

}  // namespace drlqr
