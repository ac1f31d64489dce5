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

#include "drlqr/optimizer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <optional>
#include <string>

#include "drlqr/errors.hpp"
#include "drlqr/linalg.hpp"
#include "drlqr/lqr.hpp"

namespace drlqr {

const char* to_string(OptimizerMode mode) {
  switch (mode) {
    case OptimizerMode::kDrSgd:
      return "dr_sgd";
    case OptimizerMode::kExactGd:
      return "exact_gd";
    case OptimizerMode::kSaFixed:
      return "sa_fixed";
  }
  return "unknown";
}

OptimizerMode parse_mode(const std::string& name) {
  if (name == "dr_sgd") return OptimizerMode::kDrSgd;
  if (name == "exact_gd") return OptimizerMode::kExactGd;
  if (name == "sa_fixed") return OptimizerMode::kSaFixed;
  throw ArgumentError("unknown optimizer mode '" + name + "'");
}

void OptimizerConfig::validate() const {
  if (!(eta > 0.0) || !std::isfinite(eta)) throw ArgumentError("OptimizerConfig: eta must be positive");
  if (steps < 1) throw ArgumentError("OptimizerConfig: steps must be at least 1");
  if (minibatch < 1) throw ArgumentError("OptimizerConfig: minibatch must be at least 1");
  if (eval_every < 1) throw ArgumentError("OptimizerConfig: eval_every must be at least 1");
  if (n_eval < 1) throw ArgumentError("OptimizerConfig: n_eval must be at least 1");
}

std::vector<PlantSample> draw_eval_set(const PlantDistribution& dist,
                                       const OptimizerConfig& cfg) {
  Rng rng = Rng(cfg.seed).split("eval");
  return dist.sample_many(rng, static_cast<std::size_t>(cfg.n_eval));
}

namespace {

struct StepGradient {
  Matrix g;
  double surrogate = 0.0;
  long skipped = 0;
};

std::optional<std::size_t> first_unstable(const Matrix& K,
                                          std::span<const PlantSample> plants) {
  for (std::size_t i = 0; i < plants.size(); ++i) {
    if (!is_stable(closed_loop(plants[i], K))) return i;
  }
  return std::nullopt;
}

// Shared descent loop. `step` returns the gradient for update n at gain K, or
// std::nullopt to halt the run.
template <class StepFn>
RunRecord descend(const Matrix& K0, const CostSpec& cost, const OptimizerConfig& cfg,
                  std::span<const PlantSample> eval, StepFn&& step) {
  const auto t0 = std::chrono::steady_clock::now();
  RunRecord rec;
  Matrix K = K0;
  rec.rows.reserve(static_cast<std::size_t>(cfg.steps / cfg.eval_every + 1));

  for (long n = 1; n <= cfg.steps; ++n) {
    std::optional<StepGradient> sg = step(K, n, rec);
    if (!sg) break;
    rec.infeasible_events += sg->skipped;
    const Matrix delta = cfg.eta * sg->g;
    rec.max_step_norm = std::max(rec.max_step_norm, op_norm(delta));
    K -= delta;

    if (n % cfg.eval_every == 0 || n == cfg.steps) {
      LogRow row;
      row.step = n;
      row.cost_estimate = dr_cost_estimate(K, eval, cost);
      row.surrogate_cost = sg->surrogate;
      row.grad_norm = sg->g.norm();
      row.k_norm = op_norm(K);
      row.infeasible_events = rec.infeasible_events;
      rec.rows.push_back(row);
    }
  }
  rec.K_final = K;
  rec.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rec;
}

void check_shapes(const Matrix& K0, const CostSpec& cost) {
  cost.validate();
  if (static_cast<std::size_t>(K0.rows()) != cost.nu() ||
      static_cast<std::size_t>(K0.cols()) != cost.nx()) {
    throw ArgumentError("optimizer: K0 must be n_u x n_x");
  }
  if (!all_finite(K0)) throw ArgumentError("optimizer: K0 has non-finite entries");
}

RunRecord exact_gd_logged(const Matrix& K0, std::span<const PlantSample> ensemble,
                          const CostSpec& cost, const OptimizerConfig& cfg,
                          std::span<const PlantSample> eval) {
  if (ensemble.empty()) throw ArgumentError("exact_gd: empty ensemble");
  if (auto bad = first_unstable(K0, ensemble)) {
    throw InfeasibleError("exact_gd: K0 does not stabilize the ensemble", *bad);
  }
  return descend(K0, cost, cfg, eval,
                 [&](const Matrix& K, long n, RunRecord&) -> std::optional<StepGradient> {
                   auto mb = minibatch_gradient_skipping(K, ensemble, cost);
                   if (!mb.skipped.empty()) {
                     throw InfeasibleError(
                         "exact_gd: iterate " + std::to_string(n - 1) + " is infeasible",
                         mb.skipped.front());
                   }
                   return StepGradient{std::move(mb.gradient), mb.mean_cost, 0};
                 });
}

}  // namespace

RunRecord dr_sgd(const Matrix& K0, const PlantDistribution& dist, const CostSpec& cost,
                 const OptimizerConfig& cfg, std::span<const PlantSample> eval) {
  cfg.validate();
  check_shapes(K0, cost);
  std::vector<PlantSample> own_eval;
  if (eval.empty()) {
    own_eval = draw_eval_set(dist, cfg);
    eval = own_eval;
  }
  if (auto bad = first_unstable(K0, eval)) {
    throw InfeasibleError("dr_sgd: K0 fails the screening ensemble", *bad);
  }

  Rng train = Rng(cfg.seed).split("train");
  std::vector<PlantSample> batch(static_cast<std::size_t>(cfg.minibatch));
  return descend(K0, cost, cfg, eval,
                 [&](const Matrix& K, long n, RunRecord& rec) -> std::optional<StepGradient> {
                   for (auto& th : batch) th = dist.sample(train);
                   auto mb = minibatch_gradient_skipping(K, batch, cost);
                   const long skipped = static_cast<long>(mb.skipped.size());
                   if (skipped > 0 && cfg.stop_on_infeasible) {
                     rec.infeasible_events += skipped;
                     rec.halted = true;
                     rec.halt_reason = "member " + std::to_string(mb.skipped.front()) +
                                       " destabilized at step " + std::to_string(n);
                     return std::nullopt;
                   }
                   return StepGradient{std::move(mb.gradient), mb.mean_cost, skipped};
                 });
}

RunRecord exact_gd(const Matrix& K0, std::span<const PlantSample> ensemble,
                   const CostSpec& cost, const OptimizerConfig& cfg,
                   std::span<const PlantSample> eval) {
  cfg.validate();
  check_shapes(K0, cost);
  return exact_gd_logged(K0, ensemble, cost, cfg, eval.empty() ? ensemble : eval);
}

RunRecord sa_fixed(const Matrix& K0, const PlantDistribution& dist, const CostSpec& cost,
                   const OptimizerConfig& cfg, std::span<const PlantSample> eval) {
  cfg.validate();
  check_shapes(K0, cost);
  std::vector<PlantSample> own_eval;
  if (eval.empty()) {
    own_eval = draw_eval_set(dist, cfg);
    eval = own_eval;
  }
  if (auto bad = first_unstable(K0, eval)) {
    throw InfeasibleError("sa_fixed: K0 fails the screening ensemble", *bad);
  }
  // Same stream as the first dr_sgd minibatch.
  Rng train = Rng(cfg.seed).split("train");
  const auto fixed = dist.sample_many(train, static_cast<std::size_t>(cfg.minibatch));
  return exact_gd_logged(K0, fixed, cost, cfg, eval);
}

RunRecord run_optimizer(const Matrix& K0, const PlantDistribution& dist,
                        const CostSpec& cost, const OptimizerConfig& cfg,
                        std::span<const PlantSample> eval) {
  switch (cfg.mode) {
    case OptimizerMode::kDrSgd:
      return dr_sgd(K0, dist, cost, cfg, eval);
    case OptimizerMode::kSaFixed:
      return sa_fixed(K0, dist, cost, cfg, eval);
    case OptimizerMode::kExactGd: {
      std::vector<PlantSample> own_eval;
      if (eval.empty()) {
        cfg.validate();
        own_eval = draw_eval_set(dist, cfg);
        eval = own_eval;
      }
      return exact_gd(K0, eval, cost, cfg, eval);
    }
  }
  throw ArgumentError("run_optimizer: unknown mode");
}

}  // namespace drlqr
