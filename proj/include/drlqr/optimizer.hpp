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
#include <string>
#include <vector>

#include "drlqr/distribution.hpp"
#include "drlqr/system.hpp"

namespace drlqr {

enum class OptimizerMode { kDrSgd, kExactGd, kSaFixed };

const char* to_string(OptimizerMode mode);
OptimizerMode parse_mode(const std::string& name);

struct OptimizerConfig {
  double eta = 5e-8;
  long steps = 2000;
  long minibatch = 8;
  OptimizerMode mode = OptimizerMode::kDrSgd;
  long eval_every = 1;
  long n_eval = 1000;
  std::uint64_t seed = 0;
  // Halt the run at the first destabilized minibatch member instead of
  // dropping it from the mean.
  bool stop_on_infeasible = false;

  void validate() const;
};

/// One logged step. Row n describes the gain after the n-th update.
struct LogRow {
  long step = 0;
  double cost_estimate = 0.0;   // mean cost of K_n over the evaluation plants
  double surrogate_cost = 0.0;  // mean cost of K_{n-1} over the plants used in step n
  double grad_norm = 0.0;       // ||g||_F of the step-n gradient
  double k_norm = 0.0;          // ||K_n||_2
  long infeasible_events = 0;   // cumulative
};

struct RunRecord {
  std::vector<LogRow> rows;
  Matrix K_final;
  long infeasible_events = 0;
  bool halted = false;
  std::string halt_reason;
  double max_step_norm = 0.0;  // max over steps of ||eta g||_2
  double wall_time = 0.0;      // seconds
};

/// Minibatched SGD on the randomized objective. Fresh plants every step;
/// destabilized members are skipped and counted. When `eval` is empty, an
/// evaluation set of n_eval plants is drawn from a stream independent of the
/// training stream. The evaluation set also screens K0.
RunRecord dr_sgd(const Matrix& K0, const PlantDistribution& dist, const CostSpec& cost,
                 const OptimizerConfig& cfg, std::span<const PlantSample> eval = {});

/// Full-gradient descent on a fixed ensemble. An infeasible iterate throws
/// InfeasibleError. With `eval` empty, the ensemble itself is used for logging.
RunRecord exact_gd(const Matrix& K0, std::span<const PlantSample> ensemble,
                   const CostSpec& cost, const OptimizerConfig& cfg,
                   std::span<const PlantSample> eval = {});

/// Sample-average baseline: draws `minibatch` plants once, then runs exact_gd
/// on them while logging the cost over fresh evaluation plants.
RunRecord sa_fixed(const Matrix& K0, const PlantDistribution& dist, const CostSpec& cost,
                   const OptimizerConfig& cfg, std::span<const PlantSample> eval = {});

/// Dispatches on cfg.mode. In exact_gd mode the evaluation set doubles as the
/// fixed ensemble, so the gradient is the full gradient of the logged cost.
RunRecord run_optimizer(const Matrix& K0, const PlantDistribution& dist,
                        const CostSpec& cost, const OptimizerConfig& cfg,
                        std::span<const PlantSample> eval = {});

/// Draws the evaluation set used when none is supplied.
std::vector<PlantSample> draw_eval_set(const PlantDistribution& dist,
                                       const OptimizerConfig& cfg);

}  // namespace drlqr
