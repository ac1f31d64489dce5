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
#include <map>
#include <string>
#include <vector>

#include "json.hpp"

#include "drlqr/anneal.hpp"
#include "drlqr/cartpole.hpp"
#include "drlqr/errors.hpp"
#include "drlqr/optimizer.hpp"
#include "drlqr/theory.hpp"

namespace drlqr {

/// Malformed or invalid configuration file.
class ConfigError : public ArgumentError {
 public:
  using ArgumentError::ArgumentError;
};

enum class InitialGainKind { kNominalLqr, kZero, kExplicit, kAnneal };

struct InitialGainSpec {
  InitialGainKind kind = InitialGainKind::kNominalLqr;
  double nominal_length = 0.5;  // m, plant used for the nominal design
  double r_scale = 1.0;         // input weight multiplier for the nominal design
  Matrix K;                     // kExplicit only
};

struct TheorySettings {
  double epsilon = 1.0;
  double delta = 0.05;
  long grid = 100;
  long ensemble_size = 200;
  BernsteinVariant variant = BernsteinVariant::kSqrt2Range;
  ContractionRate rate = ContractionRate::kDegraded;
};

struct ExperimentConfig {
  std::uint64_t seed = 0;
  DomainSpec domain;
  CostSpec cost = CostSpec::identity(4, 1);
  OptimizerConfig optimizer;
  bool eta_inverse_LK = false;  // replace eta by 1/L_K evaluated at K0
  long trials = 1;
  std::vector<double> percentiles{25.0, 50.0, 75.0};
  std::string output_dir = "out";
  std::vector<std::string> methods{"dr_sgd", "sa_fixed"};
  std::vector<long> minibatch_sizes;  // empty: optimizer.minibatch only
  InitialGainSpec initial_gain;
  AnnealConfig anneal;
  long histogram_bins = 40;
  long threads = 0;  // 0: hardware concurrency
  TheorySettings theory;

  void validate() const;
};

ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& cfg);

/// Reads and validates a JSON config. Errors name the offending field or
/// the parse position.
ExperimentConfig load_config(const std::string& path);

/// One optimizer run to schedule: a method label plus its settings.
struct MethodPlan {
  std::string label;  // e.g. dr_sgd_M8
  std::string method;
  OptimizerConfig optimizer;
};

std::vector<MethodPlan> expand_methods(const ExperimentConfig& cfg);

/// K0 per the initial_gain setting. Deterministic in the config.
Matrix resolve_initial_gain(const ExperimentConfig& cfg);

/// Evaluation plants shared by every trial and method.
std::vector<PlantSample> draw_shared_eval(const ExperimentConfig& cfg);

/// Seed of trial t of a method, derived from the master seed.
std::uint64_t trial_seed(std::uint64_t seed, const std::string& label, long trial);

struct TrialResult {
  std::string label;
  long trial = 0;
  bool ok = false;
  std::string error;
  RunRecord record;
};

struct SummaryRow {
  std::string label;
  long step = 0;
  std::vector<double> values;  // one per configured percentile
};

struct HistogramRow {
  std::string label;
  double lo = 0.0;
  double hi = 0.0;
  long count = 0;
};

struct ExperimentResult {
  Matrix K0;
  double eta = 0.0;
  std::vector<TrialResult> trials;  // sorted by (method order, trial)
  std::vector<SummaryRow> summary;
  std::vector<HistogramRow> k_histogram;
  std::map<std::string, double> mean_wall_time;
  long failures = 0;
};

ExperimentResult run_experiment(const ExperimentConfig& cfg);

/// Percentile curves and the final ||K||_2 histogram from trial traces.
void summarize(const ExperimentConfig& cfg, ExperimentResult& result);

/// Writes raw.csv, summary.csv, final_k.csv, k_hist.csv, errors.csv and
/// config.json into cfg.output_dir.
void write_outputs(const ExperimentConfig& cfg, const ExperimentResult& result);

/// Per-trial CSV row with %.17g doubles.
std::string format_double(double v);

nlohmann::json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const nlohmann::json& j, const std::string& field);

nlohmann::json constants_to_json(const TheoryConstants& c);

/// Theory constants at the resolved K0 over a sampled ensemble.
TheoryConstants experiment_constants(const ExperimentConfig& cfg, const Matrix& K0);

}  // namespace drlqr
