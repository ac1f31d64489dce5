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

// Command-line front end: synth, compare, anneal, constants, sample.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "drlqr/anneal.hpp"
#include "drlqr/cartpole.hpp"
#include "drlqr/experiment.hpp"
#include "drlqr/linalg.hpp"

namespace {

using drlqr::ExperimentConfig;
using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitPartial = 4;

struct CommonOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::optional<long> threads;
  std::string format = "csv";
};

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--config", o.config, "JSON config file");
  cmd->add_option("--seed", o.seed, "Master seed (overrides the config)");
  cmd->add_option("--out", o.out, "Output directory (overrides the config)");
  cmd->add_option("--threads", o.threads, "Worker threads, 0 = auto");
  cmd->add_option("--format", o.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
}

ExperimentConfig load(const CommonOptions& o) {
  ExperimentConfig cfg =
      o.config.empty() ? drlqr::config_from_json(json::object()) : drlqr::load_config(o.config);
  if (o.seed) {
    cfg.seed = *o.seed;
    cfg.domain.seed = *o.seed;
  }
  if (!o.out.empty()) cfg.output_dir = o.out;
  if (o.threads) cfg.threads = *o.threads;
  cfg.validate();
  return cfg;
}

json trial_json(const drlqr::TrialResult& r) {
  json rows = json::array();
  for (const auto& row : r.record.rows) {
    rows.push_back({{"step", row.step},
                    {"cost_estimate", row.cost_estimate},
                    {"surrogate_cost", row.surrogate_cost},
                    {"grad_norm", row.grad_norm},
                    {"k_norm", row.k_norm},
                    {"infeasible_events", row.infeasible_events}});
  }
  json j = {{"method", r.label}, {"trial", r.trial}, {"ok", r.ok}, {"rows", rows}};
  if (r.record.K_final.size() > 0) j["K_final"] = drlqr::matrix_to_json(r.record.K_final);
  if (!r.ok) j["error"] = r.error;
  return j;
}

int run_and_report(const ExperimentConfig& cfg, const std::string& format) {
  const auto result = drlqr::run_experiment(cfg);
  drlqr::write_outputs(cfg, result);
  if (format == "json") {
    json trials = json::array();
    for (const auto& r : result.trials) trials.push_back(trial_json(r));
    std::cout << json{{"K0", drlqr::matrix_to_json(result.K0)},
                      {"eta", result.eta},
                      {"trials", trials}}
                     .dump(2)
              << "\n";
  } else {
    for (const auto& [label, t] : result.mean_wall_time) {
      std::printf("%s: mean wall time per trial %.3f s\n", label.c_str(), t);
    }
    std::printf("wrote %s (%ld failed trials)\n", cfg.output_dir.c_str(), result.failures);
  }
  return result.failures > 0 ? kExitPartial : kExitOk;
}

void emit_json(const json& j, const ExperimentConfig& cfg, const std::string& out_flag,
               const std::string& name) {
  std::cout << j.dump(2) << "\n";
  if (out_flag.empty()) return;
  std::filesystem::create_directories(cfg.output_dir);
  std::ofstream f(std::filesystem::path(cfg.output_dir) / name);
  f << j.dump(2) << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Domain-randomized LQR synthesis by minibatched policy gradient"};
  app.require_subcommand(1);

  CommonOptions synth_o, compare_o, anneal_o, constants_o, sample_o;
  auto* synth = app.add_subcommand("synth", "Single optimizer run with optimizer.mode");
  add_common(synth, synth_o);
  auto* compare = app.add_subcommand("compare", "Multi-trial comparison of the configured methods");
  add_common(compare, compare_o);
  auto* anneal = app.add_subcommand("anneal", "Discount annealing from K = 0");
  add_common(anneal, anneal_o);
  auto* constants = app.add_subcommand("constants", "Theory constants at the initial gain");
  add_common(constants, constants_o);
  auto* sample = app.add_subcommand("sample", "Dump sampled (A, B) pairs");
  add_common(sample, sample_o);
  long count = 10;
  sample->add_option("--count", count, "Number of plants")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*synth) {
      ExperimentConfig cfg = load(synth_o);
      cfg.methods = {drlqr::to_string(cfg.optimizer.mode)};
      cfg.minibatch_sizes.clear();
      cfg.trials = 1;
      return run_and_report(cfg, synth_o.format);
    }
    if (*compare) {
      const ExperimentConfig cfg = load(compare_o);
      return run_and_report(cfg, compare_o.format);
    }
    if (*anneal) {
      const ExperimentConfig cfg = load(anneal_o);
      drlqr::AnnealConfig a = cfg.anneal;
      a.seed = drlqr::Rng(cfg.seed).split("initial_gain").key();
      const auto res = drlqr::discount_annealing(drlqr::CartpoleDistribution(cfg.domain), cfg.cost, a);
      const json j = {{"K", drlqr::matrix_to_json(res.K)},
                      {"gamma_history", res.gamma_history},
                      {"stage_costs", res.stage_costs},
                      {"inner_steps", res.inner_steps},
                      {"validation_size", res.validation_size},
                      {"validation_failures", res.validation_failures}};
      emit_json(j, cfg, anneal_o.out, "anneal.json");
      return res.validation_failures > 0 ? kExitNumerical : kExitOk;
    }
    if (*constants) {
      const ExperimentConfig cfg = load(constants_o);
      const auto K0 = drlqr::resolve_initial_gain(cfg);
      emit_json(drlqr::constants_to_json(drlqr::experiment_constants(cfg, K0)), cfg,
                constants_o.out, "constants.json");
      return kExitOk;
    }
    if (*sample) {
      const ExperimentConfig cfg = load(sample_o);
      drlqr::Rng rng = drlqr::Rng(cfg.seed).split("sample");
      json arr = json::array();
      for (long i = 0; i < count; ++i) {
        const auto th = drlqr::sample_theta(cfg.domain, rng);
        arr.push_back({{"A", drlqr::matrix_to_json(th.A)}, {"B", drlqr::matrix_to_json(th.B)}});
      }
      emit_json(arr, cfg, sample_o.out, "samples.json");
      return kExitOk;
    }
  } catch (const drlqr::ArgumentError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const drlqr::Error& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitNumerical;
  }
  return kExitOk;
}
