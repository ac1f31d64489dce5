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

#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "drlqr/experiment.hpp"
#include "drlqr/stats.hpp"

using namespace drlqr;
using nlohmann::json;

namespace {

std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("drlqr_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream s;
  s << f.rdbuf();
  return s.str();
}

std::string first_line(const std::filesystem::path& p) {
  std::ifstream f(p);
  std::string line;
  std::getline(f, line);
  return line;
}

ExperimentConfig small_config(const std::string& out) {
  ExperimentConfig cfg;
  cfg.seed = 77;
  cfg.trials = 2;
  cfg.optimizer.steps = 10;
  cfg.optimizer.minibatch = 2;
  cfg.optimizer.n_eval = 20;
  cfg.threads = 1;
  cfg.output_dir = out;
  return cfg;
}

}  // namespace

TEST_SUITE("experiment") {
  TEST_CASE("percentiles interpolate linearly") {
    CHECK(percentile({1.0, 2.0, 3.0, 4.0}, 50.0) == 2.5);
    CHECK(percentile({4.0, 1.0, 3.0, 2.0}, 25.0) == 1.75);
    CHECK(percentile({5.0}, 75.0) == 5.0);
    CHECK(percentile({1.0, 2.0}, 100.0) == 2.0);
    CHECK(percentile({1.0, INFINITY, INFINITY}, 75.0) == INFINITY);
    CHECK_THROWS_AS(percentile({}, 50.0), ArgumentError);
    CHECK_THROWS_AS(percentile({1.0}, 101.0), ArgumentError);
  }

  TEST_CASE("log-spaced histogram") {
    const auto edges = log_edges(1.0, 1000.0, 3);
    REQUIRE(edges.size() == 4);
    CHECK(edges[1] == doctest::Approx(10.0));
    CHECK(edges[2] == doctest::Approx(100.0));
    const std::vector<double> v{1.0, 5.0, 10.0, 50.0, 999.0, 1000.0, 2000.0, INFINITY};
    const auto h = histogram(v, edges);
    CHECK(h.counts == std::vector<long>{2, 2, 2});
    CHECK_THROWS_AS(log_edges(0.0, 1.0, 3), ArgumentError);
  }

  TEST_CASE("minimal config takes defaults") {
    const auto cfg = config_from_json(json::parse("{}"));
    CHECK(cfg.trials == 1);
    CHECK(cfg.percentiles == std::vector<double>{25.0, 50.0, 75.0});
    CHECK(cfg.domain.dt == 0.02);
    CHECK(cfg.cost.Q.rows() == 4);
    CHECK(cfg.methods == std::vector<std::string>{"dr_sgd", "sa_fixed"});
    CHECK_NOTHROW(cfg.validate());
  }

  TEST_CASE("config errors name the offending field") {
    auto expect = [](const std::string& text, const std::string& needle) {
      try {
        config_from_json(json::parse(text)).validate();
        FAIL("accepted " << text);
      } catch (const ConfigError& e) {
        CHECK_MESSAGE(std::string(e.what()).find(needle) != std::string::npos, e.what());
      }
    };
    expect(R"({"domain": {"l_min": 0.9, "l_max": 0.5}})", "DomainSpec");
    expect(R"({"optimizer": {"etaa": 1}})", "optimizer.etaa");
    expect(R"({"trials": "many"})", "trials");
    expect(R"({"methods": ["newton"]})", "newton");
    expect(R"({"optimizer": {"eta": "fast"}})", "optimizer.eta");
  }

  TEST_CASE("parse errors carry a line number") {
    const auto dir = scratch_dir("parse");
    const auto path = dir / "bad.json";
    std::ofstream(path) << "{\n  \"seed\": 1,\n  \"trials\": ,\n}\n";
    try {
      load_config(path.string());
      FAIL("accepted malformed json");
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find(":3:") != std::string::npos);
    }
    CHECK_THROWS_AS(load_config((dir / "missing.json").string()), ConfigError);
  }

  TEST_CASE("config round trip") {
    ExperimentConfig cfg = small_config("somewhere");
    cfg.methods = {"dr_sgd", "sa_fixed_M8", "exact_gd"};
    cfg.minibatch_sizes = {1, 4};
    cfg.initial_gain.r_scale = 1000.0;
    cfg.domain.l_max = 0.7;
    cfg.optimizer.eta = 3e-8;
    cfg.theory.variant = BernsteinVariant::kStandard;
    const auto j = config_to_json(cfg);
    const auto back = config_from_json(j);
    CHECK(config_to_json(back) == j);
    CHECK(back.optimizer.eta == 3e-8);
    CHECK(back.domain.seed == cfg.seed);
  }

  TEST_CASE("method expansion") {
    ExperimentConfig cfg;
    cfg.methods = {"dr_sgd", "sa_fixed_M8", "exact_gd"};
    cfg.minibatch_sizes = {1, 4};
    const auto plans = expand_methods(cfg);
    REQUIRE(plans.size() == 4);
    CHECK(plans[0].label == "dr_sgd_M1");
    CHECK(plans[1].label == "dr_sgd_M4");
    CHECK(plans[1].optimizer.minibatch == 4);
    CHECK(plans[2].label == "sa_fixed_M8");
    CHECK(plans[2].optimizer.mode == OptimizerMode::kSaFixed);
    CHECK(plans[3].label == "exact_gd");
    CHECK(plans[3].optimizer.mode == OptimizerMode::kExactGd);
    cfg.methods = {"dr_sgd_M0"};
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
  }

  TEST_CASE("trial seeds are independent of one another") {
    CHECK(trial_seed(1, "dr_sgd_M8", 0) != trial_seed(1, "dr_sgd_M8", 1));
    CHECK(trial_seed(1, "dr_sgd_M8", 0) != trial_seed(1, "sa_fixed_M8", 0));
    CHECK(trial_seed(1, "dr_sgd_M8", 3) == trial_seed(1, "dr_sgd_M8", 3));
  }

  TEST_CASE("experiment outputs") {
    const auto dir = scratch_dir("run");
    auto cfg = small_config((dir / "a").string());
    const auto res = run_experiment(cfg);
    CHECK(res.failures == 0);
    REQUIRE(res.trials.size() == 4);
    for (const auto& t : res.trials) CHECK(t.record.rows.size() == 10);
    write_outputs(cfg, res);

    const auto a = dir / "a";
    CHECK(first_line(a / "raw.csv") ==
          "method,trial,step,cost_estimate,grad_norm,k_norm,infeasible_events");
    CHECK(first_line(a / "summary.csv") == "method,step,p25,p50,p75");
    CHECK(first_line(a / "final_k.csv") == "method,trial,k_norm");
    CHECK(std::filesystem::exists(a / "config.json"));
    CHECK(std::filesystem::exists(a / "run.json"));

    SUBCASE("reruns are byte identical") {
      cfg.output_dir = (dir / "b").string();
      cfg.threads = 2;
      write_outputs(cfg, run_experiment(cfg));
      for (const char* f : {"raw.csv", "summary.csv", "final_k.csv", "k_hist.csv"}) {
        CHECK_MESSAGE(slurp(a / f) == slurp(dir / "b" / f), f);
      }
    }
    SUBCASE("a trial does not depend on how many run") {
      cfg.trials = 3;
      const auto more = run_experiment(cfg);
      REQUIRE(more.trials.size() == 6);
      CHECK(more.trials[1].record.K_final == res.trials[1].record.K_final);
      CHECK(more.trials[4].record.K_final == res.trials[3].record.K_final);
    }
    SUBCASE("summary rows follow the logged steps") {
      long rows = 0;
      for (const auto& s : res.summary) {
        if (s.label == "dr_sgd_M2") ++rows;
        CHECK(s.values.size() == 3);
        CHECK(s.values[0] <= s.values[1]);
        CHECK(s.values[1] <= s.values[2]);
      }
      CHECK(rows == 10);
    }
  }

  TEST_CASE("a destabilizing initial gain is rejected") {
    auto cfg = small_config((scratch_dir("bad_k0") / "x").string());
    cfg.initial_gain.kind = InitialGainKind::kZero;
    CHECK_THROWS_AS(run_experiment(cfg), InfeasibleError);
  }

  TEST_CASE("number formatting") {
    CHECK(format_double(0.1) == "0.10000000000000001");
    CHECK(format_double(INFINITY) == "inf");
    CHECK(format_double(2.0) == "2");
  }
}
