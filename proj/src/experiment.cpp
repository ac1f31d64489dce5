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

#include "drlqr/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include "drlqr/linalg.hpp"
#include "drlqr/lqr.hpp"
#include "drlqr/stats.hpp"

namespace drlqr {

using nlohmann::json;

namespace {

// Strict reader for one JSON object: every key must be consumed.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_ + ": expected an object");
  }

  template <class T>
  bool get(const char* key, T& out) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return false;
    try {
      out = it->template get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(field(key) + ": " + e.what());
    }
    return true;
  }

  const json* find(const char* key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  std::string field(const char* key) const {
    return path_.empty() ? std::string(key) : path_ + "." + key;
  }

  void finish() const {
    for (const auto& item : j_.items()) {
      if (!seen_.count(item.key())) throw ConfigError(field(item.key().c_str()) + ": unknown field");
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

const char* variant_name(BernsteinVariant v) {
  switch (v) {
    case BernsteinVariant::kStandard:
      return "standard";
    case BernsteinVariant::kSqrt2Variance:
      return "sqrt2_variance";
    case BernsteinVariant::kSqrt2Range:
      return "sqrt2_range";
  }
  return "sqrt2_range";
}

BernsteinVariant parse_variant(const std::string& s) {
  if (s == "standard") return BernsteinVariant::kStandard;
  if (s == "sqrt2_variance") return BernsteinVariant::kSqrt2Variance;
  if (s == "sqrt2_range") return BernsteinVariant::kSqrt2Range;
  throw ConfigError("theory.variant: expected standard, sqrt2_variance or sqrt2_range");
}

const char* kind_name(InitialGainKind k) {
  switch (k) {
    case InitialGainKind::kNominalLqr:
      return "nominal_lqr";
    case InitialGainKind::kZero:
      return "zero";
    case InitialGainKind::kExplicit:
      return "explicit";
    case InitialGainKind::kAnneal:
      return "anneal";
  }
  return "nominal_lqr";
}

InitialGainKind parse_kind(const std::string& s) {
  if (s == "nominal_lqr") return InitialGainKind::kNominalLqr;
  if (s == "zero") return InitialGainKind::kZero;
  if (s == "explicit") return InitialGainKind::kExplicit;
  if (s == "anneal") return InitialGainKind::kAnneal;
  throw ConfigError("initial_gain.kind: expected nominal_lqr, zero, explicit or anneal");
}

const std::set<std::string> kMethods{"dr_sgd", "sa_fixed", "exact_gd", "anneal"};

// "sa_fixed_M8" pins one minibatch size; a bare "sa_fixed" uses all of them.
// Returns {base, size} with size 0 when unpinned, or {"", 0} when malformed.
std::pair<std::string, long> split_method(const std::string& m) {
  if (kMethods.count(m)) return {m, 0};
  const auto pos = m.rfind("_M");
  if (pos == std::string::npos) return {"", 0};
  const std::string base = m.substr(0, pos);
  const std::string digits = m.substr(pos + 2);
  if ((base != "dr_sgd" && base != "sa_fixed") || digits.empty() || digits.size() > 9 ||
      digits.find_first_not_of("0123456789") != std::string::npos) {
    return {"", 0};
  }
  const long size = std::stol(digits);
  return size > 0 ? std::make_pair(base, size) : std::make_pair(std::string(), 0L);
}

std::string csv_escape(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += (c == '\n' || c == '\r') ? ' ' : c;
  }
  return out + "\"";
}

std::string percentile_column(double q) {
  std::string s = format_double(q);
  return "p" + s;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("output_dir: cannot write " + path.string());
  f << text;
  if (!f) throw ConfigError("output_dir: write failed for " + path.string());
}

}  // namespace

std::string format_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
    rows.push_back(row);
  }
  return rows;
}

Matrix matrix_from_json(const json& j, const std::string& field) {
  if (!j.is_array() || j.empty() || !j.front().is_array() || j.front().empty()) {
    throw ConfigError(field + ": expected a nonempty array of rows");
  }
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = static_cast<Eigen::Index>(j.front().size());
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      throw ConfigError(field + ": ragged rows");
    }
    for (Eigen::Index k = 0; k < cols; ++k) {
      const auto& v = row[static_cast<std::size_t>(k)];
      if (!v.is_number()) throw ConfigError(field + ": entries must be numbers");
      m(i, k) = v.get<double>();
    }
  }
  if (!all_finite(m)) throw ConfigError(field + ": entries must be finite");
  return m;
}

void ExperimentConfig::validate() const {
  try {
    domain.validate();
    cost.validate();
    optimizer.validate();
    anneal.validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const ArgumentError& e) {
    throw ConfigError(e.what());
  }
  if (cost.nx() != 4 || cost.nu() != 1) {
    throw ConfigError("CostSpec: the cart-pole domain needs n_x = 4 and n_u = 1");
  }
  if (trials < 1) throw ConfigError("ExperimentConfig: trials must be at least 1");
  if (percentiles.empty()) throw ConfigError("ExperimentConfig: percentiles must be nonempty");
  for (double q : percentiles) {
    if (!(q >= 0.0 && q <= 100.0)) throw ConfigError("ExperimentConfig: percentiles must lie in [0, 100]");
  }
  if (!std::is_sorted(percentiles.begin(), percentiles.end())) {
    throw ConfigError("ExperimentConfig: percentiles must be increasing");
  }
  if (methods.empty()) throw ConfigError("ExperimentConfig: methods must be nonempty");
  for (const auto& m : methods) {
    if (!kMethods.count(split_method(m).first)) {
      throw ConfigError("ExperimentConfig: unknown method '" + m + "'");
    }
  }
  for (long m : minibatch_sizes) {
    if (m < 1) throw ConfigError("ExperimentConfig: minibatch_sizes must be positive");
  }
  if (histogram_bins < 1) throw ConfigError("ExperimentConfig: histogram_bins must be positive");
  if (threads < 0) throw ConfigError("ExperimentConfig: threads must be nonnegative");
  if (output_dir.empty()) throw ConfigError("ExperimentConfig: output_dir must be nonempty");
  if (initial_gain.kind == InitialGainKind::kExplicit &&
      (initial_gain.K.rows() != 1 || initial_gain.K.cols() != 4)) {
    throw ConfigError("InitialGainSpec: explicit K must be 1 x 4");
  }
  if (!(initial_gain.nominal_length > 0.0) || !(initial_gain.r_scale > 0.0)) {
    throw ConfigError("InitialGainSpec: nominal_length and r_scale must be positive");
  }
  if (!(theory.epsilon > 0.0) || !(theory.delta > 0.0 && theory.delta < 1.0) ||
      theory.grid < 2 || theory.ensemble_size < 1) {
    throw ConfigError("TheorySettings: need epsilon > 0, 0 < delta < 1, grid >= 2, ensemble_size >= 1");
  }
}

ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig cfg;
  Section top(j, "");
  top.get("seed", cfg.seed);
  top.get("trials", cfg.trials);
  top.get("threads", cfg.threads);
  top.get("output_dir", cfg.output_dir);
  top.get("methods", cfg.methods);
  top.get("minibatch_sizes", cfg.minibatch_sizes);
  top.get("percentiles", cfg.percentiles);
  top.get("histogram_bins", cfg.histogram_bins);

  if (const json* d = top.find("domain")) {
    Section s(*d, "domain");
    s.get("l_min", cfg.domain.l_min);
    s.get("l_max", cfg.domain.l_max);
    s.get("dt", cfg.domain.dt);
    if (const json* b = s.find("base")) {
      Section bs(*b, "domain.base");
      bs.get("m_c", cfg.domain.base.m_c);
      bs.get("m_p", cfg.domain.base.m_p);
      bs.get("g", cfg.domain.base.g);
      bs.get("mu_c", cfg.domain.base.mu_c);
      bs.get("mu_p", cfg.domain.base.mu_p);
      bs.get("half_length", cfg.domain.base.half_length);
      bs.finish();
    }
    s.finish();
  }
  cfg.domain.seed = cfg.seed;

  if (const json* c = top.find("cost")) {
    Section s(*c, "cost");
    const json* q = s.find("Q");
    const json* r = s.find("R");
    const json* sm = s.find("S");
    const json* w = s.find("Sigma_w");
    s.finish();
    if (q) cfg.cost.Q = matrix_from_json(*q, "cost.Q");
    if (r) cfg.cost.R = matrix_from_json(*r, "cost.R");
    const auto nx = cfg.cost.Q.rows();
    const auto nu = cfg.cost.R.rows();
    cfg.cost.S = sm ? matrix_from_json(*sm, "cost.S") : Matrix::Zero(nx, nu);
    cfg.cost.Sigma_w = w ? matrix_from_json(*w, "cost.Sigma_w") : Matrix::Identity(nx, nx);
  }

  if (const json* o = top.find("optimizer")) {
    Section s(*o, "optimizer");
    if (const json* eta = s.find("eta")) {
      if (eta->is_string() && eta->get<std::string>() == "inverse_LK") {
        cfg.eta_inverse_LK = true;
      } else if (eta->is_number()) {
        cfg.optimizer.eta = eta->get<double>();
      } else {
        throw ConfigError("optimizer.eta: expected a number or \"inverse_LK\"");
      }
    }
    s.get("steps", cfg.optimizer.steps);
    s.get("minibatch", cfg.optimizer.minibatch);
    std::string mode;
    if (s.get("mode", mode)) {
      try {
        cfg.optimizer.mode = parse_mode(mode);
      } catch (const ArgumentError& e) {
        throw ConfigError(std::string("optimizer.mode: ") + e.what());
      }
    }
    s.get("eval_every", cfg.optimizer.eval_every);
    s.get("n_eval", cfg.optimizer.n_eval);
    s.get("stop_on_infeasible", cfg.optimizer.stop_on_infeasible);
    s.finish();
  }

  if (const json* g = top.find("initial_gain")) {
    Section s(*g, "initial_gain");
    std::string kind;
    if (s.get("kind", kind)) cfg.initial_gain.kind = parse_kind(kind);
    s.get("nominal_length", cfg.initial_gain.nominal_length);
    s.get("r_scale", cfg.initial_gain.r_scale);
    if (const json* k = s.find("K")) {
      if (!k->is_null()) cfg.initial_gain.K = matrix_from_json(*k, "initial_gain.K");
    }
    s.finish();
  }

  if (const json* a = top.find("anneal")) {
    Section s(*a, "anneal");
    s.get("gamma_tol", cfg.anneal.gamma_tol);
    s.get("inner_budget", cfg.anneal.inner_budget);
    s.get("inner_eps", cfg.anneal.inner_eps);
    s.get("max_stages", cfg.anneal.max_stages);
    s.get("ensemble_size", cfg.anneal.ensemble_size);
    s.get("validation_size", cfg.anneal.validation_size);
    s.get("bound_factor", cfg.anneal.bound_factor);
    s.finish();
  }

  if (const json* t = top.find("theory")) {
    Section s(*t, "theory");
    s.get("epsilon", cfg.theory.epsilon);
    s.get("delta", cfg.theory.delta);
    s.get("grid", cfg.theory.grid);
    s.get("ensemble_size", cfg.theory.ensemble_size);
    std::string v;
    if (s.get("variant", v)) cfg.theory.variant = parse_variant(v);
    std::string rate;
    if (s.get("rate", rate)) {
      if (rate == "exact") {
        cfg.theory.rate = ContractionRate::kExact;
      } else if (rate == "degraded") {
        cfg.theory.rate = ContractionRate::kDegraded;
      } else {
        throw ConfigError("theory.rate: expected exact or degraded");
      }
    }
    s.finish();
  }
  top.finish();
  cfg.validate();
  return cfg;
}

json config_to_json(const ExperimentConfig& cfg) {
  json j;
  j["seed"] = cfg.seed;
  j["trials"] = cfg.trials;
  j["threads"] = cfg.threads;
  j["output_dir"] = cfg.output_dir;
  j["methods"] = cfg.methods;
  j["minibatch_sizes"] = cfg.minibatch_sizes;
  j["percentiles"] = cfg.percentiles;
  j["histogram_bins"] = cfg.histogram_bins;
  const auto& b = cfg.domain.base;
  j["domain"] = {{"l_min", cfg.domain.l_min},
                 {"l_max", cfg.domain.l_max},
                 {"dt", cfg.domain.dt},
                 {"base",
                  {{"m_c", b.m_c},
                   {"m_p", b.m_p},
                   {"g", b.g},
                   {"mu_c", b.mu_c},
                   {"mu_p", b.mu_p},
                   {"half_length", b.half_length}}}};
  j["cost"] = {{"Q", matrix_to_json(cfg.cost.Q)},
               {"R", matrix_to_json(cfg.cost.R)},
               {"S", matrix_to_json(cfg.cost.S)},
               {"Sigma_w", matrix_to_json(cfg.cost.Sigma_w)}};
  const auto& o = cfg.optimizer;
  j["optimizer"] = {{"steps", o.steps},
                    {"minibatch", o.minibatch},
                    {"mode", to_string(o.mode)},
                    {"eval_every", o.eval_every},
                    {"n_eval", o.n_eval},
                    {"stop_on_infeasible", o.stop_on_infeasible}};
  if (cfg.eta_inverse_LK) {
    j["optimizer"]["eta"] = "inverse_LK";
  } else {
    j["optimizer"]["eta"] = o.eta;
  }
  const auto& g = cfg.initial_gain;
  j["initial_gain"] = {{"kind", kind_name(g.kind)},
                       {"nominal_length", g.nominal_length},
                       {"r_scale", g.r_scale},
                       {"K", g.K.size() > 0 ? matrix_to_json(g.K) : json(nullptr)}};
  const auto& a = cfg.anneal;
  j["anneal"] = {{"gamma_tol", a.gamma_tol},         {"inner_budget", a.inner_budget},
                 {"inner_eps", a.inner_eps},         {"max_stages", a.max_stages},
                 {"ensemble_size", a.ensemble_size}, {"validation_size", a.validation_size},
                 {"bound_factor", a.bound_factor}};
  const auto& t = cfg.theory;
  j["theory"] = {{"epsilon", t.epsilon},
                 {"delta", t.delta},
                 {"grid", t.grid},
                 {"ensemble_size", t.ensemble_size},
                 {"variant", variant_name(t.variant)},
                 {"rate", t.rate == ContractionRate::kExact ? "exact" : "degraded"}};
  return j;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot open config file " + path);
  std::stringstream buf;
  buf << f.rdbuf();
  const std::string text = buf.str();
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    const std::size_t upto = std::min<std::size_t>(e.byte, text.size());
    const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<long>(upto), '\n');
    throw ConfigError(path + ":" + std::to_string(line) + ": " + e.what());
  }
  return config_from_json(j);
}

std::vector<MethodPlan> expand_methods(const ExperimentConfig& cfg) {
  std::vector<MethodPlan> plans;
  std::vector<long> sizes = cfg.minibatch_sizes;
  if (sizes.empty()) sizes.push_back(cfg.optimizer.minibatch);
  for (const auto& name : cfg.methods) {
    const auto [m, pinned] = split_method(name);
    if (m == "dr_sgd" || m == "sa_fixed") {
      for (long M : pinned > 0 ? std::vector<long>{pinned} : sizes) {
        MethodPlan p{m + "_M" + std::to_string(M), m, cfg.optimizer};
        p.optimizer.minibatch = M;
        p.optimizer.mode = parse_mode(m);
        plans.push_back(p);
      }
    } else {
      MethodPlan p{m, m, cfg.optimizer};
      if (m == "exact_gd") p.optimizer.mode = OptimizerMode::kExactGd;
      plans.push_back(p);
    }
  }
  return plans;
}

std::uint64_t trial_seed(std::uint64_t seed, const std::string& label, long trial) {
  return Rng(seed).split(label).split(static_cast<std::uint64_t>(trial)).key();
}

std::vector<PlantSample> draw_shared_eval(const ExperimentConfig& cfg) {
  const CartpoleDistribution dist(cfg.domain);
  Rng rng = Rng(cfg.seed).split("eval");
  return dist.sample_many(rng, static_cast<std::size_t>(cfg.optimizer.n_eval));
}

Matrix resolve_initial_gain(const ExperimentConfig& cfg) {
  const auto& g = cfg.initial_gain;
  switch (g.kind) {
    case InitialGainKind::kZero:
      return Matrix::Zero(1, 4);
    case InitialGainKind::kExplicit:
      return g.K;
    case InitialGainKind::kNominalLqr: {
      CostSpec design = cfg.cost;
      design.R *= g.r_scale;
      return solve_dare(plant_for_length(cfg.domain, g.nominal_length), design).K;
    }
    case InitialGainKind::kAnneal: {
      AnnealConfig a = cfg.anneal;
      a.seed = Rng(cfg.seed).split("initial_gain").key();
      return discount_annealing(CartpoleDistribution(cfg.domain), cfg.cost, a).K;
    }
  }
  throw ConfigError("initial_gain: unknown kind");
}

namespace {

RunRecord run_anneal_trial(const ExperimentConfig& cfg, std::uint64_t seed,
                           std::span<const PlantSample> eval) {
  AnnealConfig a = cfg.anneal;
  a.seed = seed;
  const auto res = discount_annealing(CartpoleDistribution(cfg.domain), cfg.cost, a);
  RunRecord rec;
  for (std::size_t i = 0; i < res.stage_gains.size(); ++i) {
    LogRow row;
    row.step = static_cast<long>(i);
    row.cost_estimate = dr_cost_estimate(res.stage_gains[i], eval, cfg.cost);
    row.surrogate_cost = res.stage_costs[i];
    row.grad_norm = res.stage_grad_norms[i];
    row.k_norm = op_norm(res.stage_gains[i]);
    row.infeasible_events = 0;
    rec.rows.push_back(row);
  }
  rec.K_final = res.K;
  return rec;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  ExperimentResult out;
  const CartpoleDistribution dist(cfg.domain);
  const auto eval = draw_shared_eval(cfg);
  out.K0 = resolve_initial_gain(cfg);
  for (std::size_t i = 0; i < eval.size(); ++i) {
    if (!is_stable(closed_loop(eval[i], out.K0))) {
      throw InfeasibleError("initial gain fails the evaluation plants", i);
    }
  }
  out.eta = cfg.optimizer.eta;
  if (cfg.eta_inverse_LK) {
    const double J0 = dr_cost_estimate(out.K0, eval, cfg.cost);
    const double tb = estimate_diam(cfg.domain, static_cast<std::size_t>(cfg.theory.grid)).theta_bar;
    out.eta = 1.0 / compute_LK(J0, tb, cfg.cost);
  }

  const auto plans = expand_methods(cfg);
  struct Task {
    std::size_t plan;
    long trial;
  };
  std::vector<Task> tasks;
  for (std::size_t p = 0; p < plans.size(); ++p) {
    for (long t = 0; t < cfg.trials; ++t) tasks.push_back({p, t});
  }
  out.trials.resize(tasks.size());

  // exact_gd is deterministic, so one run serves every trial.
  auto run_task = [&](const Task& task) {
    const MethodPlan& plan = plans[task.plan];
    TrialResult r;
    r.label = plan.label;
    r.trial = task.trial;
    OptimizerConfig oc = plan.optimizer;
    oc.eta = out.eta;
    oc.seed = trial_seed(cfg.seed, plan.label, task.trial);
    try {
      if (plan.method == "dr_sgd") {
        r.record = dr_sgd(out.K0, dist, cfg.cost, oc, eval);
      } else if (plan.method == "sa_fixed") {
        r.record = sa_fixed(out.K0, dist, cfg.cost, oc, eval);
      } else if (plan.method == "anneal") {
        r.record = run_anneal_trial(cfg, oc.seed, eval);
      } else {
        r.record = exact_gd(out.K0, eval, cfg.cost, oc, eval);
      }
      r.ok = !r.record.halted;
      if (r.record.halted) r.error = "halted: " + r.record.halt_reason;
    } catch (const std::exception& e) {
      r.ok = false;
      r.error = e.what();
    }
    return r;
  };

  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    if (plans[tasks[i].plan].method == "exact_gd" && tasks[i].trial > 0) continue;
    order.push_back(i);
  }
  std::size_t workers = cfg.threads > 0 ? static_cast<std::size_t>(cfg.threads)
                                        : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, order.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k; (k = next.fetch_add(1)) < order.size();) {
      out.trials[order[k]] = run_task(tasks[order[k]]);
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  for (std::size_t i = 0; i < tasks.size(); ++i) {
    if (plans[tasks[i].plan].method == "exact_gd" && tasks[i].trial > 0) {
      const std::size_t first = i - static_cast<std::size_t>(tasks[i].trial);
      out.trials[i] = out.trials[first];
      out.trials[i].trial = tasks[i].trial;
    }
  }

  for (const auto& r : out.trials) {
    if (!r.ok) ++out.failures;
  }
  for (const auto& plan : plans) {
    double sum = 0.0;
    long n = 0;
    for (const auto& r : out.trials) {
      if (r.label == plan.label && r.ok) {
        sum += r.record.wall_time;
        ++n;
      }
    }
    out.mean_wall_time[plan.label] = n > 0 ? sum / static_cast<double>(n) : 0.0;
  }
  summarize(cfg, out);
  return out;
}

void summarize(const ExperimentConfig& cfg, ExperimentResult& result) {
  result.summary.clear();
  result.k_histogram.clear();
  std::vector<std::string> labels;
  for (const auto& r : result.trials) {
    if (std::find(labels.begin(), labels.end(), r.label) == labels.end()) labels.push_back(r.label);
  }

  for (const auto& label : labels) {
    std::map<long, std::vector<double>> by_step;
    for (const auto& r : result.trials) {
      if (r.label != label || !r.ok) continue;
      for (const auto& row : r.record.rows) by_step[row.step].push_back(row.cost_estimate);
    }
    for (const auto& [step, values] : by_step) {
      SummaryRow s{label, step, {}};
      for (double q : cfg.percentiles) s.values.push_back(percentile(values, q));
      result.summary.push_back(std::move(s));
    }
  }

  std::vector<double> all;
  for (const auto& r : result.trials) {
    if (r.ok) all.push_back(op_norm(r.record.K_final));
  }
  double lo = kInfiniteCost;
  double hi = 0.0;
  for (double v : all) {
    if (v > 0.0 && std::isfinite(v)) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  if (!(hi > 0.0)) return;
  const auto edges = log_edges(lo, hi, static_cast<std::size_t>(cfg.histogram_bins));
  for (const auto& label : labels) {
    std::vector<double> vals;
    for (const auto& r : result.trials) {
      if (r.label == label && r.ok) vals.push_back(op_norm(r.record.K_final));
    }
    const auto h = histogram(vals, edges);
    for (std::size_t k = 0; k < h.counts.size(); ++k) {
      result.k_histogram.push_back({label, edges[k], edges[k + 1], h.counts[k]});
    }
  }
}

void write_outputs(const ExperimentConfig& cfg, const ExperimentResult& result) {
  namespace fs = std::filesystem;
  const fs::path dir(cfg.output_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("output_dir: cannot create " + dir.string() + ": " + ec.message());

  std::string raw = "method,trial,step,cost_estimate,grad_norm,k_norm,infeasible_events\n";
  std::string final_k = "method,trial,k_norm\n";
  std::string errors = "method,trial,error\n";
  for (const auto& r : result.trials) {
    if (!r.ok) {
      errors += r.label + "," + std::to_string(r.trial) + "," + csv_escape(r.error) + "\n";
    }
    for (const auto& row : r.record.rows) {
      raw += r.label + "," + std::to_string(r.trial) + "," + std::to_string(row.step) + "," +
             format_double(row.cost_estimate) + "," + format_double(row.grad_norm) + "," +
             format_double(row.k_norm) + "," + std::to_string(row.infeasible_events) + "\n";
    }
    if (r.ok) {
      final_k += r.label + "," + std::to_string(r.trial) + "," +
                 format_double(op_norm(r.record.K_final)) + "\n";
    }
  }

  std::string summary = "method,step";
  for (double q : cfg.percentiles) summary += "," + percentile_column(q);
  summary += "\n";
  for (const auto& s : result.summary) {
    summary += s.label + "," + std::to_string(s.step);
    for (double v : s.values) summary += "," + format_double(v);
    summary += "\n";
  }

  std::string hist = "method,bin_lo,bin_hi,count\n";
  for (const auto& h : result.k_histogram) {
    hist += h.label + "," + format_double(h.lo) + "," + format_double(h.hi) + "," +
            std::to_string(h.count) + "\n";
  }

  write_file(dir / "raw.csv", raw);
  write_file(dir / "summary.csv", summary);
  write_file(dir / "final_k.csv", final_k);
  write_file(dir / "k_hist.csv", hist);
  write_file(dir / "errors.csv", errors);
  write_file(dir / "config.json", config_to_json(cfg).dump(2) + "\n");
  json run = {{"K0", matrix_to_json(result.K0)}, {"eta", result.eta}, {"failures", result.failures}};
  write_file(dir / "run.json", run.dump(2) + "\n");
}

json constants_to_json(const TheoryConstants& c) {
  return json{{"L_K", c.L_K},         {"c_g", c.c_g},   {"L_cost", c.L_cost},
              {"r_g", c.r_g},         {"G_bar", c.G_bar}, {"sigma_sq", c.sigma_sq},
              {"eps_grad", c.eps_grad}, {"M", c.M},     {"N", c.N},
              {"mu", c.mu},           {"het_budget", c.het_budget}};
}

TheoryConstants experiment_constants(const ExperimentConfig& cfg, const Matrix& K0) {
  const CartpoleDistribution dist(cfg.domain);
  Rng rng = Rng(cfg.seed).split("theory");
  TheoryInputs in;
  in.K0 = K0;
  in.ensemble = dist.sample_many(rng, static_cast<std::size_t>(cfg.theory.ensemble_size));
  in.cost = cfg.cost;
  const auto extent = estimate_diam(cfg.domain, static_cast<std::size_t>(cfg.theory.grid));
  in.diam = extent.diam;
  in.theta_bar = std::max(extent.theta_bar, ensemble_theta_bar(in.ensemble));
  in.eps = cfg.theory.epsilon;
  in.delta = cfg.theory.delta;
  in.variant = cfg.theory.variant;
  in.rate = cfg.theory.rate;
  // Mean of per-plant optima: a lower bound on the randomized optimum, so
  // the resulting step count errs high.
  CompensatedScalar opt;
  for (const auto& th : in.ensemble) opt.add((solve_dare(th, cfg.cost).P * cfg.cost.Sigma_w).trace());
  in.J_opt = opt.value() / static_cast<double>(in.ensemble.size());
  return derive_constants(in);
}

}  // namespace drlqr
