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

#include "drlqr/cartpole.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <unsupported/Eigen/MatrixFunctions>

#include "drlqr/errors.hpp"
#include "drlqr/linalg.hpp"

namespace drlqr {

void CartpoleParams::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw ArgumentError(std::string("CartpoleParams: ") + name + " must be positive");
    }
  };
  positive(m_c, "m_c");
  positive(m_p, "m_p");
  positive(l, "l");
  positive(g, "g");
  if (!(mu_c >= 0.0) || !(mu_p >= 0.0)) {
    throw ArgumentError("CartpoleParams: friction coefficients must be nonnegative");
  }
}

void DomainSpec::validate() const {
  base.validate();
  if (!(l_min > 0.0) || !(l_min <= l_max) || !std::isfinite(l_max)) {
    throw ArgumentError("DomainSpec: need 0 < l_min <= l_max");
  }
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ArgumentError("DomainSpec: dt must be positive");
}

CartpoleState nonlinear_dynamics(const CartpoleState& state, double u,
                                 const CartpoleParams& p) {
  const double xdot = state[1];
  const double th = state[2];
  const double thdot = state[3];
  const double lh = p.lhat();
  const double s = std::sin(th);
  const double c = std::cos(th);
  constexpr double k73 = 7.0 / 3.0;

  const double num = p.m_p * p.g * s * c -
                     k73 * (u + p.m_p * lh * thdot * thdot * s - p.mu_c * xdot) -
                     p.mu_p * thdot * c / lh;
  const double den = p.m_p * c * c - k73 * (p.m_p + p.m_c);
  const double xddot = num / den;
  // The pole mass is the only mass that makes the joint-friction term
  // dimensionally consistent.
  const double thddot =
      3.0 / (7.0 * lh) * (p.g * s - xddot * c - p.mu_p * thdot / (p.m_p * lh));
  return {xdot, xddot, thdot, thddot};
}

ContinuousModel linearize(const CartpoleParams& p, double h) {
  p.validate();
  if (!(h > 0.0)) throw ArgumentError("linearize: step must be positive");
  ContinuousModel out{Matrix::Zero(4, 4), Matrix::Zero(4, 1)};
  const CartpoleState zero{0.0, 0.0, 0.0, 0.0};

  for (int j = 0; j < 4; ++j) {
    CartpoleState up = zero;
    CartpoleState dn = zero;
    up[j] += h;
    dn[j] -= h;
    const auto fu = nonlinear_dynamics(up, 0.0, p);
    const auto fd = nonlinear_dynamics(dn, 0.0, p);
    for (int i : {1, 3}) out.A_c(i, j) = (fu[i] - fd[i]) / (2.0 * h);
  }
  out.A_c(0, 1) = 1.0;
  out.A_c(2, 3) = 1.0;

  const auto fu = nonlinear_dynamics(zero, h, p);
  const auto fd = nonlinear_dynamics(zero, -h, p);
  for (int i : {1, 3}) out.B_c(i, 0) = (fu[i] - fd[i]) / (2.0 * h);
  return out;
}

PlantSample discretize(const Matrix& A_c, const Matrix& B_c, double dt) {
  if (!(dt > 0.0)) throw ArgumentError("discretize: dt must be positive");
  if (A_c.rows() != A_c.cols() || B_c.rows() != A_c.rows()) {
    throw ArgumentError("discretize: shape mismatch");
  }
  const Eigen::Index n = A_c.rows();
  const Eigen::Index m = B_c.cols();
  Matrix aug = Matrix::Zero(n + m, n + m);
  aug.topLeftCorner(n, n) = A_c * dt;
  aug.topRightCorner(n, m) = B_c * dt;
  const Matrix e = aug.exp();
  return PlantSample{e.topLeftCorner(n, n), e.topRightCorner(n, m)};
}

PlantSample plant_for_length(const DomainSpec& spec, double l) {
  CartpoleParams p = spec.base;
  p.l = l;
  const auto model = linearize(p);
  return discretize(model.A_c, model.B_c, spec.dt);
}

PlantSample sample_theta(const DomainSpec& spec, Rng& rng) {
  const double l = spec.l_min == spec.l_max ? spec.l_min : rng.uniform(spec.l_min, spec.l_max);
  return plant_for_length(spec, l);
}

namespace {
Matrix stacked(const PlantSample& t) {
  Matrix ab(t.A.rows(), t.A.cols() + t.B.cols());
  ab << t.A, t.B;
  return ab;
}
}  // namespace

DomainExtent estimate_diam(const DomainSpec& spec, std::size_t grid) {
  spec.validate();
  if (grid < 2) throw ArgumentError("estimate_diam: grid must be at least 2");
  std::vector<Matrix> pts;
  pts.reserve(grid);
  for (std::size_t i = 0; i < grid; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(grid - 1);
    const double l = i + 1 == grid ? spec.l_max : spec.l_min + t * (spec.l_max - spec.l_min);
    pts.push_back(stacked(plant_for_length(spec, l)));
  }
  DomainExtent out;
  for (std::size_t i = 0; i < grid; ++i) {
    out.theta_bar = std::max(out.theta_bar, op_norm(pts[i]));
    for (std::size_t j = i + 1; j < grid; ++j) {
      out.diam = std::max(out.diam, op_norm(pts[i] - pts[j]));
    }
  }
  return out;
}

CartpoleDistribution::CartpoleDistribution(DomainSpec spec) : spec_(std::move(spec)) {
  spec_.validate();
}

}  // namespace drlqr
