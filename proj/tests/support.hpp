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

// Independent oracles and random instance generators shared by the unit and
// acceptance tests. Nothing here calls the library's solvers.

#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstddef>

#include "drlqr/lqr.hpp"
#include "drlqr/rng.hpp"
#include "drlqr/system.hpp"

namespace drlqr::testing {

inline Matrix random_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols, double scale = 1.0) {
  Matrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = scale * rng.uniform(-1.0, 1.0);
  }
  return m;
}

inline double oracle_spectral_radius(const Matrix& a) {
  Eigen::EigenSolver<Matrix> es(a, false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

/// Random square matrix rescaled to spectral radius `rho`.
inline Matrix random_with_radius(Rng& rng, Eigen::Index n, double rho) {
  Matrix a = random_matrix(rng, n, n);
  const double r = oracle_spectral_radius(a);
  if (r < 1e-8) return a;
  return a * (rho / r);
}

/// I + G G' scaled: symmetric with every eigenvalue >= 1.
inline Matrix random_weight(Rng& rng, Eigen::Index n, double scale = 0.5) {
  const Matrix g = random_matrix(rng, n, n, scale);
  return Matrix::Identity(n, n) + g * g.transpose();
}

/// Block weight >= I, optionally with a nonzero cross term.
inline CostSpec random_cost(Rng& rng, Eigen::Index nx, Eigen::Index nu, bool cross) {
  const Matrix block = random_weight(rng, nx + nu, 0.4);
  CostSpec c;
  c.Q = block.topLeftCorner(nx, nx);
  c.R = block.bottomRightCorner(nu, nu);
  c.S = cross ? Matrix(block.topRightCorner(nx, nu)) : Matrix::Zero(nx, nu);
  if (!cross) {
    c.Q = random_weight(rng, nx, 0.4);
    c.R = random_weight(rng, nu, 0.4);
  }
  c.Sigma_w = random_weight(rng, nx, 0.4);
  return c;
}

struct Instance {
  PlantSample theta;
  Matrix K;
  CostSpec cost;
};

/// Plant and gain with a prescribed closed-loop spectral radius: the closed
/// loop is drawn first and A is recovered as A_cl + B K.
inline Instance random_instance(Rng& rng, Eigen::Index nx, Eigen::Index nu, double rho,
                                bool cross = false) {
  Instance in;
  const Matrix a_cl = random_with_radius(rng, nx, rho);
  in.theta.B = random_matrix(rng, nx, nu);
  in.K = random_matrix(rng, nu, nx, 0.5);
  in.theta.A = a_cl + in.theta.B * in.K;
  in.cost = random_cost(rng, nx, nu, cross);
  return in;
}

/// sum_{l < terms} A^l X A'^l
inline Matrix series_dlyap(const Matrix& a, const Matrix& x, int terms) {
  Matrix sum = Matrix::Zero(x.rows(), x.cols());
  Matrix term = x;
  for (int l = 0; l < terms; ++l) {
    sum += term;
    term = a * term * a.transpose();
  }
  return sum;
}

/// vec(Y) = (I - A kron A)^{-1} vec(X) with an explicit Kronecker product.
inline Matrix kron_dlyap(const Matrix& a, const Matrix& x) {
  const Eigen::Index n = a.rows();
  Matrix kron(n * n, n * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) kron.block(i * n, j * n, n, n) = a(i, j) * a;
  }
  const Matrix lhs = Matrix::Identity(n * n, n * n) - kron;
  Eigen::VectorXd rhs(n * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) rhs(i * n + j) = x(i, j);  // row-major vec
  }
  const Eigen::VectorXd v = lhs.fullPivLu().solve(rhs);
  Matrix y(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) y(i, j) = v(i * n + j);
  }
  return y;
}

/// Central differences of lqr_cost in every entry of K.
inline Matrix fd_gradient(const Matrix& K, const PlantSample& theta, const CostSpec& cost,
                          double h = 1e-6) {
  Matrix g(K.rows(), K.cols());
  for (Eigen::Index i = 0; i < K.rows(); ++i) {
    for (Eigen::Index j = 0; j < K.cols(); ++j) {
      Matrix kp = K;
      Matrix km = K;
      kp(i, j) += h;
      km(i, j) -= h;
      g(i, j) = (lqr_cost(kp, theta, cost) - lqr_cost(km, theta, cost)) / (2.0 * h);
    }
  }
  return g;
}

inline PlantSample scalar_plant(double a, double b = 1.0) {
  return PlantSample{Matrix::Constant(1, 1, a), Matrix::Constant(1, 1, b)};
}

inline Matrix scalar(double v) { return Matrix::Constant(1, 1, v); }

/// Closed-form scalar cost with Q = R = Sigma_w = 1, S = 0.
inline double scalar_cost(double k, double a, double b = 1.0) {
  const double c = a - b * k;
  if (std::abs(c) >= 1.0) return INFINITY;
  return (1.0 + k * k) / (1.0 - c * c);
}

/// Scalar DARE root of P^2 - a^2 P - 1 = 0 (b = q = r = 1).
inline double scalar_dare_P(double a) { return 0.5 * (a * a + std::sqrt(a * a * a * a + 4.0)); }

inline double rel_err(const Matrix& got, const Matrix& want) {
  return (got - want).norm() / (1.0 + want.norm());
}

}  // namespace drlqr::testing
