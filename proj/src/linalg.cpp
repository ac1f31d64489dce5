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

#include "drlqr/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <cmath>
#include <string>

#include "drlqr/errors.hpp"

namespace drlqr {

double spectral_radius(const Matrix& a) {
  if (a.rows() != a.cols()) {
    throw ArgumentError("spectral_radius: matrix is not square");
  }
  if (a.size() == 0) return 0.0;
  if (a.rows() == 1) return std::abs(a(0, 0));
  if (!all_finite(a)) {
    throw ArgumentError("spectral_radius: non-finite entries");
  }
  Eigen::EigenSolver<Matrix> solver;
  solver.compute(a, /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success) {
    throw SolverError("spectral_radius: QR iteration did not converge",
                      static_cast<long>(solver.getMaxIterations()) * a.rows());
  }
  return solver.eigenvalues().cwiseAbs().maxCoeff();
}

bool is_stable(const Matrix& a, double margin) {
  return spectral_radius(a) < 1.0 - margin;
}

Matrix dlyap(const Matrix& a, const Matrix& x) {
  const Eigen::Index n = a.rows();
  if (a.cols() != n || x.rows() != n || x.cols() != n) {
    throw ArgumentError("dlyap: dimension mismatch");
  }
  if (!is_stable(a)) {
    throw InstabilityError("dlyap: closed loop is not stable");
  }
  return detail::dlyap_prechecked(a, x);
}

Matrix detail::dlyap_prechecked(const Matrix& a, const Matrix& x) {
  const Eigen::Index n = a.rows();
  // Column-major vec: vec(A Y A') = (A kron A) vec(Y).
  const Eigen::Index n2 = n * n;
  Matrix lhs = Matrix::Identity(n2, n2);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index l = 0; l < n; ++l) {
        for (Eigen::Index k = 0; k < n; ++k) {
          lhs(i + n * j, k + n * l) -= a(i, k) * a(j, l);
        }
      }
    }
  }
  const Eigen::PartialPivLU<Matrix> lu(lhs);
  const Eigen::Map<const Eigen::VectorXd> rhs(x.data(), n2);
  Eigen::VectorXd y = lu.solve(rhs);
  const Eigen::VectorXd residual = rhs - lhs * y;
  y += lu.solve(residual);

  Matrix out = Eigen::Map<const Matrix>(y.data(), n, n);
  if (is_symmetric(x)) out = 0.5 * (out + out.transpose()).eval();
  return out;
}

double op_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  const Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues()(0);
}

double sigma_min(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  const Eigen::JacobiSVD<Matrix> svd(m);
  const auto& s = svd.singularValues();
  // Tall or wide matrices: the smallest of the min(rows, cols) values.
  return s(s.size() - 1);
}

double min_eigenvalue(const Matrix& m) {
  const Matrix sym = 0.5 * (m + m.transpose());
  const Eigen::SelfAdjointEigenSolver<Matrix> solver(sym, Eigen::EigenvaluesOnly);
  return solver.eigenvalues()(0);
}

bool is_symmetric(const Matrix& m) {
  if (m.rows() != m.cols()) return false;
  return (m - m.transpose()).norm() <= 1e-12 * (1.0 + m.norm());
}

bool is_psd(const Matrix& m) {
  if (!is_symmetric(m)) return false;
  return min_eigenvalue(m) >= -1e-10 * (1.0 + op_norm(m));
}

bool all_finite(const Matrix& m) { return m.allFinite(); }

DareSolution solve_dare(const PlantSample& theta, const CostSpec& cost,
                        const DareOptions& options) {
  const Matrix& A = theta.A;
  const Matrix& B = theta.B;
  const Matrix At = A.transpose();
  const Matrix Bt = B.transpose();
  const Matrix St = cost.S.transpose();

  Matrix P = cost.Q;
  for (long iter = 1; iter <= options.max_iters; ++iter) {
    const Matrix gram = cost.R + Bt * P * B;
    const Eigen::LLT<Matrix> llt(gram);
    if (llt.info() != Eigen::Success) {
      throw SynthesisError("solve_dare: R + B'PB is not positive definite");
    }
    const Matrix cross = Bt * P * A + St;
    Matrix next = cost.Q + At * P * A - cross.transpose() * llt.solve(cross);
    next = 0.5 * (next + next.transpose()).eval();
    if (!next.allFinite()) {
      throw SynthesisError("solve_dare: value iteration diverged after " +
                           std::to_string(iter) + " iterations");
    }
    const double step = (next - P).norm();
    const double scale = 1.0 + P.norm();
    P = std::move(next);
    if (step <= options.rel_tol * scale) {
      const Matrix final_gram = cost.R + Bt * P * B;
      const Eigen::LLT<Matrix> final_llt(final_gram);
      if (final_llt.info() != Eigen::Success) {
        throw SynthesisError("solve_dare: R + B'PB is not positive definite");
      }
      Matrix K = final_llt.solve(Bt * P * A + St);
      if (!is_stable(A - B * K)) {
        throw SynthesisError("solve_dare: limit gain does not stabilize the plant");
      }
      return DareSolution{std::move(P), std::move(K), iter};
    }
  }
  throw SynthesisError("solve_dare: value iteration did not converge within " +
                       std::to_string(options.max_iters) + " iterations");
}

}  // namespace drlqr
