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

#include "drlqr/system.hpp"

#include "drlqr/errors.hpp"
#include "drlqr/linalg.hpp"

namespace drlqr {

CostSpec CostSpec::identity(std::size_t nx, std::size_t nu) {
  const auto n = static_cast<Eigen::Index>(nx);
  const auto m = static_cast<Eigen::Index>(nu);
  return CostSpec{Matrix::Identity(n, n), Matrix::Zero(n, m),
                  Matrix::Identity(m, m), Matrix::Identity(n, n)};
}

Matrix CostSpec::block() const {
  const Eigen::Index n = Q.rows();
  const Eigen::Index m = R.rows();
  Matrix out(n + m, n + m);
  out.topLeftCorner(n, n) = Q;
  out.topRightCorner(n, m) = S;
  out.bottomLeftCorner(m, n) = S.transpose();
  out.bottomRightCorner(m, m) = R;
  return out;
}

Matrix CostSpec::closed_loop_weight(const Matrix& K) const {
  const Eigen::Index n = Q.rows();
  Matrix stacked(n + K.rows(), n);
  stacked.topRows(n) = Matrix::Identity(n, n);
  stacked.bottomRows(K.rows()) = -K;
  Matrix out = stacked.transpose() * block() * stacked;
  return 0.5 * (out + out.transpose());
}

void CostSpec::validate() const {
  const Eigen::Index n = Q.rows();
  const Eigen::Index m = R.rows();
  if (n == 0 || m == 0 || Q.cols() != n || R.cols() != m || S.rows() != n ||
      S.cols() != m || Sigma_w.rows() != n || Sigma_w.cols() != n) {
    throw ArgumentError("CostSpec: inconsistent dimensions");
  }
  if (!Q.allFinite() || !S.allFinite() || !R.allFinite() || !Sigma_w.allFinite()) {
    throw ArgumentError("CostSpec: non-finite entries");
  }
  if (!is_symmetric(Q) || !is_symmetric(R) || !is_symmetric(Sigma_w)) {
    throw ArgumentError("CostSpec: Q, R and Sigma_w must be symmetric");
  }
  if (min_eigenvalue(block()) < 1.0 - 1e-10) {
    throw ArgumentError("CostSpec: block weight [Q S; S' R] must dominate I");
  }
  if (min_eigenvalue(Sigma_w) < 1.0 - 1e-10) {
    throw ArgumentError("CostSpec: Sigma_w must dominate I");
  }
}

}  // namespace drlqr
