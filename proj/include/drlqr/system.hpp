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

#include <Eigen/Dense>

#include <cstddef>

namespace drlqr {

using Matrix = Eigen::MatrixXd;

/// One realized linear plant x+ = A x + B u + w.
struct PlantSample {
  Matrix A;  // n_x x n_x
  Matrix B;  // n_x x n_u

  std::size_t nx() const { return static_cast<std::size_t>(A.rows()); }
  std::size_t nu() const { return static_cast<std::size_t>(B.cols()); }
};

/// Quadratic stage cost [x; u]' [Q S; S' R] [x; u] and process noise covariance.
///
/// The block matrix and the noise covariance are both required to dominate
/// the identity; `validate()` enforces this.
struct CostSpec {
  Matrix Q;        // n_x x n_x
  Matrix S;        // n_x x n_u
  Matrix R;        // n_u x n_u
  Matrix Sigma_w;  // n_x x n_x

  static CostSpec identity(std::size_t nx, std::size_t nu);

  std::size_t nx() const { return static_cast<std::size_t>(Q.rows()); }
  std::size_t nu() const { return static_cast<std::size_t>(R.rows()); }

  /// The (n_x + n_u) square block [Q S; S' R].
  Matrix block() const;

  /// [I; -K]' block() [I; -K] = Q - S K - K' S' + K' R K.
  Matrix closed_loop_weight(const Matrix& K) const;

  /// Throws ArgumentError on shape mismatch, asymmetry, or a weight below I.
  void validate() const;
};

/// Direction [dA, dB] in plant-parameter space.
struct ThetaDirection {
  Matrix dA;
  Matrix dB;
};

/// A - B K.
inline Matrix closed_loop(const PlantSample& theta, const Matrix& K) {
  return theta.A - theta.B * K;
}

}  // namespace drlqr
