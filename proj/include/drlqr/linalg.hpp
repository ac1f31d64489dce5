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

#include "drlqr/system.hpp"

namespace drlqr {

/// Default margin for the stability predicate rho(A) < 1 - margin.
inline constexpr double kStabilityMargin = 1e-9;

/// Largest eigenvalue modulus. Throws SolverError if the QR iteration stalls.
double spectral_radius(const Matrix& a);

bool is_stable(const Matrix& a, double margin = kStabilityMargin);

/// Solves Y = X + A Y A' (the series sum_l A^l X A'^l) by a vectorized
/// Kronecker solve with one step of iterative refinement.
///
/// The result is symmetrized when X is symmetric. Throws InstabilityError
/// when A is not stable.
Matrix dlyap(const Matrix& a, const Matrix& x);

namespace detail {
// dlyap without the stability check; callers have already verified rho(a) < 1.
Matrix dlyap_prechecked(const Matrix& a, const Matrix& x);
}  // namespace detail

/// Largest singular value.
double op_norm(const Matrix& m);

/// Smallest singular value.
double sigma_min(const Matrix& m);

/// Smallest eigenvalue of the symmetric part of `m`.
double min_eigenvalue(const Matrix& m);

/// ||M - M'||_F <= 1e-12 (1 + ||M||_F).
bool is_symmetric(const Matrix& m);

/// Symmetric and lambda_min >= -1e-10 (1 + ||M||_2).
bool is_psd(const Matrix& m);

bool all_finite(const Matrix& m);

struct DareOptions {
  long max_iters = 100000;
  double rel_tol = 1e-12;
};

struct DareSolution {
  Matrix P;  // optimal cost-to-go
  Matrix K;  // optimal gain, u = -K x
  long iterations = 0;
};

/// Discrete algebraic Riccati equation with cross term, solved by value
/// iteration from P = Q.
///
/// Throws SynthesisError on divergence, a singular R + B'PB, or a
/// non-stabilizing limit.
DareSolution solve_dare(const PlantSample& theta, const CostSpec& cost,
                        const DareOptions& options = {});

}  // namespace drlqr
