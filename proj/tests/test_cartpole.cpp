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
#include <complex>
#include <vector>

#include "drlqr/cartpole.hpp"
#include "drlqr/errors.hpp"
#include "drlqr/linalg.hpp"
#include "support.hpp"

using namespace drlqr;
using namespace drlqr::testing;

TEST_SUITE("cartpole") {
  TEST_CASE("upright equilibrium is a fixed point") {
    Rng rng(1);
    for (int t = 0; t < 20; ++t) {
      CartpoleParams p;
      p.m_c = rng.uniform(0.5, 2.0);
      p.m_p = rng.uniform(0.05, 1.5);
      p.l = rng.uniform(0.1, 1.0);
      p.mu_c = rng.uniform(0.0, 0.5);
      p.mu_p = rng.uniform(0.0, 0.05);
      p.half_length = t % 2 == 0;
      const auto f = nonlinear_dynamics({0, 0, 0, 0}, 0.0, p);
      for (double v : f) CHECK(v == 0.0);
    }
  }

  TEST_CASE("unit force at the equilibrium") {
    CartpoleParams p;
    const auto f = nonlinear_dynamics({0, 0, 0, 0}, 1.0, p);
    const double xdd = -(7.0 / 3.0) / (p.m_p - (7.0 / 3.0) * (p.m_p + p.m_c));
    CHECK(f[1] == doctest::Approx(xdd).epsilon(1e-14));
    CHECK(f[1] == doctest::Approx(0.9459459459).epsilon(1e-9));
    CHECK(f[3] == doctest::Approx(-3.0 / (7.0 * p.lhat()) * xdd).epsilon(1e-14));
    CHECK(f[3] == doctest::Approx(-0.8108108108).epsilon(1e-9));
    CHECK(f[0] == 0.0);
    CHECK(f[2] == 0.0);
  }

  TEST_CASE("upright is unstable") {
    const auto f = nonlinear_dynamics({0, 0, 0.01, 0}, 0.0, CartpoleParams{});
    CHECK(f[3] > 0.0);
  }

  TEST_CASE("half-length switch") {
    CartpoleParams p;
    p.l = 0.6;
    CHECK(p.lhat() == 0.6);
    p.half_length = true;
    CHECK(p.lhat() == doctest::Approx(0.3));
  }

  TEST_CASE("linearization structure") {
    const CartpoleParams p;
    const auto m = linearize(p);
    CHECK(m.A_c.row(0) == Eigen::RowVector4d(0, 1, 0, 0));
    CHECK(m.A_c.row(2) == Eigen::RowVector4d(0, 0, 0, 1));
    const double xdd_u = -(7.0 / 3.0) / (p.m_p - (7.0 / 3.0) * (p.m_p + p.m_c));
    CHECK(m.B_c(1, 0) == doctest::Approx(xdd_u).epsilon(1e-7));
    CHECK(m.B_c(0, 0) == 0.0);
    CHECK(m.A_c(3, 2) > 0.0);
    // No dependence on cart position.
    CHECK(m.A_c.col(0).norm() == 0.0);
  }

  TEST_CASE("linearization is step robust") {
    Rng rng(4);
    for (int t = 0; t < 5; ++t) {
      CartpoleParams p;
      p.l = rng.uniform(0.2, 0.8);
      const auto a = linearize(p, 1e-7);
      const auto b = linearize(p, 1e-5);
      CHECK(rel_err(a.A_c, b.A_c) <= 1e-4);
      CHECK(rel_err(a.B_c, b.B_c) <= 1e-4);
    }
  }

  TEST_CASE("discretization") {
    const auto z = discretize(Matrix::Zero(4, 4), Matrix::Zero(4, 1), 0.02);
    CHECK(rel_err(z.A, Matrix::Identity(4, 4)) < 1e-15);
    CHECK(z.B.norm() == 0.0);

    const auto s = discretize(scalar(-1.5), scalar(2.0), 0.1);
    CHECK(s.A(0, 0) == doctest::Approx(std::exp(-0.15)).epsilon(1e-14));
    CHECK(s.B(0, 0) == doctest::Approx(2.0 * (1.0 - std::exp(-0.15)) / 1.5).epsilon(1e-13));

    CHECK_THROWS_AS(discretize(scalar(1.0), scalar(1.0), 0.0), ArgumentError);
  }

  TEST_CASE("discrete poles are exp(dt lambda)") {
    const auto m = linearize(CartpoleParams{});
    const double dt = 0.02;
    const auto d = discretize(m.A_c, m.B_c, dt);
    Eigen::EigenSolver<Matrix> ec(m.A_c), ed(d.A);
    std::vector<std::complex<double>> mapped, got;
    for (int i = 0; i < 4; ++i) {
      mapped.push_back(std::exp(dt * ec.eigenvalues()(i)));
      got.push_back(ed.eigenvalues()(i));
    }
    for (const auto& z : mapped) {
      double best = INFINITY;
      for (const auto& w : got) best = std::min(best, std::abs(z - w));
      CHECK(best <= 1e-8);
    }
  }

  TEST_CASE("discretization is first-order consistent") {
    const auto m = linearize(CartpoleParams{});
    double prev = 0.0;
    for (int k = 0; k < 4; ++k) {
      const double dt = 0.02 / std::pow(2.0, k);
      const auto d = discretize(m.A_c, m.B_c, dt);
      const double err = (d.A - (Matrix::Identity(4, 4) + dt * m.A_c)).norm();
      const double errB = (d.B - dt * m.B_c).norm();
      CHECK(err <= 50.0 * dt * dt);
      CHECK(errB <= 50.0 * dt * dt);
      if (k > 0) CHECK(err / prev == doctest::Approx(0.25).epsilon(0.05));
      prev = err;
    }
  }

  TEST_CASE("sampling") {
    DomainSpec spec;
    spec.l_min = spec.l_max = 0.4;
    Rng r0(9);
    const auto a = sample_theta(spec, r0);
    const auto b = sample_theta(spec, r0);
    CHECK(a.A == b.A);
    CHECK(a.B == b.B);

    DomainSpec wide;
    Rng r1(77), r2(77);
    for (int i = 0; i < 10; ++i) {
      const auto x = sample_theta(wide, r1);
      const auto y = sample_theta(wide, r2);
      CHECK(x.A == y.A);
      CHECK(x.B == y.B);
    }

    // Lengths themselves: 10^4 draws through the same stream logic.
    Rng r3(5);
    double sum = 0.0;
    const int n = 10000;
    for (int i = 0; i < n; ++i) sum += r3.uniform(wide.l_min, wide.l_max);
    const double se = (wide.l_max - wide.l_min) / std::sqrt(12.0 * n);
    CHECK(std::abs(sum / n - 0.5 * (wide.l_min + wide.l_max)) <= 3.0 * se);
  }

  TEST_CASE("sampled plants follow the length distribution") {
    // Recover l from the sampled plant through the B entry for thetaddot,
    // which is monotone in l, and compare its mean with a grid quadrature.
    DomainSpec spec;
    Rng rng(123);
    const int n = 2000;
    double sum = 0.0;
    for (int i = 0; i < n; ++i) sum += sample_theta(spec, rng).B(3, 0);
    double quad = 0.0;
    const int grid = 400;
    for (int i = 0; i < grid; ++i) {
      const double l = spec.l_min + (i + 0.5) * (spec.l_max - spec.l_min) / grid;
      quad += plant_for_length(spec, l).B(3, 0) / grid;
    }
    double var = 0.0;
    for (int i = 0; i < grid; ++i) {
      const double l = spec.l_min + (i + 0.5) * (spec.l_max - spec.l_min) / grid;
      const double v = plant_for_length(spec, l).B(3, 0) - quad;
      var += v * v / grid;
    }
    CHECK(std::abs(sum / n - quad) <= 4.0 * std::sqrt(var / n));
  }

  TEST_CASE("domain diameter") {
    DomainSpec point;
    point.l_min = point.l_max = 0.5;
    CHECK(estimate_diam(point, 10).diam == 0.0);

    DomainSpec spec;
    const auto coarse = estimate_diam(spec, 2);
    const auto fine = estimate_diam(spec, 50);
    CHECK(coarse.diam <= fine.diam);
    CHECK(coarse.theta_bar <= fine.theta_bar + 1e-15);

    // Regression baseline for the default domain.
    const auto d = estimate_diam(spec, 100);
    CHECK(d.diam == doctest::Approx(0.325852).epsilon(1e-5));
    CHECK(d.theta_bar == doctest::Approx(1.24177).epsilon(1e-5));
    CHECK_THROWS_AS(estimate_diam(spec, 1), ArgumentError);
  }

  TEST_CASE("domain validation") {
    DomainSpec bad;
    bad.l_min = 0.9;
    bad.l_max = 0.2;
    CHECK_THROWS_WITH_AS(bad.validate(), doctest::Contains("DomainSpec"), ArgumentError);
    CartpoleParams p;
    p.m_p = -1.0;
    CHECK_THROWS_AS(p.validate(), ArgumentError);
  }
}
