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

#include <vector>

#include "drlqr/cartpole.hpp"
#include "drlqr/errors.hpp"
#include "drlqr/linalg.hpp"
#include "drlqr/lqr.hpp"
#include "support.hpp"

using namespace drlqr;
using namespace drlqr::testing;

namespace {

const CostSpec kUnit = CostSpec::identity(1, 1);

// a = 0.9, b = 1, K = 0.5: closed loop 0.4.
const PlantSample kScalar = scalar_plant(0.9);
const Matrix kHalf = scalar(0.5);

PlantSample shifted(const PlantSample& th, const ThetaDirection& d, double h) {
  return PlantSample{th.A + h * d.dA, th.B + h * d.dB};
}

}  // namespace

TEST_SUITE("lqr") {
  TEST_CASE("cost-to-go and cost closed forms") {
    const auto P0 = cost_to_go(Matrix::Zero(1, 3), PlantSample{Matrix::Zero(3, 3), Matrix::Ones(3, 1)},
                               CostSpec::identity(3, 1));
    REQUIRE(P0);
    CHECK(rel_err(*P0, Matrix::Identity(3, 3)) < 1e-15);

    const auto P = cost_to_go(kHalf, kScalar, kUnit);
    REQUIRE(P);
    CHECK((*P)(0, 0) == doctest::Approx(1.25 / 0.84).epsilon(1e-13));
    CHECK(std::abs((*P)(0, 0) - 1.488095) < 1e-6);
    CHECK(lqr_cost(kHalf, kScalar, kUnit) == doctest::Approx(1.25 / 0.84).epsilon(1e-13));

    CHECK(lqr_cost(Matrix::Zero(1, 2), PlantSample{Matrix::Zero(2, 2), Matrix::Ones(2, 1)},
                   CostSpec::identity(2, 1)) == doctest::Approx(2.0));
  }

  TEST_CASE("instability maps to the infinite sentinel") {
    CHECK_FALSE(cost_to_go(scalar(-0.2), kScalar, kUnit));
    CHECK(lqr_cost(scalar(-0.2), kScalar, kUnit) == kInfiniteCost);
    CHECK_FALSE(state_cov(scalar(-0.2), kScalar, kUnit));
    CHECK_FALSE(policy_gradient(scalar(2.0), kScalar, kUnit));
    CHECK_FALSE(evaluate(scalar(2.0), kScalar, kUnit));
  }

  TEST_CASE("state covariance") {
    const auto s0 = state_cov(Matrix::Zero(1, 2), PlantSample{Matrix::Zero(2, 2), Matrix::Ones(2, 1)},
                              CostSpec::identity(2, 1));
    REQUIRE(s0);
    CHECK(rel_err(*s0, Matrix::Identity(2, 2)) < 1e-15);
    const auto s = state_cov(kHalf, kScalar, kUnit);
    REQUIRE(s);
    CHECK((*s)(0, 0) == doctest::Approx(1.0 / 0.84).epsilon(1e-13));
  }

  TEST_CASE("cost duality tr(P Sigma_w) = tr(Sigma Q_K)") {
    Rng rng(21);
    for (int t = 0; t < 20; ++t) {
      const auto nx = static_cast<Eigen::Index>(1 + rng.index(5));
      const auto in = random_instance(rng, nx, 2, 0.85, t % 2 == 1);
      const auto S = state_cov(in.K, in.theta, in.cost);
      REQUIRE(S);
      // Independent assembly of Q - S K - K'S' + K'RK.
      const Matrix qk = in.cost.Q - in.cost.S * in.K - in.K.transpose() * in.cost.S.transpose() +
                        in.K.transpose() * in.cost.R * in.K;
      const double dual = (*S * qk).trace();
      const double primal = lqr_cost(in.K, in.theta, in.cost);
      CHECK(std::abs(dual - primal) <= 1e-9 * std::abs(primal));
    }
  }

  TEST_CASE("advantage operator") {
    const auto E = advantage_op(kHalf, kScalar, kUnit);
    REQUIRE(E);
    const double p = 1.25 / 0.84;
    CHECK((*E)(0, 0) == doctest::Approx((1.0 + p) * 0.5 - p * 0.9).epsilon(1e-12));
    CHECK(std::abs((*E)(0, 0) + 0.0952381) < 1e-7);

    Rng rng(8);
    const auto in = random_instance(rng, 3, 2, 0.7, true);
    const auto s = solve_dare(in.theta, in.cost);
    const auto Es = advantage_op(s.K, in.theta, in.cost);
    REQUIRE(Es);
    CHECK(Es->norm() <= 1e-8);
  }

  TEST_CASE("cross term: gradient matches finite differences") {
    CostSpec c = CostSpec::identity(2, 1);
    c.Q *= 2.0;
    c.R *= 2.0;
    c.S = Matrix::Constant(2, 1, 0.1);
    PlantSample th{Matrix(2, 2), Matrix(2, 1)};
    th.A << 0.9, 0.2, -0.1, 0.8;
    th.B << 0.5, 1.0;
    Matrix K(1, 2);
    K << 0.2, 0.3;
    const auto g = policy_gradient(K, th, c);
    REQUIRE(g);
    CHECK(rel_err(*g, fd_gradient(K, th, c)) <= 1e-5);
  }

  TEST_CASE("policy gradient closed form and optimality") {
    const auto g = policy_gradient(kHalf, kScalar, kUnit);
    REQUIRE(g);
    const double want = 2.0 * ((1.0 + 1.25 / 0.84) * 0.5 - 0.9 * 1.25 / 0.84) / 0.84;
    CHECK((*g)(0, 0) == doctest::Approx(want).epsilon(1e-12));
    CHECK(std::abs((*g)(0, 0) + 0.2267574) < 1e-7);
    CHECK(rel_err(*g, fd_gradient(kHalf, kScalar, kUnit)) <= 1e-8);

    const auto s = solve_dare(kScalar, kUnit);
    CHECK(policy_gradient(s.K, kScalar, kUnit)->norm() <= 1e-8);
  }

  TEST_CASE("policy gradient on a cart-pole plant") {
    DomainSpec spec;
    const auto th = plant_for_length(spec, 0.37);
    const auto cost = CostSpec::identity(4, 1);
    const auto s = solve_dare(th, cost);
    Rng rng(2);
    for (int t = 0; t < 3; ++t) {
      const Matrix K = s.K + random_matrix(rng, 1, 4, 0.5);
      REQUIRE(std::isfinite(lqr_cost(K, th, cost)));
      const auto g = policy_gradient(K, th, cost);
      const Matrix fd = fd_gradient(K, th, cost, 1e-5);
      CHECK((*g - fd).norm() / fd.norm() <= 1e-5);
    }
  }

  TEST_CASE("plant derivatives vanish along the zero direction") {
    const ThetaDirection zero{Matrix::Zero(1, 1), Matrix::Zero(1, 1)};
    CHECK(dtheta_P(kHalf, kScalar, kUnit, zero)->norm() == 0.0);
    CHECK(dtheta_Sigma(kHalf, kScalar, kUnit, zero)->norm() == 0.0);
    CHECK(dtheta_E(kHalf, kScalar, kUnit, zero)->norm() == 0.0);
  }

  TEST_CASE("plant derivatives match finite differences") {
    const double h = 1e-6;
    const ThetaDirection da{scalar(1.0), scalar(0.0)};
    const auto dP = dtheta_P(kHalf, kScalar, kUnit, da);
    const double fd = ((*cost_to_go(kHalf, shifted(kScalar, da, h), kUnit)) -
                       (*cost_to_go(kHalf, shifted(kScalar, da, -h), kUnit)))(0, 0) /
                      (2.0 * h);
    CHECK(std::abs((*dP)(0, 0) - fd) <= 1e-5 * std::abs(fd));

    Rng rng(13);
    for (int t = 0; t < 10; ++t) {
      const auto nx = static_cast<Eigen::Index>(1 + rng.index(4));
      const auto nu = static_cast<Eigen::Index>(1 + rng.index(2));
      const auto in = random_instance(rng, nx, nu, 0.7, t % 2 == 0);
      const ThetaDirection d{random_matrix(rng, nx, nx), random_matrix(rng, nx, nu)};
      const auto up = shifted(in.theta, d, h);
      const auto dn = shifted(in.theta, d, -h);
      const Matrix fdP = (*cost_to_go(in.K, up, in.cost) - *cost_to_go(in.K, dn, in.cost)) / (2 * h);
      const Matrix fdS = (*state_cov(in.K, up, in.cost) - *state_cov(in.K, dn, in.cost)) / (2 * h);
      const Matrix fdE = (*advantage_op(in.K, up, in.cost) - *advantage_op(in.K, dn, in.cost)) / (2 * h);
      CHECK(rel_err(*dtheta_P(in.K, in.theta, in.cost, d), fdP) <= 1e-5);
      CHECK(rel_err(*dtheta_Sigma(in.K, in.theta, in.cost, d), fdS) <= 1e-5);
      CHECK(rel_err(*dtheta_E(in.K, in.theta, in.cost, d), fdE) <= 1e-5);

      // Product rule for the gradient 2 E Sigma.
      const auto ev = evaluate(in.K, in.theta, in.cost);
      const Matrix dgrad = 2.0 * *dtheta_E(in.K, in.theta, in.cost, d) * ev->Sigma +
                           2.0 * ev->E * *dtheta_Sigma(in.K, in.theta, in.cost, d);
      const Matrix fdG =
          (*policy_gradient(in.K, up, in.cost) - *policy_gradient(in.K, dn, in.cost)) / (2 * h);
      CHECK(rel_err(dgrad, fdG) <= 1e-5);
    }
  }

  TEST_CASE("sample-average cost") {
    const std::vector<PlantSample> one{kScalar};
    CHECK(dr_cost_estimate(kHalf, one, kUnit) == lqr_cost(kHalf, kScalar, kUnit));
    const std::vector<PlantSample> two{scalar_plant(0.3), scalar_plant(0.5)};
    CHECK(dr_cost_estimate(scalar(0.2), two, kUnit) ==
          doctest::Approx(0.5 * (scalar_cost(0.2, 0.3) + scalar_cost(0.2, 0.5))).epsilon(1e-14));
    const std::vector<PlantSample> bad{scalar_plant(0.3), scalar_plant(1.8)};
    CHECK(dr_cost_estimate(scalar(0.2), bad, kUnit) == kInfiniteCost);
    CHECK_THROWS_AS(dr_cost_estimate(kHalf, std::vector<PlantSample>{}, kUnit), ArgumentError);
  }

  TEST_CASE("minibatch gradient") {
    const std::vector<PlantSample> one{kScalar};
    CHECK(rel_err(minibatch_gradient(kHalf, one, kUnit), *policy_gradient(kHalf, kScalar, kUnit)) < 1e-15);
    const std::vector<PlantSample> same{kScalar, kScalar};
    CHECK(rel_err(minibatch_gradient(kHalf, same, kUnit), *policy_gradient(kHalf, kScalar, kUnit)) < 1e-15);

    const std::vector<PlantSample> four{scalar_plant(0.1), scalar_plant(0.4), scalar_plant(0.6),
                                        scalar_plant(0.8, 1.2)};
    double mean = 0.0;
    for (const auto& th : four) mean += (*policy_gradient(kHalf, th, kUnit))(0, 0) / 4.0;
    CHECK(minibatch_gradient(kHalf, four, kUnit)(0, 0) == doctest::Approx(mean).epsilon(1e-14));

    const std::vector<PlantSample> bad{scalar_plant(0.3), scalar_plant(0.4), scalar_plant(2.0)};
    try {
      minibatch_gradient(kHalf, bad, kUnit);
      FAIL("expected InfeasibleError");
    } catch (const InfeasibleError& e) {
      CHECK(e.index() == 2);
    }
    const auto skip = minibatch_gradient_skipping(kHalf, bad, kUnit);
    CHECK(skip.used == 2);
    REQUIRE(skip.skipped.size() == 1);
    CHECK(skip.skipped[0] == 2);
    CHECK(rel_err(skip.gradient,
                  minibatch_gradient(kHalf, std::vector<PlantSample>(bad.begin(), bad.begin() + 2), kUnit)) <
          1e-15);
  }

  TEST_CASE("compensated accumulation") {
    CompensatedScalar s;
    s.add(1e16);
    for (int i = 0; i < 10; ++i) s.add(1.0);
    s.add(-1e16);
    CHECK(s.value() == 10.0);
  }
}
