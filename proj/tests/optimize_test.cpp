// Copyright 2026 The sctomo Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "sctomo/optimize.hpp"

#include <gtest/gtest.h>

using namespace sctomo::optimize;

namespace {

Eigen::VectorXd rosenbrock(const Eigen::VectorXd& x) {
  Eigen::VectorXd r(2);
  r << 10 * (x[1] - x[0] * x[0]), 1 - x[0];
  return r;
}

}  // namespace

TEST(LevenbergMarquardt, SolvesRosenbrock) {
  const auto res = levenberg_marquardt(rosenbrock, Eigen::Vector2d(-1.2, 1.0), {});
  EXPECT_TRUE(res.converged);
  EXPECT_NEAR(res.x[0], 1.0, 1e-6);
  EXPECT_NEAR(res.x[1], 1.0, 1e-6);
  EXPECT_LT(res.cost, 1e-12);
}

TEST(LevenbergMarquardt, FitsExponentialDecay) {
  Eigen::VectorXd ts(20), ys(20);
  for (int i = 0; i < 20; ++i) {
    ts[i] = 0.25 * i;
    ys[i] = 3.0 * std::exp(-0.7 * ts[i]) + 0.5;
  }
  auto f = [&](const Eigen::VectorXd& p) -> Eigen::VectorXd {
    return (p[0] * (-p[1] * ts.array()).exp() + p[2] - ys.array()).matrix();
  };
  const auto res = levenberg_marquardt(f, Eigen::Vector3d(1, 0.1, 0), {});
  EXPECT_NEAR(res.x[0], 3.0, 1e-6);
  EXPECT_NEAR(res.x[1], 0.7, 1e-6);
  EXPECT_NEAR(res.x[2], 0.5, 1e-6);
}

TEST(LevenbergMarquardt, RespectsEvaluationBudget) {
  LmOptions opt;
  opt.max_evals = 10;
  const auto res = levenberg_marquardt(rosenbrock, Eigen::Vector2d(-1.2, 1.0), opt);
  EXPECT_LE(res.evaluations, 10 + 2 * 2 + 1);
  EXPECT_FALSE(res.converged);
}

TEST(LevenbergMarquardt, NormalizerKeepsIteratesOnGauge) {
  // Residuals depend only on the direction of x.
  auto f = [](const Eigen::VectorXd& x) -> Eigen::VectorXd {
    const Eigen::VectorXd u = x / x.norm();
    return (u - Eigen::Vector3d(0, 0.6, 0.8)).eval();
  };
  int calls = 0;
  Normalizer unit = [&](Eigen::VectorXd& x) {
    ++calls;
    x /= x.norm();
  };
  const auto res = levenberg_marquardt(f, Eigen::Vector3d(1, 1, 1), {}, unit);
  EXPECT_NEAR(res.x.norm(), 1.0, 1e-12);
  EXPECT_LT((res.x - Eigen::Vector3d(0, 0.6, 0.8)).norm(), 1e-6);
  EXPECT_GT(calls, 0);
}

TEST(FdJacobian, MatchesAnalyticDerivative) {
  int evals = 0;
  const Eigen::Vector2d x(0.3, -0.8);
  const auto j = fd_jacobian(rosenbrock, x, 2, 1e-6, evals);
  EXPECT_EQ(evals, 4);
  EXPECT_NEAR(j(0, 0), -20 * x[0], 1e-6);
  EXPECT_NEAR(j(0, 1), 10, 1e-6);
  EXPECT_NEAR(j(1, 0), -1, 1e-6);
  EXPECT_NEAR(j(1, 1), 0, 1e-6);
}

TEST(NelderMead, MinimizesQuadraticBowl) {
  auto f = [](const Eigen::VectorXd& x) {
    return (x - Eigen::Vector4d(1, -2, 3, 0.5)).squaredNorm() + 0.5 * x[0] * x[1] * 0.1;
  };
  NelderMeadOptions opt;
  opt.tolerance = 1e-14;
  const auto res = nelder_mead(f, Eigen::Vector4d::Zero(), opt);
  EXPECT_TRUE(res.converged);
  // Stationary point of the coupled bowl, solved by hand.
  Eigen::Matrix4d h = 2 * Eigen::Matrix4d::Identity();
  h(0, 1) = h(1, 0) = 0.05;
  const Eigen::Vector4d b = 2 * Eigen::Vector4d(1, -2, 3, 0.5);
  const Eigen::Vector4d xs = h.ldlt().solve(b);
  EXPECT_LT((res.x - xs).norm(), 1e-4);
}

TEST(NelderMead, TreatsNonFiniteAsInfinite) {
  auto f = [](const Eigen::VectorXd& x) {
    if (x[0] < 0) return std::numeric_limits<double>::quiet_NaN();
    return (x[0] - 2) * (x[0] - 2) + x[1] * x[1];
  };
  const auto res = nelder_mead(f, Eigen::Vector2d(0.5, 0.5), {});
  EXPECT_NEAR(res.x[0], 2.0, 1e-3);
  EXPECT_TRUE(std::isfinite(res.cost));
}
