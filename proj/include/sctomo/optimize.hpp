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

#pragma once

// Derivative-free local minimizers used by the estimator: Levenberg-Marquardt
// on a residual vector with a finite-difference Jacobian, and Nelder-Mead on
// a scalar objective.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <vector>

namespace sctomo::optimize {

using Residuals = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;
using Objective = std::function<double(const Eigen::VectorXd&)>;
/// Optional gauge fix applied to every accepted point (must not change the
/// objective).
using Normalizer = std::function<void(Eigen::VectorXd&)>;

struct Result {
  Eigen::VectorXd x;
  double cost = std::numeric_limits<double>::infinity();
  int evaluations = 0;
  int iterations = 0;
  bool converged = false;
};

struct LmOptions {
  double tolerance = 1e-9;  // on the decrease of the cost between accepted steps
  int max_evals = 50000;
  double gradient_tol = 1e-12;
  double fd_step = 1e-7;
};

inline double sum_squares(const Eigen::VectorXd& r) {
  const double c = r.squaredNorm();
  return std::isfinite(c) ? c : std::numeric_limits<double>::infinity();
}

/// Central-difference Jacobian of a residual vector.
inline Eigen::MatrixXd fd_jacobian(const Residuals& f, const Eigen::VectorXd& x, Eigen::Index m,
                                   double step, int& evals) {
  Eigen::MatrixXd jac(m, x.size());
  Eigen::VectorXd xp = x;
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    const double h = step * std::max(1.0, std::abs(x[k]));
    xp[k] = x[k] + h;
    const Eigen::VectorXd rp = f(xp);
    xp[k] = x[k] - h;
    const Eigen::VectorXd rm = f(xp);
    xp[k] = x[k];
    jac.col(k) = (rp - rm) / (2.0 * h);
    evals += 2;
  }
  return jac;
}

/// Minimizes ||f(x)||^2 by Levenberg-Marquardt with Nielsen's damping update.
inline Result levenberg_marquardt(const Residuals& f, Eigen::VectorXd x, const LmOptions& opt,
                                  const Normalizer& normalize = {}) {
  Result res;
  if (normalize) normalize(x);
  Eigen::VectorXd r = f(x);
  res.evaluations = 1;
  double cost = sum_squares(r);
  double mu = -1.0;
  double nu = 2.0;
  int small_decreases = 0;
  while (res.evaluations < opt.max_evals) {
    ++res.iterations;
    const Eigen::MatrixXd jac = fd_jacobian(f, x, r.size(), opt.fd_step, res.evaluations);
    const Eigen::MatrixXd jtj = jac.transpose() * jac;
    const Eigen::VectorXd g = jac.transpose() * r;
    if (g.lpNorm<Eigen::Infinity>() <= opt.gradient_tol || cost == 0.0) {
      res.converged = true;
      break;
    }
    Eigen::VectorXd diag = jtj.diagonal().cwiseMax(1e-12 * std::max(1.0, jtj.diagonal().maxCoeff()));
    if (mu < 0) mu = 1e-3;
    bool accepted = false;
    while (!accepted && res.evaluations < opt.max_evals) {
      Eigen::MatrixXd a = jtj;
      a.diagonal() += mu * diag;
      const Eigen::VectorXd step = a.ldlt().solve(-g);
      Eigen::VectorXd x_new = x + step;
      if (normalize) normalize(x_new);
      const Eigen::VectorXd r_new = f(x_new);
      ++res.evaluations;
      const double cost_new = sum_squares(r_new);
      const double predicted = -(step.dot(g) * 2.0 + step.dot(jtj * step));
      const double gain = predicted > 0 ? (cost - cost_new) / predicted : -1.0;
      if (cost_new < cost && gain > 0) {
        const double decrease = cost - cost_new;
        x = x_new;
        r = r_new;
        cost = cost_new;
        mu *= std::max(1.0 / 3.0, 1.0 - std::pow(2.0 * gain - 1.0, 3));
        nu = 2.0;
        accepted = true;
        // Two consecutive tiny decreases end the run.
        small_decreases = decrease <= opt.tolerance * std::max(1e-6, cost) ? small_decreases + 1 : 0;
        if (small_decreases >= 2 || step.norm() <= 1e-14 * (1.0 + x.norm())) {
          res.converged = true;
        }
      } else {
        mu *= nu;
        nu *= 2.0;
        if (mu > 1e16) {
          // No descent possible from here at machine precision.
          res.converged = true;
          break;
        }
      }
    }
    if (res.converged) break;
  }
  res.x = x;
  res.cost = cost;
  return res;
}

struct NelderMeadOptions {
  double tolerance = 1e-9;  // spread of simplex values
  int max_evals = 50000;
  double initial_step = 0.1;
};

/// Nelder-Mead with dimension-adaptive coefficients (Gao and Han).
inline Result nelder_mead(const Objective& f, const Eigen::VectorXd& x0, const NelderMeadOptions& opt,
                          const Normalizer& normalize = {}) {
  const Eigen::Index n = x0.size();
  const double dn = static_cast<double>(n);
  const double alpha = 1.0, beta = 1.0 + 2.0 / dn, gamma = 0.75 - 1.0 / (2.0 * dn), delta = 1.0 - 1.0 / dn;
  Result res;
  auto eval = [&](Eigen::VectorXd& x) {
    if (normalize) normalize(x);
    ++res.evaluations;
    const double v = f(x);
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
  };
  std::vector<Eigen::VectorXd> pts(static_cast<std::size_t>(n + 1), x0);
  std::vector<double> vals(static_cast<std::size_t>(n + 1));
  vals[0] = eval(pts[0]);
  for (Eigen::Index k = 0; k < n; ++k) {
    auto& p = pts[static_cast<std::size_t>(k + 1)];
    p[k] += opt.initial_step * std::max(1.0, std::abs(p[k]));
    vals[static_cast<std::size_t>(k + 1)] = eval(p);
  }
  std::vector<std::size_t> order(pts.size());
  while (res.evaluations < opt.max_evals) {
    ++res.iterations;
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
    const std::size_t best = order.front(), worst = order.back(), second = order[order.size() - 2];
    if (std::abs(vals[worst] - vals[best]) <= opt.tolerance * (std::abs(vals[best]) + 1e-12)) {
      res.converged = true;
      break;
    }
    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
    for (std::size_t i = 0; i + 1 < order.size(); ++i) centroid += pts[order[i]];
    centroid /= dn;
    Eigen::VectorXd xr = centroid + alpha * (centroid - pts[worst]);
    const double fr = eval(xr);
    if (fr < vals[best]) {
      Eigen::VectorXd xe = centroid + beta * (xr - centroid);
      const double fe = eval(xe);
      if (fe < fr) {
        pts[worst] = xe;
        vals[worst] = fe;
      } else {
        pts[worst] = xr;
        vals[worst] = fr;
      }
    } else if (fr < vals[second]) {
      pts[worst] = xr;
      vals[worst] = fr;
    } else {
      const bool outside = fr < vals[worst];
      Eigen::VectorXd xc = outside ? Eigen::VectorXd(centroid + gamma * (xr - centroid))
                                   : Eigen::VectorXd(centroid - gamma * (centroid - pts[worst]));
      const double fc = eval(xc);
      if (fc < (outside ? fr : vals[worst])) {
        pts[worst] = xc;
        vals[worst] = fc;
      } else {
        for (std::size_t i = 1; i < order.size(); ++i) {
          auto& p = pts[order[i]];
          p = pts[best] + delta * (p - pts[best]);
          vals[order[i]] = eval(p);
        }
      }
    }
  }
  const auto it = std::min_element(vals.begin(), vals.end());
  res.x = pts[static_cast<std::size_t>(it - vals.begin())];
  res.cost = *it;
  return res;
}

}  // namespace sctomo::optimize
