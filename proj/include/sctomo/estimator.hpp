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

// Maximum-likelihood reconstruction of one- and two-qubit states from count
// data, with known rotation angles (standard tomography) or with unknown
// angle magnitudes estimated jointly with the state (self-calibrating
// tomography).
//
// The likelihood is the Gaussian approximation
//   L(t, alpha) = sum_j (n_j - N_j Tr[rho(t) mu_j(alpha)])^2 / (2 max(n_j, floor))
// with rho(t) = T^dagger T / Tr[T^dagger T].

#include <nlohmann/json.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "sctomo/core.hpp"
#include "sctomo/measurement.hpp"
#include "sctomo/optimize.hpp"
#include "sctomo/simulator.hpp"

namespace sctomo {

enum class CountSource { observed, expected };

/// Count data aligned with a setting set.  normalization[j] is N_j of the
/// unitary setting j belongs to, taken as the sum of its port counts.
struct LikelihoodModel {
  SettingSet set;
  std::vector<CountRecord> records;  // in set order
  Eigen::VectorXd observed;
  Eigen::VectorXd normalization;
  double sigma_floor = 1.0;
};

/// Aligns records with the set and derives N_j from complete port groups.
/// Throws std::invalid_argument when a setting has no count, a count names
/// an unknown setting, or a unitary lacks one of its ports.
inline LikelihoodModel make_model(const SettingSet& set, const std::vector<CountRecord>& records,
                                  CountSource source = CountSource::observed, double sigma_floor = 1.0) {
  set.validate();
  if (!(sigma_floor > 0.0)) throw std::invalid_argument("sigma_floor must be positive");
  LikelihoodModel m;
  m.set = set;
  m.sigma_floor = sigma_floor;
  std::map<std::string, const CountRecord*> by_id;
  for (const auto& r : records) {
    if (set.index_of(r.setting_id) < 0) {
      throw std::invalid_argument("count for setting '" + r.setting_id + "' which is not in the setting set");
    }
    if (!by_id.emplace(r.setting_id, &r).second) {
      throw std::invalid_argument("duplicate count for setting '" + r.setting_id + "'");
    }
  }
  const auto n = static_cast<Eigen::Index>(set.settings.size());
  m.observed.resize(n);
  m.normalization.resize(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const auto& id = set.settings[static_cast<std::size_t>(j)].id;
    const auto it = by_id.find(id);
    if (it == by_id.end()) throw std::invalid_argument("no count for setting '" + id + "'");
    m.records.push_back(*it->second);
    if (source == CountSource::expected) {
      if (!it->second->expected) throw std::invalid_argument("setting '" + id + "' has no expected value");
      m.observed[j] = *it->second->expected;
    } else {
      m.observed[j] = static_cast<double>(it->second->count);
    }
  }
  for (const auto& group : unitary_groups(set)) {
    if (!group_is_complete(set, group)) {
      throw std::invalid_argument("unitary of setting '" + set.settings[group.front()].id +
                                  "' is missing complementary ports; N_j cannot be determined");
    }
    double total = 0.0;
    for (std::size_t j : group) total += m.observed[static_cast<Eigen::Index>(j)];
    for (std::size_t j : group) m.normalization[static_cast<Eigen::Index>(j)] = total;
  }
  return m;
}

struct OptimizerConfig {
  int n_starts = 24;
  std::vector<double> alpha_grid = default_alpha_grid();
  double tolerance = 1e-9;
  int max_evals = 50000;
  std::optional<double> purity_prior;  // minimum purity, penalty off when unset
  double purity_weight = 1e4;
  std::uint64_t seed = 0;  // perturbed starting points

  static std::vector<double> default_alpha_grid() {
    std::vector<double> g;
    for (int k = 1; k <= 12; ++k) g.push_back(k * kPi / 12.0);
    return g;
  }

  void validate() const {
    if (n_starts < 1) throw std::invalid_argument("n_starts must be at least 1");
    if (alpha_grid.empty()) throw std::invalid_argument("alpha_grid must not be empty");
    for (double a : alpha_grid)
      if (!(a > 0.0 && a <= kPi)) throw std::invalid_argument("alpha_grid values must lie in (0, pi]");
    if (!(tolerance > 0.0)) throw std::invalid_argument("tolerance must be positive");
    if (max_evals < 1) throw std::invalid_argument("max_evals must be positive");
  }
};

struct StartResult {
  double likelihood = 0.0;
  std::vector<double> alphas;
  bool converged = false;
};

struct ReconstructionResult {
  DensityMatrix rho_hat = DensityMatrix::maximally_mixed(1);
  TParams t_hat;
  std::vector<double> alpha_hat;
  double final_L = 0.0;
  std::vector<StartResult> start_results;
  bool converged = false;
  std::vector<bool> branch_flipped;  // per unknown: the raw optimum had alpha < 0
  std::string ambiguity_note;
  int evaluations = 0;
};

// ---------------------------------------------------------------------------
// Likelihood evaluation

namespace detail {

using Mat2 = Eigen::Matrix2cd;
using Mat4 = Eigen::Matrix4cd;

inline Mat2 single_qubit_mu(const RotationSpec& r, Port port, std::span<const double> alphas) {
  Mat2 p = Mat2::Zero();
  if (port == Port::primary) p(0, 0) = 1.0;
  else p(1, 1) = 1.0;
  if (r.identity) return p;
  const double half = rotation_angle(r, alphas) / 2.0;
  const double c = std::cos(half), s = std::sin(half);
  // U = c I - i s (cos phi X + sin phi Y)
  Mat2 u;
  const cplx off_upper = cplx(0, -1) * s * std::polar(1.0, -r.phi);
  const cplx off_lower = cplx(0, -1) * s * std::polar(1.0, r.phi);
  u << c, off_upper, off_lower, c;
  return u.adjoint() * p * u;
}

/// Expected detection probabilities Tr[rho mu_j(alpha)] for every setting.
inline Eigen::VectorXd probabilities(const Operator& rho, const SettingSet& set, std::span<const double> alphas) {
  Eigen::VectorXd p(static_cast<Eigen::Index>(set.settings.size()));
  if (set.n_qubits == 1) {
    const Mat2 r = rho;
    for (std::size_t j = 0; j < set.settings.size(); ++j) {
      const auto& s = set.settings[j];
      const Mat2 mu = single_qubit_mu(s.per_qubit[0], s.ports[0], alphas);
      p[static_cast<Eigen::Index>(j)] = (r * mu).trace().real();
    }
    return p;
  }
  const Mat4 r = rho;
  for (std::size_t j = 0; j < set.settings.size(); ++j) {
    const auto& s = set.settings[j];
    const Mat2 m1 = single_qubit_mu(s.per_qubit[0], s.ports[0], alphas);
    const Mat2 m2 = single_qubit_mu(s.per_qubit[1], s.ports[1], alphas);
    // Tr[rho (m1 (x) m2)] = sum rho[(a,c),(b,d)] m1[b,a] m2[d,c]
    cplx acc = 0.0;
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b)
        for (int c = 0; c < 2; ++c)
          for (int d = 0; d < 2; ++d) acc += r(2 * a + c, 2 * b + d) * m1(b, a) * m2(d, c);
    p[static_cast<Eigen::Index>(j)] = acc.real();
  }
  return p;
}

/// rho(t) without validation; returns false for an all-zero t.
inline bool density_unchecked(const TParams& t, Operator& rho) {
  const Operator tm = t_matrix(t);
  const Operator gram = tm.adjoint() * tm;
  const double tr = gram.trace().real();
  if (!(tr > 0.0) || !std::isfinite(tr)) return false;
  rho = gram / tr;
  return true;
}

struct Packing {
  int n_qubits = 1;
  int n_t = 4;
  int n_alpha = 0;

  TParams tparams(const Eigen::VectorXd& x) const { return {n_qubits, x.head(n_t)}; }
  std::vector<double> alphas(const Eigen::VectorXd& x) const {
    std::vector<double> a(static_cast<std::size_t>(n_alpha));
    for (int k = 0; k < n_alpha; ++k) a[static_cast<std::size_t>(k)] = x[n_t + k];
    return a;
  }
  Eigen::VectorXd pack(const TParams& t, std::span<const double> alphas) const {
    Eigen::VectorXd x(n_t + n_alpha);
    x.head(n_t) = t.t;
    for (int k = 0; k < n_alpha; ++k) x[n_t + k] = alphas[static_cast<std::size_t>(k)];
    return x;
  }
};

inline Eigen::VectorXd residuals(const LikelihoodModel& model, const Operator& rho, std::span<const double> alphas,
                                 const OptimizerConfig* opt) {
  const Eigen::VectorXd p = probabilities(rho, model.set, alphas);
  const Eigen::Index n = p.size();
  const bool prior = opt && opt->purity_prior;
  Eigen::VectorXd r(n + (prior ? 1 : 0));
  for (Eigen::Index j = 0; j < n; ++j) {
    const double sigma2 = std::max(model.observed[j], model.sigma_floor);
    r[j] = (model.observed[j] - model.normalization[j] * p[j]) / std::sqrt(2.0 * sigma2);
  }
  if (prior) {
    const double purity = (rho * rho).trace().real();
    r[n] = std::sqrt(opt->purity_weight) * std::max(0.0, *opt->purity_prior - purity);
  }
  return r;
}

}  // namespace detail

/// Negative log-likelihood (up to a constant) of the data given rho(t) and
/// the rotation angles.
inline double likelihood(const TParams& t, std::span<const double> alphas, const LikelihoodModel& model) {
  if (static_cast<int>(alphas.size()) != model.set.n_unknowns) {
    throw std::invalid_argument("likelihood: expected " + std::to_string(model.set.n_unknowns) + " angle(s)");
  }
  if (t.n_qubits != model.set.n_qubits) throw std::invalid_argument("likelihood: qubit count mismatch");
  Operator rho;
  if (!detail::density_unchecked(t, rho)) throw DegenerateInput("T parameters are all zero");
  return detail::residuals(model, rho, alphas, nullptr).squaredNorm();
}

/// Central-difference gradient of the likelihood over (t, alphas).
inline Eigen::VectorXd likelihood_gradient_fd(const TParams& t, std::span<const double> alphas,
                                              const LikelihoodModel& model, double h = 1e-6) {
  const detail::Packing pk{model.set.n_qubits, tparam_count(model.set.n_qubits), model.set.n_unknowns};
  const Eigen::VectorXd x0 = pk.pack(t, alphas);
  Eigen::VectorXd g(x0.size());
  for (Eigen::Index k = 0; k < x0.size(); ++k) {
    Eigen::VectorXd xp = x0, xm = x0;
    xp[k] += h;
    xm[k] -= h;
    const auto ap = pk.alphas(xp), am = pk.alphas(xm);
    g[k] = (likelihood(pk.tparams(xp), ap, model) - likelihood(pk.tparams(xm), am, model)) / (2.0 * h);
  }
  return g;
}

// ---------------------------------------------------------------------------
// Linear inversion

/// Least-squares Pauli coefficients from n_j / N_j with lambda_0 fixed at 1.
/// The result may be unphysical.
inline PauliCoefficients linear_inversion(const LikelihoodModel& model, std::span<const double> alphas) {
  const DesignMatrix dm = design_matrix(model.set, alphas);
  const Eigen::Index cols = dm.b.cols();
  if (dm.rank < cols) {
    std::string where = "alpha = (";
    for (std::size_t k = 0; k < alphas.size(); ++k) where += (k ? ", " : "") + format_double(alphas[k]);
    where += ")";
    throw DegenerateInput("design matrix has rank " + std::to_string(dm.rank) + " < " + std::to_string(cols) +
                          " at " + where + "; the state is not determined by these settings");
  }
  const double d = std::pow(2.0, model.set.n_qubits);
  std::vector<Eigen::Index> rows;
  for (Eigen::Index j = 0; j < dm.b.rows(); ++j)
    if (model.normalization[j] > 0.0) rows.push_back(j);
  Eigen::MatrixXd a(static_cast<Eigen::Index>(rows.size()), cols - 1);
  Eigen::VectorXd rhs(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const Eigen::Index j = rows[i];
    const auto ii = static_cast<Eigen::Index>(i);
    a.row(ii) = dm.b.row(j).tail(cols - 1) / d;
    rhs[ii] = model.observed[j] / model.normalization[j] - dm.b(j, 0) / d;
  }
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(a);
  if (cod.rank() < cols - 1) {
    throw DegenerateInput("insufficient non-empty settings for linear inversion");
  }
  PauliCoefficients out{model.set.n_qubits, Eigen::VectorXd(cols)};
  out.lambda[0] = 1.0;
  out.lambda.tail(cols - 1) = cod.solve(rhs);
  return out;
}

/// Physical projection of a linear-inversion estimate.
inline DensityMatrix physical_linear_estimate(const LikelihoodModel& model, std::span<const double> alphas) {
  return DensityMatrix::project(pauli_compose(linear_inversion(model, alphas)));
}

// ---------------------------------------------------------------------------
// Branch handling

/// Conjugates rho by sigma_z on the given qubit (a pi rotation about z).
inline DensityMatrix flip_branch(const DensityMatrix& rho, int qubit) {
  Operator z;
  if (rho.n_qubits() == 1) {
    z = pauli::z();
  } else {
    z = qubit == 0 ? tensor_product(pauli::z(), pauli::identity()) : tensor_product(pauli::identity(), pauli::z());
  }
  const Operator out = z * rho.op() * z;
  return DensityMatrix(0.5 * (out + out.adjoint()));
}

/// Qubits whose rotations consume unknown k.
inline std::vector<int> qubits_using_alpha(const SettingSet& set, int k) {
  std::vector<int> qs;
  for (const auto& s : set.settings)
    for (std::size_t q = 0; q < s.per_qubit.size(); ++q) {
      const auto& r = s.per_qubit[q];
      if (!r.identity && !r.known_alpha && r.alpha_index == k &&
          std::find(qs.begin(), qs.end(), static_cast<int>(q)) == qs.end()) {
        qs.push_back(static_cast<int>(q));
      }
    }
  return qs;
}

namespace detail {

// Reduces every alpha to (-pi, pi]; negative values are mapped to their
// magnitude with rho conjugated by sigma_z on the affected qubits, which
// leaves every count prediction unchanged.
inline void canonicalize(const SettingSet& set, Operator& rho, std::vector<double>& alphas,
                         std::vector<bool>& flipped) {
  flipped.assign(alphas.size(), false);
  DensityMatrix state = DensityMatrix::project(rho);
  for (std::size_t k = 0; k < alphas.size(); ++k) {
    double a = std::remainder(alphas[k], 2.0 * kPi);
    if (a <= -kPi) a += 2.0 * kPi;
    if (a < 0.0) {
      a = -a;
      flipped[k] = true;
      for (int q : qubits_using_alpha(set, static_cast<int>(k))) state = flip_branch(state, q);
    }
    alphas[k] = a;
  }
  rho = state.op();
}

inline bool better(const StartResult& a, const Eigen::VectorXd& xa, const StartResult& b, const Eigen::VectorXd& xb) {
  const double scale = std::max(1.0, std::min(a.likelihood, b.likelihood));
  if (std::abs(a.likelihood - b.likelihood) > 1e-12 * scale) return a.likelihood < b.likelihood;
  for (std::size_t k = 0; k < a.alphas.size(); ++k)
    if (a.alphas[k] != b.alphas[k]) return a.alphas[k] < b.alphas[k];
  for (Eigen::Index k = 0; k < xa.size(); ++k)
    if (xa[k] != xb[k]) return xa[k] < xb[k];
  return false;
}

struct Candidate {
  StartResult summary;
  Eigen::VectorXd x;  // packed (t, raw alphas)
};

class Fitter {
 public:
  Fitter(const LikelihoodModel& model, const OptimizerConfig& opt)
      : model_(model), opt_(opt), pk_{model.set.n_qubits, tparam_count(model.set.n_qubits), model.set.n_unknowns} {}

  const Packing& packing() const { return pk_; }

  Eigen::VectorXd residual(const Eigen::VectorXd& x) const {
    Operator rho;
    const Eigen::Index m = static_cast<Eigen::Index>(model_.set.settings.size()) + (opt_.purity_prior ? 1 : 0);
    if (!density_unchecked(pk_.tparams(x), rho)) {
      return Eigen::VectorXd::Constant(m, 1e150);
    }
    const auto a = pk_.alphas(x);
    return residuals(model_, rho, a, &opt_);
  }

  void normalize(Eigen::VectorXd& x) const {
    const double n = x.head(pk_.n_t).norm();
    if (n > 0.0) x.head(pk_.n_t) /= n;
  }

  optimize::Result local(const Eigen::VectorXd& x0, int budget) {
    optimize::LmOptions lm;
    lm.tolerance = opt_.tolerance;
    lm.max_evals = budget;
    auto res = optimize::levenberg_marquardt([this](const Eigen::VectorXd& x) { return residual(x); }, x0, lm,
                                             [this](Eigen::VectorXd& x) { normalize(x); });
    evaluations += res.evaluations;
    return res;
  }

  optimize::Result simplex(const Eigen::VectorXd& x0, int budget) {
    optimize::NelderMeadOptions nm;
    nm.tolerance = opt_.tolerance * 1e-3;
    nm.max_evals = budget;
    nm.initial_step = 0.02;
    auto res = optimize::nelder_mead([this](const Eigen::VectorXd& x) { return residual(x).squaredNorm(); }, x0, nm,
                                     [this](Eigen::VectorXd& x) { normalize(x); });
    evaluations += res.evaluations;
    return res;
  }

  Candidate summarize(const optimize::Result& r) const {
    Candidate c;
    c.x = r.x;
    c.summary.likelihood = r.cost;
    c.summary.converged = r.converged;
    c.summary.alphas = pk_.alphas(r.x);
    for (double& a : c.summary.alphas) a = std::abs(std::remainder(a, 2.0 * kPi));
    return c;
  }

  int evaluations = 0;

 private:
  const LikelihoodModel& model_;
  const OptimizerConfig& opt_;
  Packing pk_;
};

inline Eigen::VectorXd perturbed_t(const TParams& t, std::uint64_t seed, std::uint64_t start) {
  CounterRng rng(seed, 0xC0FFEEULL, start);
  Eigen::VectorXd out = t.t;
  const double scale = 0.5 * std::max(out.norm(), 1e-3);
  for (Eigen::Index k = 0; k < out.size(); ++k) {
    // Box-Muller
    const double u1 = rng.uniform(), u2 = rng.uniform();
    out[k] += scale * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
  }
  return out;
}

inline TParams seed_t(const LikelihoodModel& model, std::span<const double> alphas, bool& full_rank) {
  try {
    full_rank = true;
    return tparams_from_density(physical_linear_estimate(model, alphas));
  } catch (const DegenerateInput&) {
    full_rank = false;
    return tparams_from_density(DensityMatrix::maximally_mixed(model.set.n_qubits));
  }
}

inline ReconstructionResult finish(const LikelihoodModel& model, Fitter& fitter, const Candidate& best,
                                   std::vector<StartResult> starts) {
  const Packing& pk = fitter.packing();
  ReconstructionResult out;
  Operator rho;
  density_unchecked(pk.tparams(best.x), rho);
  std::vector<double> alphas = pk.alphas(best.x);
  canonicalize(model.set, rho, alphas, out.branch_flipped);
  out.rho_hat = DensityMatrix(rho);
  out.t_hat = tparams_from_density(out.rho_hat);
  out.alpha_hat = alphas;
  out.final_L = best.summary.likelihood;
  out.converged = best.summary.converged;
  out.start_results = std::move(starts);
  out.evaluations = fitter.evaluations;
  if (!alphas.empty()) {
    out.ambiguity_note =
        "alpha_hat reports magnitudes; the data are equally explained by -alpha with the state conjugated by "
        "sigma_z on the affected qubit(s)";
  }
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Maximum-likelihood estimators

/// Standard tomography: all rotation angles known, optimize over t only.
inline ReconstructionResult mle_st(const LikelihoodModel& model, const OptimizerConfig& opt = {}) {
  opt.validate();
  if (model.set.n_unknowns != 0) {
    throw std::invalid_argument("mle_st requires a setting set without unknown angles (n_unknowns = " +
                                std::to_string(model.set.n_unknowns) + ")");
  }
  detail::Fitter fitter(model, opt);
  bool full_rank = true;
  const TParams seed = detail::seed_t(model, {}, full_rank);
  if (!full_rank) throw DegenerateInput("standard tomography settings are not tomographically complete");

  const int budget = opt.max_evals;
  std::vector<StartResult> starts;
  detail::Candidate best;
  bool have_best = false;
  for (int s = 0; s < opt.n_starts; ++s) {
    const Eigen::VectorXd x0 = s == 0 ? seed.t : detail::perturbed_t(seed, opt.seed, static_cast<std::uint64_t>(s));
    const auto cand = fitter.summarize(fitter.local(x0, budget));
    starts.push_back(cand.summary);
    if (!have_best || detail::better(cand.summary, cand.x, best.summary, best.x)) {
      best = cand;
      have_best = true;
    }
  }
  return detail::finish(model, fitter, best, std::move(starts));
}

/// Self-calibrating tomography: joint optimization over t and the unknown
/// angle(s), multi-started over opt.alpha_grid.
inline ReconstructionResult mle_sct(const LikelihoodModel& model, const OptimizerConfig& opt = {}) {
  opt.validate();
  const int n_alpha = model.set.n_unknowns;
  if (n_alpha < 1) throw std::invalid_argument("mle_sct requires at least one unknown angle");
  detail::Fitter fitter(model, opt);
  const auto& pk = fitter.packing();

  const int per_alpha = std::max(1, opt.n_starts / static_cast<int>(opt.alpha_grid.size()));
  const int budget = opt.max_evals;
  std::vector<StartResult> starts;
  std::vector<detail::Candidate> candidates;
  bool any_full_rank = false;
  std::uint64_t start_index = 0;
  for (double a0 : opt.alpha_grid) {
    const std::vector<double> alphas(static_cast<std::size_t>(n_alpha), a0);
    bool full_rank = true;
    const TParams seed = detail::seed_t(model, alphas, full_rank);
    any_full_rank = any_full_rank || full_rank;
    for (int s = 0; s < per_alpha; ++s, ++start_index) {
      TParams t0 = seed;
      if (s > 0) t0.t = detail::perturbed_t(seed, opt.seed, start_index);
      const auto cand = fitter.summarize(fitter.local(pk.pack(t0, alphas), budget));
      starts.push_back(cand.summary);
      candidates.push_back(cand);
    }
  }
  if (!any_full_rank) {
    throw DegenerateInput("design matrix is rank-deficient at every alpha in the start grid");
  }

  std::sort(candidates.begin(), candidates.end(), [](const auto& a, const auto& b) {
    return detail::better(a.summary, a.x, b.summary, b.x);
  });

  // Polish the best few: simplex refinement, a restart seeded from linear
  // inversion at the candidate's angles, and a final Levenberg-Marquardt run.
  const std::size_t n_polish = std::min<std::size_t>(3, candidates.size());
  detail::Candidate best = candidates.front();
  for (std::size_t i = 0; i < n_polish; ++i) {
    const detail::Candidate& c = candidates[i];
    std::vector<detail::Candidate> trials;
    const auto nm = fitter.simplex(c.x, 200 * static_cast<int>(c.x.size()));
    trials.push_back(fitter.summarize(fitter.local(nm.x, budget)));
    bool full_rank = true;
    const TParams reseed = detail::seed_t(model, c.summary.alphas, full_rank);
    if (full_rank) trials.push_back(fitter.summarize(fitter.local(pk.pack(reseed, c.summary.alphas), budget)));
    for (auto& t : trials) {
      if (detail::better(t.summary, t.x, best.summary, best.x)) best = t;
    }
  }
  return detail::finish(model, fitter, best, std::move(starts));
}

// ---------------------------------------------------------------------------
// JSON

inline nlohmann::json to_json(const ReconstructionResult& r) {
  nlohmann::json j;
  j["format_version"] = kFormatVersion;
  j["rho_hat"] = matrix_to_json(r.rho_hat.op());
  j["alpha_hat"] = r.alpha_hat;
  j["t_hat"] = std::vector<double>(r.t_hat.t.data(), r.t_hat.t.data() + r.t_hat.t.size());
  j["final_L"] = r.final_L;
  j["converged"] = r.converged;
  j["start_results"] = nlohmann::json::array();
  for (const auto& s : r.start_results) {
    j["start_results"].push_back({{"L", s.likelihood}, {"alpha", s.alphas}, {"converged", s.converged}});
  }
  j["ambiguity_note"] = r.ambiguity_note;
  j["branch_flipped"] = r.branch_flipped;
  return j;
}

}  // namespace sctomo
