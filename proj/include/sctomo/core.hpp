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

// Small dense complex-matrix primitives for one and two qubits: Pauli
// algebra, the T-matrix parameterization of density matrices, and the
// state comparison metrics (fidelity, fidelity modulo local z rotations,
// concurrence).
//
// Basis convention: |R> = (1, 0), |L> = (0, 1).  The linear polarizations are
// |H> = (|R> + |L>)/sqrt(2) and |V> = i(|R> - |L>)/sqrt(2).

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace sctomo {

using cplx = std::complex<double>;
using Operator = Eigen::MatrixXcd;
using StateVector = Eigen::VectorXcd;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kDensityTol = 1e-10;

/// Thrown when an input cannot be handled at all (all-zero T parameters,
/// rank-deficient design matrices, zero photon counts).
class DegenerateInput : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline int qubits_for_dim(Eigen::Index dim) {
  if (dim == 2) return 1;
  if (dim == 4) return 2;
  throw std::invalid_argument("unsupported operator dimension " + std::to_string(dim) +
                              " (expected 2 or 4)");
}

inline void require_square_supported(const Operator& op) {
  if (op.rows() != op.cols()) {
    throw std::invalid_argument("operator is not square");
  }
  qubits_for_dim(op.rows());
}

// ---------------------------------------------------------------------------
// Pauli matrices and tensor products

namespace pauli {

inline Operator identity() { return Operator::Identity(2, 2); }

inline Operator x() {
  Operator m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}

inline Operator y() {
  Operator m(2, 2);
  m << 0, cplx(0, -1), cplx(0, 1), 0;
  return m;
}

inline Operator z() {
  Operator m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}

/// sigma_0..sigma_3 = I, X, Y, Z.
inline Operator single(int index) {
  switch (index) {
    case 0: return identity();
    case 1: return x();
    case 2: return y();
    case 3: return z();
    default: throw std::out_of_range("Pauli index must be in [0, 3]");
  }
}

}  // namespace pauli

/// Kronecker product of two single-qubit operators.
inline Operator tensor_product(const Operator& a, const Operator& b) {
  if (a.rows() != 2 || a.cols() != 2 || b.rows() != 2 || b.cols() != 2) {
    throw std::invalid_argument("tensor_product expects two 2x2 operators");
  }
  Operator out(4, 4);
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      out.block(2 * i, 2 * j, 2, 2) = a(i, j) * b;
    }
  }
  return out;
}

/// Basis element Sigma_index of the n-qubit product Pauli basis.  For two
/// qubits index = 4*i + j maps to sigma_i (x) sigma_j (lexicographic order).
inline Operator pauli_basis_element(int n_qubits, int index) {
  if (n_qubits == 1) return pauli::single(index);
  if (n_qubits == 2) return tensor_product(pauli::single(index / 4), pauli::single(index % 4));
  throw std::invalid_argument("n_qubits must be 1 or 2");
}

/// The full basis, cached per qubit count.
inline const std::vector<Operator>& pauli_basis(int n_qubits) {
  static const std::vector<Operator> one = [] {
    std::vector<Operator> b;
    for (int i = 0; i < 4; ++i) b.push_back(pauli_basis_element(1, i));
    return b;
  }();
  static const std::vector<Operator> two = [] {
    std::vector<Operator> b;
    for (int i = 0; i < 16; ++i) b.push_back(pauli_basis_element(2, i));
    return b;
  }();
  if (n_qubits == 1) return one;
  if (n_qubits == 2) return two;
  throw std::invalid_argument("n_qubits must be 1 or 2");
}

// ---------------------------------------------------------------------------
// Domain value types

struct PauliCoefficients {
  int n_qubits = 1;
  Eigen::VectorXd lambda;  // length 4^n_qubits, lambda[0] = 1 when normalized
};

/// Real parameters of the lower-triangular T matrix.  Diagonal entries come
/// first, then real/imaginary pairs of the strictly lower triangle in
/// row-major order.
struct TParams {
  int n_qubits = 1;
  Eigen::VectorXd t;  // length 4 or 16
};

struct PureState {
  int n_qubits = 1;
  StateVector amplitudes;
};

inline int tparam_count(int n_qubits) {
  if (n_qubits == 1) return 4;
  if (n_qubits == 2) return 16;
  throw std::invalid_argument("n_qubits must be 1 or 2");
}

inline double max_abs_entry(const Operator& m) { return m.cwiseAbs().maxCoeff(); }

/// A validated density matrix: Hermitian, unit trace and positive
/// semidefinite to within kDensityTol.
class DensityMatrix {
 public:
  explicit DensityMatrix(Operator op) : op_(std::move(op)) {
    require_square_supported(op_);
    if (max_abs_entry(op_ - op_.adjoint()) > kDensityTol) {
      throw std::invalid_argument("density matrix is not Hermitian");
    }
    if (std::abs(op_.trace() - cplx(1.0)) > kDensityTol) {
      throw std::invalid_argument("density matrix does not have unit trace");
    }
    if (min_eigenvalue(op_) < -kDensityTol) {
      throw std::invalid_argument("density matrix is not positive semidefinite");
    }
  }

  static DensityMatrix from_pure(const StateVector& psi) {
    const double norm2 = psi.squaredNorm();
    if (std::abs(norm2 - 1.0) > 1e-12) {
      throw std::invalid_argument("pure state is not normalized");
    }
    return DensityMatrix(psi * psi.adjoint());
  }

  static DensityMatrix maximally_mixed(int n_qubits) {
    const int d = n_qubits == 1 ? 2 : 4;
    return DensityMatrix(Operator::Identity(d, d) / static_cast<double>(d));
  }

  /// Nearest physical state by eigenvalue clamping and renormalization.  The
  /// input only needs to be Hermitian up to rounding; it is symmetrized first.
  static DensityMatrix project(const Operator& hermitian) {
    require_square_supported(hermitian);
    const Operator sym = 0.5 * (hermitian + hermitian.adjoint());
    Eigen::SelfAdjointEigenSolver<Operator> es(sym);
    Eigen::VectorXd w = es.eigenvalues().cwiseMax(0.0);
    const double total = w.sum();
    if (total <= 0.0) {
      return maximally_mixed(qubits_for_dim(sym.rows()));
    }
    w /= total;
    Operator out = es.eigenvectors() * w.cast<cplx>().asDiagonal() * es.eigenvectors().adjoint();
    return DensityMatrix(0.5 * (out + out.adjoint()));
  }

  const Operator& op() const { return op_; }
  Eigen::Index dim() const { return op_.rows(); }
  int n_qubits() const { return qubits_for_dim(op_.rows()); }
  double purity() const { return (op_ * op_).trace().real(); }

  static double min_eigenvalue(const Operator& h) {
    Eigen::SelfAdjointEigenSolver<Operator> es(0.5 * (h + h.adjoint()), Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
  }

 private:
  Operator op_;
};

// ---------------------------------------------------------------------------
// Pauli decomposition

inline Operator pauli_compose(const PauliCoefficients& coeffs) {
  const auto& basis = pauli_basis(coeffs.n_qubits);
  if (coeffs.lambda.size() != static_cast<Eigen::Index>(basis.size())) {
    throw std::invalid_argument("Pauli coefficient vector has length " +
                                std::to_string(coeffs.lambda.size()) + ", expected " +
                                std::to_string(basis.size()));
  }
  const Eigen::Index d = basis.front().rows();
  Operator out = Operator::Zero(d, d);
  for (std::size_t i = 0; i < basis.size(); ++i) {
    out += coeffs.lambda[static_cast<Eigen::Index>(i)] * basis[i];
  }
  return out / static_cast<double>(d);
}

inline PauliCoefficients pauli_decompose(const Operator& rho) {
  require_square_supported(rho);
  const int n = qubits_for_dim(rho.rows());
  const auto& basis = pauli_basis(n);
  PauliCoefficients out{n, Eigen::VectorXd(static_cast<Eigen::Index>(basis.size()))};
  for (std::size_t i = 0; i < basis.size(); ++i) {
    out.lambda[static_cast<Eigen::Index>(i)] = (rho * basis[i]).trace().real();
  }
  return out;
}

// ---------------------------------------------------------------------------
// T-matrix parameterization

inline Operator t_matrix(const TParams& p) {
  const int expected = tparam_count(p.n_qubits);
  if (p.t.size() != expected) {
    throw std::invalid_argument("TParams length " + std::to_string(p.t.size()) +
                                " does not match " + std::to_string(p.n_qubits) + " qubit(s)");
  }
  const int d = p.n_qubits == 1 ? 2 : 4;
  Operator tm = Operator::Zero(d, d);
  for (int i = 0; i < d; ++i) tm(i, i) = p.t[i];
  int k = d;
  for (int r = 1; r < d; ++r) {
    for (int c = 0; c < r; ++c) {
      tm(r, c) = cplx(p.t[k], p.t[k + 1]);
      k += 2;
    }
  }
  return tm;
}

/// rho = T^dagger T / Tr[T^dagger T]; physical for any nonzero t.
inline DensityMatrix density_from_tparams(const TParams& p) {
  const Operator tm = t_matrix(p);
  const Operator gram = tm.adjoint() * tm;
  const double tr = gram.trace().real();
  if (!(tr > 0.0) || !std::isfinite(tr)) {
    throw DegenerateInput("T parameters are all zero; density matrix undefined");
  }
  Operator rho = gram / tr;
  return DensityMatrix(0.5 * (rho + rho.adjoint()));
}

/// Inverse of density_from_tparams: finds lower-triangular T with real,
/// non-negative diagonal and T^dagger T = rho, normalized to ||t|| = 1.
/// Zero pivots (rank-deficient rho) leave the corresponding column at zero.
inline TParams tparams_from_density(const DensityMatrix& rho) {
  const int n = rho.n_qubits();
  const Eigen::Index d = rho.dim();
  // Reverse the index order, take a lower Cholesky factor L of the reversed
  // matrix, then T = (J L J)^dagger is lower triangular with T^dagger T = rho.
  Operator rev(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) rev(i, j) = rho.op()(d - 1 - i, d - 1 - j);

  Operator chol = Operator::Zero(d, d);
  constexpr double kPivotTol = 1e-14;
  for (Eigen::Index j = 0; j < d; ++j) {
    cplx s = rev(j, j);
    for (Eigen::Index k = 0; k < j; ++k) s -= chol(j, k) * std::conj(chol(j, k));
    const double pivot = s.real();
    if (pivot <= kPivotTol) continue;
    const double root = std::sqrt(pivot);
    chol(j, j) = root;
    for (Eigen::Index i = j + 1; i < d; ++i) {
      cplx v = rev(i, j);
      for (Eigen::Index k = 0; k < j; ++k) v -= chol(i, k) * std::conj(chol(j, k));
      chol(i, j) = v / root;
    }
  }
  Operator upper(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) upper(i, j) = chol(d - 1 - i, d - 1 - j);
  const Operator tm = upper.adjoint();

  TParams out{n, Eigen::VectorXd::Zero(tparam_count(n))};
  for (Eigen::Index i = 0; i < d; ++i) out.t[i] = tm(i, i).real();
  Eigen::Index k = d;
  for (Eigen::Index r = 1; r < d; ++r) {
    for (Eigen::Index c = 0; c < r; ++c) {
      out.t[k] = tm(r, c).real();
      out.t[k + 1] = tm(r, c).imag();
      k += 2;
    }
  }
  const double norm = out.t.norm();
  if (norm > 0.0) out.t /= norm;
  return out;
}

// ---------------------------------------------------------------------------
// Metrics

namespace detail {

// Square roots of PSD eigenvalues.  Values within the eigensolver's
// resolution of zero are zeroed so rank-deficient inputs give exact roots.
inline Eigen::VectorXd psd_roots(const Eigen::VectorXd& eig) {
  const double cut = 64.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, eig.cwiseAbs().maxCoeff());
  return eig.unaryExpr([cut](double v) { return v > cut ? std::sqrt(v) : 0.0; });
}

}  // namespace detail

/// Square root of a Hermitian PSD matrix; eigenvalues at rounding level are
/// treated as zero.
inline Operator sqrt_psd(const Operator& h) {
  Eigen::SelfAdjointEigenSolver<Operator> es(0.5 * (h + h.adjoint()));
  const Eigen::VectorXd roots = detail::psd_roots(es.eigenvalues());
  return es.eigenvectors() * roots.cast<cplx>().asDiagonal() * es.eigenvectors().adjoint();
}

namespace detail {

// (Tr |sqrt(a) sqrt(b)|)^2.  Singular values keep small terms accurate where
// square roots of eigenvalues of sqrt(a) b sqrt(a) would amplify rounding.
inline double fidelity_from_roots(const Operator& sqrt_a, const Operator& sqrt_b) {
  Eigen::JacobiSVD<Operator> svd(sqrt_a * sqrt_b);
  const double s = svd.singularValues().sum();
  return std::clamp(s * s, 0.0, 1.0);
}

}  // namespace detail

inline double fidelity(const DensityMatrix& a, const DensityMatrix& b) {
  if (a.dim() != b.dim()) {
    throw std::invalid_argument("fidelity: dimension mismatch");
  }
  return detail::fidelity_from_roots(sqrt_psd(a.op()), sqrt_psd(b.op()));
}

/// exp(-i theta sigma_z / 2) on each qubit, as a diagonal operator.
inline Operator local_z_rotation(std::span<const double> angles) {
  if (angles.size() == 1) {
    Operator r = Operator::Zero(2, 2);
    r(0, 0) = std::polar(1.0, -angles[0] / 2);
    r(1, 1) = std::polar(1.0, angles[0] / 2);
    return r;
  }
  if (angles.size() == 2) {
    const double a[1] = {angles[0]};
    const double b[1] = {angles[1]};
    return tensor_product(local_z_rotation(a), local_z_rotation(b));
  }
  throw std::invalid_argument("local_z_rotation supports 1 or 2 qubits");
}

struct ZAlignedFidelity {
  double f_max = 0.0;
  std::vector<double> z_angles;
};

/// Largest fidelity between a and R b R^dagger over local z rotations R,
/// found by a 360-point scan per angle and golden-section refinement.
inline ZAlignedFidelity fidelity_up_to_z(const DensityMatrix& a, const DensityMatrix& b,
                                         int n_qubits) {
  if (a.dim() != b.dim()) throw std::invalid_argument("fidelity_up_to_z: dimension mismatch");
  if (n_qubits != a.n_qubits()) {
    throw std::invalid_argument("fidelity_up_to_z: n_qubits does not match the states");
  }
  constexpr int kGrid = 360;
  constexpr double kStep = 2.0 * kPi / kGrid;
  const Operator sqrt_a = sqrt_psd(a.op());
  const Operator sqrt_b = sqrt_psd(b.op());
  const Eigen::Index d = b.dim();

  // Rotates sqrt(b), since sqrt(R b R^dagger) = R sqrt(b) R^dagger.  Entry
  // (k, l) picks up exp(-i (phase_k - phase_l)) with
  // phase_k = sum_q theta_q * s_q(k) / 2 and s_q(k) = +1 for |R>, -1 for |L>.
  auto rotated = [&](const std::vector<double>& th) {
    Eigen::VectorXd phase(d);
    for (Eigen::Index k = 0; k < d; ++k) {
      double p = 0.0;
      for (int q = 0; q < n_qubits; ++q) {
        const int bit = static_cast<int>((k >> (n_qubits - 1 - q)) & 1);
        p += th[static_cast<std::size_t>(q)] * (bit == 0 ? 0.5 : -0.5);
      }
      phase[k] = p;
    }
    Operator out(d, d);
    for (Eigen::Index k = 0; k < d; ++k)
      for (Eigen::Index l = 0; l < d; ++l)
        out(k, l) = sqrt_b(k, l) * std::polar(1.0, -(phase[k] - phase[l]));
    return out;
  };
  auto objective = [&](const std::vector<double>& th) {
    return detail::fidelity_from_roots(sqrt_a, rotated(th));
  };

  std::vector<double> best(static_cast<std::size_t>(n_qubits), 0.0);
  double best_f = objective(best);
  if (n_qubits == 1) {
    for (int i = 1; i < kGrid; ++i) {
      const std::vector<double> th{i * kStep};
      const double f = objective(th);
      if (f > best_f) {
        best_f = f;
        best = th;
      }
    }
  } else {
    // Only the relative phase between |RL> and |LR> components depends on
    // theta1 - theta2, and the |RR>/|LL> coherence on theta1 + theta2, so a
    // full product grid is needed.
    for (int i = 0; i < kGrid; ++i) {
      for (int j = 0; j < kGrid; ++j) {
        if (i == 0 && j == 0) continue;
        const std::vector<double> th{i * kStep, j * kStep};
        const double f = objective(th);
        if (f > best_f) {
          best_f = f;
          best = th;
        }
      }
    }
  }

  // Golden-section refinement, coordinate-wise, within one grid step.
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  for (int sweep = 0; sweep < (n_qubits == 1 ? 1 : 3); ++sweep) {
    for (int q = 0; q < n_qubits; ++q) {
      const auto qi = static_cast<std::size_t>(q);
      double lo = best[qi] - kStep, hi = best[qi] + kStep;
      auto at = [&](double v) {
        std::vector<double> th = best;
        th[qi] = v;
        return objective(th);
      };
      double x1 = hi - inv_phi * (hi - lo), x2 = lo + inv_phi * (hi - lo);
      double f1 = at(x1), f2 = at(x2);
      for (int it = 0; it < 60; ++it) {
        if (f1 < f2) {
          lo = x1;
          x1 = x2;
          f1 = f2;
          x2 = lo + inv_phi * (hi - lo);
          f2 = at(x2);
        } else {
          hi = x2;
          x2 = x1;
          f2 = f1;
          x1 = hi - inv_phi * (hi - lo);
          f1 = at(x1);
        }
      }
      const double cand = 0.5 * (lo + hi);
      const double fc = at(cand);
      if (fc > best_f) {
        best_f = fc;
        best[qi] = cand;
      }
    }
  }
  for (double& th : best) {
    th = std::fmod(th, 2.0 * kPi);
    if (th < 0) th += 2.0 * kPi;
  }
  return {best_f, best};
}

/// Wootters concurrence of a two-qubit state.
inline double concurrence(const DensityMatrix& rho) {
  if (rho.dim() != 4) throw std::invalid_argument("concurrence requires a two-qubit state");
  const Operator yy = tensor_product(pauli::y(), pauli::y());
  // The lambdas are the singular values of sqrt(rho) sqrt(rho~), with
  // sqrt(rho~) = (Y x Y) conj(sqrt(rho)) (Y x Y).
  const Operator s = sqrt_psd(rho.op());
  const Operator s_flipped = yy * s.conjugate() * yy;
  Eigen::JacobiSVD<Operator> svd(s * s_flipped);
  Eigen::VectorXd l = svd.singularValues();
  std::sort(l.data(), l.data() + l.size(), std::greater<>());
  return std::max(0.0, l[0] - l[1] - l[2] - l[3]);
}

// ---------------------------------------------------------------------------
// Named states

namespace states {

inline StateVector ket_r() { return StateVector::Unit(2, 0); }
inline StateVector ket_l() { return StateVector::Unit(2, 1); }
inline StateVector ket_h() { return (ket_r() + ket_l()) / std::sqrt(2.0); }
inline StateVector ket_v() { return cplx(0, 1) * (ket_r() - ket_l()) / std::sqrt(2.0); }

inline StateVector kron(const StateVector& a, const StateVector& b) {
  StateVector out(a.size() * b.size());
  for (Eigen::Index i = 0; i < a.size(); ++i) out.segment(i * b.size(), b.size()) = a[i] * b;
  return out;
}

/// cos(theta/2)|R> + e^{i phi} sin(theta/2)|L>.
inline StateVector bloch(double theta, double phi) {
  StateVector v(2);
  v << std::cos(theta / 2), std::polar(std::sin(theta / 2), phi);
  return v;
}

}  // namespace states

}  // namespace sctomo
