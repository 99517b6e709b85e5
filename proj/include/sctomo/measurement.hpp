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

// Rotation unitaries about equatorial axes, measurement settings built from
// them, and the protocol setting sets for self-calibrating (SCT) and
// standard (ST) tomography.

#include <nlohmann/json.hpp>

#include <cmath>
#include <limits>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "sctomo/core.hpp"

namespace sctomo {

/// R_phi(nu * alpha) = exp(-i nu alpha (cos phi X + sin phi Y) / 2).
/// The rotation angle is nu times either a known constant or one of the
/// unknown parameters (selected by alpha_index).
struct RotationSpec {
  double phi = 0.0;
  double nu = 1.0;
  bool identity = false;
  std::optional<double> known_alpha;  // set for calibrated (ST) rotations
  int alpha_index = 0;                // which unknown this rotation consumes

  bool operator==(const RotationSpec&) const = default;
};

enum class Port { primary, complement };

inline const char* port_name(Port p) { return p == Port::primary ? "primary" : "complement"; }

inline Port parse_port(const std::string& s) {
  if (s == "primary" || s == "R") return Port::primary;
  if (s == "complement" || s == "L") return Port::complement;
  throw std::invalid_argument("unknown port selector '" + s + "'");
}

struct MeasurementSetting {
  std::string id;
  std::vector<RotationSpec> per_qubit;
  std::vector<Port> ports;
};

struct SettingSet {
  int n_qubits = 1;
  int n_unknowns = 0;
  std::vector<MeasurementSetting> settings;

  /// Throws std::invalid_argument on any structural problem.
  void validate() const {
    if (n_qubits != 1 && n_qubits != 2) throw std::invalid_argument("n_qubits must be 1 or 2");
    if (n_unknowns < 0) throw std::invalid_argument("n_unknowns must be non-negative");
    std::set<std::string> ids;
    for (const auto& s : settings) {
      if (static_cast<int>(s.per_qubit.size()) != n_qubits ||
          static_cast<int>(s.ports.size()) != n_qubits) {
        throw std::invalid_argument("setting '" + s.id + "' does not match n_qubits");
      }
      if (!ids.insert(s.id).second) throw std::invalid_argument("duplicate setting id '" + s.id + "'");
      for (const auto& r : s.per_qubit) {
        if (r.identity || r.known_alpha) continue;
        if (r.alpha_index < 0 || r.alpha_index >= n_unknowns) {
          throw std::invalid_argument("setting '" + s.id + "' references unknown angle " +
                                      std::to_string(r.alpha_index) + " but the set has " +
                                      std::to_string(n_unknowns));
        }
      }
    }
  }

  std::ptrdiff_t index_of(const std::string& id) const {
    for (std::size_t i = 0; i < settings.size(); ++i)
      if (settings[i].id == id) return static_cast<std::ptrdiff_t>(i);
    return -1;
  }
};

// ---------------------------------------------------------------------------

inline double rotation_angle(const RotationSpec& spec, std::span<const double> alphas) {
  if (spec.identity) return 0.0;
  if (spec.known_alpha) return spec.nu * *spec.known_alpha;
  if (spec.alpha_index < 0 || static_cast<std::size_t>(spec.alpha_index) >= alphas.size()) {
    throw std::invalid_argument("rotation references unknown angle " +
                                std::to_string(spec.alpha_index) + " but only " +
                                std::to_string(alphas.size()) + " supplied");
  }
  return spec.nu * alphas[static_cast<std::size_t>(spec.alpha_index)];
}

/// Rotation for an explicit alpha (known_alpha and alpha_index ignored).
inline Operator rotation_unitary(const RotationSpec& spec, double alpha) {
  if (spec.identity) return pauli::identity();
  const double half = spec.nu * alpha / 2.0;
  return std::cos(half) * pauli::identity() -
         cplx(0, 1) * std::sin(half) * (std::cos(spec.phi) * pauli::x() + std::sin(spec.phi) * pauli::y());
}

inline Operator port_projector(Port p) {
  Operator m = Operator::Zero(2, 2);
  if (p == Port::primary) m(0, 0) = 1;
  else m(1, 1) = 1;
  return m;
}

/// mu = U^dagger P U per qubit, tensored over qubits.
inline Operator measurement_operator(const MeasurementSetting& setting, std::span<const double> alphas) {
  if (setting.per_qubit.size() != setting.ports.size() || setting.per_qubit.empty() ||
      setting.per_qubit.size() > 2) {
    throw std::invalid_argument("malformed setting '" + setting.id + "'");
  }
  Operator out;
  for (std::size_t q = 0; q < setting.per_qubit.size(); ++q) {
    const RotationSpec& r = setting.per_qubit[q];
    const double angle = rotation_angle(r, alphas);
    const Operator u = r.identity ? pauli::identity() : rotation_unitary(RotationSpec{r.phi, 1.0}, angle);
    const Operator mu = u.adjoint() * port_projector(setting.ports[q]) * u;
    out = q == 0 ? mu : tensor_product(out, mu);
  }
  return out;
}

/// Checks alphas.size() == set.n_unknowns before building the operator.
inline Operator measurement_operator(const SettingSet& set, std::size_t index,
                                     std::span<const double> alphas) {
  if (static_cast<int>(alphas.size()) != set.n_unknowns) {
    throw std::invalid_argument("expected " + std::to_string(set.n_unknowns) +
                                " rotation angle(s), got " + std::to_string(alphas.size()));
  }
  return measurement_operator(set.settings.at(index), alphas);
}

// ---------------------------------------------------------------------------
// Protocol setting sets

namespace detail {

inline std::vector<RotationSpec> sct_unitaries(int alpha_index) {
  return {
      RotationSpec{0.0, 0.0, true, std::nullopt, alpha_index},
      RotationSpec{0.0, 1.0, false, std::nullopt, alpha_index},
      RotationSpec{kPi / 2, 1.0, false, std::nullopt, alpha_index},
      RotationSpec{kPi, 2.0, false, std::nullopt, alpha_index},
      RotationSpec{3 * kPi / 2, 2.0, false, std::nullopt, alpha_index},
  };
}

inline std::vector<RotationSpec> st_unitaries() {
  return {
      RotationSpec{0.0, 0.0, true, std::nullopt, 0},
      RotationSpec{0.0, 1.0, false, kPi / 2, 0},
      RotationSpec{kPi / 2, 1.0, false, kPi / 2, 0},
  };
}

inline const char* port_tag(Port p) { return p == Port::primary ? "R" : "L"; }

inline SettingSet single_qubit_set(const std::vector<RotationSpec>& unitaries, const std::string& prefix,
                                   int n_unknowns) {
  SettingSet set{1, n_unknowns, {}};
  for (std::size_t u = 0; u < unitaries.size(); ++u) {
    for (Port p : {Port::primary, Port::complement}) {
      set.settings.push_back({prefix + std::to_string(u) + "_" + port_tag(p), {unitaries[u]}, {p}});
    }
  }
  return set;
}

inline SettingSet two_qubit_set(const std::vector<RotationSpec>& arm1, const std::vector<RotationSpec>& arm2,
                                const std::string& prefix, int n_unknowns) {
  SettingSet set{2, n_unknowns, {}};
  for (std::size_t u1 = 0; u1 < arm1.size(); ++u1) {
    for (std::size_t u2 = 0; u2 < arm2.size(); ++u2) {
      for (Port p1 : {Port::primary, Port::complement}) {
        for (Port p2 : {Port::primary, Port::complement}) {
          set.settings.push_back({prefix + std::to_string(u1) + prefix + std::to_string(u2) + "_" +
                                      port_tag(p1) + port_tag(p2),
                                  {arm1[u1], arm2[u2]},
                                  {p1, p2}});
        }
      }
    }
  }
  return set;
}

}  // namespace detail

/// {I, R_0(a), R_pi/2(a), R_pi(2a), R_3pi/2(2a)} x both ports.
inline SettingSet sct_settings_1q() { return detail::single_qubit_set(detail::sct_unitaries(0), "U", 1); }

/// {I, R_0(pi/2), R_pi/2(pi/2)} x both ports.
inline SettingSet st_settings_1q() { return detail::single_qubit_set(detail::st_unitaries(), "S", 0); }

/// All 25 pairs of the single-qubit SCT unitaries, arm k using alpha_k, with
/// all four coincidence port combinations.
inline SettingSet sct_settings_2q() {
  return detail::two_qubit_set(detail::sct_unitaries(0), detail::sct_unitaries(1), "U", 2);
}

inline SettingSet st_settings_2q() {
  return detail::two_qubit_set(detail::st_unitaries(), detail::st_unitaries(), "S", 0);
}

// ---------------------------------------------------------------------------
// Design matrix

inline constexpr double kConditionWarnThreshold = 1e6;

struct DesignMatrix {
  Eigen::MatrixXd b;  // b(j, i) = Tr[mu_j Sigma_i]
  int rank = 0;
  double condition = 0.0;  // 2-norm; infinity when rank-deficient
  bool ill_conditioned = false;
};

inline DesignMatrix design_matrix(const SettingSet& set, std::span<const double> alphas) {
  set.validate();
  const auto& basis = pauli_basis(set.n_qubits);
  DesignMatrix out;
  out.b.resize(static_cast<Eigen::Index>(set.settings.size()), static_cast<Eigen::Index>(basis.size()));
  for (std::size_t j = 0; j < set.settings.size(); ++j) {
    const Operator mu = measurement_operator(set, j, alphas);
    for (std::size_t i = 0; i < basis.size(); ++i) {
      out.b(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = (mu * basis[i]).trace().real();
    }
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(out.b);
  const Eigen::VectorXd& sv = svd.singularValues();
  const double smax = sv.size() ? sv[0] : 0.0;
  const double tol = 1e-10 * std::max(1.0, smax);
  out.rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv[i] > tol) ++out.rank;
  if (out.rank < out.b.cols()) {
    out.condition = std::numeric_limits<double>::infinity();
  } else {
    out.condition = smax / sv[sv.size() - 1];
  }
  out.ill_conditioned = out.condition > kConditionWarnThreshold;
  return out;
}

// ---------------------------------------------------------------------------
// Pulse-driven two-level systems

struct PulseSpec {
  cplx spectral_amplitude;      // integral of the pulse envelope at the detuning
  double dipole_projection = 0;  // d_eg . e
  double hbar = 1.0;
};

struct PulseRotation {
  RotationSpec spec;
  double alpha = 0.0;
  bool degenerate = false;  // zero amplitude: the rotation is the identity
};

/// nu = (2/hbar)|amplitude|, phi = arg(amplitude), alpha = dipole projection.
inline PulseRotation pulse_to_rotation(const PulseSpec& pulse) {
  if (!(pulse.hbar > 0.0)) throw std::invalid_argument("hbar must be positive");
  if (!std::isfinite(pulse.spectral_amplitude.real()) || !std::isfinite(pulse.spectral_amplitude.imag())) {
    throw std::invalid_argument("spectral amplitude must be finite");
  }
  PulseRotation out;
  out.alpha = pulse.dipole_projection;
  const double mag = std::abs(pulse.spectral_amplitude);
  out.spec.nu = 2.0 / pulse.hbar * mag;
  if (mag == 0.0) {
    out.degenerate = true;
    out.spec.phi = 0.0;
    return out;
  }
  double phi = std::arg(pulse.spectral_amplitude);
  if (phi < 0) phi += 2 * kPi;
  out.spec.phi = phi;
  return out;
}

// ---------------------------------------------------------------------------
// JSON manifest

inline nlohmann::json to_json(const SettingSet& set) {
  nlohmann::json doc;
  doc["n_qubits"] = set.n_qubits;
  doc["n_unknowns"] = set.n_unknowns;
  doc["settings"] = nlohmann::json::array();
  for (const auto& s : set.settings) {
    nlohmann::json js;
    js["id"] = s.id;
    js["per_qubit"] = nlohmann::json::array();
    for (const auto& r : s.per_qubit) {
      nlohmann::json jr{{"phi", r.phi}, {"nu", r.nu}, {"identity", r.identity}};
      if (r.known_alpha) jr["known_alpha"] = *r.known_alpha;
      else if (!r.identity) jr["alpha_index"] = r.alpha_index;
      js["per_qubit"].push_back(jr);
    }
    js["ports"] = nlohmann::json::array();
    for (Port p : s.ports) js["ports"].push_back(port_name(p));
    doc["settings"].push_back(js);
  }
  return doc;
}

inline SettingSet setting_set_from_json(const nlohmann::json& doc) {
  SettingSet set;
  try {
    set.n_qubits = doc.at("n_qubits").get<int>();
    set.n_unknowns = doc.at("n_unknowns").get<int>();
    for (const auto& js : doc.at("settings")) {
      MeasurementSetting s;
      s.id = js.at("id").get<std::string>();
      for (std::size_t q = 0; q < js.at("per_qubit").size(); ++q) {
        const auto& jr = js.at("per_qubit")[q];
        RotationSpec r;
        r.phi = jr.at("phi").get<double>();
        r.nu = jr.at("nu").get<double>();
        r.identity = jr.value("identity", false);
        if (jr.contains("known_alpha") && !jr["known_alpha"].is_null()) r.known_alpha = jr["known_alpha"].get<double>();
        r.alpha_index = jr.value("alpha_index", static_cast<int>(set.n_unknowns > 1 ? q : 0));
        s.per_qubit.push_back(r);
      }
      for (const auto& jp : js.at("ports")) s.ports.push_back(parse_port(jp.get<std::string>()));
      set.settings.push_back(std::move(s));
    }
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("settings manifest: ") + e.what());
  }
  set.validate();
  return set;
}

}  // namespace sctomo
