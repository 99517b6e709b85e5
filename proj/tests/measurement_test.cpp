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

#include "sctomo/measurement.hpp"

#include <gtest/gtest.h>

#include "test_util.hpp"

using namespace sctomo;
using sctomo::testing::max_abs_diff;

namespace {

const cplx I(0, 1);

std::vector<double> one(double a) { return {a}; }

}  // namespace

TEST(RotationUnitary, Examples) {
  EXPECT_LT(max_abs_diff(rotation_unitary({0.0, 1.0}, 0.0), pauli::identity()), 1e-15);
  EXPECT_LT(max_abs_diff(rotation_unitary({0.0, 1.0}, kPi), -I * pauli::x()), 1e-15);
  EXPECT_LT(max_abs_diff(rotation_unitary({kPi / 2, 2.0}, kPi / 2), -I * pauli::y()), 1e-15);
  RotationSpec id{0.3, 2.0, true};
  EXPECT_LT(max_abs_diff(rotation_unitary(id, 1.234), pauli::identity()), 1e-15);
}

TEST(RotationUnitary, UnitaryAndSameAxisComposition) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> phi(0, 2 * kPi), nu(0, 3), alpha(-kPi, kPi);
  for (int trial = 0; trial < 500; ++trial) {
    const RotationSpec s{phi(rng), nu(rng)};
    const double a = alpha(rng);
    const Operator u = rotation_unitary(s, a);
    ASSERT_LT(max_abs_diff(u * u.adjoint(), pauli::identity()), 1e-12);
    ASSERT_LT(max_abs_diff(u * u, rotation_unitary(s, 2 * a)), 1e-12);
  }
}

TEST(MeasurementOperator, Examples) {
  MeasurementSetting idr{"I_R", {RotationSpec{0, 0, true}}, {Port::primary}};
  MeasurementSetting idl{"I_L", {RotationSpec{0, 0, true}}, {Port::complement}};
  Operator r = Operator::Zero(2, 2), l = Operator::Zero(2, 2);
  r(0, 0) = 1;
  l(1, 1) = 1;
  EXPECT_LT(max_abs_diff(measurement_operator(idr, {}), r), 1e-15);
  EXPECT_LT(max_abs_diff(measurement_operator(idl, {}), l), 1e-15);
  // U = (I - iX)/sqrt2, so <R|U = (1, -i)/sqrt2 and
  // U^dagger |R><R| U = (1/2)[[1, -i], [i, 1]] = (I + Y)/2.
  MeasurementSetting x{"X_R", {RotationSpec{0.0, 1.0}}, {Port::primary}};
  Operator expect(2, 2);
  expect << 0.5, -0.5 * I, 0.5 * I, 0.5;
  EXPECT_LT(max_abs_diff(measurement_operator(x, one(kPi / 2)), expect), 1e-15);
  EXPECT_LT(max_abs_diff(expect, (pauli::identity() + pauli::y()) / 2.0), 1e-15);
}

TEST(MeasurementOperator, AlphaCountMismatchThrows) {
  const auto set = sct_settings_1q();
  EXPECT_THROW(measurement_operator(set, 2, std::vector<double>{}), std::invalid_argument);
  EXPECT_THROW(measurement_operator(set, 2, std::vector<double>{0.1, 0.2}), std::invalid_argument);
  EXPECT_THROW(measurement_operator(sct_settings_2q(), 0, one(0.1)), std::invalid_argument);
}

TEST(MeasurementOperator, ProjectorsAndPortCompleteness) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> alpha(0.0, kPi);
  for (const auto& set : {sct_settings_1q(), st_settings_1q(), sct_settings_2q(), st_settings_2q()}) {
    for (int trial = 0; trial < 5; ++trial) {
      std::vector<double> a;
      for (int k = 0; k < set.n_unknowns; ++k) a.push_back(alpha(rng));
      const Eigen::Index d = set.n_qubits == 1 ? 2 : 4;
      std::map<std::string, Operator> sums;
      for (std::size_t j = 0; j < set.settings.size(); ++j) {
        const Operator p = measurement_operator(set, j, a);
        ASSERT_LT(max_abs_diff(p * p, p), 1e-12) << set.settings[j].id;
        ASSERT_LT(max_abs_diff(p, p.adjoint()), 1e-12);
        ASSERT_NEAR(p.trace().real(), 1.0, 1e-12);
        const std::string unitary = set.settings[j].id.substr(0, set.settings[j].id.find('_'));
        auto [it, fresh] = sums.try_emplace(unitary, Operator::Zero(d, d));
        it->second += p;
      }
      for (const auto& [u, s] : sums) ASSERT_LT(max_abs_diff(s, Operator::Identity(d, d)), 1e-12) << u;
    }
  }
}

TEST(Protocols, SctSingleQubit) {
  const auto set = sct_settings_1q();
  EXPECT_EQ(set.settings.size(), 10u);
  EXPECT_EQ(set.n_unknowns, 1);
  EXPECT_TRUE(set.settings[0].per_qubit[0].identity);
  EXPECT_EQ(set.settings[0].ports[0], Port::primary);
  // Unitaries 4 and 5 of the list are double passes about -x and -y.
  for (std::size_t j = 6; j < 10; ++j) {
    const auto& r = set.settings[j].per_qubit[0];
    EXPECT_EQ(r.nu, 2.0);
    EXPECT_NEAR(r.phi, j < 8 ? kPi : 3 * kPi / 2, 1e-15);
  }
  for (std::size_t j = 2; j < 6; ++j) EXPECT_EQ(set.settings[j].per_qubit[0].nu, 1.0);
}

TEST(Protocols, StSingleQubit) {
  const auto set = st_settings_1q();
  EXPECT_EQ(set.settings.size(), 6u);
  EXPECT_EQ(set.n_unknowns, 0);
  EXPECT_TRUE(set.settings[0].per_qubit[0].identity);
  for (std::size_t j = 2; j < 6; ++j) {
    ASSERT_TRUE(set.settings[j].per_qubit[0].known_alpha.has_value());
    EXPECT_EQ(*set.settings[j].per_qubit[0].known_alpha, kPi / 2);
    EXPECT_EQ(rotation_angle(set.settings[j].per_qubit[0], {}), kPi / 2);
  }
}

TEST(Protocols, SctTwoQubitIsLocal) {
  const auto set = sct_settings_2q();
  EXPECT_EQ(set.settings.size(), 100u);
  EXPECT_EQ(set.n_unknowns, 2);
  EXPECT_EQ(set.index_of("U0U0_RR"), 0);
  for (const auto& s : set.settings) {
    EXPECT_EQ(s.per_qubit[0].alpha_index, 0);
    EXPECT_EQ(s.per_qubit[1].alpha_index, 1);
  }
  // Moving alpha_2 leaves every setting whose arm-2 unitary is the identity untouched.
  for (std::size_t j = 0; j < set.settings.size(); ++j) {
    if (!set.settings[j].per_qubit[1].identity) continue;
    EXPECT_LT(max_abs_diff(measurement_operator(set, j, std::vector<double>{0.4, 0.1}),
                           measurement_operator(set, j, std::vector<double>{0.4, 2.9})),
              1e-15);
  }
}

TEST(Protocols, StTwoQubit) {
  const auto set = st_settings_2q();
  EXPECT_EQ(set.settings.size(), 36u);
  EXPECT_EQ(set.n_unknowns, 0);
  EXPECT_GE(set.index_of("S0S0_RR"), 0);
  for (const auto& s : set.settings)
    for (const auto& r : s.per_qubit)
      if (!r.identity) EXPECT_EQ(r.known_alpha.value_or(-1), kPi / 2);
}

TEST(DesignMatrix, RankAndConditioning) {
  const auto good = design_matrix(sct_settings_1q(), one(kPi / 6));
  EXPECT_EQ(good.b.rows(), 10);
  EXPECT_EQ(good.b.cols(), 4);
  EXPECT_EQ(good.rank, 4);
  EXPECT_FALSE(good.ill_conditioned);
  // At alpha = 0 every unitary is the identity: only the I and Z columns survive.
  const auto zero = design_matrix(sct_settings_1q(), one(0.0));
  EXPECT_LT(zero.rank, 4);
  EXPECT_EQ(zero.rank, 2);
  EXPECT_TRUE(std::isinf(zero.condition));
  EXPECT_TRUE(zero.ill_conditioned);
  EXPECT_EQ(design_matrix(st_settings_1q(), {}).rank, 4);
  // The x and y columns scale linearly with alpha, so the condition number
  // grows as 1/alpha and crosses the warning threshold just below 1e-6.
  const double c2 = design_matrix(sct_settings_1q(), one(1e-2)).condition;
  const double c4 = design_matrix(sct_settings_1q(), one(1e-4)).condition;
  EXPECT_NEAR(c4 / c2, 100.0, 1.0);
  EXPECT_FALSE(design_matrix(sct_settings_1q(), one(1e-4)).ill_conditioned);
  EXPECT_TRUE(design_matrix(sct_settings_1q(), one(1e-7)).ill_conditioned);
  EXPECT_EQ(design_matrix(sct_settings_2q(), std::vector<double>{kPi / 4, kPi / 3}).rank, 16);
}

TEST(SignAmbiguity, NegatedAlphaEqualsZConjugatedState) {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> alpha(-kPi, kPi);
  const auto set = sct_settings_1q();
  for (int trial = 0; trial < 200; ++trial) {
    const DensityMatrix rho = sctomo::testing::random_density(rng, 1);
    const Operator flipped = pauli::z() * rho.op() * pauli::z();
    // Z rho Z keeps lambda_z and negates both transverse coefficients.
    const auto c = pauli_decompose(rho.op()), cf = pauli_decompose(flipped);
    ASSERT_NEAR(cf.lambda[1], -c.lambda[1], 1e-14);
    ASSERT_NEAR(cf.lambda[2], -c.lambda[2], 1e-14);
    ASSERT_NEAR(cf.lambda[3], c.lambda[3], 1e-14);
    const double a = alpha(rng);
    for (std::size_t j = 0; j < set.settings.size(); ++j) {
      const double p_minus = (measurement_operator(set, j, one(-a)) * rho.op()).trace().real();
      const double p_flip = (measurement_operator(set, j, one(a)) * flipped).trace().real();
      ASSERT_NEAR(p_minus, p_flip, 1e-12);
    }
  }
}

TEST(PulseMapping, Examples) {
  const auto r = pulse_to_rotation({cplx(0.5, 0.0), 0.3, 1.0});
  EXPECT_NEAR(r.spec.nu, 1.0, 1e-15);
  EXPECT_NEAR(r.spec.phi, 0.0, 1e-15);
  EXPECT_NEAR(r.alpha, 0.3, 1e-15);
  EXPECT_FALSE(r.degenerate);
  EXPECT_NEAR(pulse_to_rotation({cplx(0.0, 0.5), 0.3, 1.0}).spec.phi, kPi / 2, 1e-15);
  const auto zero = pulse_to_rotation({cplx(0.0, 0.0), 0.3, 1.0});
  EXPECT_TRUE(zero.degenerate);
  EXPECT_EQ(zero.spec.nu, 0.0);
  EXPECT_LT(max_abs_diff(rotation_unitary(zero.spec, zero.alpha), pauli::identity()), 1e-15);
  EXPECT_THROW(pulse_to_rotation({cplx(1.0, 0.0), 0.3, 0.0}), std::invalid_argument);
}

TEST(PulseMapping, ReproducesDrivenUnitary) {
  std::mt19937_64 rng(14);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 100; ++trial) {
    const PulseSpec p{cplx(g(rng), g(rng)), g(rng), 0.5 + std::abs(g(rng))};
    const auto r = pulse_to_rotation(p);
    const double nu = 2.0 / p.hbar * std::abs(p.spectral_amplitude);
    const double ph = std::arg(p.spectral_amplitude);
    // exp(-i nu alpha (cos phi X + sin phi Y) / 2) evaluated directly.
    const Operator n = std::cos(ph) * pauli::x() + std::sin(ph) * pauli::y();
    const double h = nu * p.dipole_projection / 2;
    const Operator expect = std::cos(h) * pauli::identity() - I * std::sin(h) * n;
    ASSERT_LT(max_abs_diff(rotation_unitary(r.spec, r.alpha), expect), 1e-12);
    ASSERT_GE(r.spec.phi, 0.0);
    ASSERT_LT(r.spec.phi, 2 * kPi);
  }
}

TEST(SettingManifest, JsonRoundTrip) {
  for (const auto& set : {sct_settings_1q(), st_settings_1q(), sct_settings_2q(), st_settings_2q()}) {
    const auto back = setting_set_from_json(to_json(set));
    ASSERT_EQ(back.n_qubits, set.n_qubits);
    ASSERT_EQ(back.n_unknowns, set.n_unknowns);
    ASSERT_EQ(back.settings.size(), set.settings.size());
    for (std::size_t j = 0; j < set.settings.size(); ++j) {
      EXPECT_EQ(back.settings[j].id, set.settings[j].id);
      EXPECT_EQ(back.settings[j].per_qubit, set.settings[j].per_qubit);
      EXPECT_EQ(back.settings[j].ports, set.settings[j].ports);
    }
  }
}

TEST(SettingManifest, RejectsMalformedDocuments) {
  auto doc = to_json(sct_settings_1q());
  doc["settings"][0]["ports"][0] = "sideways";
  EXPECT_THROW(setting_set_from_json(doc), std::invalid_argument);
  auto dup = to_json(sct_settings_1q());
  dup["settings"][1]["id"] = dup["settings"][0]["id"];
  EXPECT_THROW(setting_set_from_json(dup), std::invalid_argument);
  auto missing = to_json(sct_settings_1q());
  missing.erase("n_qubits");
  EXPECT_THROW(setting_set_from_json(missing), std::invalid_argument);
  auto bad_index = to_json(sct_settings_1q());
  bad_index["settings"][2]["per_qubit"][0]["alpha_index"] = 3;
  EXPECT_THROW(setting_set_from_json(bad_index), std::invalid_argument);
}
