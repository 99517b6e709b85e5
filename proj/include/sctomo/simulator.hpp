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

// Forward model of a photon-counting tomography run: source states, expected
// counts, Poisson sampling from a counter-based generator, and the count/
// config wire formats.

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "sctomo/core.hpp"
#include "sctomo/measurement.hpp"

namespace sctomo {

inline constexpr const char* kFormatVersion = "1.0";

/// Throws when a document's major version is newer than ours.
inline void check_format_version(const std::string& version) {
  const auto dot = version.find('.');
  int major = 0;
  try {
    major = std::stoi(version.substr(0, dot));
  } catch (const std::exception&) {
    throw std::invalid_argument("malformed format_version '" + version + "'");
  }
  if (major > std::stoi(std::string(kFormatVersion).substr(0, 1))) {
    throw std::invalid_argument("format_version " + version + " is newer than supported " + kFormatVersion);
  }
}

// ---------------------------------------------------------------------------
// Counter-based random numbers

/// SplitMix64-style generator whose stream is a pure function of
/// (seed, stream, replicate) and a draw counter, so draws for different
/// settings or replicates never depend on evaluation order.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream, std::uint64_t replicate)
      : key_(mix(mix(mix(seed) ^ (stream * 0xd1b54a32d192ed03ULL)) ^ (replicate * 0x8cb92ba72f3d8dd7ULL))) {}

  std::uint64_t next() { return mix(key_ + (++counter_) * 0x9e3779b97f4a7c15ULL); }

  /// Uniform in the open interval (0, 1).
  double uniform() { return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53; }

  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

/// Poisson variate: inverse transform below mean 30, Hoermann's transformed
/// rejection (PTRS) above.
inline std::uint64_t poisson_sample(double mean, CounterRng& rng) {
  if (!(mean > 0.0)) return 0;
  if (mean < 30.0) {
    const double u = rng.uniform();
    double p = std::exp(-mean);
    double cdf = p;
    std::uint64_t k = 0;
    while (u > cdf && k < 1000) {
      ++k;
      p *= mean / static_cast<double>(k);
      cdf += p;
    }
    return k;
  }
  const double slam = std::sqrt(mean);
  const double loglam = std::log(mean);
  const double b = 0.931 + 2.53 * slam;
  const double a = -0.059 + 0.02483 * b;
  const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
  const double vr = 0.9277 - 3.6224 / (b - 2.0);
  for (;;) {
    const double u = rng.uniform() - 0.5;
    const double v = rng.uniform();
    const double us = 0.5 - std::abs(u);
    const double k = std::floor((2.0 * a / us + b) * u + mean + 0.43);
    if (us >= 0.07 && v <= vr) return static_cast<std::uint64_t>(k);
    if (k < 0.0 || (us < 0.013 && v > us)) continue;
    if (std::log(v) + std::log(inv_alpha) - std::log(a / (us * us) + b) <=
        -mean + k * loglam - std::lgamma(k + 1.0)) {
      return static_cast<std::uint64_t>(k);
    }
  }
}

// ---------------------------------------------------------------------------
// Sources

struct SourceSpec {
  enum class Kind { bloch_pure, two_qubit_ab, explicit_state };

  Kind kind = Kind::bloch_pure;
  double theta = 0.0;
  double phi = 0.0;
  cplx a{1.0, 0.0};
  cplx b{0.0, 0.0};
  std::optional<DensityMatrix> rho;
  double depolarization = 0.0;
  std::string label;

  static SourceSpec bloch(double theta, double phi, std::string label = {}) {
    SourceSpec s;
    s.kind = Kind::bloch_pure;
    s.theta = theta;
    s.phi = phi;
    s.label = std::move(label);
    return s;
  }

  static SourceSpec two_qubit(cplx a, cplx b, std::string label = {}) {
    SourceSpec s;
    s.kind = Kind::two_qubit_ab;
    s.a = a;
    s.b = b;
    s.label = std::move(label);
    return s;
  }

  static SourceSpec explicit_state(DensityMatrix rho, std::string label = {}) {
    SourceSpec s;
    s.kind = Kind::explicit_state;
    s.rho = std::move(rho);
    s.label = std::move(label);
    return s;
  }

  int n_qubits() const {
    switch (kind) {
      case Kind::bloch_pure: return 1;
      case Kind::two_qubit_ab: return 2;
      case Kind::explicit_state: return rho ? rho->n_qubits() : 0;
    }
    return 0;
  }
};

inline DensityMatrix resolve_state(const SourceSpec& source) {
  if (!(source.depolarization >= 0.0 && source.depolarization <= 1.0)) {
    throw std::invalid_argument("depolarization must lie in [0, 1]");
  }
  Operator pure;
  switch (source.kind) {
    case SourceSpec::Kind::bloch_pure: {
      if (source.theta < 0.0 || source.theta > kPi) throw std::invalid_argument("theta must lie in [0, pi]");
      if (source.phi < -kPi || source.phi >= kPi) throw std::invalid_argument("phi must lie in [-pi, pi)");
      const StateVector psi = states::bloch(source.theta, source.phi);
      pure = psi * psi.adjoint();
      break;
    }
    case SourceSpec::Kind::two_qubit_ab: {
      const double norm = std::norm(source.a) + std::norm(source.b);
      if (std::abs(norm - 1.0) > 1e-12) throw std::invalid_argument("|a|^2 + |b|^2 must equal 1");
      const StateVector psi = source.a * states::kron(states::ket_h(), states::ket_h()) +
                              source.b * states::kron(states::ket_v(), states::ket_v());
      pure = psi * psi.adjoint();
      break;
    }
    case SourceSpec::Kind::explicit_state:
      if (!source.rho) throw std::invalid_argument("explicit source has no density matrix");
      pure = source.rho->op();
      break;
  }
  const Eigen::Index d = pure.rows();
  const double p = source.depolarization;
  Operator mixed = (1.0 - p) * pure + p * Operator::Identity(d, d) / static_cast<double>(d);
  return DensityMatrix(0.5 * (mixed + mixed.adjoint()));
}

/// Six axis states plus eight states at polar angle pi/4 or 3pi/4 (latitude
/// +-pi/4) with phi in {+-pi/4, +-3pi/4}.
inline std::vector<SourceSpec> fourteen_state_suite() {
  std::vector<SourceSpec> out{
      SourceSpec::bloch(0.0, 0.0, "R"),          SourceSpec::bloch(kPi, 0.0, "L"),
      SourceSpec::bloch(kPi / 2, 0.0, "H"),      SourceSpec::bloch(kPi / 2, -kPi, "V"),
      SourceSpec::bloch(kPi / 2, kPi / 2, "D"),  SourceSpec::bloch(kPi / 2, -kPi / 2, "A"),
  };
  for (double theta : {kPi / 4, 3 * kPi / 4}) {
    for (double phi : {kPi / 4, -kPi / 4, 3 * kPi / 4, -3 * kPi / 4}) {
      std::ostringstream name;
      name << "th" << (theta < kPi / 2 ? "1" : "3") << "pi/4_ph" << (phi > 0 ? "+" : "-")
           << (std::abs(phi) > kPi / 2 ? "3" : "") << "pi/4";
      out.push_back(SourceSpec::bloch(theta, phi, name.str()));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Experiment configuration and counts

struct ExperimentConfig {
  SourceSpec source;
  SettingSet set;
  std::vector<double> true_alphas;
  double photons_per_setting = 1000.0;
  std::uint64_t seed = 0;
  std::map<std::string, double> multipliers;  // per-setting collection efficiency

  void validate() const {
    set.validate();
    if (static_cast<int>(true_alphas.size()) != set.n_unknowns) {
      throw std::invalid_argument("true_alphas has " + std::to_string(true_alphas.size()) +
                                  " entries, setting set needs " + std::to_string(set.n_unknowns));
    }
    if (!(photons_per_setting > 0.0) || !std::isfinite(photons_per_setting)) {
      throw std::invalid_argument("photons_per_setting must be positive");
    }
    if (source.n_qubits() != set.n_qubits) {
      throw std::invalid_argument("source and setting set disagree on the number of qubits");
    }
    for (const auto& [id, m] : multipliers) {
      if (set.index_of(id) < 0) throw std::invalid_argument("multiplier for unknown setting '" + id + "'");
      if (!(m > 0.0)) throw std::invalid_argument("multiplier for '" + id + "' must be positive");
    }
  }

  double photons_for(const std::string& id) const {
    const auto it = multipliers.find(id);
    return photons_per_setting * (it == multipliers.end() ? 1.0 : it->second);
  }
};

struct CountRecord {
  std::string setting_id;
  std::uint64_t count = 0;
  std::optional<double> expected;

  bool operator==(const CountRecord&) const = default;
};

inline std::vector<CountRecord> expected_counts(const ExperimentConfig& cfg) {
  cfg.validate();
  const DensityMatrix rho = resolve_state(cfg.source);
  std::vector<CountRecord> out;
  out.reserve(cfg.set.settings.size());
  for (std::size_t j = 0; j < cfg.set.settings.size(); ++j) {
    const auto& s = cfg.set.settings[j];
    const double n = cfg.photons_for(s.id);
    const double p = std::clamp((rho.op() * measurement_operator(cfg.set, j, cfg.true_alphas)).trace().real(), 0.0, 1.0);
    const double mean = n * p;
    out.push_back({s.id, static_cast<std::uint64_t>(std::llround(mean)), mean});
  }
  return out;
}

/// Poisson counts; setting j of replicate r draws from stream (seed, j, r).
inline std::vector<CountRecord> sample_counts(const ExperimentConfig& cfg, std::uint64_t replicate = 0) {
  std::vector<CountRecord> out = expected_counts(cfg);
  for (std::size_t j = 0; j < out.size(); ++j) {
    CounterRng rng(cfg.seed, j, replicate);
    out[j].count = poisson_sample(*out[j].expected, rng);
  }
  return out;
}

/// Indices of settings sharing the same per-qubit rotations, i.e. the port
/// outcomes of one physical unitary.  Groups appear in first-seen order.
inline std::vector<std::vector<std::size_t>> unitary_groups(const SettingSet& set) {
  std::vector<std::vector<std::size_t>> groups;
  for (std::size_t j = 0; j < set.settings.size(); ++j) {
    bool placed = false;
    for (auto& g : groups) {
      if (set.settings[g.front()].per_qubit == set.settings[j].per_qubit) {
        g.push_back(j);
        placed = true;
        break;
      }
    }
    if (!placed) groups.push_back({j});
  }
  return groups;
}

/// True when a group holds every port combination exactly once.
inline bool group_is_complete(const SettingSet& set, const std::vector<std::size_t>& group) {
  const std::size_t expected = set.n_qubits == 1 ? 2 : 4;
  if (group.size() != expected) return false;
  std::set<std::vector<Port>> seen;
  for (std::size_t j : group) seen.insert(set.settings[j].ports);
  return seen.size() == expected;
}

struct Normalization {
  double value = 0.0;
  bool degenerate = false;  // no photons in either port
};

/// N_j from the two output ports of one single-qubit unitary.
inline Normalization normalization_from_complement(const SettingSet& set, const CountRecord& primary,
                                                   const CountRecord& complement) {
  const auto ip = set.index_of(primary.setting_id);
  const auto ic = set.index_of(complement.setting_id);
  if (ip < 0 || ic < 0) throw std::invalid_argument("normalization: setting id not in set");
  const auto& sp = set.settings[static_cast<std::size_t>(ip)];
  const auto& sc = set.settings[static_cast<std::size_t>(ic)];
  if (sp.per_qubit != sc.per_qubit || sp.ports.size() != 1 || sc.ports.size() != 1 ||
      sp.ports[0] != Port::primary || sc.ports[0] != Port::complement) {
    throw std::invalid_argument("normalization: '" + primary.setting_id + "' and '" + complement.setting_id +
                                "' are not the two ports of one unitary");
  }
  Normalization n;
  n.value = static_cast<double>(primary.count + complement.count);
  n.degenerate = n.value == 0.0;
  return n;
}

// ---------------------------------------------------------------------------
// Wire formats

inline std::string format_double(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

inline void write_counts_csv(std::ostream& os, const std::vector<CountRecord>& records) {
  os << "# format_version=" << kFormatVersion << "\n";
  os << "setting_id,count,expected\n";
  for (const auto& r : records) {
    os << r.setting_id << "," << r.count << ",";
    if (r.expected) os << format_double(*r.expected);
    os << "\n";
  }
}

inline std::vector<CountRecord> read_counts_csv(std::istream& is) {
  std::vector<CountRecord> out;
  std::string line;
  int line_no = 0;
  bool header_seen = false;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto pos = line.find("format_version=");
      if (pos != std::string::npos) check_format_version(line.substr(pos + 15));
      continue;
    }
    if (!header_seen) {
      if (line.rfind("setting_id", 0) != 0) {
        throw std::invalid_argument("counts line " + std::to_string(line_no) + ": expected header 'setting_id,count,expected'");
      }
      header_seen = true;
      continue;
    }
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (line.back() == ',') fields.emplace_back();
    if (fields.size() < 2 || fields.size() > 3) {
      throw std::invalid_argument("counts line " + std::to_string(line_no) + ": expected 2 or 3 fields");
    }
    CountRecord r;
    r.setting_id = fields[0];
    try {
      std::size_t used = 0;
      const long long c = std::stoll(fields[1], &used);
      if (c < 0 || used != fields[1].size()) throw std::invalid_argument("bad count");
      r.count = static_cast<std::uint64_t>(c);
      if (fields.size() == 3 && !fields[2].empty()) r.expected = std::stod(fields[2]);
    } catch (const std::exception&) {
      throw std::invalid_argument("counts line " + std::to_string(line_no) + ": malformed count or expected value");
    }
    out.push_back(std::move(r));
  }
  if (!header_seen) throw std::invalid_argument("counts file has no header");
  return out;
}

inline nlohmann::json complex_to_json(cplx z) { return nlohmann::json::array({z.real(), z.imag()}); }

inline cplx complex_from_json(const nlohmann::json& j) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (j.is_array() && j.size() == 2) return {j[0].get<double>(), j[1].get<double>()};
  throw std::invalid_argument("expected a number or [re, im] pair");
}

inline nlohmann::json matrix_to_json(const Operator& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(complex_to_json(m(i, j)));
    rows.push_back(row);
  }
  return rows;
}

inline Operator matrix_from_json(const nlohmann::json& rows) {
  const auto d = static_cast<Eigen::Index>(rows.size());
  Operator m(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    if (rows[static_cast<std::size_t>(i)].size() != static_cast<std::size_t>(d)) {
      throw std::invalid_argument("matrix is not square");
    }
    for (Eigen::Index j = 0; j < d; ++j) m(i, j) = complex_from_json(rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]);
  }
  return m;
}

inline nlohmann::json to_json(const SourceSpec& s) {
  nlohmann::json j;
  switch (s.kind) {
    case SourceSpec::Kind::bloch_pure:
      j = {{"kind", "bloch_pure"}, {"theta", s.theta}, {"phi", s.phi}};
      break;
    case SourceSpec::Kind::two_qubit_ab:
      j = {{"kind", "two_qubit_ab"}, {"a", complex_to_json(s.a)}, {"b", complex_to_json(s.b)}};
      break;
    case SourceSpec::Kind::explicit_state:
      j = {{"kind", "explicit"}, {"rho", matrix_to_json(s.rho->op())}};
      break;
  }
  if (s.depolarization != 0.0) j["depolarization"] = s.depolarization;
  if (!s.label.empty()) j["label"] = s.label;
  return j;
}

inline SourceSpec source_from_json(const nlohmann::json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  SourceSpec s;
  if (kind == "bloch_pure") {
    s = SourceSpec::bloch(j.at("theta").get<double>(), j.at("phi").get<double>());
  } else if (kind == "two_qubit_ab") {
    s = SourceSpec::two_qubit(complex_from_json(j.at("a")), complex_from_json(j.at("b")));
  } else if (kind == "explicit") {
    s = SourceSpec::explicit_state(DensityMatrix(matrix_from_json(j.at("rho"))));
  } else {
    throw std::invalid_argument("source.kind must be bloch_pure, two_qubit_ab or explicit (got '" + kind + "')");
  }
  s.depolarization = j.value("depolarization", 0.0);
  s.label = j.value("label", std::string{});
  return s;
}

/// Named protocol sets accepted by configs and the CLI.
inline SettingSet protocol_by_name(const std::string& name) {
  if (name == "sct_1q") return sct_settings_1q();
  if (name == "st_1q") return st_settings_1q();
  if (name == "sct_2q") return sct_settings_2q();
  if (name == "st_2q") return st_settings_2q();
  throw std::invalid_argument("unknown protocol '" + name + "' (expected sct_1q, st_1q, sct_2q or st_2q)");
}

inline nlohmann::json to_json(const ExperimentConfig& cfg) {
  nlohmann::json j;
  j["format_version"] = kFormatVersion;
  j["source"] = to_json(cfg.source);
  j["settings"] = to_json(cfg.set);
  j["true_alphas"] = cfg.true_alphas;
  j["photons_per_setting"] = cfg.photons_per_setting;
  j["seed"] = cfg.seed;
  if (!cfg.multipliers.empty()) j["multipliers"] = cfg.multipliers;
  return j;
}

/// Parses a config document.  Errors name the offending field.  A missing
/// seed is reported through has_seed so callers can draw one.
inline ExperimentConfig config_from_json(const nlohmann::json& j, bool* has_seed = nullptr) {
  auto field = [&](const char* name, auto&& fn) {
    try {
      return fn();
    } catch (const nlohmann::json::exception& e) {
      throw std::invalid_argument(std::string("config field '") + name + "': " + e.what());
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument(std::string("config field '") + name + "': " + e.what());
    }
  };
  if (j.contains("format_version")) check_format_version(j["format_version"].get<std::string>());
  ExperimentConfig cfg;
  cfg.source = field("source", [&] { return source_from_json(j.at("source")); });
  cfg.set = field("settings", [&] {
    if (j.contains("settings")) return setting_set_from_json(j["settings"]);
    return protocol_by_name(j.at("protocol").get<std::string>());
  });
  cfg.true_alphas = field("true_alphas", [&] { return j.value("true_alphas", std::vector<double>{}); });
  cfg.photons_per_setting = field("photons_per_setting", [&] { return j.at("photons_per_setting").get<double>(); });
  if (j.contains("seed")) {
    cfg.seed = field("seed", [&] { return j["seed"].get<std::uint64_t>(); });
    if (has_seed) *has_seed = true;
  } else if (has_seed) {
    *has_seed = false;
  }
  if (j.contains("multipliers")) {
    cfg.multipliers = field("multipliers", [&] { return j["multipliers"].get<std::map<std::string, double>>(); });
  }
  field("photons_per_setting", [&] {
    if (!(cfg.photons_per_setting > 0.0)) throw std::invalid_argument("must be positive");
    return 0;
  });
  cfg.validate();
  return cfg;
}

}  // namespace sctomo
