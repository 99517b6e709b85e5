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

// Simulation studies built on the estimator: retardance and noise sweeps
// with fixed-bin histograms, SCT-versus-ST comparisons on two-qubit sources,
// and Poisson-resampling error bars.

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iterator>
#include <numeric>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "sctomo/core.hpp"
#include "sctomo/estimator.hpp"
#include "sctomo/measurement.hpp"
#include "sctomo/simulator.hpp"

namespace sctomo {

struct BlochVector {
  double x = 0, y = 0, z = 0;
  double norm() const { return std::sqrt(x * x + y * y + z * z); }
};

inline BlochVector bloch_coordinates(const DensityMatrix& rho) {
  if (rho.dim() != 2) throw std::invalid_argument("bloch_coordinates requires a single-qubit state");
  const auto c = pauli_decompose(rho.op());
  return {c.lambda[1], c.lambda[2], c.lambda[3]};
}

// ---------------------------------------------------------------------------
// Histograms

struct Histogram {
  std::vector<double> edges;  // size = counts.size() + 1
  std::vector<std::uint64_t> counts;

  std::uint64_t total() const { return std::accumulate(counts.begin(), counts.end(), std::uint64_t{0}); }
};

/// 100 bins of width 0.01 on [0, 1]; 1.0 falls in the last bin.
inline Histogram fidelity_histogram(const std::vector<double>& values) {
  Histogram h;
  for (int i = 0; i <= 100; ++i) h.edges.push_back(i / 100.0);
  h.counts.assign(100, 0);
  for (double v : values) {
    const int bin = std::clamp(static_cast<int>(std::floor(v * 100.0)), 0, 99);
    ++h.counts[static_cast<std::size_t>(bin)];
  }
  return h;
}

/// 128 bins of width pi/128 on (0, pi], each bin half-open on the left.
inline Histogram alpha_histogram(const std::vector<double>& values) {
  Histogram h;
  const double w = kPi / 128.0;
  for (int i = 0; i <= 128; ++i) h.edges.push_back(i * w);
  h.counts.assign(128, 0);
  for (double v : values) {
    const int bin = std::clamp(static_cast<int>(std::ceil(v / w)) - 1, 0, 127);
    ++h.counts[static_cast<std::size_t>(bin)];
  }
  return h;
}

inline void write_histogram_csv(std::ostream& os, const Histogram& h) {
  os << "# format_version=" << kFormatVersion << "\n";
  os << "bin_lo,bin_hi,count\n";
  for (std::size_t i = 0; i < h.counts.size(); ++i) {
    os << format_double(h.edges[i]) << "," << format_double(h.edges[i + 1]) << "," << h.counts[i] << "\n";
  }
}

/// Several named histograms in one long-format table.
inline void write_histograms_csv(std::ostream& os, const std::vector<std::pair<std::string, Histogram>>& named) {
  os << "# format_version=" << kFormatVersion << "\n";
  os << "quantity,bin_lo,bin_hi,count\n";
  for (const auto& [name, h] : named) {
    for (std::size_t i = 0; i < h.counts.size(); ++i) {
      os << name << "," << format_double(h.edges[i]) << "," << format_double(h.edges[i + 1]) << "," << h.counts[i]
         << "\n";
    }
  }
}

// ---------------------------------------------------------------------------
// Sweeps

enum class SweepAxis { alpha, photons };

struct SweepCell {
  double axis_value = 0.0;
  std::size_t state_index = 0;
  std::string state_label;
  std::uint64_t seed = 0;
  double fidelity = 0.0;
  std::vector<double> alpha_hat;
  bool converged = false;
  std::string error;  // non-empty when the estimator threw
};

struct SweepPoint {
  double axis_value = 0.0;
  std::vector<double> fidelities;  // one per (state, seed), cell order
  std::vector<double> alpha_hats;  // first unknown per (state, seed)
  double mean_fidelity = 0.0;
};

struct SweepReport {
  SweepAxis axis = SweepAxis::alpha;
  std::vector<SweepCell> cells;
  std::vector<std::uint64_t> seeds_used;
  std::vector<SweepPoint> points;
  std::vector<Histogram> fidelity_histograms;  // noise sweeps: one per level
  std::vector<Histogram> alpha_histograms;
};

struct NoiseLevel {
  double photons = 1000.0;
  bool noiseless = false;  // use expected counts directly
};

namespace detail {

inline void aggregate(SweepReport& rep) {
  rep.points.clear();
  for (const auto& c : rep.cells) {
    auto it = std::find_if(rep.points.begin(), rep.points.end(),
                           [&](const SweepPoint& p) { return p.axis_value == c.axis_value; });
    if (it == rep.points.end()) {
      rep.points.push_back({c.axis_value, {}, {}, 0.0});
      it = std::prev(rep.points.end());
    }
    it->fidelities.push_back(c.fidelity);
    it->alpha_hats.push_back(c.alpha_hat.empty() ? 0.0 : c.alpha_hat.front());
  }
  for (auto& p : rep.points) {
    p.mean_fidelity =
        p.fidelities.empty() ? 0.0 : std::accumulate(p.fidelities.begin(), p.fidelities.end(), 0.0) / p.fidelities.size();
  }
}

/// One simulate + reconstruct cycle; estimator failures are recorded.
inline SweepCell run_cell(const ExperimentConfig& cfg, bool noiseless, std::uint64_t replicate,
                          const OptimizerConfig& opt) {
  SweepCell cell;
  cell.seed = cfg.seed;
  cell.state_label = cfg.source.label;
  try {
    const DensityMatrix truth = resolve_state(cfg.source);
    const auto records = noiseless ? expected_counts(cfg) : sample_counts(cfg, replicate);
    const auto model = make_model(cfg.set, records, noiseless ? CountSource::expected : CountSource::observed);
    const auto result = cfg.set.n_unknowns > 0 ? mle_sct(model, opt) : mle_st(model, opt);
    cell.fidelity = fidelity_up_to_z(truth, result.rho_hat, truth.n_qubits()).f_max;
    cell.alpha_hat = result.alpha_hat;
    cell.converged = result.converged;
  } catch (const std::exception& e) {
    cell.error = e.what();
  }
  return cell;
}

inline SettingSet default_sct_set(int n_qubits) { return n_qubits == 1 ? sct_settings_1q() : sct_settings_2q(); }

}  // namespace detail

/// SCT fidelity (against the true state, modulo local z rotations) over a
/// grid of retardances.  photons <= 0 selects noiseless expected counts.
inline SweepReport retardance_sweep(const std::vector<SourceSpec>& states, const std::vector<double>& alphas,
                                    double photons, const std::vector<std::uint64_t>& seeds,
                                    const OptimizerConfig& opt = {}) {
  for (double a : alphas)
    if (!(a > 0.0 && a <= kPi)) throw std::invalid_argument("retardance_sweep: alphas must lie in (0, pi]");
  if (states.empty() || alphas.empty() || seeds.empty()) {
    throw std::invalid_argument("retardance_sweep: states, alphas and seeds must be non-empty");
  }
  const bool noiseless = !(photons > 0.0);
  SweepReport rep;
  rep.axis = SweepAxis::alpha;
  rep.seeds_used = seeds;
  for (double a : alphas) {
    for (std::size_t s = 0; s < states.size(); ++s) {
      for (std::uint64_t seed : seeds) {
        ExperimentConfig cfg;
        cfg.source = states[s];
        cfg.set = detail::default_sct_set(states[s].n_qubits());
        cfg.true_alphas.assign(static_cast<std::size_t>(cfg.set.n_unknowns), a);
        cfg.photons_per_setting = noiseless ? 1000.0 : photons;
        cfg.seed = seed;
        SweepCell cell = detail::run_cell(cfg, noiseless, 0, opt);
        cell.axis_value = a;
        cell.state_index = s;
        rep.cells.push_back(std::move(cell));
      }
    }
  }
  detail::aggregate(rep);
  return rep;
}

/// Repeated SCT runs per photon level.  Run r at every level samples
/// replicate r of base_seed.  Noiseless levels use 1000 photons and expected
/// counts, and report their axis value as 0.
inline SweepReport noise_sweep(const SourceSpec& state, double alpha, const std::vector<NoiseLevel>& levels,
                               int runs_per_level, std::uint64_t base_seed = 0, const OptimizerConfig& opt = {}) {
  if (runs_per_level < 1) throw std::invalid_argument("noise_sweep: runs_per_level must be at least 1");
  if (levels.empty()) throw std::invalid_argument("noise_sweep: photon level list is empty");
  for (const auto& l : levels)
    if (!l.noiseless && !(l.photons > 0.0)) throw std::invalid_argument("noise_sweep: photon levels must be positive");
  SweepReport rep;
  rep.axis = SweepAxis::photons;
  for (int r = 0; r < runs_per_level; ++r) rep.seeds_used.push_back(static_cast<std::uint64_t>(r));
  for (const auto& level : levels) {
    std::vector<double> fids, alphas;
    for (int r = 0; r < runs_per_level; ++r) {
      ExperimentConfig cfg;
      cfg.source = state;
      cfg.set = detail::default_sct_set(state.n_qubits());
      cfg.true_alphas.assign(static_cast<std::size_t>(cfg.set.n_unknowns), alpha);
      cfg.photons_per_setting = level.noiseless ? 1000.0 : level.photons;
      cfg.seed = base_seed;
      SweepCell cell = detail::run_cell(cfg, level.noiseless, static_cast<std::uint64_t>(r), opt);
      cell.axis_value = level.noiseless ? 0.0 : level.photons;
      cell.seed = static_cast<std::uint64_t>(r);
      fids.push_back(cell.fidelity);
      alphas.push_back(cell.alpha_hat.empty() ? 0.0 : cell.alpha_hat.front());
      rep.cells.push_back(std::move(cell));
    }
    rep.fidelity_histograms.push_back(fidelity_histogram(fids));
    rep.alpha_histograms.push_back(alpha_histogram(alphas));
  }
  detail::aggregate(rep);
  return rep;
}

inline void write_cells_csv(std::ostream& os, const SweepReport& rep) {
  os << "# format_version=" << kFormatVersion << "\n";
  os << "axis,axis_value,state_index,state_label,seed,fidelity,alpha_hat,converged,error\n";
  for (const auto& c : rep.cells) {
    std::string alphas;
    for (std::size_t k = 0; k < c.alpha_hat.size(); ++k) alphas += (k ? ";" : "") + format_double(c.alpha_hat[k]);
    std::string err = c.error;
    std::replace(err.begin(), err.end(), ',', ';');
    os << (rep.axis == SweepAxis::alpha ? "alpha" : "photons") << "," << format_double(c.axis_value) << ","
       << c.state_index << "," << c.state_label << "," << c.seed << "," << format_double(c.fidelity) << "," << alphas
       << "," << (c.converged ? 1 : 0) << "," << err << "\n";
  }
}

inline nlohmann::json summary_json(const SweepReport& rep) {
  nlohmann::json j;
  j["format_version"] = kFormatVersion;
  j["axis"] = rep.axis == SweepAxis::alpha ? "alpha" : "photons";
  j["seeds_used"] = rep.seeds_used;
  j["points"] = nlohmann::json::array();
  for (const auto& p : rep.points) {
    const auto n = static_cast<double>(p.fidelities.size());
    const double frac98 = std::count_if(p.fidelities.begin(), p.fidelities.end(), [](double f) { return f >= 0.98; }) / n;
    const double frac90 = std::count_if(p.fidelities.begin(), p.fidelities.end(), [](double f) { return f < 0.9; }) / n;
    j["points"].push_back({{"axis_value", p.axis_value},
                           {"mean_fidelity", p.mean_fidelity},
                           {"fraction_fidelity_ge_0.98", frac98},
                           {"fraction_fidelity_lt_0.9", frac90},
                           {"cells", p.fidelities.size()}});
  }
  return j;
}

// ---------------------------------------------------------------------------
// Error bars

enum class Quantity { fidelity, concurrence, alpha };

inline const char* quantity_name(Quantity q) {
  switch (q) {
    case Quantity::fidelity: return "fidelity";
    case Quantity::concurrence: return "concurrence";
    case Quantity::alpha: return "alpha";
  }
  return "?";
}

struct ErrorBars {
  Quantity quantity = Quantity::fidelity;
  int index = 0;  // which unknown, for alpha
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation
  int n_resamples = 0;  // successful resamples used
  int failures = 0;
  bool low_confidence = false;  // fewer than 10 samples
};

inline nlohmann::json to_json(const ErrorBars& e) {
  return {{"quantity", quantity_name(e.quantity)}, {"index", e.index},       {"mean", e.mean},
          {"std", e.std},                          {"n_resamples", e.n_resamples}, {"failures", e.failures},
          {"low_confidence", e.low_confidence}};
}

inline ReconstructionResult reconstruct(const LikelihoodModel& model, const OptimizerConfig& opt) {
  return model.set.n_unknowns > 0 ? mle_sct(model, opt) : mle_st(model, opt);
}

/// Resamples every count as Poisson(n_j), reconstructs each resample and
/// reports mean and sample standard deviation.  Fidelity is measured against
/// the reconstruction of the original data (modulo local z rotations).
inline std::vector<ErrorBars> monte_carlo_errors(const LikelihoodModel& model, const OptimizerConfig& opt,
                                                 int n_resamples, const std::vector<Quantity>& quantities,
                                                 std::uint64_t seed = 0) {
  if (n_resamples < 2) throw std::invalid_argument("monte_carlo_errors: n_resamples must be at least 2");
  std::optional<DensityMatrix> reference;
  if (std::find(quantities.begin(), quantities.end(), Quantity::fidelity) != quantities.end()) {
    reference = reconstruct(model, opt).rho_hat;
  }
  struct Series {
    Quantity q;
    int index;
    std::vector<double> values;
  };
  std::vector<Series> series;
  for (Quantity q : quantities) {
    if (q == Quantity::alpha) {
      for (int k = 0; k < model.set.n_unknowns; ++k) series.push_back({q, k, {}});
    } else {
      if (q == Quantity::concurrence && model.set.n_qubits != 2) {
        throw std::invalid_argument("monte_carlo_errors: concurrence requires two qubits");
      }
      series.push_back({q, 0, {}});
    }
  }
  int failures = 0;
  for (int r = 0; r < n_resamples; ++r) {
    std::vector<CountRecord> records = model.records;
    for (std::size_t j = 0; j < records.size(); ++j) {
      CounterRng rng(seed, j, 0x5EED0000ULL + static_cast<std::uint64_t>(r));
      records[j].count = poisson_sample(model.observed[static_cast<Eigen::Index>(j)], rng);
      records[j].expected.reset();
    }
    try {
      const auto res = reconstruct(make_model(model.set, records, CountSource::observed, model.sigma_floor), opt);
      for (auto& s : series) {
        switch (s.q) {
          case Quantity::fidelity:
            s.values.push_back(fidelity_up_to_z(*reference, res.rho_hat, model.set.n_qubits).f_max);
            break;
          case Quantity::concurrence: s.values.push_back(concurrence(res.rho_hat)); break;
          case Quantity::alpha: s.values.push_back(res.alpha_hat[static_cast<std::size_t>(s.index)]); break;
        }
      }
    } catch (const std::exception&) {
      ++failures;
    }
  }
  std::vector<ErrorBars> out;
  for (const auto& s : series) {
    ErrorBars e;
    e.quantity = s.q;
    e.index = s.index;
    e.n_resamples = static_cast<int>(s.values.size());
    e.failures = failures;
    e.low_confidence = e.n_resamples < 10;
    if (!s.values.empty()) {
      e.mean = std::accumulate(s.values.begin(), s.values.end(), 0.0) / s.values.size();
      double ss = 0.0;
      for (double v : s.values) ss += (v - e.mean) * (v - e.mean);
      e.std = s.values.size() > 1 ? std::sqrt(ss / (s.values.size() - 1)) : 0.0;
    }
    out.push_back(e);
  }
  return out;
}

// ---------------------------------------------------------------------------
// SCT versus ST on one source

struct Comparison {
  double c_sct = 0.0;
  double c_st = 0.0;
  double f_between = 0.0;  // fidelity(rho_st, R rho_sct R^dagger) maximized over local z
  std::vector<double> alpha_hat;
  ReconstructionResult sct;
  ReconstructionResult st;
  std::vector<ErrorBars> sct_errors;
  std::vector<ErrorBars> st_errors;
};

/// Simulates both protocols from one two-qubit source (SCT from replicate 0
/// of seed, ST from replicate 1) and compares the reconstructions.
/// photons <= 0 selects noiseless expected counts.  mc_resamples >= 2 adds
/// concurrence error bars for both sides.
inline Comparison compare_sct_st(const SourceSpec& source, const SettingSet& set_sct, const SettingSet& set_st,
                                 const std::vector<double>& true_alphas, double photons, std::uint64_t seed,
                                 const OptimizerConfig& opt = {}, int mc_resamples = 0) {
  if (source.n_qubits() != 2) throw std::invalid_argument("compare_sct_st requires a two-qubit source");
  const bool noiseless = !(photons > 0.0);
  auto simulate = [&](const SettingSet& set, std::vector<double> alphas, std::uint64_t replicate) {
    ExperimentConfig cfg;
    cfg.source = source;
    cfg.set = set;
    cfg.true_alphas = std::move(alphas);
    cfg.photons_per_setting = noiseless ? 1000.0 : photons;
    cfg.seed = seed;
    const auto records = noiseless ? expected_counts(cfg) : sample_counts(cfg, replicate);
    return make_model(set, records, noiseless ? CountSource::expected : CountSource::observed);
  };
  const auto model_sct = simulate(set_sct, true_alphas, 0);
  const auto model_st = simulate(set_st, {}, 1);
  Comparison out;
  out.sct = mle_sct(model_sct, opt);
  out.st = mle_st(model_st, opt);
  out.c_sct = concurrence(out.sct.rho_hat);
  out.c_st = concurrence(out.st.rho_hat);
  out.f_between = fidelity_up_to_z(out.st.rho_hat, out.sct.rho_hat, 2).f_max;
  out.alpha_hat = out.sct.alpha_hat;
  if (mc_resamples >= 2) {
    out.sct_errors = monte_carlo_errors(model_sct, opt, mc_resamples, {Quantity::concurrence, Quantity::alpha}, seed);
    out.st_errors = monte_carlo_errors(model_st, opt, mc_resamples, {Quantity::concurrence}, seed);
  }
  return out;
}

}  // namespace sctomo
