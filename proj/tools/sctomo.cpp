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

// sctomo: simulate counting experiments, reconstruct states from count files
// and run the retardance / noise studies.
//
//   sctomo settings sct_1q --out DIR
//   sctomo simulate --config cfg.json --out DIR [--seed N] [--batch14] [--noiseless]
//   sctomo reconstruct --counts counts.csv --settings settings.json --mode sct --out DIR [--mc N]
//   sctomo sweep noise --config sweep.json --out DIR [--photons N ...] [--runs N]
//
// Exit codes: 0 ok, 2 input error, 3 estimator did not converge (the result
// is still written).

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "sctomo/sctomo.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitNotConverged = 3;

struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void write_atomic(const fs::path& path, const std::string& content) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    os << content;
    if (!os.flush()) throw std::runtime_error("write to " + tmp.string() + " failed");
  }
  fs::rename(tmp, path);
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

std::string slurp(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw InputError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

json read_json(const std::string& path) {
  try {
    return json::parse(slurp(path));
  } catch (const json::parse_error& e) {
    throw InputError(path + ": " + e.what());
  }
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw InputError("cannot create output directory '" + dir + "': " + ec.message());
}

std::uint64_t entropy_seed() {
  std::random_device rd;
  return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

json manifest(const std::string& command, const std::string& config_path, const std::string& out_dir,
              std::uint64_t seed) {
  return {{"command", command},
          {"config_path", config_path},
          {"output_dir", out_dir},
          {"seed", seed},
          {"format_version", sctomo::kFormatVersion}};
}

json settings_manifest(const sctomo::SettingSet& set) {
  json j = sctomo::to_json(set);
  j["format_version"] = sctomo::kFormatVersion;
  return j;
}

std::string counts_text(const std::vector<sctomo::CountRecord>& records) {
  std::ostringstream os;
  sctomo::write_counts_csv(os, records);
  return os.str();
}

std::vector<double> parse_list(const std::string& csv) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw InputError("malformed number '" + item + "' in list");
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// settings

struct SettingsArgs {
  std::string protocol;
  std::string out = ".";
};

int cmd_settings(const SettingsArgs& a) {
  const auto set = sctomo::protocol_by_name(a.protocol);
  ensure_dir(a.out);
  write_atomic(fs::path(a.out) / "settings.json", dump(settings_manifest(set)));
  return kExitOk;
}

// ---------------------------------------------------------------------------
// simulate

struct SimulateArgs {
  std::string config;
  std::string out = ".";
  std::optional<std::uint64_t> seed;
  bool batch14 = false;
  bool noiseless = false;
};

int cmd_simulate(const SimulateArgs& a) {
  const json doc = read_json(a.config);
  bool has_seed = false;
  sctomo::ExperimentConfig cfg = sctomo::config_from_json(doc, &has_seed);
  if (a.seed) cfg.seed = *a.seed;
  else if (!has_seed) cfg.seed = entropy_seed();
  ensure_dir(a.out);
  const fs::path out(a.out);

  auto simulate = [&](const sctomo::ExperimentConfig& c, std::uint64_t replicate) {
    return a.noiseless ? sctomo::expected_counts(c) : sctomo::sample_counts(c, replicate);
  };

  json man = manifest("simulate", a.config, a.out, cfg.seed);
  man["noiseless"] = a.noiseless;
  write_atomic(out / "settings.json", dump(settings_manifest(cfg.set)));
  if (a.batch14) {
    if (cfg.set.n_qubits != 1) throw InputError("--batch14 requires a single-qubit setting set");
    json index = json::array();
    const auto suite = sctomo::fourteen_state_suite();
    for (std::size_t i = 0; i < suite.size(); ++i) {
      sctomo::ExperimentConfig c = cfg;
      c.source = suite[i];
      std::ostringstream name;
      name << "counts_" << std::setw(2) << std::setfill('0') << i << ".csv";
      write_atomic(out / name.str(), counts_text(simulate(c, i)));
      index.push_back({{"file", name.str()}, {"replicate", i}, {"source", sctomo::to_json(c.source)}});
    }
    man["batch"] = index;
  } else {
    write_atomic(out / "counts.csv", counts_text(simulate(cfg, 0)));
  }
  man["config"] = sctomo::to_json(cfg);
  write_atomic(out / "manifest.json", dump(man));
  return kExitOk;
}

// ---------------------------------------------------------------------------
// reconstruct

struct OptimizerArgs {
  std::optional<int> starts;
  std::string alpha_grid;
  std::optional<double> purity_prior;
  std::optional<int> max_evals;
  std::uint64_t seed = 0;

  sctomo::OptimizerConfig config() const {
    sctomo::OptimizerConfig opt;
    if (starts) opt.n_starts = *starts;
    if (!alpha_grid.empty()) opt.alpha_grid = parse_list(alpha_grid);
    if (max_evals) opt.max_evals = *max_evals;
    opt.purity_prior = purity_prior;
    opt.seed = seed;
    opt.validate();
    return opt;
  }
};

struct ReconstructArgs {
  std::string counts;
  std::string settings;
  std::string mode = "sct";
  std::string out = ".";
  int mc = 0;
  bool use_expected = false;
  OptimizerArgs opt;
};

int cmd_reconstruct(const ReconstructArgs& a) {
  const json set_doc = read_json(a.settings);
  if (set_doc.contains("format_version")) sctomo::check_format_version(set_doc["format_version"].get<std::string>());
  const sctomo::SettingSet set = sctomo::setting_set_from_json(set_doc);
  if (a.mode == "st" && set.n_unknowns != 0) {
    throw InputError("mode st requires a setting set without unknown angles (n_unknowns = " +
                     std::to_string(set.n_unknowns) + ")");
  }
  if (a.mode == "sct" && set.n_unknowns == 0) throw InputError("mode sct requires at least one unknown angle");

  std::istringstream counts_stream(slurp(a.counts));
  const auto records = sctomo::read_counts_csv(counts_stream);
  const auto model = sctomo::make_model(set, records, a.use_expected ? sctomo::CountSource::expected
                                                                     : sctomo::CountSource::observed);
  const auto opt = a.opt.config();
  const auto result = a.mode == "sct" ? sctomo::mle_sct(model, opt) : sctomo::mle_st(model, opt);

  json j = sctomo::to_json(result);
  if (set.n_qubits == 2) j["concurrence"] = sctomo::concurrence(result.rho_hat);
  if (a.mc != 0) {
    std::vector<sctomo::Quantity> qs{sctomo::Quantity::fidelity};
    if (set.n_unknowns > 0) qs.push_back(sctomo::Quantity::alpha);
    if (set.n_qubits == 2) qs.push_back(sctomo::Quantity::concurrence);
    j["error_bars"] = json::array();
    for (const auto& e : sctomo::monte_carlo_errors(model, opt, a.mc, qs, a.opt.seed)) {
      j["error_bars"].push_back(sctomo::to_json(e));
    }
  }
  ensure_dir(a.out);
  write_atomic(fs::path(a.out) / "result.json", dump(j));
  json man = manifest("reconstruct", a.settings, a.out, a.opt.seed);
  man["counts_path"] = a.counts;
  man["mode"] = a.mode;
  write_atomic(fs::path(a.out) / "manifest.json", dump(man));
  return result.converged ? kExitOk : kExitNotConverged;
}

// ---------------------------------------------------------------------------
// sweep

struct SweepArgs {
  std::string kind;
  std::string config;
  std::string out = ".";
  std::vector<double> photons;
  std::optional<int> runs;
  std::optional<std::uint64_t> seed;
};

sctomo::OptimizerConfig optimizer_from_json(const json& doc) {
  sctomo::OptimizerConfig opt;
  if (!doc.contains("optimizer")) return opt;
  const json& j = doc["optimizer"];
  opt.n_starts = j.value("n_starts", opt.n_starts);
  opt.alpha_grid = j.value("alpha_grid", opt.alpha_grid);
  opt.tolerance = j.value("tolerance", opt.tolerance);
  opt.max_evals = j.value("max_evals", opt.max_evals);
  if (j.contains("purity_prior")) opt.purity_prior = j["purity_prior"].get<double>();
  opt.seed = j.value("seed", opt.seed);
  opt.validate();
  return opt;
}

std::string level_name(double photons) {
  std::ostringstream os;
  os << photons;
  return os.str();
}

int cmd_sweep(const SweepArgs& a) {
  const json doc = read_json(a.config);
  if (doc.contains("format_version")) sctomo::check_format_version(doc["format_version"].get<std::string>());
  const auto opt = optimizer_from_json(doc);
  ensure_dir(a.out);
  const fs::path out(a.out);
  sctomo::SweepReport rep;
  std::uint64_t seed = 0;
  json man = manifest("sweep " + a.kind, a.config, a.out, 0);

  if (a.kind == "retardance") {
    std::vector<sctomo::SourceSpec> states;
    if (!doc.contains("states") || doc["states"] == "suite14") {
      states = sctomo::fourteen_state_suite();
    } else {
      for (const auto& s : doc["states"]) states.push_back(sctomo::source_from_json(s));
    }
    const auto alphas = doc.at("alphas").get<std::vector<double>>();
    double photons = doc.value("photons", 1000.0);
    if (!a.photons.empty()) photons = a.photons.front();
    std::vector<std::uint64_t> seeds = doc.value("seeds", std::vector<std::uint64_t>{0});
    if (a.runs) {
      seeds.clear();
      for (int r = 0; r < *a.runs; ++r) seeds.push_back(static_cast<std::uint64_t>(r));
    }
    rep = sctomo::retardance_sweep(states, alphas, photons, seeds, opt);
  } else {
    const auto source = sctomo::source_from_json(doc.at("source"));
    const double alpha = doc.at("alpha").get<double>();
    std::vector<double> photons = a.photons.empty() ? doc.at("photon_levels").get<std::vector<double>>() : a.photons;
    if (photons.empty() && !doc.value("noiseless_level", false)) throw InputError("photon level list is empty");
    std::vector<sctomo::NoiseLevel> levels;
    for (double p : photons) levels.push_back({p, false});
    if (doc.value("noiseless_level", false)) levels.push_back({1000.0, true});
    const int runs = a.runs ? *a.runs : doc.value("runs", 100);
    seed = a.seed ? *a.seed : doc.value("seed", std::uint64_t{0});
    rep = sctomo::noise_sweep(source, alpha, levels, runs, seed, opt);
    json files = json::array();
    for (std::size_t i = 0; i < levels.size(); ++i) {
      const std::string name =
          "histogram_" + (levels[i].noiseless ? std::string("noiseless") : level_name(levels[i].photons)) + ".csv";
      std::ostringstream os;
      sctomo::write_histograms_csv(os, {{"fidelity", rep.fidelity_histograms[i]}, {"alpha", rep.alpha_histograms[i]}});
      write_atomic(out / name, os.str());
      files.push_back(name);
    }
    man["histograms"] = files;
  }
  man["seed"] = seed;
  std::ostringstream cells;
  sctomo::write_cells_csv(cells, rep);
  write_atomic(out / "cells.csv", cells.str());
  write_atomic(out / "summary.json", dump(sctomo::summary_json(rep)));
  write_atomic(out / "manifest.json", dump(man));
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Self-calibrating quantum state tomography"};
  app.require_subcommand(1);

  SettingsArgs settings;
  auto* s = app.add_subcommand("settings", "Write a protocol's setting manifest");
  s->add_option("protocol", settings.protocol, "sct_1q, st_1q, sct_2q or st_2q")->required();
  s->add_option("--out", settings.out, "Output directory");

  SimulateArgs sim;
  auto* m = app.add_subcommand("simulate", "Simulate counts for an experiment config");
  m->add_option("--config", sim.config, "Experiment config JSON")->required();
  m->add_option("--out", sim.out, "Output directory");
  m->add_option("--seed", sim.seed, "Override the config seed");
  m->add_flag("--batch14", sim.batch14, "Simulate the fourteen-state suite with the config's settings");
  m->add_flag("--noiseless", sim.noiseless, "Write expected counts instead of Poisson samples");

  ReconstructArgs rec;
  auto* r = app.add_subcommand("reconstruct", "Reconstruct a state from a counts file");
  r->add_option("--counts", rec.counts, "Counts CSV")->required();
  r->add_option("--settings", rec.settings, "Settings manifest JSON")->required();
  r->add_option("--mode", rec.mode, "sct or st")->check(CLI::IsMember({"sct", "st"}));
  r->add_option("--out", rec.out, "Output directory");
  r->add_option("--mc", rec.mc, "Monte Carlo resamples for error bars")->check(CLI::Range(2, 1000000));
  r->add_option("--starts", rec.opt.starts, "Number of optimizer starts");
  r->add_option("--alpha-grid", rec.opt.alpha_grid, "Comma-separated initial alphas");
  r->add_option("--purity-prior", rec.opt.purity_prior, "Minimum purity penalty");
  r->add_option("--max-evals", rec.opt.max_evals, "Evaluation budget per local run");
  r->add_option("--seed", rec.opt.seed, "Seed for start perturbations and resampling");
  r->add_flag("--use-expected", rec.use_expected, "Fit the expected column instead of the counts");

  SweepArgs sw;
  auto* w = app.add_subcommand("sweep", "Run a retardance or noise sweep");
  w->add_option("kind", sw.kind, "retardance or noise")->required()->check(CLI::IsMember({"retardance", "noise"}));
  w->add_option("--config", sw.config, "Sweep config JSON")->required();
  w->add_option("--out", sw.out, "Output directory");
  w->add_option("--photons", sw.photons, "Photon level(s), overriding the config");
  w->add_option("--runs", sw.runs, "Runs per level (noise) or seeds (retardance)");
  w->add_option("--seed", sw.seed, "Base seed (noise)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInput;
  }

  try {
    if (*s) return cmd_settings(settings);
    if (*m) return cmd_simulate(sim);
    if (*r) return cmd_reconstruct(rec);
    if (*w) return cmd_sweep(sw);
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const sctomo::DegenerateInput& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return kExitOk;
}
