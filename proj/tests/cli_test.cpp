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

// End-to-end checks of the command-line tool, run as a subprocess.

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#ifndef SCTOMO_CLI_PATH
#error "SCTOMO_CLI_PATH must point at the sctomo executable"
#endif

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kPi = 3.14159265358979323846;

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / (std::string("sctomo_cli_") + info->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  int run(const std::string& args) const {
    const std::string cmd = std::string(SCTOMO_CLI_PATH) + " " + args + " >" + (dir_ / "stdout.txt").string() +
                            " 2>" + (dir_ / "stderr.txt").string();
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  void write(const std::string& name, const std::string& text) const { std::ofstream(dir_ / name) << text; }

  std::string read(const std::string& name) const {
    std::ifstream is(dir_ / name, std::ios::binary);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
  }

  json read_json(const std::string& name) const { return json::parse(read(name)); }

  void write_config(const std::string& name, double photons, const std::string& protocol = "sct_1q",
                    bool with_seed = true) const {
    json cfg = {{"source", {{"kind", "bloch_pure"}, {"theta", kPi / 2}, {"phi", 0.0}}},
                {"protocol", protocol},
                {"photons_per_setting", photons}};
    if (protocol.rfind("sct", 0) == 0) cfg["true_alphas"] = {kPi / 6};
    if (with_seed) cfg["seed"] = 17;
    write(name, cfg.dump());
  }

  fs::path dir_;
};

}  // namespace

TEST_F(Cli, SimulateThenReconstructRecoversAlpha) {
  write_config("cfg.json", 1000.0);
  ASSERT_EQ(run("simulate --noiseless --config " + path("cfg.json") + " --out " + path("sim")), 0);
  ASSERT_EQ(run("reconstruct --use-expected --counts " + path("sim/counts.csv") + " --settings " +
                path("sim/settings.json") + " --mode sct --out " + path("rec")),
            0);
  const json res = read_json("rec/result.json");
  ASSERT_EQ(res["alpha_hat"].size(), 1u);
  EXPECT_NEAR(res["alpha_hat"][0].get<double>(), kPi / 6, 1e-3);
  EXPECT_TRUE(res["converged"].get<bool>());
  const json man = read_json("rec/manifest.json");
  EXPECT_EQ(man["command"], "reconstruct");
  EXPECT_EQ(man["format_version"], "1.0");
}

TEST_F(Cli, StandardModeOnSelfCalibratingSettingsIsRejected) {
  write_config("cfg.json", 1000.0);
  ASSERT_EQ(run("simulate --config " + path("cfg.json") + " --out " + path("sim")), 0);
  EXPECT_EQ(run("reconstruct --counts " + path("sim/counts.csv") + " --settings " + path("sim/settings.json") +
                " --mode st --out " + path("rec")),
            2);
  EXPECT_NE(read("stderr.txt").find("n_unknowns"), std::string::npos);
  EXPECT_FALSE(fs::exists(dir_ / "rec" / "result.json"));
}

TEST_F(Cli, StandardTomographyRoundTrip) {
  write_config("cfg.json", 3000.0, "st_1q");
  ASSERT_EQ(run("simulate --config " + path("cfg.json") + " --out " + path("sim")), 0);
  ASSERT_EQ(run("reconstruct --counts " + path("sim/counts.csv") + " --settings " + path("sim/settings.json") +
                " --mode st --out " + path("rec")),
            0);
  EXPECT_TRUE(read_json("rec/result.json")["alpha_hat"].empty());
}

TEST_F(Cli, MonteCarloAddsErrorBars) {
  write_config("cfg.json", 1000.0);
  ASSERT_EQ(run("simulate --config " + path("cfg.json") + " --out " + path("sim")), 0);
  const int rc = run("reconstruct --counts " + path("sim/counts.csv") + " --settings " + path("sim/settings.json") +
                     " --mode sct --mc 3 --starts 6 --out " + path("rec"));
  ASSERT_TRUE(rc == 0 || rc == 3) << rc;
  const json res = read_json("rec/result.json");
  ASSERT_TRUE(res.contains("error_bars"));
  ASSERT_EQ(res["error_bars"].size(), 2u);
  EXPECT_EQ(res["error_bars"][0]["quantity"], "fidelity");
  EXPECT_EQ(res["error_bars"][1]["quantity"], "alpha");
  EXPECT_TRUE(res["error_bars"][0]["low_confidence"].get<bool>());
}

TEST_F(Cli, InvalidInputsExitWithTwo) {
  write_config("zero.json", 0.0);
  EXPECT_EQ(run("simulate --config " + path("zero.json") + " --out " + path("sim")), 2);
  write_config("neg.json", -5.0);
  EXPECT_EQ(run("simulate --config " + path("neg.json") + " --out " + path("sim")), 2);
  write("bad.json", "{ not json");
  EXPECT_EQ(run("simulate --config " + path("bad.json") + " --out " + path("sim")), 2);
  EXPECT_EQ(run("simulate --config " + path("missing.json")), 2);
  EXPECT_EQ(run("settings nonsense --out " + path("s")), 2);
  EXPECT_EQ(run("frobnicate"), 2);
  EXPECT_EQ(run("--help"), 0);
}

TEST_F(Cli, NewerFormatVersionIsRefused) {
  ASSERT_EQ(run("settings sct_1q --out " + path("s")), 0);
  write_config("cfg.json", 1000.0);
  ASSERT_EQ(run("simulate --config " + path("cfg.json") + " --out " + path("sim")), 0);
  json set = read_json("s/settings.json");
  set["format_version"] = "2.0";
  write("s2.json", set.dump());
  EXPECT_EQ(run("reconstruct --counts " + path("sim/counts.csv") + " --settings " + path("s2.json") + " --out " +
                path("rec")),
            2);
  std::string counts = read("sim/counts.csv");
  counts.replace(counts.find("1.0"), 3, "9.0");
  write("counts9.csv", counts);
  EXPECT_EQ(run("reconstruct --counts " + path("counts9.csv") + " --settings " + path("s/settings.json") +
                " --out " + path("rec")),
            2);
}

TEST_F(Cli, BatchWritesFourteenFilesWithIndex) {
  write_config("cfg.json", 500.0);
  ASSERT_EQ(run("simulate --batch14 --config " + path("cfg.json") + " --out " + path("sim")), 0);
  for (int i = 0; i < 14; ++i) {
    std::ostringstream name;
    name << "sim/counts_" << (i < 10 ? "0" : "") << i << ".csv";
    EXPECT_TRUE(fs::exists(dir_ / name.str())) << name.str();
  }
  const json man = read_json("sim/manifest.json");
  ASSERT_EQ(man["batch"].size(), 14u);
  EXPECT_EQ(man["batch"][13]["file"], "counts_13.csv");
  EXPECT_EQ(man["seed"], 17);
}

TEST_F(Cli, MissingSeedIsDrawnAndRecorded) {
  write_config("cfg.json", 500.0, "sct_1q", false);
  ASSERT_EQ(run("simulate --config " + path("cfg.json") + " --out " + path("a")), 0);
  const json man = read_json("a/manifest.json");
  ASSERT_TRUE(man["seed"].is_number_unsigned());
  const auto seed = man["seed"].get<std::uint64_t>();
  EXPECT_EQ(man["config"]["seed"].get<std::uint64_t>(), seed);
  // Replaying the recorded seed reproduces the counts.
  ASSERT_EQ(run("simulate --seed " + std::to_string(seed) + " --config " + path("cfg.json") + " --out " + path("b")),
            0);
  EXPECT_EQ(read("a/counts.csv"), read("b/counts.csv"));
}

TEST_F(Cli, NoiseSweepWritesOneHistogramPerLevel) {
  json cfg = {{"source", {{"kind", "bloch_pure"}, {"theta", kPi / 2}, {"phi", 0.0}}},
              {"alpha", kPi / 6},
              {"photon_levels", {150, 500, 1000, 3000}},
              {"runs", 2},
              {"seed", 3},
              {"optimizer", {{"n_starts", 6}}}};
  write("sweep.json", cfg.dump());
  ASSERT_EQ(run("sweep noise --config " + path("sweep.json") + " --out " + path("out")), 0);
  for (const char* level : {"150", "500", "1000", "3000"}) {
    const std::string name = std::string("out/histogram_") + level + ".csv";
    ASSERT_TRUE(fs::exists(dir_ / name)) << name;
    const std::string text = read(name);
    EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 2 + 100 + 128);
  }
  const json summary = read_json("out/summary.json");
  EXPECT_EQ(summary["points"].size(), 4u);
  EXPECT_EQ(read_json("out/manifest.json")["histograms"].size(), 4u);
}

TEST_F(Cli, EmptyPhotonListIsAnError) {
  json cfg = {{"source", {{"kind", "bloch_pure"}, {"theta", kPi / 2}, {"phi", 0.0}}},
              {"alpha", kPi / 6},
              {"photon_levels", json::array()},
              {"runs", 2}};
  write("sweep.json", cfg.dump());
  EXPECT_EQ(run("sweep noise --config " + path("sweep.json") + " --out " + path("out")), 2);
  EXPECT_NE(read("stderr.txt").find("empty"), std::string::npos);
}

TEST_F(Cli, RetardanceSweepCoversStatesTimesAlphas) {
  json cfg = {{"states", "suite14"}, {"alphas", {kPi / 6, kPi / 2}}, {"photons", 0}, {"optimizer", {{"n_starts", 6}}}};
  write("sweep.json", cfg.dump());
  ASSERT_EQ(run("sweep retardance --config " + path("sweep.json") + " --out " + path("out")), 0);
  const std::string cells = read("out/cells.csv");
  EXPECT_EQ(std::count(cells.begin(), cells.end(), '\n'), 2 + 14 * 2);
}

TEST_F(Cli, RepeatedRunsAreByteIdentical) {
  write_config("cfg.json", 800.0);
  ASSERT_EQ(run("simulate --config " + path("cfg.json") + " --out " + path("sim")), 0);
  const std::string rec = "reconstruct --counts " + path("sim/counts.csv") + " --settings " +
                          path("sim/settings.json") + " --mode sct --seed 5 --out " + path("rec");
  const int first = run(rec);
  const std::string a = read("rec/result.json"), ma = read("rec/manifest.json");
  EXPECT_EQ(run(rec), first);
  EXPECT_EQ(read("rec/result.json"), a);
  EXPECT_EQ(read("rec/manifest.json"), ma);
  const std::string counts = read("sim/counts.csv");
  ASSERT_EQ(run("simulate --config " + path("cfg.json") + " --out " + path("sim")), 0);
  EXPECT_EQ(read("sim/counts.csv"), counts);
}
