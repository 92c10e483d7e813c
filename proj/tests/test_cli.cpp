#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "json.hpp"
#include "tunnelpath/quasiclassical.hpp"

#ifndef TUNNELPATH_CLI
#error "TUNNELPATH_CLI must name the CLI executable"
#endif

using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() /
           ("tunnelpath-cli-" + std::to_string(getpid()) + "-" + info->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  int run(const std::string& args, const std::string& out = "out") {
    const std::string cmd = std::string("\"") + TUNNELPATH_CLI + "\" " + args + " --out \"" + (dir_ / out).string() +
                            "\" > /dev/null 2> \"" + (dir_ / "stderr.txt").string() + "\"";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  [[nodiscard]] std::string read(const std::string& rel) const {
    std::ifstream in(dir_ / rel, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
  }

  [[nodiscard]] json summary(const std::string& rel) const { return json::parse(read(rel))["summary"]; }

  // Column `name` of a CSV table.
  [[nodiscard]] std::vector<double> column(const std::string& rel, const std::string& name) const {
    std::istringstream in(read(rel));
    std::string line;
    std::getline(in, line);
    std::size_t index = 0;
    {
      std::istringstream header(line);
      std::string cell;
      bool found = false;
      while (std::getline(header, cell, ',')) {
        if (cell == name) {
          found = true;
          break;
        }
        ++index;
      }
      if (!found) ADD_FAILURE() << "no column " << name << " in " << rel;
    }
    std::vector<double> out;
    while (std::getline(in, line)) {
      std::istringstream row(line);
      std::string cell;
      for (std::size_t i = 0; i <= index; ++i) std::getline(row, cell, ',');
      out.push_back(std::strtod(cell.c_str(), nullptr));
    }
    return out;
  }

  fs::path dir_;
};

}  // namespace

TEST_F(Cli, ScatterFreeParticleTransmitsFully) {
  ASSERT_EQ(run("scatter --v0 0 --samples 11"), 0);
  const auto T2 = column("out/scatter.csv", "T2");
  ASSERT_EQ(T2.size(), 11u);
  for (double t : T2) EXPECT_EQ(t, 1.0);
}

TEST_F(Cli, ScatterEnergySweepMonotone) {
  ASSERT_EQ(run("scatter --gamma 2 --samples 51"), 0);
  const auto T2 = column("out/scatter.csv", "T2");
  for (std::size_t i = 1; i < T2.size(); ++i) EXPECT_GT(T2[i], T2[i - 1]);
  for (double d : column("out/scatter.csv", "unitarity_defect")) EXPECT_LE(std::abs(d), 1e-12);
  EXPECT_TRUE(summary("out/scatter_summary.json")["monotone"][0]["T2_monotone_in_epsilon"].get<bool>());
}

TEST_F(Cli, SidecarEchoesConfig) {
  ASSERT_EQ(run("scatter --gamma 2 --samples 5"), 0);
  const auto meta = json::parse(read("out/scatter.meta.json"));
  EXPECT_EQ(meta["tool"], "tunnelpath");
  EXPECT_EQ(meta["precision"], 12);
  EXPECT_EQ(meta["config"]["barrier"]["gamma"][0], 2.0);
  EXPECT_EQ(meta["rows"], 5);
  EXPECT_TRUE(meta.contains("tolerances"));
}

TEST_F(Cli, PathCurvesMonotoneWithPhaseTimeEndpoint) {
  ASSERT_EQ(run("path --gamma 0.5 2 5 --epsilon 0.1 --d-samples 101 --invert"), 0);
  const auto D = column("out/path.csv", "D");
  const auto S = column("out/path.csv", "S");
  ASSERT_EQ(S.size(), 303u);
  for (std::size_t c = 0; c < 3; ++c) {
    for (std::size_t i = c * 101 + 1; i < (c + 1) * 101; ++i) EXPECT_GE(S[i], S[i - 1]);
    EXPECT_EQ(D[(c + 1) * 101 - 1], 1.0);
  }
  for (const auto& c : summary("out/path_summary.json")["cases"]) {
    EXPECT_TRUE(c["monotone"].get<bool>());
    EXPECT_LE(std::abs(c["exit_identity_residual"].get<double>()), 1e-10);
  }
  const auto x = column("out/path_inverted.csv", "x");
  const auto tau = column("out/path_inverted.csv", "tau1");
  for (std::size_t i = 1; i < 101; ++i) {
    EXPECT_GT(x[i], x[i - 1]);
    EXPECT_GT(tau[i], tau[i - 1]);
  }
}

TEST_F(Cli, PathThinBarrierLinear) {
  ASSERT_EQ(run("path --gamma 0.001 --epsilon 0.1 --d-samples 41"), 0);
  const auto D = column("out/path.csv", "D");
  const auto S = column("out/path.csv", "S");
  const double slope = (S.back() - S.front()) / (D.back() - D.front());
  for (std::size_t i = 0; i < S.size(); ++i)
    EXPECT_NEAR((S.front() + slope * (D[i] - D.front())) / S[i], 1.0, 1e-3) << D[i];
}

TEST_F(Cli, PathRejectsAboveBarrier) {
  EXPECT_EQ(run("path --v0 1 --k0 2"), 1);
}

TEST_F(Cli, WkbCompareWitnessAndEndpoints) {
  ASSERT_EQ(run("wkb-compare --gamma 2 --epsilon 0.1 --d-samples 201"), 0);
  const auto wkb = column("out/wkb_compare.csv", "S_wkb");
  const auto exact = column("out/wkb_compare.csv", "S_exact");
  EXPECT_EQ(wkb.back(), 0.0);
  EXPECT_GT(exact.back(), 0.0);
  for (std::size_t i = 1; i < exact.size(); ++i) EXPECT_GE(exact[i], exact[i - 1]);
  const auto pair = summary("out/wkb_witness.json")["pairs"][0];
  EXPECT_TRUE(pair["wkb_witness_found"].get<bool>());
  EXPECT_FALSE(pair["exact_witness_found"].get<bool>());
  EXPECT_TRUE(pair["exact_monotone"].get<bool>());
}

TEST_F(Cli, WkbCompareEmptyPairListIsUsageError) {
  EXPECT_EQ(run("wkb-compare"), 1);
  EXPECT_NE(read("stderr.txt").find("empty"), std::string::npos);
}

TEST_F(Cli, ProbabilitiesFreeParticle) {
  ASSERT_EQ(run("probabilities --v0 0 --k0 1 --sigma-p 0.05"), 0);
  const auto s = summary("out/probabilities_summary.json");
  EXPECT_NEAR(s["scalars"]["P_tot"].get<double>(), 1.0, 1e-4);
  EXPECT_NEAR(s["scalars"]["exit_ratio"].get<double>(), 1.0, 1e-12);
}

TEST_F(Cli, ProbabilitiesOpaqueOrderingAndExitRatio) {
  ASSERT_EQ(run("probabilities --gamma 4 --epsilon 0.1"), 0);
  const auto s = summary("out/probabilities_summary.json")["scalars"];
  EXPECT_TRUE(s["ordering"]["P_pp_le_P_pe"].get<bool>());
  EXPECT_TRUE(s["ordering"]["P_pp_le_P_ep"].get<bool>());
  EXPECT_TRUE(s["exit_ratio_pass"].get<bool>());
  EXPECT_NEAR(s["quadrature"]["sum"].get<double>(), 1.0, 1e-12);
  EXPECT_FALSE(column("out/postselected.csv", "P_ps").empty());
}

TEST_F(Cli, ProbabilitiesRejectsSecondDetectorInsideBarrier) {
  EXPECT_EQ(run("probabilities --gamma 2 --epsilon 0.1 --l-second 0.5"), 1);
}

TEST_F(Cli, SweepRowCountAndOrder) {
  ASSERT_EQ(run("sweep --gamma 1 2 --epsilon 0.2 0.6 --jobs 4"), 0);
  const auto index = column("out/sweep.csv", "index");
  ASSERT_EQ(index.size(), 4u);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(index[i], static_cast<double>(i));
  EXPECT_EQ(column("out/sweep.csv", "gamma"), (std::vector<double>{1, 1, 2, 2}));
  EXPECT_EQ(summary("out/sweep_failures.json")["failed"], 0);
}

TEST_F(Cli, SweepSerialEqualsParallel) {
  ASSERT_EQ(run("sweep --gamma 0.5 1 3 8 --epsilon 0.1 0.4 0.9 --jobs 1", "serial"), 0);
  ASSERT_EQ(run("sweep --gamma 0.5 1 3 8 --epsilon 0.1 0.4 0.9 --jobs 6", "parallel"), 0);
  for (const char* f : {"sweep.csv", "sweep.meta.json", "sweep_failures.json"})
    EXPECT_EQ(read(std::string("serial/") + f), read(std::string("parallel/") + f)) << f;
}

TEST_F(Cli, JobsFromEnvironmentDoesNotChangeOutput) {
  ASSERT_EQ(run("sweep --gamma 1 2 --epsilon 0.3 --jobs 1", "a"), 0);
  ::setenv("TUNNELPATH_JOBS", "3", 1);
  const int code = run("sweep --gamma 1 2 --epsilon 0.3", "b");
  ::unsetenv("TUNNELPATH_JOBS");
  ASSERT_EQ(code, 0);
  EXPECT_EQ(read("a/sweep.csv"), read("b/sweep.csv"));
}

TEST_F(Cli, ConfigFileWithFlagOverride) {
  std::ofstream(dir_ / "run.json") << R"({"barrier": {"gamma": [2.0], "epsilon": [0.3]}, "grids": {"d_samples": 11}})";
  ASSERT_EQ(run("path --config \"" + (dir_ / "run.json").string() + "\" --epsilon 0.1"), 0);
  const auto eps = column("out/path.csv", "epsilon");
  ASSERT_EQ(eps.size(), 11u);
  EXPECT_EQ(eps.front(), 0.1);
}

TEST_F(Cli, ConfigErrorsNameTheField) {
  std::ofstream(dir_ / "bad.json") << R"({"barrier": {"gamma": [2.0], "height": 1.0}})";
  EXPECT_EQ(run("path --config \"" + (dir_ / "bad.json").string() + "\""), 1);
  EXPECT_NE(read("stderr.txt").find("barrier.height"), std::string::npos);
  EXPECT_EQ(run("path --gamma 2 --v0 1"), 1);
  EXPECT_EQ(run("scatter --format xml"), 1);
  EXPECT_EQ(run("frobnicate"), 1);
}

TEST_F(Cli, JsonFormat) {
  ASSERT_EQ(run("scatter --gamma 2 --samples 3 --format json"), 0);
  const auto t = json::parse(read("out/scatter.json"));
  EXPECT_EQ(t["rows"].size(), 3u);
  EXPECT_EQ(t["columns"][0], "gamma");
}

TEST_F(Cli, RerunsAreByteIdentical) {
  for (const char* out : {"a", "b"}) ASSERT_EQ(run("probabilities --gamma 2 --epsilon 0.1 --jobs 2", out), 0);
  for (const auto& entry : fs::directory_iterator(dir_ / "a")) {
    const auto name = entry.path().filename().string();
    EXPECT_EQ(read("a/" + name), read("b/" + name)) << name;
  }
}
