#include <gtest/gtest.h>

#include <nlohmann/json.hpp>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CliRun {
  int code;
  std::string output; // stdout and stderr
};

CliRun run(const std::string& args, const std::string& env = "CHIRALMAG_LOG=error") {
  const std::string cmd = env + " \"" CHIRALMAG_CLI_PATH "\" " + args + " 2>&1";
  FILE* p = popen(cmd.c_str(), "r");
  CliRun r{-1, {}};
  if (!p) return r;
  std::array<char, 4096> buf;
  while (std::fgets(buf.data(), static_cast<int>(buf.size()), p)) r.output += buf.data();
  const int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("chiralmag_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  std::string config(const std::string& text, const std::string& name = "config.json") {
    const fs::path p = dir_ / name;
    std::ofstream(p) << text;
    return p.string();
  }
  std::string out(const std::string& name) const { return (dir_ / name).string(); }
  fs::path dir_;
};

const char* kHelix = R"({
  "grid": {"cells": [12, 12, 12], "dirichlet_faces": ["x-"]},
  "material": {"b": 0.0, "alpha": 1.0, "kappa": 2.0},
  "initial": {"type": "helix", "omega": 1.0},
  "energy": {"magnetostatics": false},
  "optimizer": {"max_outer_iters": 0},
  "vtk": false
})";

const char* kSmall = R"({
  "grid": {"cells": [3, 3, 3], "dirichlet_faces": ["x-"]},
  "initial": {"type": "random", "amplitude": 0.15},
  "loads": {"h": [[0, 0, 1]]},
  "energy": {"magnetostatics": true, "regularizer": true},
  "eulerian": {"voxels": [16, 16, 16]},
  "optimizer": {"max_outer_iters": 5},
  "vtk": true
})";

} // namespace

TEST_F(Cli, HelixEnergiesInJson) {
  const CliRun r = run("minimize --config " + config(kHelix) + " --out " + out("o"));
  ASSERT_EQ(r.code, 0) << r.output;
  const json e = json::parse(slurp(dir_ / "o" / "energy.json"))["energy"];
  EXPECT_NEAR(e["exchange"].get<double>(), 1.0, 0.01);
  EXPECT_NEAR(e["dmi"].get<double>(), -2.0, 0.02);
  EXPECT_EQ(slurp(dir_ / "o" / "config.json"), std::string(kHelix));
}

TEST_F(Cli, ZeroKappaGivesExactlyZeroDmi) {
  std::string text = kSmall;
  text.replace(text.find("\"loads\""), 0, "\"material\": {\"kappa\": 0},\n  ");
  const CliRun r = run("minimize --config " + config(text) + " --out " + out("o"));
  ASSERT_EQ(r.code, 0) << r.output;
  const json e = json::parse(slurp(dir_ / "o" / "energy.json"))["energy"];
  EXPECT_EQ(e["dmi"].get<double>(), 0.0);
}

TEST_F(Cli, MinimizeWritesArtifactsDeterministically) {
  const std::string c = config(kSmall);
  ASSERT_EQ(run("minimize --config " + c + " --out " + out("a") + " --seed 3").code, 0);
  ASSERT_EQ(run("minimize --config " + c + " --out " + out("b") + " --seed 3 --threads 2").code, 0);
  ASSERT_EQ(run("minimize --config " + c + " --out " + out("c") + " --seed 4").code, 0);
  for (const char* f : {"state.json", "energy.json", "ciarlet_necas.json", "config.json", "convergence.csv",
                        "state.vtk", "eulerian.vtk"}) {
    ASSERT_TRUE(fs::exists(dir_ / "a" / f)) << f;
    EXPECT_EQ(slurp(dir_ / "a" / f), slurp(dir_ / "b" / f)) << f;
  }
  EXPECT_NE(slurp(dir_ / "a" / "state.json"), slurp(dir_ / "c" / "state.json"));
}

TEST_F(Cli, EvolveConstantLoads) {
  // Pinned cell, magnetic energy only, moment along the field: nothing can move.
  const char* text = R"({
    "grid": {"cells": [1, 1, 1], "dirichlet_faces": ["x-", "x+", "y-", "y+", "z-", "z+"]},
    "material": {"b": 0.0, "kappa": 0.0},
    "initial": {"type": "uniform", "direction": [0, 0, 1]},
    "loads": {"h": [[0, 0, 1]]},
    "energy": {"magnetostatics": false},
    "partition": {"steps": 3, "T": 1},
    "vtk": true
  })";
  const CliRun r = run("evolve --config " + config(text) + " --out " + out("o"));
  ASSERT_EQ(r.code, 0) << r.output;
  std::ifstream log(dir_ / "o" / "trajectory.jsonl");
  int records = 0;
  for (std::string line; std::getline(log, line); ++records) {
    const json rec = json::parse(line);
    for (const char* k : {"t", "energies", "dissipation_increment", "stability_margin", "inequality_gaps"}) {
      EXPECT_TRUE(rec.contains(k)) << k;
    }
    EXPECT_EQ(rec["dissipation_increment"].get<double>(), 0.0);
  }
  EXPECT_EQ(records, 4);
  EXPECT_TRUE(fs::exists(dir_ / "o" / "summary.json"));
  EXPECT_TRUE(fs::exists(dir_ / "o" / "step_0003.vtk"));
}

TEST_F(Cli, EvolveRampHasMonotoneDissipation) {
  const char* ramp = R"({
    "grid": {"cells": [2, 2, 2]},
    "initial": {"type": "uniform", "direction": [0, 0, 1]},
    "loads": {"h": [[1.5, 0, 3], [0, 0, -6]]},
    "energy": {"magnetostatics": false},
    "optimizer": {"max_outer_iters": 30},
    "partition": {"steps": 5, "T": 1},
    "stability": {"samples_per_amplitude": 1},
    "vtk": false
  })";
  const CliRun r = run("evolve --config " + config(ramp) + " --out " + out("o"));
  ASSERT_EQ(r.code, 0) << r.output;
  std::ifstream log(dir_ / "o" / "trajectory.jsonl");
  double last = 0;
  int records = 0;
  for (std::string line; std::getline(log, line); ++records) {
    const double c = json::parse(line)["cumulative_dissipation"].get<double>();
    EXPECT_GE(c, last);
    last = c;
  }
  EXPECT_EQ(records, 6);
  EXPECT_GT(last, 0.0);
}

TEST_F(Cli, EmptyGammaIsAConfigError) {
  const CliRun r = run("evolve --config " + config(R"({"grid": {"dirichlet_faces": []}})") + " --out " + out("o"));
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.output.find("H^2(Gamma) > 0"), std::string::npos) << r.output;
}

TEST_F(Cli, ConfigErrors) {
  EXPECT_EQ(run("minimize --config " + out("missing.json") + " --out " + out("o")).code, 1);
  const CliRun r = run("minimize --config " + config("{\"seed\": }") + " --out " + out("o"));
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.output.find("line 1"), std::string::npos) << r.output;
  EXPECT_EQ(run("frobnicate").code, 1);
  EXPECT_EQ(run("check --suite nonsense").code, 1);
  EXPECT_EQ(run("check --suite piola", "CHIRALMAG_LOG=verbose").code, 1);
}

TEST_F(Cli, InadmissibleStartExitsThree) {
  const CliRun r = run("minimize --config " +
                    config(R"({"boundary": {"type": "affine", "A": [[1, 0, 0], [0, 1, 0], [0, 0, -1]]},
                               "energy": {"magnetostatics": false}})") +
                    " --out " + out("o"));
  EXPECT_EQ(r.code, 3) << r.output;
}

TEST_F(Cli, StalledLineSearchExitCodes) {
  const std::string c = config(R"({"grid": {"cells": [3, 3, 3]}, "initial": {"type": "random", "amplitude": 0.2},
    "energy": {"magnetostatics": false},
    "optimizer": {"step_cap_mu": 1000, "step_cap_y": 1000, "max_backtracks": 1}, "vtk": false})");
  EXPECT_EQ(run("minimize --config " + c + " --out " + out("a")).code, 2);
  EXPECT_EQ(run("evolve --config " + c + " --out " + out("b")).code, 4);
}

TEST_F(Cli, CheckSuites) {
  for (const char* s : {"geometry", "dissipation", "gradients", "degree"}) {
    const CliRun r = run(std::string("check --suite ") + s);
    EXPECT_EQ(r.code, 0) << r.output;
    EXPECT_NE(r.output.find("PASS"), std::string::npos);
    EXPECT_EQ(r.output.find("FAIL"), std::string::npos) << r.output;
  }
}

TEST_F(Cli, DegreeQuery) {
  const std::string c = config(R"({"grid": {"cells": [8, 8, 8]}, "initial": {"type": "fixture", "fixture": "ball_map"}})");
  CliRun r = run("degree --config " + c + " --point 0.5 0.0 0.1");
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.output, "1\n");
  r = run("degree --config " + c + " --point 0.2 0.0 0.6");
  EXPECT_EQ(r.output, "0\n");
}
