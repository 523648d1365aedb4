#include "support.hpp"

#include "chiralmag/fixtures.hpp"
#include "chiralmag/io.hpp"
#include "chiralmag/logging.hpp"
#include "chiralmag/parallel.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace chiralmag;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / "chiralmag_io_test";
  fs::create_directories(d);
  return d / name;
}

} // namespace

TEST(Io, EnergyJsonKeys) {
  EnergyBreakdown e;
  e.dmi = -2;
  const nlohmann::json j = to_json(e);
  for (const char* k : {"elastic", "exchange", "magnetostatic", "dmi", "regularizer", "load_work", "total"}) {
    EXPECT_TRUE(j.contains(k)) << k;
  }
  EXPECT_EQ(j["dmi"].get<double>(), -2.0);
}

TEST(Io, StepRecordSchema) {
  StepAudit a;
  a.step = 3;
  a.dissipation = 0.5;
  const nlohmann::json j = to_json(a);
  for (const char* k : {"t", "energies", "dissipation_increment", "stability_margin", "inequality_gaps"}) {
    EXPECT_TRUE(j.contains(k)) << k;
  }
  EXPECT_EQ(j["dissipation_increment"].get<double>(), 0.5);
}

TEST(Io, StateJsonAndVtk) {
  const State q = identity_state(unit_cube_grid({2, 1, 1}));
  const nlohmann::json j = to_json(q);
  EXPECT_EQ(j["y"].size(), 12u);
  const fs::path p = scratch("state.vtk");
  write_vtk_state(p.string(), q);
  const std::string text = slurp(p);
  EXPECT_EQ(text.rfind("# vtk DataFile Version 3.0", 0), 0u);
  EXPECT_NE(text.find("DATASET STRUCTURED_POINTS"), std::string::npos);
  EXPECT_NE(text.find("DIMENSIONS 3 2 2"), std::string::npos);
  EXPECT_NE(text.find("POINT_DATA 12"), std::string::npos);
}

TEST(Io, VoxelVtk) {
  const EulerianGrid g{Box{}, {2, 2, 2}};
  VoxelData d;
  d.scalars["mask"] = std::vector<double>(8, 1.0);
  d.vectors["m"] = std::vector<Vec3>(8, Vec3::UnitZ());
  const fs::path p = scratch("voxels.vtk");
  write_vtk_voxels(p.string(), g, d);
  const std::string text = slurp(p);
  EXPECT_NE(text.find("ORIGIN 0.25 0.25 0.25"), std::string::npos) << text.substr(0, 200);
  EXPECT_NE(text.find("SCALARS mask"), std::string::npos);
  EXPECT_NE(text.find("VECTORS m"), std::string::npos);
}

TEST(Io, ConvergenceCsv) {
  const fs::path p = scratch("conv.csv");
  write_convergence_csv(p.string(), {{0, 1.5, 2, 3, 0, 0}, {1, 1.0, 1, 1, 0.1, 0.2}});
  const std::string text = slurp(p);
  EXPECT_EQ(text.substr(0, text.find('\n')), "iteration,objective,grad_y,grad_mu,step_y,step_mu");
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 3);
}

TEST(Io, UnwritablePath) {
  test::expect_error(ErrorCode::IoError, [] { write_text("/nonexistent-dir/x/y.json", "{}"); });
}

TEST(Logging, ParseLevels) {
  LogLevel l;
  EXPECT_TRUE(parse_log_level("debug", l));
  EXPECT_EQ(l, LogLevel::Debug);
  EXPECT_TRUE(parse_log_level("error", l));
  EXPECT_FALSE(parse_log_level("verbose", l));
}

TEST(Parallel, ResultIndependentOfThreadCount) {
  std::vector<double> one(1000), four(1000);
  set_thread_count(1);
  parallel_for(one.size(), [&](std::size_t i) { one[i] = std::sin(static_cast<double>(i)); });
  set_thread_count(4);
  parallel_for(four.size(), [&](std::size_t i) { four[i] = std::sin(static_cast<double>(i)); });
  set_thread_count(1);
  EXPECT_EQ(one, four);
}
