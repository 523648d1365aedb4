#pragma once

#include "chiralmag/fixtures.hpp"
#include "chiralmag/quasistatic.hpp"

#include <cstdint>
#include <string>

namespace chiralmag {

struct InitialSpec {
  std::string type = "uniform"; // uniform | helix | random | fixture
  Vec3 direction = Vec3::UnitX();
  double omega = 1.0;
  double amplitude = 0.1;
  std::string fixture;
};

struct RunConfig {
  Box box{Vec3::Zero(), Vec3::Ones()};
  Index3 cells{6, 6, 6};
  FaceSet dirichlet{1};
  FaceSet neumann;
  MaterialModel material;
  LoadSchedule loads;
  BoundaryDatum boundary;
  bool boundary_identity = true;
  InitialSpec initial;
  Index3 voxels{32, 32, 32};
  double padding = 2.0;
  EnergyOptions energy;
  OptimizerConfig optimizer;
  Partition partition = Partition::uniform(1.0, 8);
  StabilityOptions stability;
  std::uint64_t seed = 1;
  bool write_vtk = true;
  std::string text; // the config exactly as read
};

/// Parses a JSON config. Throws ConfigError naming the offending field, or the
/// line and column of a syntax error.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

Grid make_grid(const RunConfig& config);
/// Initial state with the boundary datum applied on Gamma.
State initial_state(const RunConfig& config);
EulerianGrid make_eulerian(const RunConfig& config, const State& q);
Problem make_problem(const RunConfig& config, const StrayField* stray);

} // namespace chiralmag
