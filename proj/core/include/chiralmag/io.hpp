#pragma once

#include "chiralmag/geometry.hpp"
#include "chiralmag/quasistatic.hpp"

#include <nlohmann/json.hpp>

#include <map>
#include <string>
#include <vector>

namespace chiralmag {

nlohmann::json to_json(const EnergyBreakdown& e);
nlohmann::json to_json(const State& q);
nlohmann::json to_json(const StepAudit& a);
nlohmann::json to_json(const CiarletNecasReport& r);
nlohmann::json to_json(const StabilityReport& r);

/// Throws IoError.
void write_text(const std::string& path, const std::string& text);
/// Pretty-printed with a trailing newline.
void write_json(const std::string& path, const nlohmann::json& j);
void write_convergence_csv(const std::string& path, const std::vector<ConvergenceRecord>& log);

/// Reference-grid nodal fields y, mu and the displacement as VTK legacy
/// structured points.
void write_vtk_state(const std::string& path, const State& q);

struct VoxelData {
  std::map<std::string, std::vector<double>> scalars;
  std::map<std::string, std::vector<Vec3>> vectors;
};
/// Voxel-centred fields on an Eulerian grid as VTK legacy structured points.
void write_vtk_voxels(const std::string& path, const EulerianGrid& grid, const VoxelData& data);

} // namespace chiralmag
