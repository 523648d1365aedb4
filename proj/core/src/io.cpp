#include "chiralmag/io.hpp"

#include "chiralmag/errors.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

namespace chiralmag {

using nlohmann::json;

namespace {

json vec(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write '" + path + "'");
  out << std::setprecision(17);
  return out;
}

void close_checked(std::ofstream& out, const std::string& path) {
  out.close();
  if (!out) throw Error(ErrorCode::IoError, "failed while writing '" + path + "'");
}

} // namespace

json to_json(const EnergyBreakdown& e) {
  return json{{"elastic", e.elastic}, {"exchange", e.exchange}, {"magnetostatic", e.magnetostatic},
              {"dmi", e.dmi},         {"regularizer", e.regularizer}, {"load_work", e.load_work},
              {"total", e.total}};
}

json to_json(const State& q) {
  const Grid& g = q.grid;
  json j;
  j["box"] = {{"lo", vec(g.box().lo)}, {"hi", vec(g.box().hi)}};
  j["cells"] = {g.cells()[0], g.cells()[1], g.cells()[2]};
  json y = json::array(), mu = json::array();
  for (const auto& v : q.y.nodes) y.push_back(vec(v));
  for (const auto& v : q.mu.nodes) mu.push_back(vec(v));
  j["y"] = std::move(y);
  j["mu"] = std::move(mu);
  return j;
}

json to_json(const StepAudit& a) {
  return json{{"step", a.step},
              {"t", a.t},
              {"energies", to_json(a.energy)},
              {"dissipation_increment", a.dissipation},
              {"cumulative_dissipation", a.cumulative_dissipation},
              {"stability_margin", a.stability_margin},
              {"stability_passed", a.stability_passed},
              {"inequality_gaps", {{"energy_inequality", a.energy_inequality_gap}, {"apriori", a.apriori_gap}}},
              {"power_integral", a.power_integral},
              {"iterations", a.iterations},
              {"kept_previous", a.kept_previous}};
}

json to_json(const CiarletNecasReport& r) {
  return json{{"lhs", r.lhs}, {"rhs", r.rhs}, {"ratio", r.ratio}, {"satisfied", r.satisfied}};
}

json to_json(const StabilityReport& r) {
  return json{{"energy", r.energy},           {"worst_margin", r.worst_margin}, {"worst_kind", r.worst_kind},
              {"competitors", r.competitors}, {"skipped", r.skipped},           {"scale", r.scale},
              {"passed", r.passed}};
}

void write_text(const std::string& path, const std::string& text) {
  auto out = open_out(path);
  out << text;
  close_checked(out, path);
}

void write_json(const std::string& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

void write_convergence_csv(const std::string& path, const std::vector<ConvergenceRecord>& log) {
  auto out = open_out(path);
  out << "iteration,objective,grad_y,grad_mu,step_y,step_mu\n";
  for (const auto& r : log) {
    out << r.iteration << ',' << r.objective << ',' << r.grad_y << ',' << r.grad_mu << ',' << r.step_y << ','
        << r.step_mu << '\n';
  }
  close_checked(out, path);
}

void write_vtk_state(const std::string& path, const State& q) {
  const Grid& g = q.grid;
  const Index3 c = g.cells();
  const Vec3 h = g.spacing();
  auto out = open_out(path);
  out << "# vtk DataFile Version 3.0\nchiralmag state\nASCII\nDATASET STRUCTURED_POINTS\n";
  out << "DIMENSIONS " << c[0] + 1 << ' ' << c[1] + 1 << ' ' << c[2] + 1 << '\n';
  out << "ORIGIN " << g.box().lo.x() << ' ' << g.box().lo.y() << ' ' << g.box().lo.z() << '\n';
  out << "SPACING " << h.x() << ' ' << h.y() << ' ' << h.z() << '\n';
  out << "POINT_DATA " << g.node_count() << '\n';
  auto vectors = [&](const char* name, auto&& fn) {
    out << "VECTORS " << name << " double\n";
    for (int n = 0; n < g.node_count(); ++n) {
      const Vec3 v = fn(n);
      out << v.x() << ' ' << v.y() << ' ' << v.z() << '\n';
    }
  };
  vectors("y", [&](int n) { return q.y.nodes[static_cast<std::size_t>(n)]; });
  vectors("displacement", [&](int n) { return Vec3(q.y.nodes[static_cast<std::size_t>(n)] - g.node_position(n)); });
  vectors("mu", [&](int n) { return q.mu.nodes[static_cast<std::size_t>(n)]; });
  close_checked(out, path);
}

void write_vtk_voxels(const std::string& path, const EulerianGrid& grid, const VoxelData& data) {
  const Vec3 h = grid.spacing();
  auto out = open_out(path);
  out << "# vtk DataFile Version 3.0\nchiralmag voxels\nASCII\nDATASET STRUCTURED_POINTS\n";
  out << "DIMENSIONS " << grid.n[0] << ' ' << grid.n[1] << ' ' << grid.n[2] << '\n';
  out << "ORIGIN " << grid.box.lo.x() + 0.5 * h.x() << ' ' << grid.box.lo.y() + 0.5 * h.y() << ' '
      << grid.box.lo.z() + 0.5 * h.z() << '\n';
  out << "SPACING " << h.x() << ' ' << h.y() << ' ' << h.z() << '\n';
  out << "POINT_DATA " << grid.voxel_count() << '\n';
  for (const auto& [name, values] : data.scalars) {
    out << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
    for (double v : values) out << v << '\n';
  }
  for (const auto& [name, values] : data.vectors) {
    out << "VECTORS " << name << " double\n";
    for (const auto& v : values) out << v.x() << ' ' << v.y() << ' ' << v.z() << '\n';
  }
  close_checked(out, path);
}

} // namespace chiralmag
