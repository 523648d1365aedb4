#include "commands.hpp"

#include "chiralmag/config.hpp"
#include "chiralmag/dissipation.hpp"
#include "chiralmag/errors.hpp"
#include "chiralmag/geometry.hpp"
#include "chiralmag/io.hpp"
#include "chiralmag/logging.hpp"
#include "chiralmag/strayfield.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <memory>
#include <sstream>

namespace chiralmag::cli {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Relative tolerance for the per-step hard audits of evolve.
constexpr double kAuditTol = 1e-6;

int exit_code(ErrorCode c) {
  switch (c) {
  case ErrorCode::ConfigError:
  case ErrorCode::InvalidGrid:
  case ErrorCode::InvalidMaterial:
  case ErrorCode::UnknownFixture:
  case ErrorCode::DegenerateGrid:
  case ErrorCode::IoError:
    return kConfigError;
  case ErrorCode::LineSearchStalled:
    return kLineSearchStalled;
  case ErrorCode::StepFailed:
    return kStepFailed;
  default:
    return kAdmissibility;
  }
}

int fail(const Error& e) {
  log_error(e.what());
  return exit_code(e.code());
}

std::string path(const Options& o, const std::string& name) { return (fs::path(o.out) / name).string(); }

RunConfig load(const Options& o) {
  RunConfig c = load_config(o.config);
  if (o.seed) {
    c.seed = *o.seed;
    c.stability.seed = *o.seed;
  }
  return c;
}

void prepare_out(const Options& o, const RunConfig& c) {
  std::error_code ec;
  fs::create_directories(o.out, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create output directory '" + o.out + "': " + ec.message());
  write_text(path(o, "config.json"), c.text);
}

// Problem plus the stray-field solver it points at.
struct Setup {
  RunConfig config;
  State q0;
  std::unique_ptr<StrayField> stray;
  Problem problem;
};

Setup setup(const Options& o) {
  Setup s;
  s.config = load(o);
  make_grid(s.config); // grid errors are configuration errors
  prepare_out(o, s.config);
  return s;
}

void build_problem(Setup& s) {
  s.q0 = initial_state(s.config);
  if (s.config.energy.magnetostatics) {
    s.stray = std::make_unique<StrayField>(make_eulerian(s.config, s.q0));
  }
  s.problem = make_problem(s.config, s.stray.get());
}

VoxelData voxel_fields(const State& q, const DeformedConfiguration& dc, const StrayField* stray) {
  VoxelData d;
  const auto n = static_cast<std::size_t>(dc.grid.voxel_count());
  auto& mask = d.scalars["mask"];
  auto& degree = d.scalars["degree"];
  mask.resize(n);
  degree.resize(n);
  for (std::size_t v = 0; v < n; ++v) {
    mask[v] = dc.in_mask(static_cast<int>(v)) ? 1.0 : 0.0;
    degree[v] = dc.degree[v];
  }
  if (stray) {
    const StrayFieldPotential pot = stray->potential(q);
    d.scalars["zeta"] = pot.zeta;
    d.vectors["grad_zeta"] = pot.grad_zeta;
    d.vectors["m"] = pot.source;
  }
  return d;
}

} // namespace

int cmd_minimize(const Options& o) {
  Setup s;
  try {
    s = setup(o);
  } catch (const Error& e) {
    log_error(e.what());
    return kConfigError;
  }
  try {
    build_problem(s);
    log_info("minimizing on " + std::to_string(s.q0.grid.cell_count()) + " cells");
    const OptimizeResult r = minimize_static(0.0, s.q0, s.problem, s.config.optimizer);
    if (!r.converged) log_info("iteration cap reached before the gradient tolerance");

    json energy = to_json(r.energy);
    json summary{{"energy", energy}, {"iterations", r.iterations}, {"converged", r.converged}};
    write_json(path(o, "energy.json"), summary);
    write_json(path(o, "state.json"), to_json(r.state));
    write_convergence_csv(path(o, "convergence.csv"), r.log);

    const DeformedConfiguration dc = deformed_configuration(r.state, make_eulerian(s.config, r.state));
    const CiarletNecasReport cn = ciarlet_necas_check(r.state, dc);
    write_json(path(o, "ciarlet_necas.json"), to_json(cn));
    if (s.config.write_vtk) {
      write_vtk_state(path(o, "state.vtk"), r.state);
      write_vtk_voxels(path(o, "eulerian.vtk"), dc.grid, voxel_fields(r.state, dc, s.stray.get()));
    }
    if (!cn.satisfied) {
      log_error("Ciarlet-Necas condition violated: lhs " + std::to_string(cn.lhs) + " > rhs " +
                std::to_string(cn.rhs));
      return kAdmissibility;
    }
    return kOk;
  } catch (const Error& e) {
    return fail(e);
  }
}

int cmd_evolve(const Options& o) {
  Setup s;
  try {
    s = setup(o);
  } catch (const Error& e) {
    log_error(e.what());
    return kConfigError;
  }
  try {
    build_problem(s);
    StabilityOptions stab = s.config.stability;
    StabilityReport initial_report;
    State q0;
    try {
      q0 = prepare_initial(s.q0, s.problem, s.config.optimizer, stab, &initial_report);
    } catch (const LineSearchStalled& e) {
      throw StepFailed(0, e.what());
    }

    const std::string log_path = path(o, "trajectory.jsonl");
    std::ostringstream log;
    bool audits_ok = initial_report.passed;
    EvolveOptions eo;
    eo.optimizer = s.config.optimizer;
    eo.stability = stab;
    eo.on_step = [&](int i, const State& q, const StepAudit& a) {
      log << to_json(a).dump() << '\n';
      const double scale = std::max(1.0, std::abs(a.energy.total));
      if (!a.stability_passed || a.energy_inequality_gap > kAuditTol * scale || a.apriori_gap > kAuditTol * scale) {
        audits_ok = false;
        log_error("hard audit failed at step " + std::to_string(i));
      }
      if (s.config.write_vtk) {
        char name[32];
        std::snprintf(name, sizeof name, "step_%04d.vtk", i);
        write_vtk_state(path(o, name), q);
      }
    };

    Trajectory traj;
    try {
      traj = evolve(q0, s.config.partition, s.problem, eo);
    } catch (const Error& e) {
      write_text(log_path, log.str());
      throw;
    }
    write_text(log_path, log.str());

    const EnergyBalanceReport eb = energy_balance_report(traj, s.problem);
    json summary{
        {"steps", static_cast<int>(traj.steps.size()) - 1},
        {"final_time", traj.partition.final_time()},
        {"total_dissipation", trajectory_variation(traj.states)},
        {"gronwall", {{"L", traj.gronwall.L}, {"M", traj.gronwall.M}}},
        {"initial_stability", to_json(initial_report)},
        {"energy_balance",
         {{"upper_gap", eb.upper_gap}, {"lower_gap", eb.lower_gap}, {"worst_upper", eb.worst_upper},
          {"worst_lower", eb.worst_lower}}},
        {"audits_passed", audits_ok},
    };
    write_json(path(o, "summary.json"), summary);
    write_json(path(o, "state.json"), to_json(traj.states.back()));
    return audits_ok ? kOk : kAdmissibility;
  } catch (const Error& e) {
    return fail(e);
  }
}

int cmd_check(const Options& o) {
  RunConfig c;
  try {
    if (!o.config.empty()) c = load(o);
  } catch (const Error& e) {
    log_error(e.what());
    return kConfigError;
  }
  try {
    return run_suite(o.suite, c) ? kOk : kAdmissibility;
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ConfigError) {
      log_error(e.what());
      return kConfigError;
    }
    return fail(e);
  }
}

int cmd_degree(const Options& o) {
  RunConfig c;
  try {
    c = load(o);
    make_grid(c);
  } catch (const Error& e) {
    log_error(e.what());
    return kConfigError;
  }
  try {
    const State q = initial_state(c);
    const Vec3 xi(o.point[0], o.point[1], o.point[2]);
    std::cout << topological_degree(q.grid, q.y, xi) << '\n';
    return kOk;
  } catch (const Error& e) {
    return fail(e);
  }
}

} // namespace chiralmag::cli
