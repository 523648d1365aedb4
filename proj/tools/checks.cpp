#include "commands.hpp"

#include "chiralmag/dissipation.hpp"
#include "chiralmag/energy.hpp"
#include "chiralmag/errors.hpp"
#include "chiralmag/fixtures.hpp"
#include "chiralmag/geometry.hpp"
#include "chiralmag/kinematics.hpp"
#include "chiralmag/objective.hpp"
#include "chiralmag/piola.hpp"
#include "chiralmag/strayfield.hpp"

#include <Eigen/Geometry>

#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

namespace chiralmag::cli {
namespace {

struct Row {
  std::string name;
  double value;
  double limit;
  bool pass;
};

using Suite = std::function<std::vector<Row>(const RunConfig&)>;

Row at_most(std::string name, double value, double limit) { return {std::move(name), value, limit, value <= limit}; }
Row at_least(std::string name, double value, double limit) { return {std::move(name), value, limit, value >= limit}; }

std::vector<Row> piola_suite(const RunConfig& c) {
  // Bump field vanishing on the box boundary.
  const Grid grid = unit_cube_grid({6, 6, 6});
  const Vec3 dir(0.3, -0.5, 0.8);
  TestVectorField zeta;
  zeta.value = [dir](const Vec3& x) {
    double b = 1.0;
    for (int d = 0; d < 3; ++d) b *= x[d] * x[d] * (1 - x[d]) * (1 - x[d]);
    return Vec3(b * dir);
  };
  zeta.gradient = [dir](const Vec3& x) {
    Vec3 g;
    for (int d = 0; d < 3; ++d) {
      double b = 2 * x[d] * (1 - x[d]) * (1 - 2 * x[d]);
      for (int e = 0; e < 3; ++e)
        if (e != d) b *= x[e] * x[e] * (1 - x[e]) * (1 - x[e]);
      g[d] = b;
    }
    return Mat3(dir * g.transpose());
  };
  std::vector<Row> rows;
  rows.push_back(at_most("identity", std::abs(piola_residual(grid, identity_state(grid).y, zeta)), 1e-12));
  for (int s = 1; s <= 3; ++s) {
    const State q = random_smooth_state(grid, c.seed + s, 0.25);
    rows.push_back(at_most("random seed " + std::to_string(c.seed + s), std::abs(piola_residual(grid, q.y, zeta)), 1e-3));
  }
  return rows;
}

// Points of the two wedges V+ and V- of Ball's map and points off its image.
std::vector<Row> degree_suite(const RunConfig& c) {
  const State q = ball_map_state(16);
  std::mt19937_64 rng(c.seed);
  std::uniform_real_distribution<double> u(0.05, 0.95);
  int wrong_in = 0, wrong_out = 0;
  for (int i = 0; i < 50; ++i) {
    const double x1 = (i % 2 ? 1.0 : -1.0) * u(rng);
    const Vec3 xi(x1, 2 * u(rng) - 1, (2 * u(rng) - 1) * std::abs(x1) * 0.9);
    if (topological_degree(q.grid, q.y, xi) != 1) ++wrong_in;
    const Vec3 out(x1 * 0.8, 2 * u(rng) - 1, (i % 4 < 2 ? 1.0 : -1.0) * (std::abs(x1) * 0.8 + 0.05 + 0.1 * u(rng)));
    if (topological_degree(q.grid, q.y, out) != 0) ++wrong_out;
  }
  return {at_most("wrong degree inside wedges", wrong_in, 0), at_most("wrong degree off image", wrong_out, 0),
          at_most("degree far away", std::abs(topological_degree(q.grid, q.y, Vec3(3, 0, 0))), 0)};
}

std::vector<Row> geometry_suite(const RunConfig& c) {
  const State q = ball_map_state(16);
  const EulerianGrid eg{Box{Vec3::Constant(-2), Vec3::Constant(2)}, {32, 32, 32}};
  const DeformedConfiguration dc = deformed_configuration(q, eg);
  std::mt19937_64 rng(c.seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (int i = 0; i < 50; ++i) {
    const int cell = static_cast<int>(u(rng) * q.grid.cell_count()) % q.grid.cell_count();
    const Vec3 xi(u(rng), u(rng), u(rng));
    const Mat3 F = deformation_gradient(q.grid, q.y, cell, xi);
    const Vec3 x = q.grid.reference_point(cell, xi);
    const double s = x.x() > 0 ? 1.0 : -1.0;
    Mat3 expected;
    expected << std::abs(x.x()), 0, -s * x.z(), 0, std::abs(x.x()), 0, 0, 0, 1;
    worst = std::max(worst, (cofactor(F) - expected).cwiseAbs().maxCoeff());
  }
  const CiarletNecasReport cn = ciarlet_necas_check(q, dc);
  return {at_most("|components - 2|", std::abs(dc.component_count() - 2), 0),
          at_most("cofactor deviation", worst, 1e-10), at_least("Ciarlet-Necas satisfied", cn.satisfied, 1)};
}

std::vector<Row> ciarlet_necas_suite(const RunConfig&) {
  const State wrap = wrap_state(16);
  const auto dw = deformed_configuration(wrap, EulerianGrid::enclosing(wrap.y.nodes, {48, 48, 48}, 2.0));
  const State id = identity_state(unit_cube_grid({8, 8, 8}));
  const auto di = deformed_configuration(id, EulerianGrid::enclosing(id.y.nodes, {32, 32, 32}, 2.0));
  return {at_least("wrap_3pi lhs/rhs", ciarlet_necas_check(wrap, dw).ratio, 1.4),
          at_most("identity lhs/rhs", ciarlet_necas_check(id, di).ratio, 1.02)};
}

std::vector<Row> dissipation_suite(const RunConfig& c) {
  const Grid grid = unit_cube_grid({4, 4, 4});
  std::mt19937_64 rng(c.seed);
  std::normal_distribution<double> n(0.0, 1.0);
  double worst = 0.0;
  for (int s = 0; s < 3; ++s) {
    const State q = random_smooth_state(grid, c.seed + s, 0.25);
    for (int k = 0; k < 5; ++k) {
      const Eigen::Quaterniond r = Eigen::Quaterniond(n(rng), n(rng), n(rng), n(rng)).normalized();
      const Vec3 b(n(rng), n(rng), n(rng));
      State moved = q;
      for (auto& y : moved.y.nodes) y = r * y + b;
      for (auto& m : moved.mu.nodes) m = r * m;
      worst = std::max(worst, dissipation_distance(q, moved));
    }
  }
  return {at_most("rigid motion D / vol", worst / grid.volume(), 1e-10)};
}

std::vector<Row> coercivity_suite(const RunConfig& c) {
  int violations = 0;
  double worst = 1e300;
  for (int s = 0; s < 20; ++s) {
    const State q = random_smooth_state(unit_cube_grid({4, 4, 4}), c.seed + s, 0.3);
    const CoercivityReport r = coercivity_floor(q, c.material);
    if (!r.floor_holds) ++violations;
    worst = std::min(worst, r.energy - r.floor);
  }
  return {at_most("violations", violations, 0), at_least("min E - floor", worst, 0.0)};
}

std::vector<Row> strayfield_suite(const RunConfig&) {
  const EulerianGrid eg{Box{Vec3::Constant(-2), Vec3::Constant(2)}, {32, 32, 32}};
  const StrayFieldPotential pot = solve_potential(uniform_ball_raster(eg, Vec3::UnitZ()));
  MaterialModel M;
  const double exact = (4.0 * std::acos(-1.0) / 3.0) / 6.0;
  std::vector<double> phi(static_cast<std::size_t>(eg.voxel_count()), 0.0);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const Index3 n = eg.n;
  for (int k = 1; k + 1 < n[2]; ++k)
    for (int j = 1; j + 1 < n[1]; ++j)
      for (int i = 1; i + 1 < n[0]; ++i) phi[static_cast<std::size_t>(eg.index(i, j, k))] = u(rng);
  return {at_most("ball energy rel error", std::abs(magnetostatic_energy(pot, M) - exact) / exact, 0.1),
          at_most("weak-form residual", weak_form_residual(pot, phi), 1e-6)};
}

std::vector<Row> gradients_suite(const RunConfig& c) {
  const State q = random_smooth_state(unit_cube_grid({3, 3, 3}, FaceSet{1}, FaceSet{2}), c.seed, 0.2, true);
  Problem p;
  p.material = c.material;
  p.loads = c.loads;
  p.options.magnetostatics = false;
  p.options.regularizer = true;
  Objective obj(p, 1e-3, 1e-4);
  obj.set_time(0.3);
  State anchor = q;
  for (auto& m : anchor.mu.nodes) m = (m + Vec3(0.2, -0.1, 0.3)).normalized();
  obj.set_anchor(anchor);
  const GradientCheck g = check_gradient(obj, q);
  return {at_most("y relative error", g.max_rel_error_y, 1e-5), at_most("mu relative error", g.max_rel_error_mu, 1e-5)};
}

const std::map<std::string, Suite>& suites() {
  static const std::map<std::string, Suite> s{
      {"piola", piola_suite},           {"degree", degree_suite},         {"geometry", geometry_suite},
      {"ciarlet_necas", ciarlet_necas_suite}, {"dissipation", dissipation_suite}, {"coercivity", coercivity_suite},
      {"strayfield", strayfield_suite}, {"gradients", gradients_suite},
  };
  return s;
}

} // namespace

bool run_suite(const std::string& name, const RunConfig& config) {
  std::vector<std::string> names;
  if (name == "all") {
    for (const auto& [n, _] : suites()) names.push_back(n);
  } else if (suites().count(name)) {
    names.push_back(name);
  } else {
    throw Error(ErrorCode::ConfigError, "unknown suite '" + name + "'");
  }
  bool ok = true;
  std::printf("%-14s %-30s %14s %14s  %s\n", "suite", "check", "value", "limit", "result");
  for (const auto& n : names) {
    for (const Row& r : suites().at(n)(config)) {
      std::printf("%-14s %-30s %14.6g %14.6g  %s\n", n.c_str(), r.name.c_str(), r.value, r.limit,
                  r.pass ? "PASS" : "FAIL");
      ok = ok && r.pass;
    }
  }
  std::fflush(stdout);
  return ok;
}

} // namespace chiralmag::cli
