// One pass/fail line per acceptance criterion. Usage:
//   chiralmag_acceptance [--only N] [--cli PATH] [--configs DIR]
#include "chiralmag/config.hpp"
#include "chiralmag/dissipation.hpp"
#include "chiralmag/energy.hpp"
#include "chiralmag/fixtures.hpp"
#include "chiralmag/geometry.hpp"
#include "chiralmag/kinematics.hpp"
#include "chiralmag/logging.hpp"
#include "chiralmag/objective.hpp"
#include "chiralmag/quasistatic.hpp"
#include "chiralmag/strayfield.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <chrono>
#include <cstdarg>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace chiralmag;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = std::numbers::pi;

std::string g_cli = CHIRALMAG_CLI_PATH;
std::string g_configs = CHIRALMAG_CONFIG_DIR;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

// Trilinear interpolation written out independently of the library.
Vec3 trilinear(const State& q, int cell, const Vec3& xi, Mat3* F) {
  const Grid& g = q.grid;
  const Index3 n = g.cells();
  const int ci = cell % n[0], cj = (cell / n[0]) % n[1], ck = cell / (n[0] * n[1]);
  const Vec3 h = g.spacing();
  Vec3 y = Vec3::Zero();
  Mat3 G = Mat3::Zero();
  for (int c = 0; c < 8; ++c) {
    const int a = c & 1, b = (c >> 1) & 1, d = (c >> 2) & 1;
    const Vec3& yn = q.y.nodes[static_cast<std::size_t>(g.node_index(ci + a, cj + b, ck + d))];
    const double wx = a ? xi.x() : 1 - xi.x(), wy = b ? xi.y() : 1 - xi.y(), wz = d ? xi.z() : 1 - xi.z();
    const double sx = a ? 1 : -1, sy = b ? 1 : -1, sz = d ? 1 : -1;
    y += wx * wy * wz * yn;
    G.col(0) += sx * wy * wz / h.x() * yn;
    G.col(1) += wx * sy * wz / h.y() * yn;
    G.col(2) += wx * wy * sz / h.z() * yn;
  }
  if (F) *F = G;
  return y;
}

// 3-point Gauss-Legendre per axis.
template <class Fn>
double integrate_cells(const Grid& g, Fn&& fn) {
  const double x[3] = {0.5 - 0.5 * std::sqrt(0.6), 0.5, 0.5 + 0.5 * std::sqrt(0.6)};
  const double w[3] = {5.0 / 18, 8.0 / 18, 5.0 / 18};
  double s = 0.0;
  for (int c = 0; c < g.cell_count(); ++c)
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        for (int k = 0; k < 3; ++k) s += w[i] * w[j] * w[k] * fn(c, Vec3(x[i], x[j], x[k]));
  return s * g.cell_volume();
}

// 1. Helix frequency optimum by golden-section search on the discrete energy.
Outcome helix_optimum() {
  const Grid grid = unit_cube_grid({12, 12, 12});
  MaterialModel M;
  M.alpha = 1.0;
  M.kappa = 2.0;
  M.b = 0.0;
  auto energy = [&](double w) {
    const State q = helix_state(grid, w);
    return exchange_energy(q, M) + dmi_energy(q, M);
  };
  double lo = 0.1, hi = 3.0;
  const double r = (std::sqrt(5.0) - 1) / 2;
  double a = hi - r * (hi - lo), b = lo + r * (hi - lo);
  double fa = energy(a), fb = energy(b);
  while (hi - lo > 1e-6) {
    if (fa < fb) {
      hi = b, b = a, fb = fa, a = hi - r * (hi - lo), fa = energy(a);
    } else {
      lo = a, a = b, fa = fb, b = lo + r * (hi - lo), fb = energy(b);
    }
  }
  const double w = 0.5 * (lo + hi);
  const double e = energy(w);
  const double w_exact = M.kappa / (2 * M.alpha);
  const double e_exact = -M.kappa * M.kappa / (4 * M.alpha) * grid.volume();
  const double ew = std::abs(w - w_exact) / w_exact, ee = std::abs(e - e_exact) / std::abs(e_exact);
  return {ew <= 0.05 && ee <= 0.05, fmt("omega*=%.6f (err %.2e), E=%.6f (err %.2e), tol 5%%", w, ew, e, ee)};
}

// 2. Rigid motions create no dissipation.
Outcome rigid_dissipation() {
  const Grid grid = unit_cube_grid({6, 6, 6});
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> n(0.0, 1.0);
  double worst = 0.0;
  for (int s = 0; s < 5; ++s) {
    const State q = random_smooth_state(grid, 100 + s, 0.3);
    for (int k = 0; k < 20; ++k) {
      const Mat3 R = Eigen::Quaterniond(n(rng), n(rng), n(rng), n(rng)).normalized().toRotationMatrix();
      const Vec3 b(n(rng), n(rng), n(rng));
      State moved = q;
      for (auto& y : moved.y.nodes) y = R * y + b;
      for (auto& m : moved.mu.nodes) m = R * m;
      worst = std::max(worst, dissipation_distance(q, moved));
    }
  }
  const double limit = 1e-10 * grid.volume();
  return {worst < limit, fmt("max D = %.3e over 100 motions, limit %.0e", worst, limit)};
}

// 3. Ball's map: degrees, components, cofactor.
Outcome ball_map_geometry() {
  const State q = ball_map_state(16);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int bad_in = 0, bad_out = 0;
  for (int i = 0; i < 100; ++i) {
    // V+ and V-: |xi3| < |xi1| inside the image of the two halves.
    const double x1 = (i % 2 ? 1 : -1) * (0.05 + 0.9 * u(rng));
    const Vec3 in(x1, -0.95 + 1.9 * u(rng), (-0.95 + 1.9 * u(rng)) * std::abs(x1));
    if (topological_degree(q.grid, q.y, in) != 1) ++bad_in;
  }
  for (int i = 0; i < 100; ++i) {
    Vec3 out;
    if (i % 3 == 0) {
      out = Vec3(-2 + 4 * u(rng), -2 + 4 * u(rng), 1.2 + u(rng)) * (i % 2 ? 1 : -1);
    } else {
      const double x1 = (i % 2 ? 1 : -1) * (0.05 + 0.9 * u(rng));
      const double gap = std::min(0.05, 0.5 * (1 - std::abs(x1)));
      const double z = std::abs(x1) + gap + (1.0 - std::abs(x1) - gap) * u(rng);
      out = Vec3(x1, -0.95 + 1.9 * u(rng), (i % 4 < 2 ? 1 : -1) * z);
    }
    if (topological_degree(q.grid, q.y, out) != 0) ++bad_out;
  }
  const EulerianGrid eg{Box{Vec3::Constant(-2), Vec3::Constant(2)}, {32, 32, 32}};
  const int components = deformed_configuration(q, eg).component_count();
  double worst = 0.0;
  for (int i = 0; i < 50; ++i) {
    const int cell = std::min(q.grid.cell_count() - 1, static_cast<int>(u(rng) * q.grid.cell_count()));
    const Vec3 xi(u(rng), u(rng), u(rng));
    Mat3 F;
    trilinear(q, cell, xi, &F);
    const Vec3 x = q.grid.reference_point(cell, xi);
    const double s = x.x() >= 0 ? 1.0 : -1.0;
    Mat3 expected;
    expected << std::abs(x.x()), 0, -s * x.z(), 0, std::abs(x.x()), 0, 0, 0, 1;
    worst = std::max(worst, (cofactor(F) - expected).cwiseAbs().maxCoeff());
  }
  return {bad_in == 0 && bad_out == 0 && components == 2 && worst <= 1e-10,
          fmt("wrong degrees %d inside / %d outside, components %d, cofactor error %.2e", bad_in, bad_out, components,
              worst)};
}

// 4. Ciarlet-Necas: the wrap is flagged, optimizer outputs are not.
Outcome ciarlet_necas() {
  const State wrap = wrap_state(16);
  const auto dw = deformed_configuration(wrap, EulerianGrid::enclosing(wrap.y.nodes, {48, 48, 48}, 2.0));
  const CiarletNecasReport rw = ciarlet_necas_check(wrap, dw);
  bool ok = rw.ratio >= 1.4;
  std::string detail = fmt("wrap_3pi lhs %.3f rhs %.3f ratio %.3f;", rw.lhs, rw.rhs, rw.ratio);
  for (const char* name : {"helix.json", "ramp.json", "traction.json"}) {
    RunConfig c = load_config((fs::path(g_configs) / name).string());
    c.optimizer.max_outer_iters = std::min(c.optimizer.max_outer_iters, 40);
    const State q0 = initial_state(c);
    std::unique_ptr<StrayField> stray;
    if (c.energy.magnetostatics) stray = std::make_unique<StrayField>(make_eulerian(c, q0));
    const Problem p = make_problem(c, stray.get());
    const OptimizeResult res = minimize_static(0.0, q0, p, c.optimizer);
    const State& q = res.state;
    const auto dc = deformed_configuration(q, EulerianGrid::enclosing(q.y.nodes, {48, 48, 48}, 2.0));
    // Independent lhs: 27-point quadrature of det grad y.
    const double lhs = integrate_cells(q.grid, [&](int cell, const Vec3& xi) {
      Mat3 F;
      trilinear(q, cell, xi, &F);
      return F.determinant();
    });
    double covered = 0.0;
    for (int v = 0; v < dc.grid.voxel_count(); ++v) covered += dc.covering[static_cast<std::size_t>(v)] > 0;
    const double rhs = covered * dc.grid.voxel_volume();
    const bool sat = lhs <= rhs * 1.02;
    ok = ok && sat && ciarlet_necas_check(q, dc).satisfied;
    detail += fmt(" %s lhs/rhs %.3f;", name, lhs / rhs);
  }
  return {ok, detail + " limits >= 1.4 / <= 1.02"};
}

// 5. Uniformly magnetized ball.
Outcome stray_ball() {
  const int N = 64;
  const EulerianGrid eg{Box{Vec3::Constant(-2), Vec3::Constant(2)}, {N, N, N}};
  const Vec3 m = Vec3::UnitZ();
  const VoxelField src = uniform_ball_raster(eg, m);
  const StrayFieldPotential pot = solve_potential(src);
  MaterialModel M;
  const double exact = M.mu0 * (4 * kPi / 3) / 6;
  const double energy = magnetostatic_energy(pot, M);
  const double e_err = std::abs(energy - exact) / exact;

  // Interior: the whole 5x5x5 neighbourhood is magnetized.
  auto inside = [&](int i, int j, int k) {
    if (i < 0 || j < 0 || k < 0 || i >= N || j >= N || k >= N) return false;
    return src.values[static_cast<std::size_t>(eg.index(i, j, k))].norm() > 0.5;
  };
  double worst = 0.0;
  int interior = 0;
  for (int k = 0; k < N; ++k)
    for (int j = 0; j < N; ++j)
      for (int i = 0; i < N; ++i) {
        bool all = true;
        for (int c = -2; c <= 2 && all; ++c)
          for (int b = -2; b <= 2 && all; ++b)
            for (int a = -2; a <= 2 && all; ++a) all = inside(i + a, j + b, k + c);
        if (!all) continue;
        ++interior;
        const Vec3 g = pot.grad_zeta[static_cast<std::size_t>(eg.index(i, j, k))];
        worst = std::max(worst, (g - m / 3).norm() / (1.0 / 3));
      }
  std::vector<double> phi(static_cast<std::size_t>(eg.voxel_count()), 0.0);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int k = 1; k + 1 < N; ++k)
    for (int j = 1; j + 1 < N; ++j)
      for (int i = 1; i + 1 < N; ++i) phi[static_cast<std::size_t>(eg.index(i, j, k))] = u(rng);
  const double res = weak_form_residual(pot, phi);
  return {e_err <= 0.05 && worst <= 0.03 && res <= 1e-6,
          fmt("energy err %.2e (<=5%%), interior field err %.2e over %d voxels (<=3%%), residual %.2e (<=1e-6)", e_err,
              worst, interior, res)};
}

// 6. Inverse identities on random smooth injective deformations.
Outcome inverse_identities_audit() {
  bool ok = true;
  std::string detail;
  int k = 0;
  for (std::uint64_t seed : {11u, 12u, 13u}) {
    const State q = random_smooth_state(unit_cube_grid({8, 8, 8}), seed, 0.3);
    const auto dc = deformed_configuration(q, EulerianGrid::enclosing(q.y.nodes, {48, 48, 48}, 2.0));
    const InverseJacobianReport r = inverse_jacobian_audit(q, dc);
    const double vol = 1.0;
    const double grad_y = integrate_cells(q.grid, [&](int cell, const Vec3& xi) {
      Mat3 F;
      trilinear(q, cell, xi, &F);
      return F.norm();
    });
    const double e2 = std::abs(r.det_inverse_integral - vol) / vol;
    const double e3 = std::abs(r.adj_inverse_integral - grad_y) / grad_y;
    ok = ok && e2 <= 0.02 && e3 <= 0.02;
    detail += fmt("%sseed %d: (ii) %.2e (iii) %.2e", k++ ? "; " : "", static_cast<int>(seed), e2, e3);
  }
  return {ok, detail + ", tol 2%"};
}

// 7. Quasistatic audits on the reversing-field schedule.
Outcome quasistatic_audits() {
  RunConfig c = load_config((fs::path(g_configs) / "ramp.json").string());
  const State q0_raw = initial_state(c);
  const Problem p = make_problem(c, nullptr);
  const State q0 = prepare_initial(q0_raw, p, c.optimizer, c.stability);
  EvolveOptions eo;
  eo.optimizer = c.optimizer;
  eo.stability = c.stability;
  const Trajectory traj = evolve(q0, c.partition, p, eo);
  const GronwallConstants& gc = traj.gronwall;
  const double e0 = p.energy(0.0, traj.states[0]).total;
  bool ok = traj.states.size() == 9;
  double worst_margin = 1e300, worst_ineq = -1e300, worst_apriori = -1e300, worst_gronwall = 1e300;
  int min_competitors = 1 << 30;
  double cumulative = 0.0;
  for (std::size_t i = 1; i < traj.states.size(); ++i) {
    const double t = traj.partition.times[i];
    const State& prev = traj.states[i - 1];
    const State& q = traj.states[i];
    const double e = p.energy(t, q).total;
    const double scale = std::max(1.0, std::abs(e));
    const double d = dissipation_distance(prev, q);
    cumulative += d;
    // Loads are polynomial in t, so the power integral at the held state is
    // exactly the energy difference at that state.
    const double ineq = (e + d - p.energy(t, prev).total) / scale;
    worst_ineq = std::max(worst_ineq, ineq);
    const double apriori = (e + gc.M + cumulative - (e0 + gc.M) * std::exp(gc.L * t)) / scale;
    worst_apriori = std::max(worst_apriori, apriori);

    StabilityOptions so = c.stability;
    so.seed = 9000 + i;
    so.previous.assign(traj.states.begin(), traj.states.begin() + static_cast<long>(i));
    const StabilityReport rep = stability_audit(t, q, p, so);
    min_competitors = std::min(min_competitors, rep.competitors);
    worst_margin = std::min(worst_margin, rep.worst_margin / rep.scale);
    ok = ok && traj.steps[i].stability_passed;
  }
  // Certification of (L, M) by a central difference in time on every state.
  for (const State& q : traj.states) {
    for (int k = 0; k <= 50; ++k) {
      const double t = std::clamp(k / 50.0, 1e-3, 1 - 1e-3);
      const double dt = (p.energy(t + 1e-4, q).total - p.energy(t - 1e-4, q).total) / 2e-4;
      worst_gronwall = std::min(worst_gronwall, gc.L * (p.energy(t, q).total + gc.M) - std::abs(dt));
    }
  }
  ok = ok && worst_margin >= -1e-6 && min_competitors >= 50 && worst_ineq <= 1e-6 && worst_apriori <= 1e-6 &&
       worst_gronwall >= 0 && cumulative > 0;
  return {ok, fmt("min margin %.2e (>= -1e-6, %d+ competitors), energy inequality %.2e, a-priori %.2e, "
                  "Gronwall slack %.2e, total dissipation %.4f",
                  worst_margin, min_competitors, worst_ineq, worst_apriori, worst_gronwall, cumulative)};
}

// 8. Gradients of the full smoothed objective against central differences.
Outcome gradients() {
  double worst = 0.0;
  for (std::uint64_t seed : {21u, 22u, 23u}) {
    const State q = random_smooth_state(unit_cube_grid({4, 4, 4}, FaceSet{1}, FaceSet{2}), seed, 0.2, true);
    Problem p;
    p.loads.f.coeffs = {Vec3(0.1, -0.2, 0.3), Vec3(0.05, 0, 0)};
    p.loads.g.coeffs = {Vec3(0.2, 0.1, 0), Vec3(0, 0.1, 0)};
    p.loads.h.coeffs = {Vec3(0.5, 0.3, -0.2), Vec3(0, 0, 1)};
    p.options.magnetostatics = false;
    p.options.regularizer = true;
    Objective obj(p, 1e-3, 1e-4);
    obj.set_time(0.4);
    State anchor = random_smooth_state(q.grid, seed + 50, 0.2, true);
    obj.set_anchor(anchor);
    // Central differences of the library value, written here.
    NodalVectors dy, dmu;
    obj.value_and_gradient(q, &dy, &dmu);
    const double h = 1e-6;
    double err = 0.0, scale = 0.0;
    State t = q;
    for (int a = 0; a < q.grid.node_count(); ++a) {
      const auto ia = static_cast<std::size_t>(a);
      for (int d = 0; d < 3; ++d) {
        if (!q.grid.is_dirichlet_node(a)) {
          t.y.nodes[ia][d] += h;
          const double fp = obj.value(t);
          t.y.nodes[ia][d] -= 2 * h;
          const double fm = obj.value(t);
          t.y.nodes[ia][d] = q.y.nodes[ia][d];
          err = std::max(err, std::abs((fp - fm) / (2 * h) - dy[ia][d]));
          scale = std::max(scale, std::abs(dy[ia][d]));
        }
        t.mu.nodes[ia][d] += h;
        const double fp = obj.value(t);
        t.mu.nodes[ia][d] -= 2 * h;
        const double fm = obj.value(t);
        t.mu.nodes[ia][d] = q.mu.nodes[ia][d];
        err = std::max(err, std::abs((fp - fm) / (2 * h) - dmu[ia][d]));
        scale = std::max(scale, std::abs(dmu[ia][d]));
      }
    }
    worst = std::max(worst, err / scale);
  }
  return {worst <= 1e-5, fmt("max relative error %.2e over 3 states (all terms, Huber D and TV), tol 1e-5", worst)};
}

// 9. Coercivity floor on random admissible states.
Outcome coercivity() {
  MaterialModel M;
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> amp(0.05, 0.6);
  int violations = 0;
  double worst = 1e300;
  const CoercivityConstants k = coercivity_constants(M, 1.0);
  for (int s = 0; s < 100; ++s) {
    const State q = random_smooth_state(unit_cube_grid({4, 4, 4}), 900 + s, amp(rng));
    if (!(min_quadrature_determinant(q.grid, q.y) > 0)) continue;
    const EnergyBreakdown e = total_energy(0.0, q, M, {}, EnergyOptions{false, false}, nullptr);
    const CoercivityReport r = coercivity_floor(q, M);
    const double floor = k.c1 * r.grad_y_p_norm + k.c2 * r.grad_m_sq - k.c3 - k.elastic_offset;
    const double slack = e.internal() - floor;
    worst = std::min(worst, slack);
    if (slack < 0) ++violations;
  }
  return {violations == 0, fmt("%d violations over 100 states, min E - floor %.3e", violations, worst)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// 10. Identical (config, seed) produce identical JSON.
Outcome determinism() {
  const fs::path base = fs::temp_directory_path() / "chiralmag_acceptance_det";
  fs::remove_all(base);
  const std::string cfg = (fs::path(g_configs) / "traction.json").string();
  for (const char* run : {"a", "b"}) {
    const std::string cmd = "CHIRALMAG_LOG=error \"" + g_cli + "\" minimize --config \"" + cfg + "\" --out \"" +
                            (base / run).string() + "\" --seed 17";
    if (std::system(cmd.c_str()) != 0) return {false, "minimize run failed: " + cmd};
  }
  int files = 0;
  for (const auto& e : fs::directory_iterator(base / "a")) {
    if (e.path().extension() != ".json") continue;
    ++files;
    if (slurp(e.path()) != slurp(base / "b" / e.path().filename())) {
      return {false, "differs: " + e.path().filename().string()};
    }
  }
  return {files >= 4, fmt("%d JSON files bitwise identical", files)};
}

struct Criterion {
  int id;
  const char* name;
  double budget_s;
  std::function<Outcome()> run;
};

} // namespace

int main(int argc, char** argv) {
  set_log_level(LogLevel::Error);
  int only = 0;
  for (int i = 1; i + 1 < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--only") only = std::atoi(argv[++i]);
    else if (a == "--cli") g_cli = argv[++i];
    else if (a == "--configs") g_configs = argv[++i];
  }
  const std::vector<Criterion> all{
      {1, "helix optimum", 30, helix_optimum},
      {2, "rigid-motion dissipation", 5, rigid_dissipation},
      {3, "Ball's map geometry", 60, ball_map_geometry},
      {4, "Ciarlet-Necas discrimination", 60, ciarlet_necas},
      {5, "stray-field ball oracle", 60, stray_ball},
      {6, "inverse identities", 120, inverse_identities_audit},
      {7, "quasistatic audits", 600, quasistatic_audits},
      {8, "gradient correctness", 60, gradients},
      {9, "coercivity floor", 60, coercivity},
      {10, "determinism", 60, determinism},
  };
  bool all_pass = true;
  for (const auto& c : all) {
    if (only && c.id != only) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool pass = o.pass && secs <= c.budget_s;
    all_pass = all_pass && pass;
    std::printf("criterion %2d %-30s %s  %s [%.1fs / %.0fs]\n", c.id, c.name, pass ? "PASS" : "FAIL", o.detail.c_str(),
                secs, c.budget_s);
    std::fflush(stdout);
  }
  return all_pass ? 0 : 1;
}
