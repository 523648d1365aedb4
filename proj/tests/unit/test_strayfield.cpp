#include "support.hpp"

#include "chiralmag/fixtures.hpp"
#include "chiralmag/strayfield.hpp"

#include <numbers>

using namespace chiralmag;

namespace {

EulerianGrid box_grid(int n, double half = 2.0) {
  return EulerianGrid{Box{Vec3::Constant(-half), Vec3::Constant(half)}, {n, n, n}};
}

std::vector<double> interior_test_function(const EulerianGrid& g, std::uint64_t seed) {
  std::vector<double> phi(static_cast<std::size_t>(g.voxel_count()), 0.0);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int k = 1; k + 1 < g.n[2]; ++k)
    for (int j = 1; j + 1 < g.n[1]; ++j)
      for (int i = 1; i + 1 < g.n[0]; ++i) phi[static_cast<std::size_t>(g.index(i, j, k))] = u(rng);
  return phi;
}

} // namespace

TEST(StrayField, ZeroSourceZeroEnergy) {
  const EulerianGrid g = box_grid(8);
  VoxelField src{g, std::vector<Vec3>(static_cast<std::size_t>(g.voxel_count()), Vec3::Zero())};
  const StrayFieldPotential p = solve_potential(src);
  EXPECT_EQ(magnetostatic_energy(p, MaterialModel{}), 0.0);
}

TEST(StrayField, RejectsCoarseGrids) {
  const EulerianGrid g{Box{}, {8, 8, 4}};
  VoxelField src{g, std::vector<Vec3>(static_cast<std::size_t>(g.voxel_count()), Vec3::Zero())};
  test::expect_error(ErrorCode::DegenerateGrid, [&] { solve_potential(src); });
}

TEST(StrayField, UniformBallEnergy) {
  // E = mu0/2 int |grad zeta|^2 = mu0 |B| / 6 for |m| = 1.
  const EulerianGrid g = box_grid(32);
  const StrayFieldPotential p = solve_potential(uniform_ball_raster(g, Vec3::UnitX()));
  MaterialModel M;
  M.mu0 = 2.0;
  const double exact = M.mu0 * (4.0 * std::numbers::pi / 3.0) / 6.0;
  EXPECT_NEAR(magnetostatic_energy(p, M), exact, 0.1 * exact);
}

TEST(StrayField, WeakFormResidual) {
  const EulerianGrid g = box_grid(16);
  const StrayFieldPotential p = solve_potential(uniform_ball_raster(g, Vec3(1, 2, -1).normalized()));
  EXPECT_LT(weak_form_residual(p, interior_test_function(g, 1)), 1e-10);
}

TEST(StrayField, EnergyIsQuadraticAndRotationInvariantOnCube) {
  const EulerianGrid g = box_grid(16);
  const double e1 = magnetostatic_energy(solve_potential(uniform_ball_raster(g, Vec3::UnitX())), MaterialModel{});
  VoxelField twice = uniform_ball_raster(g, Vec3::UnitX());
  for (auto& v : twice.values) v *= 2;
  EXPECT_NEAR(magnetostatic_energy(solve_potential(twice), MaterialModel{}), 4 * e1, 1e-12 * e1);
  const double ez = magnetostatic_energy(solve_potential(uniform_ball_raster(g, Vec3::UnitZ())), MaterialModel{});
  EXPECT_NEAR(ez, e1, 1e-10 * e1); // cubic symmetry of the raster
}

TEST(StrayField, EnergyAndGradientOfState) {
  // Gradient against central differences away from mask changes.
  const State q = random_smooth_state(unit_cube_grid({3, 3, 3}), 2, 0.15, true);
  const StrayField sf(EulerianGrid::enclosing(q.y.nodes, {16, 16, 16}, 2.0));
  MaterialModel M;
  NodalVectors dy, dmu;
  const double e = sf.energy_and_gradient(q, M, &dy, &dmu);
  EXPECT_NEAR(e, sf.energy(q, M), 1e-14 * std::abs(e));
  EXPECT_GT(e, 0.0);
  const double h = 1e-6;
  for (int a : {5, 21, 40}) {
    State p = q, m = q;
    p.mu.nodes[static_cast<std::size_t>(a)].y() += h;
    m.mu.nodes[static_cast<std::size_t>(a)].y() -= h;
    EXPECT_NEAR((sf.energy(p, M) - sf.energy(m, M)) / (2 * h), dmu[static_cast<std::size_t>(a)].y(), 1e-6);
  }
}

TEST(StrayField, DomainEscapeIsReported) {
  const State q = identity_state(unit_cube_grid({2, 2, 2}));
  const StrayField sf(EulerianGrid{Box{Vec3::Constant(-0.05), Vec3::Constant(1.05)}, {8, 8, 8}});
  test::expect_error(ErrorCode::DomainEscaped, [&] { sf.energy(q, MaterialModel{}); });
}
