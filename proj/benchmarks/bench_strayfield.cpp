#include "chiralmag/fixtures.hpp"
#include "chiralmag/strayfield.hpp"

#include <benchmark/benchmark.h>

using namespace chiralmag;

static void BM_PoissonSolve(benchmark::State& st) {
  const int n = static_cast<int>(st.range(0));
  const EulerianGrid eg{Box{Vec3::Constant(-2), Vec3::Constant(2)}, {n, n, n}};
  const VoxelField src = uniform_ball_raster(eg, Vec3::UnitZ());
  for (auto _ : st) benchmark::DoNotOptimize(solve_potential(src).zeta.data());
  st.SetItemsProcessed(st.iterations() * eg.voxel_count());
}
BENCHMARK(BM_PoissonSolve)->Arg(16)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

static void BM_StrayEnergyGradient(benchmark::State& st) {
  const int n = static_cast<int>(st.range(0));
  const State q = random_smooth_state(unit_cube_grid({6, 6, 6}), 3, 0.2, true);
  const StrayField stray(EulerianGrid::enclosing(q.y.nodes, {n, n, n}, 2.0));
  MaterialModel M;
  NodalVectors dy, dmu;
  for (auto _ : st) {
    // Perturb one node so the configuration cache is rebuilt each pass.
    State moved = q;
    moved.y.nodes[0].x() += 1e-9 * static_cast<double>(st.iterations() % 2);
    benchmark::DoNotOptimize(stray.energy_and_gradient(moved, M, &dy, &dmu));
  }
}
BENCHMARK(BM_StrayEnergyGradient)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);
