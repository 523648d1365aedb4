#include "chiralmag/energy.hpp"
#include "chiralmag/fixtures.hpp"
#include "chiralmag/objective.hpp"

#include <benchmark/benchmark.h>

using namespace chiralmag;

static void BM_TotalEnergy(benchmark::State& st) {
  const int n = static_cast<int>(st.range(0));
  const State q = random_smooth_state(unit_cube_grid({n, n, n}), 7, 0.2, true);
  MaterialModel M;
  EnergyOptions opt;
  opt.magnetostatics = false;
  opt.regularizer = true;
  for (auto _ : st) benchmark::DoNotOptimize(total_energy(0.0, q, M, {}, opt, nullptr).total);
  st.SetItemsProcessed(st.iterations() * q.grid.cell_count());
}
BENCHMARK(BM_TotalEnergy)->Arg(4)->Arg(8)->Arg(12)->Unit(benchmark::kMillisecond);

static void BM_ObjectiveGradient(benchmark::State& st) {
  const int n = static_cast<int>(st.range(0));
  const State q = random_smooth_state(unit_cube_grid({n, n, n}), 7, 0.2, true);
  Problem p;
  p.options.magnetostatics = false;
  p.options.regularizer = true;
  Objective obj(p, 1e-3, 1e-4);
  obj.set_anchor(q);
  NodalVectors dy, dmu;
  for (auto _ : st) benchmark::DoNotOptimize(obj.value_and_gradient(q, &dy, &dmu));
  st.SetItemsProcessed(st.iterations() * q.grid.cell_count());
}
BENCHMARK(BM_ObjectiveGradient)->Arg(4)->Arg(8)->Arg(12)->Unit(benchmark::kMillisecond);
