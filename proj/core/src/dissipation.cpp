#include "chiralmag/dissipation.hpp"

#include "chiralmag/errors.hpp"
#include "chiralmag/kinematics.hpp"
#include "chiralmag/parallel.hpp"

#include <algorithm>

namespace chiralmag {

LagrangeanMagnetization lagrangean_magnetization(const State& q) {
  LagrangeanMagnetization out;
  const auto nc = static_cast<std::size_t>(q.grid.cell_count());
  out.z.assign(nc * 8, Vec3::Zero());
  out.weights.assign(nc * 8, 0.0);
  const double vol = q.grid.cell_volume();
  parallel_for(nc, [&](std::size_t c) {
    const auto& rule = gauss_rule();
    for (std::size_t g = 0; g < rule.size(); ++g) {
      const Mat3 F = deformation_gradient(q.grid, q.y, static_cast<int>(c), rule[g].xi);
      const Vec3 mu = interpolate(q.grid, q.mu.nodes, static_cast<int>(c), rule[g].xi);
      const double n = mu.norm();
      if (!(n > 1e-12)) throw Error(ErrorCode::DegenerateMagnetization, "mu vanishes at a quadrature point");
      out.z[c * 8 + g] = adjugate(F) * (mu / n);
      out.weights[c * 8 + g] = rule[g].weight * vol;
    }
  });
  return out;
}

double dissipation_distance(const LagrangeanMagnetization& a, const LagrangeanMagnetization& b) {
  if (a.z.size() != b.z.size()) throw Error(ErrorCode::GridMismatch, "Lagrangean magnetizations differ in size");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.z.size(); ++i) sum += a.weights[i] * (a.z[i] - b.z[i]).norm();
  return sum;
}

double dissipation_distance(const State& q, const State& q_hat) {
  if (!q.grid.same_layout(q_hat.grid)) throw Error(ErrorCode::GridMismatch, "states live on different grids");
  return dissipation_distance(lagrangean_magnetization(q), lagrangean_magnetization(q_hat));
}

double trajectory_variation(const std::vector<State>& states, std::size_t first, std::size_t last) {
  if (states.empty()) return 0.0;
  last = std::min(last, states.size() - 1);
  double sum = 0.0;
  for (std::size_t i = first + 1; i <= last; ++i) sum += dissipation_distance(states[i], states[i - 1]);
  return sum;
}

double trajectory_variation(const std::vector<State>& states) {
  return states.empty() ? 0.0 : trajectory_variation(states, 0, states.size() - 1);
}

} // namespace chiralmag
