#pragma once

#include "chiralmag/fields.hpp"

#include <vector>

namespace chiralmag {

/// Z = adj(grad y) mu/|mu| at every quadrature point, cell-major with the
/// 8 Gauss points of a cell contiguous. `weights` carry the quadrature weight
/// times the cell volume.
struct LagrangeanMagnetization {
  std::vector<Vec3> z;
  std::vector<double> weights;
};

LagrangeanMagnetization lagrangean_magnetization(const State& q);

/// L^1(Omega) distance of the Lagrangean magnetizations. Throws GridMismatch
/// if the states live on different grids.
double dissipation_distance(const State& q, const State& q_hat);
double dissipation_distance(const LagrangeanMagnetization& a, const LagrangeanMagnetization& b);

/// Sum of D(q_i, q_{i-1}) for first < i <= last.
double trajectory_variation(const std::vector<State>& states, std::size_t first, std::size_t last);
double trajectory_variation(const std::vector<State>& states);

} // namespace chiralmag
