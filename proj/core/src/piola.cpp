#include "chiralmag/piola.hpp"

#include "chiralmag/kinematics.hpp"

namespace chiralmag {

double piola_residual(const Grid& grid, const DeformationField& y, const TestVectorField& zeta) {
  const double vol = grid.cell_volume();
  double sum = 0.0;
  for (int c = 0; c < grid.cell_count(); ++c) {
    double cell_sum = 0.0;
    for (const auto& qp : gauss_rule()) {
      const Mat3 C = cofactor(deformation_gradient(grid, y, c, qp.xi));
      const Mat3 G = zeta.gradient(grid.reference_point(c, qp.xi));
      cell_sum += qp.weight * C.cwiseProduct(G).sum();
    }
    sum += cell_sum * vol;
  }
  return sum;
}

} // namespace chiralmag
