#pragma once

#include "chiralmag/fields.hpp"

#include <functional>

namespace chiralmag {

/// Smooth test field zeta on the reference box together with its gradient
/// (row i = gradient of component i).
struct TestVectorField {
  std::function<Vec3(const Vec3&)> value;
  std::function<Mat3(const Vec3&)> gradient;
};

/// Quadrature value of  int_Omega cof(grad y) : grad zeta dx.
/// Vanishes for every zeta with compact support when y is W^{1,p}; the discrete
/// value only measures quadrature error.
double piola_residual(const Grid& grid, const DeformationField& y, const TestVectorField& zeta);

} // namespace chiralmag
