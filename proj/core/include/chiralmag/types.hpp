#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstddef>
#include <vector>

namespace chiralmag {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Index3 = std::array<int, 3>;

/// Nodal vector field stored contiguously; used for both y and mu.
using NodalVectors = std::vector<Vec3>;

} // namespace chiralmag
