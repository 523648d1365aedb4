#pragma once

#include "chiralmag/fields.hpp"

#include <vector>

namespace chiralmag {

/// Voxel raster of a box in the deformed (Eulerian) space. Voxel centers sit
/// at lo + (i + 1/2) h; voxels are numbered x-fastest.
struct EulerianGrid {
  Box box;
  Index3 n{8, 8, 8};

  Vec3 spacing() const {
    const Vec3 e = box.extent();
    return {e.x() / n[0], e.y() / n[1], e.z() / n[2]};
  }
  double voxel_volume() const { return spacing().prod(); }
  int voxel_count() const { return n[0] * n[1] * n[2]; }
  int index(int i, int j, int k) const { return i + n[0] * (j + n[1] * k); }
  Index3 ijk(int v) const { return {v % n[0], (v / n[0]) % n[1], v / (n[0] * n[1])}; }
  Vec3 center(int v) const {
    const Index3 c = ijk(v);
    const Vec3 h = spacing();
    return {box.lo.x() + (c[0] + 0.5) * h.x(), box.lo.y() + (c[1] + 0.5) * h.y(),
            box.lo.z() + (c[2] + 0.5) * h.z()};
  }

  /// Box centred on the bounding box of `points` whose extent is `padding`
  /// times the bounding-box extent per axis (degenerate axes use the largest
  /// extent).
  static EulerianGrid enclosing(const std::vector<Vec3>& points, Index3 voxels, double padding = 2.0);
};

/// Bounding box of a point cloud.
Box bounding_box(const std::vector<Vec3>& points);

} // namespace chiralmag
