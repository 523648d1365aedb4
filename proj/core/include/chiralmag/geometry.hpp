#pragma once

#include "chiralmag/eulerian_grid.hpp"
#include "chiralmag/fields.hpp"

#include <array>
#include <cstdint>
#include <vector>

namespace chiralmag {

struct Triangle {
  std::array<Vec3, 3> v;
};

/// Oriented triangulation of y(dOmega): every boundary cell face is split into
/// `subdivision`^2 sub-quads of two triangles each, with normals pointing
/// outward for orientation-preserving y.
struct BoundarySurface {
  std::vector<Triangle> triangles;

  static BoundarySurface build(const Grid& grid, const DeformationField& y, int subdivision = 1);

  /// Sum of signed solid angles divided by 4 pi.
  double winding(const Vec3& p) const;
  double distance(const Vec3& p) const;
};

/// Signed solid angle subtended by a triangle at p (Van Oosterom-Strackee).
double solid_angle(const Triangle& t, const Vec3& p);
double point_triangle_distance(const Triangle& t, const Vec3& p);

struct DegreeOptions {
  double boundary_tolerance = 1e-9; // absolute distance to y(dOmega)
  int subdivision = 1;
};

/// deg(y, Omega, xi) as the winding number of the mapped boundary.
/// Throws OnBoundaryImage when xi is within the tolerance of y(dOmega) and
/// NonIntegerWinding when rounding leaves a residual >= 0.2.
int topological_degree(const Grid& grid, const DeformationField& y, const Vec3& xi,
                       const DegreeOptions& options = {});
int topological_degree(const BoundarySurface& surface, const Vec3& xi, double boundary_tolerance);

struct Preimage {
  int cell = -1;
  Vec3 xi = Vec3::Zero();
  bool approximate = false; // found by the clamped fallback search
  bool valid() const { return cell >= 0; }
};

/// Damped Newton inversion of the trilinear map of one cell: 8 corner seeds
/// (after the cell centre), 30 iterations, step halving on overshoot. Returns
/// a local coordinate in [0,1]^3 (1e-9 slack) or an invalid preimage.
Preimage invert_in_cell(const Grid& grid, const DeformationField& y, int cell, const Vec3& target,
                        double tolerance);

struct DeformedConfigurationOptions {
  /// Voxels closer than this to y(dOmega), in units of the smallest voxel
  /// spacing, are flagged as boundary and excluded from Omega^y.
  double boundary_band = 1e-6;
  int subdivision = 1;
};

/// Voxel description of Omega^y: degree, covering number and one preimage per
/// covered voxel.
struct DeformedConfiguration {
  EulerianGrid grid;
  std::vector<int> degree;
  std::vector<int> covering;
  std::vector<std::uint8_t> boundary;
  std::vector<Preimage> preimage;
  /// Voxels within one spacing of y(dOmega) (by triangle bounding boxes).
  std::vector<std::uint8_t> near;
  /// Reference cells whose deformed bounding box meets the voxel.
  std::vector<std::vector<int>> candidates;

  bool in_mask(int v) const {
    const auto i = static_cast<std::size_t>(v);
    return boundary[i] == 0 && degree[i] > 0;
  }
  int mask_count() const;
  int covered_count() const;
  /// 6-connected components of the mask.
  int component_count() const;
};

DeformedConfiguration deformed_configuration(const State& q, const EulerianGrid& grid,
                                             const DeformedConfigurationOptions& options = {});
DeformedConfiguration deformed_configuration(const Grid& ref, const DeformationField& y,
                                             const EulerianGrid& grid,
                                             const DeformedConfigurationOptions& options = {});

struct CiarletNecasReport {
  double lhs = 0.0; // int det grad y dx
  double rhs = 0.0; // L^3(y(Omega)) from covered voxels
  double ratio = 0.0;
  bool satisfied = false;
};

inline constexpr double kCiarletNecasRelTol = 0.02;

CiarletNecasReport ciarlet_necas_check(const State& q, const DeformedConfiguration& dc,
                                       double tol_rel = kCiarletNecasRelTol, double tol_abs = 1e-12);
CiarletNecasReport ciarlet_necas_check(const Grid& ref, const DeformationField& y,
                                       const DeformedConfiguration& dc,
                                       double tol_rel = kCiarletNecasRelTol, double tol_abs = 1e-12);

struct InverseJacobianReport {
  double max_identity_error = 0.0;  // max |F F^{-1} - I| at preimages
  double det_inverse_integral = 0.0; // int_{Omega^y} det grad(y^{-1}) dxi
  double reference_volume = 0.0;     // L^3(Omega)
  double det_inverse_rel_error = 0.0;
  double adj_inverse_integral = 0.0; // int_{Omega^y} |adj grad(y^{-1})| dxi
  double grad_y_integral = 0.0;      // int_Omega |grad y| dx
  double adj_inverse_rel_error = 0.0;
  int voxels = 0;
};

/// Voxel quadrature of the inverse identities. Voxels away from y(dOmega)
/// count whole when masked; voxels near it are split into subsamples^3
/// points, each counted when it has a preimage. Throws MissingPreimage if a
/// masked voxel away from the boundary has no preimage record.
InverseJacobianReport inverse_jacobian_audit(const State& q, const DeformedConfiguration& dc, int subsamples = 4);

} // namespace chiralmag
