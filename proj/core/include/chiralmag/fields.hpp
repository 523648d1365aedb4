#pragma once

#include "chiralmag/types.hpp"

#include <array>
#include <bitset>
#include <optional>
#include <string>
#include <vector>

namespace chiralmag {

/// Faces of the reference box, in the order x-, x+, y-, y+, z-, z+.
enum class Face : int { XMin = 0, XMax, YMin, YMax, ZMin, ZMax };
inline constexpr std::array<Face, 6> kAllFaces = {Face::XMin, Face::XMax, Face::YMin,
                                                  Face::YMax, Face::ZMin, Face::ZMax};

std::string face_name(Face f);
std::optional<Face> parse_face(const std::string& name);
inline int face_axis(Face f) { return static_cast<int>(f) / 2; }
inline bool face_is_max(Face f) { return static_cast<int>(f) % 2 == 1; }

using FaceSet = std::bitset<6>;

struct Box {
  Vec3 lo = Vec3::Zero();
  Vec3 hi = Vec3::Ones();
  Vec3 extent() const { return hi - lo; }
  double volume() const { return extent().prod(); }
};

/// Structured hexahedral grid on an axis-aligned box. Nodes are numbered
/// x-fastest; the 8 nodes of a cell are numbered by the bit pattern
/// (bit0 = x offset, bit1 = y offset, bit2 = z offset).
class Grid {
public:
  Grid() = default;
  /// Validates on construction.
  Grid(Box box, Index3 cells, FaceSet dirichlet, FaceSet neumann = {});

  /// Throws InvalidGrid when a cell count is < 1, Gamma is empty, or the
  /// Dirichlet and Neumann face sets intersect.
  void validate() const;

  const Box& box() const { return box_; }
  const Index3& cells() const { return cells_; }
  const FaceSet& dirichlet_faces() const { return dirichlet_; }
  const FaceSet& neumann_faces() const { return neumann_; }

  int node_count() const { return (cells_[0] + 1) * (cells_[1] + 1) * (cells_[2] + 1); }
  int cell_count() const { return cells_[0] * cells_[1] * cells_[2]; }
  Vec3 spacing() const;
  double cell_volume() const { return spacing().prod(); }
  double volume() const { return box_.volume(); }

  int node_index(int i, int j, int k) const { return i + (cells_[0] + 1) * (j + (cells_[1] + 1) * k); }
  Index3 node_ijk(int n) const;
  int cell_index(int i, int j, int k) const { return i + cells_[0] * (j + cells_[1] * k); }
  Index3 cell_ijk(int c) const;
  Vec3 node_position(int n) const;
  std::array<int, 8> cell_nodes(int c) const;
  /// Reference point of local coordinates xi in cell c.
  Vec3 reference_point(int c, const Vec3& xi) const;

  bool node_on_face(int n, Face f) const;
  bool is_dirichlet_node(int n) const;
  std::vector<int> dirichlet_nodes() const;

  /// Cell containing reference point X (clamped to the box) and its local coordinates.
  std::pair<int, Vec3> locate(const Vec3& X) const;

  bool same_layout(const Grid& other) const;

private:
  Box box_;
  Index3 cells_{1, 1, 1};
  FaceSet dirichlet_;
  FaceSet neumann_;
};

/// Trilinear shape functions on the unit cube.
std::array<double, 8> shape_values(const Vec3& xi);
/// Gradients of the shape functions with respect to local coordinates.
std::array<Vec3, 8> shape_local_gradients(const Vec3& xi);

struct QuadraturePoint {
  Vec3 xi;
  double weight; // fraction of the cell volume
};

/// 2x2x2 Gauss rule on the unit cube; weights sum to 1 (scaled by cell volume by callers).
const std::array<QuadraturePoint, 8>& gauss_rule();
/// 2x2 Gauss rule on the unit square.
const std::array<std::array<double, 2>, 4>& gauss_rule_2d();

struct DeformationField {
  NodalVectors nodes;
};

struct MagnetizationField {
  NodalVectors nodes;
};

/// Admissible state q = (y, mu) with mu = m o y stored as the pullback.
struct State {
  Grid grid;
  DeformationField y;
  MagnetizationField mu;
};

/// Exact gradient of the trilinear interpolant of y at a point of cell c.
Mat3 deformation_gradient(const Grid& grid, const DeformationField& y, int cell, const Vec3& xi);

/// Trilinear interpolation of a nodal vector field.
Vec3 interpolate(const Grid& grid, const NodalVectors& field, int cell, const Vec3& xi);

/// Everything the energy densities need at one point of the reference grid.
struct PointKinematics {
  Mat3 F;          // grad y
  Vec3 mu_raw;     // interpolated pullback magnetization (not normalized)
  Mat3 grad_mu_raw;
  double mu_norm;  // |mu_raw|
  Vec3 lambda;     // mu_raw / |mu_raw|
  Mat3 grad_m;     // reference gradient of the normalized field
};

/// Throws DegenerateMagnetization if the interpolated magnetization vanishes.
PointKinematics point_kinematics(const State& q, int cell, const Vec3& xi);

/// Eulerian gradient of m at y(X): G = grad(m o y) (grad y)^{-1}, where m o y is
/// the normalized interpolant. Throws NonPositiveDeterminant.
Mat3 eulerian_magnetization_gradient(const State& q, int cell, const Vec3& xi);

/// Normalizes every node. Throws ZeroVectorNode.
MagnetizationField project_to_sphere(const NodalVectors& raw);

/// Piecewise affine boundary datum: each Dirichlet face carries its own map
/// X -> A X + b. Faces without an entry use `fallback`.
struct AffineMap {
  Mat3 A = Mat3::Identity();
  Vec3 b = Vec3::Zero();
  Vec3 operator()(const Vec3& X) const { return A * X + b; }
};

struct BoundaryDatum {
  AffineMap fallback;
  std::array<std::optional<AffineMap>, 6> per_face;

  const AffineMap& map_for(Face f) const;
  /// Prescribed position of a Dirichlet node (first matching face wins).
  Vec3 value(const Grid& grid, int node) const;
};

/// Overwrites Dirichlet nodes of y with the datum.
void apply_boundary(const Grid& grid, const BoundaryDatum& datum, DeformationField& y);
/// Maximum deviation of Dirichlet nodes from the datum.
double boundary_deviation(const Grid& grid, const BoundaryDatum& datum, const DeformationField& y);

/// Refines every cell into 2x2x2 cells; fields are interpolated exactly.
State prolongate(const State& q);

/// Minimum det grad y over all quadrature points.
double min_quadrature_determinant(const Grid& grid, const DeformationField& y);

/// Nodal field sampled from a function of the reference point.
template <class Fn>
NodalVectors sample_nodal(const Grid& grid, Fn&& fn) {
  NodalVectors out(static_cast<std::size_t>(grid.node_count()));
  for (int n = 0; n < grid.node_count(); ++n) out[static_cast<std::size_t>(n)] = fn(grid.node_position(n));
  return out;
}

} // namespace chiralmag
