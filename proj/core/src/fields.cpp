#include "chiralmag/fields.hpp"

#include "chiralmag/errors.hpp"
#include "chiralmag/kinematics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace chiralmag {

namespace {
constexpr const char* kFaceNames[6] = {"x-", "x+", "y-", "y+", "z-", "z+"};
}

std::string face_name(Face f) { return kFaceNames[static_cast<int>(f)]; }

std::optional<Face> parse_face(const std::string& name) {
  for (int i = 0; i < 6; ++i) {
    if (name == kFaceNames[i]) return static_cast<Face>(i);
  }
  return std::nullopt;
}

Grid::Grid(Box box, Index3 cells, FaceSet dirichlet, FaceSet neumann)
    : box_(std::move(box)), cells_(cells), dirichlet_(dirichlet), neumann_(neumann) {
  validate();
}

void Grid::validate() const {
  for (int d = 0; d < 3; ++d) {
    if (cells_[d] < 1) throw Error(ErrorCode::InvalidGrid, "cell counts must be >= 1");
    if (!(box_.hi[d] > box_.lo[d])) throw Error(ErrorCode::InvalidGrid, "box must have positive extent");
  }
  if (dirichlet_.none()) {
    throw Error(ErrorCode::InvalidGrid,
                "Dirichlet boundary Gamma is empty; a deformation datum needs H^2(Gamma) > 0");
  }
  if ((dirichlet_ & neumann_).any()) {
    throw Error(ErrorCode::InvalidGrid, "Dirichlet and Neumann face sets must be disjoint");
  }
}

Vec3 Grid::spacing() const {
  const Vec3 e = box_.extent();
  return {e.x() / cells_[0], e.y() / cells_[1], e.z() / cells_[2]};
}

Index3 Grid::node_ijk(int n) const {
  const int nx = cells_[0] + 1, ny = cells_[1] + 1;
  return {n % nx, (n / nx) % ny, n / (nx * ny)};
}

Index3 Grid::cell_ijk(int c) const {
  return {c % cells_[0], (c / cells_[0]) % cells_[1], c / (cells_[0] * cells_[1])};
}

Vec3 Grid::node_position(int n) const {
  const Index3 ijk = node_ijk(n);
  const Vec3 h = spacing();
  return {box_.lo.x() + ijk[0] * h.x(), box_.lo.y() + ijk[1] * h.y(), box_.lo.z() + ijk[2] * h.z()};
}

std::array<int, 8> Grid::cell_nodes(int c) const {
  const Index3 ijk = cell_ijk(c);
  std::array<int, 8> out{};
  for (int a = 0; a < 8; ++a) {
    out[a] = node_index(ijk[0] + (a & 1), ijk[1] + ((a >> 1) & 1), ijk[2] + ((a >> 2) & 1));
  }
  return out;
}

Vec3 Grid::reference_point(int c, const Vec3& xi) const {
  const Index3 ijk = cell_ijk(c);
  const Vec3 h = spacing();
  return {box_.lo.x() + (ijk[0] + xi.x()) * h.x(), box_.lo.y() + (ijk[1] + xi.y()) * h.y(),
          box_.lo.z() + (ijk[2] + xi.z()) * h.z()};
}

bool Grid::node_on_face(int n, Face f) const {
  const Index3 ijk = node_ijk(n);
  const int axis = face_axis(f);
  return face_is_max(f) ? ijk[axis] == cells_[axis] : ijk[axis] == 0;
}

bool Grid::is_dirichlet_node(int n) const {
  for (Face f : kAllFaces) {
    if (dirichlet_.test(static_cast<int>(f)) && node_on_face(n, f)) return true;
  }
  return false;
}

std::vector<int> Grid::dirichlet_nodes() const {
  std::vector<int> out;
  for (int n = 0; n < node_count(); ++n) {
    if (is_dirichlet_node(n)) out.push_back(n);
  }
  return out;
}

std::pair<int, Vec3> Grid::locate(const Vec3& X) const {
  const Vec3 h = spacing();
  Index3 ijk{};
  Vec3 xi;
  for (int d = 0; d < 3; ++d) {
    const double s = (X[d] - box_.lo[d]) / h[d];
    const int i = std::clamp(static_cast<int>(std::floor(s)), 0, cells_[d] - 1);
    ijk[d] = i;
    xi[d] = s - i;
  }
  return {cell_index(ijk[0], ijk[1], ijk[2]), xi};
}

bool Grid::same_layout(const Grid& other) const {
  return cells_ == other.cells_ && (box_.lo - other.box_.lo).norm() == 0.0 &&
         (box_.hi - other.box_.hi).norm() == 0.0;
}

std::array<double, 8> shape_values(const Vec3& xi) {
  std::array<double, 8> N{};
  for (int a = 0; a < 8; ++a) {
    const double fx = (a & 1) ? xi.x() : 1.0 - xi.x();
    const double fy = ((a >> 1) & 1) ? xi.y() : 1.0 - xi.y();
    const double fz = ((a >> 2) & 1) ? xi.z() : 1.0 - xi.z();
    N[a] = fx * fy * fz;
  }
  return N;
}

std::array<Vec3, 8> shape_local_gradients(const Vec3& xi) {
  std::array<Vec3, 8> dN{};
  for (int a = 0; a < 8; ++a) {
    const double sx = (a & 1) ? 1.0 : -1.0;
    const double sy = ((a >> 1) & 1) ? 1.0 : -1.0;
    const double sz = ((a >> 2) & 1) ? 1.0 : -1.0;
    const double fx = (a & 1) ? xi.x() : 1.0 - xi.x();
    const double fy = ((a >> 1) & 1) ? xi.y() : 1.0 - xi.y();
    const double fz = ((a >> 2) & 1) ? xi.z() : 1.0 - xi.z();
    dN[a] = Vec3(sx * fy * fz, fx * sy * fz, fx * fy * sz);
  }
  return dN;
}

const std::array<QuadraturePoint, 8>& gauss_rule() {
  static const std::array<QuadraturePoint, 8> rule = [] {
    const double g = 0.5 / std::sqrt(3.0);
    std::array<QuadraturePoint, 8> r{};
    for (int a = 0; a < 8; ++a) {
      r[a].xi = Vec3((a & 1) ? 0.5 + g : 0.5 - g, ((a >> 1) & 1) ? 0.5 + g : 0.5 - g,
                     ((a >> 2) & 1) ? 0.5 + g : 0.5 - g);
      r[a].weight = 0.125;
    }
    return r;
  }();
  return rule;
}

const std::array<std::array<double, 2>, 4>& gauss_rule_2d() {
  static const std::array<std::array<double, 2>, 4> rule = [] {
    const double g = 0.5 / std::sqrt(3.0);
    return std::array<std::array<double, 2>, 4>{
        {{0.5 - g, 0.5 - g}, {0.5 + g, 0.5 - g}, {0.5 - g, 0.5 + g}, {0.5 + g, 0.5 + g}}};
  }();
  return rule;
}

Mat3 deformation_gradient(const Grid& grid, const DeformationField& y, int cell, const Vec3& xi) {
  const auto nodes = grid.cell_nodes(cell);
  const auto dN = shape_local_gradients(xi);
  const Vec3 inv_h = grid.spacing().cwiseInverse();
  Mat3 F = Mat3::Zero();
  for (int a = 0; a < 8; ++a) {
    F += y.nodes[static_cast<std::size_t>(nodes[a])] * dN[a].cwiseProduct(inv_h).transpose();
  }
  return F;
}

Vec3 interpolate(const Grid& grid, const NodalVectors& field, int cell, const Vec3& xi) {
  const auto nodes = grid.cell_nodes(cell);
  const auto N = shape_values(xi);
  Vec3 v = Vec3::Zero();
  for (int a = 0; a < 8; ++a) v += N[a] * field[static_cast<std::size_t>(nodes[a])];
  return v;
}

PointKinematics point_kinematics(const State& q, int cell, const Vec3& xi) {
  const auto nodes = q.grid.cell_nodes(cell);
  const auto N = shape_values(xi);
  const auto dN = shape_local_gradients(xi);
  const Vec3 inv_h = q.grid.spacing().cwiseInverse();
  PointKinematics pk;
  pk.F.setZero();
  pk.mu_raw.setZero();
  pk.grad_mu_raw.setZero();
  for (int a = 0; a < 8; ++a) {
    const auto n = static_cast<std::size_t>(nodes[a]);
    const Vec3 g = dN[a].cwiseProduct(inv_h);
    pk.F += q.y.nodes[n] * g.transpose();
    pk.mu_raw += N[a] * q.mu.nodes[n];
    pk.grad_mu_raw += q.mu.nodes[n] * g.transpose();
  }
  pk.mu_norm = pk.mu_raw.norm();
  if (!(pk.mu_norm > 1e-12)) {
    std::ostringstream os;
    os << "interpolated magnetization vanishes in cell " << cell;
    throw Error(ErrorCode::DegenerateMagnetization, os.str());
  }
  pk.lambda = pk.mu_raw / pk.mu_norm;
  const Mat3 P = Mat3::Identity() - pk.lambda * pk.lambda.transpose();
  pk.grad_m = P * pk.grad_mu_raw / pk.mu_norm;
  return pk;
}

Mat3 eulerian_magnetization_gradient(const State& q, int cell, const Vec3& xi) {
  const PointKinematics pk = point_kinematics(q, cell, xi);
  return pk.grad_m * inverse_gradient(pk.F);
}

MagnetizationField project_to_sphere(const NodalVectors& raw) {
  MagnetizationField out;
  out.nodes.reserve(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const double n = raw[i].norm();
    if (!(n > 0.0) || !std::isfinite(n)) {
      throw Error(ErrorCode::ZeroVectorNode, "node " + std::to_string(i) + " has no direction");
    }
    out.nodes.push_back(raw[i] / n);
  }
  return out;
}

const AffineMap& BoundaryDatum::map_for(Face f) const {
  const auto& m = per_face[static_cast<std::size_t>(f)];
  return m ? *m : fallback;
}

Vec3 BoundaryDatum::value(const Grid& grid, int node) const {
  const Vec3 X = grid.node_position(node);
  for (Face f : kAllFaces) {
    if (grid.dirichlet_faces().test(static_cast<int>(f)) && grid.node_on_face(node, f)) {
      return map_for(f)(X);
    }
  }
  return fallback(X);
}

void apply_boundary(const Grid& grid, const BoundaryDatum& datum, DeformationField& y) {
  for (int n : grid.dirichlet_nodes()) y.nodes[static_cast<std::size_t>(n)] = datum.value(grid, n);
}

double boundary_deviation(const Grid& grid, const BoundaryDatum& datum, const DeformationField& y) {
  double worst = 0.0;
  for (int n : grid.dirichlet_nodes()) {
    worst = std::max(worst, (y.nodes[static_cast<std::size_t>(n)] - datum.value(grid, n)).norm());
  }
  return worst;
}

State prolongate(const State& q) {
  const Index3 c = q.grid.cells();
  Grid fine(q.grid.box(), {2 * c[0], 2 * c[1], 2 * c[2]}, q.grid.dirichlet_faces(), q.grid.neumann_faces());
  State out{fine, {}, {}};
  out.y.nodes.resize(static_cast<std::size_t>(fine.node_count()));
  out.mu.nodes.resize(static_cast<std::size_t>(fine.node_count()));
  for (int n = 0; n < fine.node_count(); ++n) {
    const Index3 ijk = fine.node_ijk(n);
    Index3 cell{};
    Vec3 xi;
    for (int d = 0; d < 3; ++d) {
      cell[d] = std::min(ijk[d] / 2, c[d] - 1);
      xi[d] = 0.5 * (ijk[d] - 2 * cell[d]);
    }
    const int ci = q.grid.cell_index(cell[0], cell[1], cell[2]);
    out.y.nodes[static_cast<std::size_t>(n)] = interpolate(q.grid, q.y.nodes, ci, xi);
    out.mu.nodes[static_cast<std::size_t>(n)] = interpolate(q.grid, q.mu.nodes, ci, xi);
  }
  out.mu = project_to_sphere(out.mu.nodes);
  return out;
}

double min_quadrature_determinant(const Grid& grid, const DeformationField& y) {
  double worst = std::numeric_limits<double>::infinity();
  for (int c = 0; c < grid.cell_count(); ++c) {
    for (const auto& qp : gauss_rule()) {
      worst = std::min(worst, determinant(deformation_gradient(grid, y, c, qp.xi)));
    }
  }
  return worst;
}

} // namespace chiralmag
