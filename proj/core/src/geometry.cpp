#include "chiralmag/geometry.hpp"

#include "chiralmag/errors.hpp"
#include "chiralmag/kinematics.hpp"
#include "chiralmag/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numbers>
#include <optional>
#include <sstream>

namespace chiralmag {

Box bounding_box(const std::vector<Vec3>& points) {
  Box b;
  b.lo = Vec3::Constant(std::numeric_limits<double>::infinity());
  b.hi = -b.lo;
  for (const auto& p : points) {
    b.lo = b.lo.cwiseMin(p);
    b.hi = b.hi.cwiseMax(p);
  }
  return b;
}

EulerianGrid EulerianGrid::enclosing(const std::vector<Vec3>& points, Index3 voxels, double padding) {
  const Box bb = bounding_box(points);
  Vec3 e = bb.extent();
  const double emax = std::max(e.maxCoeff(), 1e-12);
  for (int d = 0; d < 3; ++d) {
    if (e[d] < 1e-9 * emax) e[d] = emax;
  }
  const Vec3 c = 0.5 * (bb.lo + bb.hi);
  EulerianGrid g;
  g.box.lo = c - 0.5 * padding * e;
  g.box.hi = c + 0.5 * padding * e;
  g.n = voxels;
  return g;
}

double solid_angle(const Triangle& t, const Vec3& p) {
  const Vec3 a = t.v[0] - p, b = t.v[1] - p, c = t.v[2] - p;
  const double la = a.norm(), lb = b.norm(), lc = c.norm();
  const double num = a.dot(b.cross(c));
  const double den = la * lb * lc + a.dot(b) * lc + a.dot(c) * lb + b.dot(c) * la;
  return 2.0 * std::atan2(num, den);
}

double point_triangle_distance(const Triangle& t, const Vec3& p) {
  // Closest point on triangle (Ericson, Real-Time Collision Detection 5.1.5).
  const Vec3& a = t.v[0];
  const Vec3& b = t.v[1];
  const Vec3& c = t.v[2];
  const Vec3 ab = b - a, ac = c - a, ap = p - a;
  const double d1 = ab.dot(ap), d2 = ac.dot(ap);
  if (d1 <= 0.0 && d2 <= 0.0) return ap.norm();
  const Vec3 bp = p - b;
  const double d3 = ab.dot(bp), d4 = ac.dot(bp);
  if (d3 >= 0.0 && d4 <= d3) return bp.norm();
  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) {
    const double v = d1 / (d1 - d3);
    return (p - (a + v * ab)).norm();
  }
  const Vec3 cp = p - c;
  const double d5 = ab.dot(cp), d6 = ac.dot(cp);
  if (d6 >= 0.0 && d5 <= d6) return cp.norm();
  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) {
    const double w = d2 / (d2 - d6);
    return (p - (a + w * ac)).norm();
  }
  const double va = d3 * d6 - d5 * d4;
  if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
    const double w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
    return (p - (b + w * (c - b))).norm();
  }
  const double denom = 1.0 / (va + vb + vc);
  const double v = vb * denom, w = vc * denom;
  return (p - (a + ab * v + ac * w)).norm();
}

BoundarySurface BoundarySurface::build(const Grid& grid, const DeformationField& y, int subdivision) {
  const int s = std::max(1, subdivision);
  const Index3 n = grid.cells();
  BoundarySurface surf;
  for (Face f : kAllFaces) {
    const int axis = face_axis(f);
    const int u = (axis + 1) % 3, v = (axis + 2) % 3;
    const bool is_max = face_is_max(f);
    const int layer = is_max ? n[axis] - 1 : 0;
    for (int iu = 0; iu < n[u]; ++iu) {
      for (int iv = 0; iv < n[v]; ++iv) {
        Index3 ijk{};
        ijk[axis] = layer;
        ijk[u] = iu;
        ijk[v] = iv;
        const int c = grid.cell_index(ijk[0], ijk[1], ijk[2]);
        auto point = [&](int a, int b) {
          Vec3 xi;
          xi[axis] = is_max ? 1.0 : 0.0;
          xi[u] = static_cast<double>(a) / s;
          xi[v] = static_cast<double>(b) / s;
          return interpolate(grid, y.nodes, c, xi);
        };
        for (int a = 0; a < s; ++a) {
          for (int b = 0; b < s; ++b) {
            const Vec3 p00 = point(a, b), p10 = point(a + 1, b), p11 = point(a + 1, b + 1),
                       p01 = point(a, b + 1);
            if (is_max) {
              surf.triangles.push_back({{p00, p10, p11}});
              surf.triangles.push_back({{p00, p11, p01}});
            } else {
              surf.triangles.push_back({{p00, p11, p10}});
              surf.triangles.push_back({{p00, p01, p11}});
            }
          }
        }
      }
    }
  }
  return surf;
}

double BoundarySurface::winding(const Vec3& p) const {
  double sum = 0.0;
  for (const auto& t : triangles) sum += solid_angle(t, p);
  return sum / (4.0 * std::numbers::pi);
}

double BoundarySurface::distance(const Vec3& p) const {
  double d = std::numeric_limits<double>::infinity();
  for (const auto& t : triangles) d = std::min(d, point_triangle_distance(t, p));
  return d;
}

int topological_degree(const BoundarySurface& surface, const Vec3& xi, double boundary_tolerance) {
  const double dist = surface.distance(xi);
  if (dist <= boundary_tolerance) {
    std::ostringstream os;
    os << "point lies within " << dist << " of y(dOmega)";
    throw Error(ErrorCode::OnBoundaryImage, os.str());
  }
  const double w = surface.winding(xi);
  const double r = std::round(w);
  if (std::abs(w - r) >= 0.2) {
    std::ostringstream os;
    os << "winding " << w << " is not close to an integer";
    throw Error(ErrorCode::NonIntegerWinding, os.str());
  }
  return static_cast<int>(r);
}

int topological_degree(const Grid& grid, const DeformationField& y, const Vec3& xi,
                       const DegreeOptions& options) {
  return topological_degree(BoundarySurface::build(grid, y, options.subdivision), xi,
                            options.boundary_tolerance);
}

namespace {

struct CellMap {
  std::array<Vec3, 8> nodes;
  Vec3 eval(const Vec3& xi) const {
    const auto N = shape_values(xi);
    Vec3 p = Vec3::Zero();
    for (int a = 0; a < 8; ++a) p += N[a] * nodes[a];
    return p;
  }
  Mat3 jacobian(const Vec3& xi) const {
    const auto dN = shape_local_gradients(xi);
    Mat3 J = Mat3::Zero();
    for (int a = 0; a < 8; ++a) J += nodes[a] * dN[a].transpose();
    return J;
  }
};

CellMap cell_map(const Grid& grid, const DeformationField& y, int cell) {
  CellMap m;
  const auto ids = grid.cell_nodes(cell);
  for (int a = 0; a < 8; ++a) m.nodes[a] = y.nodes[static_cast<std::size_t>(ids[a])];
  return m;
}

/// Newton from one seed; returns the converged local coordinate or nothing.
std::optional<Vec3> newton_from(const CellMap& m, const Vec3& target, Vec3 xi, double tol, bool clamp) {
  Vec3 r = m.eval(xi) - target;
  double rn = r.norm();
  for (int it = 0; it < 30 && rn > tol; ++it) {
    const Mat3 J = m.jacobian(xi);
    const double dj = determinant(J);
    if (!(std::abs(dj) > 1e-300)) return std::nullopt;
    Vec3 step = -(adjugate(J) / dj) * r;
    bool improved = false;
    for (int k = 0; k < 12; ++k) {
      Vec3 trial = xi + step;
      if (clamp) trial = trial.cwiseMax(0.0).cwiseMin(1.0);
      if ((trial.array().abs() > 4.0).any()) {
        step *= 0.5;
        continue;
      }
      const Vec3 rt = m.eval(trial) - target;
      if (rt.norm() < rn) {
        xi = trial;
        r = rt;
        rn = rt.norm();
        improved = true;
        break;
      }
      step *= 0.5;
    }
    if (!improved) break;
  }
  if (clamp) return xi;
  if (rn <= tol) return xi;
  return std::nullopt;
}

bool inside_unit_cube(const Vec3& xi, double slack) {
  return (xi.array() >= -slack).all() && (xi.array() <= 1.0 + slack).all();
}

const std::array<Vec3, 9>& seeds() {
  static const std::array<Vec3, 9> s = [] {
    std::array<Vec3, 9> out;
    out[0] = Vec3(0.5, 0.5, 0.5);
    for (int a = 0; a < 8; ++a) out[a + 1] = Vec3(a & 1, (a >> 1) & 1, (a >> 2) & 1);
    return out;
  }();
  return s;
}

} // namespace

Preimage invert_in_cell(const Grid& grid, const DeformationField& y, int cell, const Vec3& target,
                        double tolerance) {
  const CellMap m = cell_map(grid, y, cell);
  for (const Vec3& seed : seeds()) {
    const auto xi = newton_from(m, target, seed, tolerance, false);
    if (xi && inside_unit_cube(*xi, 1e-9)) {
      return {cell, xi->cwiseMax(0.0).cwiseMin(1.0), false};
    }
  }
  return {};
}

int DeformedConfiguration::mask_count() const {
  int c = 0;
  for (int v = 0; v < grid.voxel_count(); ++v) c += in_mask(v) ? 1 : 0;
  return c;
}

int DeformedConfiguration::covered_count() const {
  return static_cast<int>(std::count_if(covering.begin(), covering.end(), [](int c) { return c > 0; }));
}

namespace {

/// Labels 6-connected components of voxels satisfying `pred`; returns labels
/// (-1 for voxels outside) and the number of components.
template <class Pred>
std::pair<std::vector<int>, int> label_components(const EulerianGrid& g, Pred&& pred) {
  std::vector<int> label(static_cast<std::size_t>(g.voxel_count()), -1);
  int count = 0;
  std::deque<int> queue;
  for (int v0 = 0; v0 < g.voxel_count(); ++v0) {
    if (label[static_cast<std::size_t>(v0)] >= 0 || !pred(v0)) continue;
    label[static_cast<std::size_t>(v0)] = count;
    queue.push_back(v0);
    while (!queue.empty()) {
      const int v = queue.front();
      queue.pop_front();
      const Index3 c = g.ijk(v);
      for (int d = 0; d < 3; ++d) {
        for (int s : {-1, 1}) {
          Index3 nb = c;
          nb[d] += s;
          if (nb[d] < 0 || nb[d] >= g.n[d]) continue;
          const int w = g.index(nb[0], nb[1], nb[2]);
          if (label[static_cast<std::size_t>(w)] >= 0 || !pred(w)) continue;
          label[static_cast<std::size_t>(w)] = count;
          queue.push_back(w);
        }
      }
    }
    ++count;
  }
  return {std::move(label), count};
}

/// Voxel index range [lo, hi] whose centers lie in [a, b] along each axis.
std::pair<Index3, Index3> voxel_range(const EulerianGrid& g, const Vec3& a, const Vec3& b) {
  const Vec3 h = g.spacing();
  Index3 lo{}, hi{};
  for (int d = 0; d < 3; ++d) {
    lo[d] = std::max(0, static_cast<int>(std::ceil((a[d] - g.box.lo[d]) / h[d] - 0.5)));
    hi[d] = std::min(g.n[d] - 1, static_cast<int>(std::floor((b[d] - g.box.lo[d]) / h[d] - 0.5)));
  }
  return {lo, hi};
}

} // namespace

int DeformedConfiguration::component_count() const {
  return label_components(grid, [&](int v) { return in_mask(v); }).second;
}

DeformedConfiguration deformed_configuration(const State& q, const EulerianGrid& grid,
                                             const DeformedConfigurationOptions& options) {
  return deformed_configuration(q.grid, q.y, grid, options);
}

DeformedConfiguration deformed_configuration(const Grid& ref, const DeformationField& y,
                                             const EulerianGrid& grid,
                                             const DeformedConfigurationOptions& options) {
  DeformedConfiguration dc;
  dc.grid = grid;
  const auto nv = static_cast<std::size_t>(grid.voxel_count());
  dc.degree.assign(nv, 0);
  dc.covering.assign(nv, 0);
  dc.boundary.assign(nv, 0);
  dc.preimage.assign(nv, Preimage{});
  dc.near.assign(nv, 0);
  dc.candidates.assign(nv, {});

  const Vec3 h = grid.spacing();
  const double band = options.boundary_band * h.minCoeff();
  const BoundarySurface surf = BoundarySurface::build(ref, y, options.subdivision);

  // Voxels whose center is within one spacing (per axis) of a triangle's box
  // may be separated from a neighbour by the surface; all others share the
  // degree of their 6-connected far component.
  std::vector<std::vector<int>> nearby(nv);
  for (std::size_t t = 0; t < surf.triangles.size(); ++t) {
    const auto& tri = surf.triangles[t];
    const Vec3 lo = tri.v[0].cwiseMin(tri.v[1]).cwiseMin(tri.v[2]) - h;
    const Vec3 hi = tri.v[0].cwiseMax(tri.v[1]).cwiseMax(tri.v[2]) + h;
    const auto [a, b] = voxel_range(grid, lo, hi);
    for (int k = a[2]; k <= b[2]; ++k)
      for (int j = a[1]; j <= b[1]; ++j)
        for (int i = a[0]; i <= b[0]; ++i) nearby[static_cast<std::size_t>(grid.index(i, j, k))].push_back(static_cast<int>(t));
  }

  auto classify = [&](int v) {
    const Vec3 p = grid.center(v);
    double dist = std::numeric_limits<double>::infinity();
    for (int t : nearby[static_cast<std::size_t>(v)]) {
      dist = std::min(dist, point_triangle_distance(surf.triangles[static_cast<std::size_t>(t)], p));
    }
    if (dist <= band) {
      dc.boundary[static_cast<std::size_t>(v)] = 1;
      return;
    }
    const double w = surf.winding(p);
    const double r = std::round(w);
    if (std::abs(w - r) >= 0.2) {
      dc.boundary[static_cast<std::size_t>(v)] = 1;
      return;
    }
    dc.degree[static_cast<std::size_t>(v)] = static_cast<int>(r);
  };

  std::vector<int> near_list;
  for (int v = 0; v < grid.voxel_count(); ++v) {
    if (!nearby[static_cast<std::size_t>(v)].empty()) {
      near_list.push_back(v);
      dc.near[static_cast<std::size_t>(v)] = 1;
    }
  }
  parallel_for(near_list.size(), [&](std::size_t i) { classify(near_list[i]); });

  auto [label, ncomp] = label_components(grid, [&](int v) { return nearby[static_cast<std::size_t>(v)].empty(); });
  std::vector<int> comp_degree(static_cast<std::size_t>(ncomp), 0);
  std::vector<int> representative(static_cast<std::size_t>(ncomp), -1);
  for (int v = 0; v < grid.voxel_count(); ++v) {
    const int l = label[static_cast<std::size_t>(v)];
    if (l >= 0 && representative[static_cast<std::size_t>(l)] < 0) representative[static_cast<std::size_t>(l)] = v;
  }
  for (int l = 0; l < ncomp; ++l) {
    comp_degree[static_cast<std::size_t>(l)] =
        static_cast<int>(std::round(surf.winding(grid.center(representative[static_cast<std::size_t>(l)]))));
  }
  for (int v = 0; v < grid.voxel_count(); ++v) {
    const int l = label[static_cast<std::size_t>(v)];
    if (l >= 0) dc.degree[static_cast<std::size_t>(v)] = comp_degree[static_cast<std::size_t>(l)];
  }

  // Covering numbers from trilinear preimages. The image of a cell lies in
  // the convex hull of its deformed nodes.
  const double diam = ref.box().extent().norm();
  const double tol = 1e-10 * diam;
  std::vector<std::vector<Preimage>> hits(nv);
  for (int c = 0; c < ref.cell_count(); ++c) {
    const auto ids = ref.cell_nodes(c);
    Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity()), hi = -lo;
    for (int id : ids) {
      lo = lo.cwiseMin(y.nodes[static_cast<std::size_t>(id)]);
      hi = hi.cwiseMax(y.nodes[static_cast<std::size_t>(id)]);
    }
    const Vec3 slack = Vec3::Constant(1e-9 * diam);
    const auto [a, b] = voxel_range(grid, lo - 0.5 * h - slack, hi + 0.5 * h + slack);
    for (int k = a[2]; k <= b[2]; ++k)
      for (int j = a[1]; j <= b[1]; ++j)
        for (int i = a[0]; i <= b[0]; ++i) {
          const int v = grid.index(i, j, k);
          dc.candidates[static_cast<std::size_t>(v)].push_back(c);
          const Vec3 p = grid.center(v);
          if (((p - lo).array() < -slack.array()).any() || ((p - hi).array() > slack.array()).any()) continue;
          const Preimage pre = invert_in_cell(ref, y, c, p, tol);
          if (pre.valid()) hits[static_cast<std::size_t>(v)].push_back(pre);
        }
  }
  const double merge = 1e-7 * ref.spacing().minCoeff();
  for (std::size_t v = 0; v < nv; ++v) {
    std::vector<Vec3> distinct;
    for (const auto& p : hits[v]) {
      const Vec3 X = ref.reference_point(p.cell, p.xi);
      const bool dup = std::any_of(distinct.begin(), distinct.end(), [&](const Vec3& d) { return (d - X).norm() < merge; });
      if (!dup) distinct.push_back(X);
    }
    dc.covering[v] = static_cast<int>(distinct.size());
    if (!hits[v].empty()) dc.preimage[v] = hits[v].front();
  }

  // Masked voxels without an exact preimage sit in the sliver between the
  // triangulated and the trilinear boundary; project them onto the closest cell.
  for (int v = 0; v < grid.voxel_count(); ++v) {
    if (!dc.in_mask(v) || dc.preimage[static_cast<std::size_t>(v)].valid()) continue;
    const Vec3 target = grid.center(v);
    double best = std::numeric_limits<double>::infinity();
    Preimage found;
    for (int c = 0; c < ref.cell_count(); ++c) {
      const auto ids = ref.cell_nodes(c);
      Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity()), hi = -lo;
      for (int id : ids) {
        lo = lo.cwiseMin(y.nodes[static_cast<std::size_t>(id)]);
        hi = hi.cwiseMax(y.nodes[static_cast<std::size_t>(id)]);
      }
      if (((target - lo).array() < -h.array()).any() || ((target - hi).array() > h.array()).any()) continue;
      const CellMap m = cell_map(ref, y, c);
      const auto xi = newton_from(m, target, Vec3(0.5, 0.5, 0.5), tol, true);
      const double r = (m.eval(*xi) - target).norm();
      if (r < best) {
        best = r;
        found = {c, *xi, true};
      }
    }
    if (found.valid() && best < h.maxCoeff()) dc.preimage[static_cast<std::size_t>(v)] = found;
  }
  return dc;
}

CiarletNecasReport ciarlet_necas_check(const State& q, const DeformedConfiguration& dc, double tol_rel,
                                       double tol_abs) {
  return ciarlet_necas_check(q.grid, q.y, dc, tol_rel, tol_abs);
}

CiarletNecasReport ciarlet_necas_check(const Grid& ref, const DeformationField& y,
                                       const DeformedConfiguration& dc, double tol_rel, double tol_abs) {
  CiarletNecasReport rep;
  for (int c = 0; c < ref.cell_count(); ++c) {
    for (const auto& qp : gauss_rule()) rep.lhs += qp.weight * determinant(deformation_gradient(ref, y, c, qp.xi));
  }
  rep.lhs *= ref.cell_volume();
  rep.rhs = dc.covered_count() * dc.grid.voxel_volume();
  rep.ratio = rep.rhs > 0.0 ? rep.lhs / rep.rhs : std::numeric_limits<double>::infinity();
  rep.satisfied = rep.lhs <= rep.rhs * (1.0 + tol_rel) + tol_abs;
  return rep;
}

InverseJacobianReport inverse_jacobian_audit(const State& q, const DeformedConfiguration& dc, int subsamples) {
  InverseJacobianReport rep;
  const EulerianGrid& eg = dc.grid;
  const double dv = eg.voxel_volume();
  const Vec3 h = eg.spacing();
  const int s = std::max(1, subsamples);
  const double tol = 1e-10 * q.grid.box().extent().norm();

  auto accumulate = [&](const Preimage& p, double weight) {
    const Mat3 F = deformation_gradient(q.grid, q.y, p.cell, p.xi);
    const InverseIdentities inv = inverse_identities(F);
    rep.max_identity_error = std::max(rep.max_identity_error, (F * inv.inverse - Mat3::Identity()).norm());
    rep.det_inverse_integral += weight * inv.det_of_inverse;
    rep.adj_inverse_integral += weight * inv.adj_of_inverse.norm();
  };

  for (int v = 0; v < eg.voxel_count(); ++v) {
    const auto vi = static_cast<std::size_t>(v);
    if (dc.near[vi] && s > 1) {
      const Vec3 c = eg.center(v);
      for (int k = 0; k < s; ++k)
        for (int j = 0; j < s; ++j)
          for (int i = 0; i < s; ++i) {
            const Vec3 off((i + 0.5) / s - 0.5, (j + 0.5) / s - 0.5, (k + 0.5) / s - 0.5);
            const Vec3 p = c + off.cwiseProduct(h);
            for (int cell : dc.candidates[vi]) {
              const Preimage pre = invert_in_cell(q.grid, q.y, cell, p, tol);
              if (pre.valid()) {
                accumulate(pre, dv / (s * s * s));
                break;
              }
            }
          }
      ++rep.voxels;
      continue;
    }
    if (!dc.in_mask(v)) continue;
    const Preimage& p = dc.preimage[vi];
    if (!p.valid()) {
      std::ostringstream os;
      os << "voxel " << v << " at " << eg.center(v).transpose() << " is in Omega^y but has no preimage";
      throw Error(ErrorCode::MissingPreimage, os.str());
    }
    accumulate(p, dv);
    ++rep.voxels;
  }
  rep.reference_volume = q.grid.volume();
  for (int c = 0; c < q.grid.cell_count(); ++c) {
    for (const auto& qp : gauss_rule()) {
      rep.grad_y_integral += qp.weight * deformation_gradient(q.grid, q.y, c, qp.xi).norm() * q.grid.cell_volume();
    }
  }
  rep.det_inverse_rel_error = std::abs(rep.det_inverse_integral - rep.reference_volume) / rep.reference_volume;
  rep.adj_inverse_rel_error = std::abs(rep.adj_inverse_integral - rep.grad_y_integral) / rep.grad_y_integral;
  return rep;
}

} // namespace chiralmag
