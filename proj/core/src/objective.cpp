#include "chiralmag/objective.hpp"

#include "chiralmag/errors.hpp"
#include "chiralmag/kinematics.hpp"
#include "chiralmag/parallel.hpp"

#include <cmath>
#include <sstream>

namespace chiralmag {

EnergyBreakdown Problem::energy(double t, const State& q) const {
  return total_energy(t, q, material, loads, options, stray);
}

std::array<Vec3, 8> shape_gradients(const Grid& grid, const Vec3& xi) {
  auto g = shape_local_gradients(xi);
  const Vec3 h = grid.spacing();
  for (auto& v : g) v = v.cwiseQuotient(h);
  return g;
}

Objective::Objective(const Problem& problem, double huber_eps_tv, double huber_eps_d)
    : problem_(problem), eps_tv_(huber_eps_tv), eps_d_(huber_eps_d) {}

void Objective::set_anchor(const State& anchor) { anchor_ = lagrangean_magnetization(anchor); }

namespace {

struct CellContribution {
  double value = 0.0;
  std::array<Vec3, 8> dy{};
  std::array<Vec3, 8> dmu{};
};

double pseudo_huber(double r2, double eps) { return std::sqrt(r2 + eps * eps) - eps; }

} // namespace

double Objective::local_terms(const State& q, NodalVectors* dy, NodalVectors* dmu) const {
  const Grid& grid = q.grid;
  const MaterialModel& M = problem_.material;
  const Vec3 f = problem_.loads.f.value(t_);
  const Vec3 h = problem_.loads.h.value(t_);
  const double vol = grid.cell_volume();
  const bool want = dy || dmu;
  const auto nc = static_cast<std::size_t>(grid.cell_count());
  std::vector<CellContribution> cells(nc);

  parallel_for(nc, [&](std::size_t ci) {
    const int c = static_cast<int>(ci);
    CellContribution& out = cells[ci];
    for (auto& v : out.dy) v.setZero();
    for (auto& v : out.dmu) v.setZero();
    const auto& rule = gauss_rule();
    for (std::size_t g = 0; g < rule.size(); ++g) {
      const auto& qp = rule[g];
      const PointKinematics pk = point_kinematics(q, c, qp.xi);
      if (!has_positive_determinant(pk.F)) {
        std::ostringstream os;
        os << "det grad y = " << determinant(pk.F) << " in cell " << c;
        throw Error(ErrorCode::NonPositiveDeterminant, os.str());
      }
      DensityGradient dg;
      DensityGradient* gp = want ? &dg : nullptr;
      double e = elastic_density(pk, M, gp) + exchange_density(pk, M, gp);
      if (M.kappa != 0.0) e += dmi_density(pk, M, gp);
      if (!h.isZero()) e += field_work_density(pk, h, gp);
      const Vec3 yq = interpolate(grid, q.y.nodes, c, qp.xi);
      e -= f.dot(yq);
      if (anchor_) {
        const Mat3 C = cofactor(pk.F);
        const Vec3 z = C.transpose() * pk.lambda;
        const Vec3 diff = z - anchor_->z[ci * 8 + g];
        const double r2 = diff.squaredNorm();
        e += pseudo_huber(r2, eps_d_);
        if (gp) {
          const Vec3 u = diff / std::sqrt(r2 + eps_d_ * eps_d_);
          dg.dF += cofactor_vjp(pk.F, pk.lambda * u.transpose());
          pull_back_direction_gradient(pk, C * u, Mat3::Zero(), dg);
        }
      }
      const double w = qp.weight * vol;
      out.value += w * e;
      if (gp) {
        const auto N = shape_values(qp.xi);
        const auto dN = shape_gradients(grid, qp.xi);
        for (int a = 0; a < 8; ++a) {
          out.dy[a] += w * (dg.dF * dN[a] - N[a] * f);
          out.dmu[a] += w * (N[a] * dg.dmu + dg.dgrad_mu * dN[a]);
        }
      }
    }
  });

  double total = 0.0;
  for (const auto& c : cells) total += c.value;

  if (dy) dy->assign(static_cast<std::size_t>(grid.node_count()), Vec3::Zero());
  if (dmu) dmu->assign(static_cast<std::size_t>(grid.node_count()), Vec3::Zero());
  if (want) {
    for (std::size_t ci = 0; ci < nc; ++ci) {
      const auto ids = grid.cell_nodes(static_cast<int>(ci));
      for (int a = 0; a < 8; ++a) {
        const auto n = static_cast<std::size_t>(ids[a]);
        if (dy) (*dy)[n] += cells[ci].dy[a];
        if (dmu) (*dmu)[n] += cells[ci].dmu[a];
      }
    }
  }

  // Surface traction on the Neumann faces.
  const Vec3 traction = problem_.loads.g.value(t_);
  if (!traction.isZero() && grid.neumann_faces().any()) {
    const Vec3 hs = grid.spacing();
    const Index3 n = grid.cells();
    for (Face fc : kAllFaces) {
      if (!grid.neumann_faces().test(static_cast<int>(fc))) continue;
      const int axis = face_axis(fc);
      const int u = (axis + 1) % 3, v = (axis + 2) % 3;
      const double area = hs[u] * hs[v];
      const int layer = face_is_max(fc) ? n[axis] - 1 : 0;
      for (int iu = 0; iu < n[u]; ++iu) {
        for (int iv = 0; iv < n[v]; ++iv) {
          Index3 ijk{};
          ijk[axis] = layer;
          ijk[u] = iu;
          ijk[v] = iv;
          const int c = grid.cell_index(ijk[0], ijk[1], ijk[2]);
          const auto ids = grid.cell_nodes(c);
          for (const auto& g2 : gauss_rule_2d()) {
            Vec3 xi;
            xi[axis] = face_is_max(fc) ? 1.0 : 0.0;
            xi[u] = g2[0];
            xi[v] = g2[1];
            const double w = 0.25 * area;
            total -= w * traction.dot(interpolate(grid, q.y.nodes, c, xi));
            if (dy) {
              const auto N = shape_values(xi);
              for (int a = 0; a < 8; ++a) (*dy)[static_cast<std::size_t>(ids[a])] -= w * N[a] * traction;
            }
          }
        }
      }
    }
  }
  return total;
}

double Objective::smoothed_tv(const State& q, NodalVectors* dy) const {
  const Grid& grid = q.grid;
  const auto C = cell_center_cofactors(grid, q.y);
  const Index3 n = grid.cells();
  const Vec3 h = grid.spacing();
  const double vol = grid.cell_volume();
  std::vector<Mat3> dC(C.size(), Mat3::Zero());
  double tv = 0.0;
  for (int c = 0; c < grid.cell_count(); ++c) {
    const Index3 ijk = grid.cell_ijk(c);
    std::array<std::pair<int, int>, 3> pairs{};
    std::array<Mat3, 3> diffs{};
    double sq = 0.0;
    for (int d = 0; d < 3; ++d) {
      pairs[static_cast<std::size_t>(d)] = {-1, -1};
      if (n[d] < 2) continue;
      Index3 a = ijk, b = ijk;
      if (ijk[d] + 1 < n[d]) b[d] += 1;
      else a[d] -= 1;
      const int ia = grid.cell_index(a[0], a[1], a[2]), ib = grid.cell_index(b[0], b[1], b[2]);
      pairs[static_cast<std::size_t>(d)] = {ia, ib};
      diffs[static_cast<std::size_t>(d)] = (C[static_cast<std::size_t>(ib)] - C[static_cast<std::size_t>(ia)]) / h[d];
      sq += diffs[static_cast<std::size_t>(d)].squaredNorm();
    }
    tv += vol * pseudo_huber(sq, eps_tv_);
    if (dy) {
      const double inv = vol / std::sqrt(sq + eps_tv_ * eps_tv_);
      for (int d = 0; d < 3; ++d) {
        const auto [ia, ib] = pairs[static_cast<std::size_t>(d)];
        if (ia < 0) continue;
        const Mat3 g = inv * diffs[static_cast<std::size_t>(d)] / h[d];
        dC[static_cast<std::size_t>(ib)] += g;
        dC[static_cast<std::size_t>(ia)] -= g;
      }
    }
  }
  if (dy) {
    const Vec3 centre(0.5, 0.5, 0.5);
    const auto dN = shape_gradients(grid, centre);
    for (int c = 0; c < grid.cell_count(); ++c) {
      const Mat3 F = deformation_gradient(grid, q.y, c, centre);
      const Mat3 dF = cofactor_vjp(F, dC[static_cast<std::size_t>(c)]);
      const auto ids = grid.cell_nodes(c);
      for (int a = 0; a < 8; ++a) (*dy)[static_cast<std::size_t>(ids[a])] += dF * dN[a];
    }
  }
  return tv;
}

double Objective::value(const State& q) const { return value_and_gradient(q, nullptr, nullptr); }

double Objective::value_and_gradient(const State& q, NodalVectors* dy, NodalVectors* dmu) const {
  double v = local_terms(q, dy, dmu);
  if (problem_.options.regularizer) v += smoothed_tv(q, dy);
  if (problem_.options.magnetostatics) {
    if (!problem_.stray) throw Error(ErrorCode::ConfigError, "magnetostatic term requested without a stray-field solver");
    NodalVectors sy, smu;
    v += problem_.stray->energy_and_gradient(q, problem_.material, dy ? &sy : nullptr, dmu ? &smu : nullptr);
    for (std::size_t i = 0; dy && i < sy.size(); ++i) (*dy)[i] += sy[i];
    for (std::size_t i = 0; dmu && i < smu.size(); ++i) (*dmu)[i] += smu[i];
  }
  return v;
}

double Objective::exact(const State& q) const {
  double v = problem_.energy(t_, q).total;
  if (anchor_) v += dissipation_distance(*anchor_, lagrangean_magnetization(q));
  return v;
}

} // namespace chiralmag
