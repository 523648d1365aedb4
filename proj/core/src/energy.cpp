#include "chiralmag/energy.hpp"

#include "chiralmag/errors.hpp"
#include "chiralmag/kinematics.hpp"
#include "chiralmag/parallel.hpp"
#include "chiralmag/strayfield.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

namespace chiralmag {

void MaterialModel::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::InvalidMaterial, what); };
  if (!(p > 3.0)) fail("growth exponent p must exceed 3");
  if (!(a > 0.0)) fail("elastic stiffness a must be positive");
  if (s < 0.0 || b < 0.0) fail("s and b must be non-negative");
  if (!(alpha > 0.0)) fail("exchange constant alpha must be positive");
  if (!(mu0 > 0.0)) fail("vacuum permeability mu0 must be positive");
  if (!std::isfinite(kappa)) fail("DMI constant kappa must be finite");
}

Vec3 PolynomialLoad::value(double t) const {
  Vec3 v = Vec3::Zero();
  for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) v = v * t + *it;
  return v;
}

Vec3 PolynomialLoad::rate(double t) const {
  Vec3 v = Vec3::Zero();
  for (std::size_t k = coeffs.size(); k-- > 1;) v = v * t + static_cast<double>(k) * coeffs[k];
  return v;
}

bool PolynomialLoad::is_zero() const {
  for (const auto& c : coeffs) {
    if (c.squaredNorm() != 0.0) return false;
  }
  return true;
}

bool PolynomialLoad::is_constant() const {
  for (std::size_t k = 1; k < coeffs.size(); ++k) {
    if (coeffs[k].squaredNorm() != 0.0) return false;
  }
  return true;
}

double compression_barrier(double h, double s) { return std::pow(h, -s) + h * h - 2.0; }

namespace {

double barrier_rate(double h, double s) { return -s * std::pow(h, -s - 1.0) + 2.0 * h; }

void require_admissible(const Mat3& F, int cell) {
  if (!has_positive_determinant(F)) {
    std::ostringstream os;
    os << "det grad y = " << determinant(F) << " in cell " << cell;
    throw Error(ErrorCode::NonPositiveDeterminant, os.str());
  }
}

/// Sums density * weight over every quadrature point; per-cell partial sums
/// are reduced in cell order.
template <class Density>
double integrate(const State& q, Density&& density) {
  const Grid& grid = q.grid;
  std::vector<double> partial(static_cast<std::size_t>(grid.cell_count()), 0.0);
  parallel_for(partial.size(), [&](std::size_t c) {
    double s = 0.0;
    for (const auto& qp : gauss_rule()) {
      const PointKinematics pk = point_kinematics(q, static_cast<int>(c), qp.xi);
      require_admissible(pk.F, static_cast<int>(c));
      s += qp.weight * density(pk);
    }
    partial[c] = s;
  });
  return std::accumulate(partial.begin(), partial.end(), 0.0) * grid.cell_volume();
}

} // namespace

double elastic_density(const Mat3& F, const Vec3& lambda, const MaterialModel& M) {
  if (!has_positive_determinant(F)) {
    throw Error(ErrorCode::NonPositiveDeterminant, "elastic density needs det F > 0");
  }
  const double d = determinant(F);
  const Vec3 v = cofactor(F) * lambda;
  return M.a * (std::pow(F.norm(), M.p) - std::pow(3.0, 0.5 * M.p)) + compression_barrier(d, M.s) +
         M.b * v.squaredNorm();
}

double elastic_density(const PointKinematics& pk, const MaterialModel& M, DensityGradient* grad) {
  const Mat3& F = pk.F;
  const double d = determinant(F);
  const Mat3 C = cofactor(F);
  const Vec3 v = C * pk.lambda;
  const double nF = F.norm();
  const double e = M.a * (std::pow(nF, M.p) - std::pow(3.0, 0.5 * M.p)) + compression_barrier(d, M.s) +
                   M.b * v.squaredNorm();
  if (grad) {
    grad->dF += M.a * M.p * std::pow(nF, M.p - 2.0) * F + barrier_rate(d, M.s) * C;
    if (M.b != 0.0) {
      grad->dF += cofactor_vjp(F, 2.0 * M.b * v * pk.lambda.transpose());
      pull_back_direction_gradient(pk, 2.0 * M.b * C.transpose() * v, Mat3::Zero(), *grad);
    }
  }
  return e;
}

double exchange_density(const PointKinematics& pk, const MaterialModel& M, DensityGradient* grad) {
  const Mat3& F = pk.F;
  const double d = determinant(F);
  const Mat3 C = cofactor(F);
  const Mat3 H = pk.grad_m * C.transpose();
  const double h2 = H.squaredNorm();
  const double e = M.alpha * h2 / d;
  if (grad) {
    const Mat3 dH = 2.0 * M.alpha * H / d;
    grad->dF += cofactor_vjp(F, dH.transpose() * pk.grad_m) - (M.alpha * h2 / (d * d)) * C;
    pull_back_direction_gradient(pk, Vec3::Zero(), dH * C, *grad);
  }
  return e;
}

double dmi_density(const PointKinematics& pk, const MaterialModel& M, DensityGradient* grad) {
  const Mat3& F = pk.F;
  const Mat3 C = cofactor(F);
  const Mat3 H = pk.grad_m * C.transpose();
  const Vec3 c = curl_from_gradient(H);
  const double e = M.kappa * pk.lambda.dot(c);
  if (grad) {
    const Mat3 dH = M.kappa * cross_matrix(pk.lambda);
    grad->dF += cofactor_vjp(F, dH.transpose() * pk.grad_m);
    pull_back_direction_gradient(pk, M.kappa * c, dH * C, *grad);
  }
  return e;
}

double field_work_density(const PointKinematics& pk, const Vec3& h, DensityGradient* grad) {
  const double d = determinant(pk.F);
  const double hl = h.dot(pk.lambda);
  if (grad) {
    grad->dF += -hl * cofactor(pk.F);
    pull_back_direction_gradient(pk, -d * h, Mat3::Zero(), *grad);
  }
  return -hl * d;
}

void pull_back_direction_gradient(const PointKinematics& pk, const Vec3& d_lambda, const Mat3& d_grad_m,
                                  DensityGradient& out) {
  const double r = pk.mu_norm;
  const Vec3& mu = pk.mu_raw;
  const Mat3 P = Mat3::Identity() - pk.lambda * pk.lambda.transpose();
  out.dmu += P * d_lambda / r;
  if (d_grad_m.squaredNorm() == 0.0) return;
  const Mat3& A = d_grad_m;
  const Mat3& Q = pk.grad_mu_raw;
  const double r3 = r * r * r;
  out.dgrad_mu += P * A / r;
  const double AQ = A.cwiseProduct(Q).sum();
  const double muAQmu = mu.dot(A * Q.transpose() * mu);
  out.dmu += -AQ * mu / r3 - (A * Q.transpose() * mu + Q * A.transpose() * mu) / r3 +
             3.0 * muAQmu * mu / (r3 * r * r);
}

double elastic_energy(const State& q, const MaterialModel& M) {
  return integrate(q, [&](const PointKinematics& pk) { return elastic_density(pk, M, nullptr); });
}

double exchange_energy(const State& q, const MaterialModel& M) {
  return integrate(q, [&](const PointKinematics& pk) { return exchange_density(pk, M, nullptr); });
}

double dmi_energy(const State& q, const MaterialModel& M) {
  if (M.kappa == 0.0) return 0.0;
  return integrate(q, [&](const PointKinematics& pk) { return dmi_density(pk, M, nullptr); });
}

LoadMoments load_moments(const State& q) {
  const Grid& grid = q.grid;
  LoadMoments mom;
  const double vol = grid.cell_volume();
  for (int c = 0; c < grid.cell_count(); ++c) {
    Vec3 vy = Vec3::Zero(), vm = Vec3::Zero();
    for (const auto& qp : gauss_rule()) {
      const PointKinematics pk = point_kinematics(q, c, qp.xi);
      vy += qp.weight * interpolate(grid, q.y.nodes, c, qp.xi);
      vm += qp.weight * determinant(pk.F) * pk.lambda;
    }
    mom.volume_y += vy * vol;
    mom.magnetic_moment += vm * vol;
  }
  const Vec3 h = grid.spacing();
  const Index3 n = grid.cells();
  for (Face f : kAllFaces) {
    if (!grid.neumann_faces().test(static_cast<int>(f))) continue;
    const int axis = face_axis(f);
    const int u = (axis + 1) % 3, v = (axis + 2) % 3;
    const double area = h[u] * h[v];
    const int layer = face_is_max(f) ? n[axis] - 1 : 0;
    for (int iu = 0; iu < n[u]; ++iu) {
      for (int iv = 0; iv < n[v]; ++iv) {
        Index3 ijk{};
        ijk[axis] = layer;
        ijk[u] = iu;
        ijk[v] = iv;
        const int c = grid.cell_index(ijk[0], ijk[1], ijk[2]);
        for (const auto& g : gauss_rule_2d()) {
          Vec3 xi;
          xi[axis] = face_is_max(f) ? 1.0 : 0.0;
          xi[u] = g[0];
          xi[v] = g[1];
          mom.surface_y += 0.25 * area * interpolate(grid, q.y.nodes, c, xi);
        }
      }
    }
  }
  return mom;
}

double load_work(double t, const State& q, const LoadSchedule& loads) {
  const LoadMoments m = load_moments(q);
  return loads.f.value(t).dot(m.volume_y) + loads.g.value(t).dot(m.surface_y) +
         loads.h.value(t).dot(m.magnetic_moment);
}

double load_power(double t, const State& q, const LoadSchedule& loads) {
  const LoadMoments m = load_moments(q);
  return -(loads.f.rate(t).dot(m.volume_y) + loads.g.rate(t).dot(m.surface_y) +
           loads.h.rate(t).dot(m.magnetic_moment));
}

std::vector<Mat3> cell_center_cofactors(const Grid& grid, const DeformationField& y) {
  std::vector<Mat3> C(static_cast<std::size_t>(grid.cell_count()));
  const Vec3 centre(0.5, 0.5, 0.5);
  for (int c = 0; c < grid.cell_count(); ++c) {
    C[static_cast<std::size_t>(c)] = cofactor(deformation_gradient(grid, y, c, centre));
  }
  return C;
}

double tv_regularizer(const Grid& grid, const DeformationField& y) {
  const auto C = cell_center_cofactors(grid, y);
  const Index3 n = grid.cells();
  const Vec3 h = grid.spacing();
  double tv = 0.0;
  for (int c = 0; c < grid.cell_count(); ++c) {
    const Index3 ijk = grid.cell_ijk(c);
    double sq = 0.0;
    for (int d = 0; d < 3; ++d) {
      if (n[d] < 2) continue;
      Index3 a = ijk, b = ijk;
      if (ijk[d] + 1 < n[d]) {
        b[d] += 1;
      } else {
        a[d] -= 1;
      }
      const Mat3 diff = C[static_cast<std::size_t>(grid.cell_index(b[0], b[1], b[2]))] -
                        C[static_cast<std::size_t>(grid.cell_index(a[0], a[1], a[2]))];
      sq += diff.squaredNorm() / (h[d] * h[d]);
    }
    tv += std::sqrt(sq);
  }
  return tv * grid.cell_volume();
}

EnergyBreakdown total_energy(double t, const State& q, const MaterialModel& M, const LoadSchedule& loads,
                             const EnergyOptions& options, const StrayField* stray) {
  EnergyBreakdown e;
  e.elastic = elastic_energy(q, M);
  e.exchange = exchange_energy(q, M);
  e.dmi = dmi_energy(q, M);
  if (options.magnetostatics) {
    if (!stray) throw Error(ErrorCode::ConfigError, "magnetostatic term requested without a stray-field solver");
    e.magnetostatic = stray->energy(q, M);
  }
  if (options.regularizer) e.regularizer = tv_regularizer(q.grid, q.y);
  e.load_work = load_work(t, q, loads);
  e.total = e.elastic + e.exchange + e.magnetostatic + e.dmi + e.regularizer - e.load_work;
  return e;
}

double gradient_p_norm(const State& q, double p) {
  double s = 0.0;
  for (int c = 0; c < q.grid.cell_count(); ++c) {
    for (const auto& qp : gauss_rule()) {
      s += qp.weight * std::pow(deformation_gradient(q.grid, q.y, c, qp.xi).norm(), p);
    }
  }
  return s * q.grid.cell_volume();
}

} // namespace chiralmag
