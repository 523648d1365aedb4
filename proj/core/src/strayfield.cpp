#include "chiralmag/strayfield.hpp"

#include "chiralmag/errors.hpp"
#include "chiralmag/kinematics.hpp"
#include "chiralmag/parallel.hpp"

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>

namespace chiralmag {

namespace {

void require_resolution(const EulerianGrid& g) {
  for (int d = 0; d < 3; ++d) {
    if (g.n[d] < 8) {
      std::ostringstream os;
      os << "Eulerian grid needs at least 8 voxels per axis, got " << g.n[0] << "x" << g.n[1] << "x" << g.n[2];
      throw Error(ErrorCode::DegenerateGrid, os.str());
    }
  }
}

} // namespace

struct PoissonSolver::Impl {
  int nx, ny, nz, nxc;
  std::size_t nreal, ncomplex;
  double* real = nullptr;
  fftw_complex* spec = nullptr;
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;
  std::vector<double> gx, gy, gz; // central-difference symbols per axis
  std::vector<double> lx, ly, lz; // forward-backward (7-point) Laplacian symbols

  // The transform grid doubles every axis: the source is zero-padded so
  // periodic images sit a full box away.
  explicit Impl(const EulerianGrid& g)
      : nx(2 * g.n[0]), ny(2 * g.n[1]), nz(2 * g.n[2]), nxc(g.n[0] + 1) {
    nreal = static_cast<std::size_t>(nx) * ny * nz;
    ncomplex = static_cast<std::size_t>(nxc) * ny * nz;
    real = fftw_alloc_real(nreal);
    spec = fftw_alloc_complex(ncomplex);
    // Row-major (z, y, x) so that x is the fastest index, as in EulerianGrid.
    forward = fftw_plan_dft_r2c_3d(nz, ny, nx, real, spec, FFTW_ESTIMATE);
    backward = fftw_plan_dft_c2r_3d(nz, ny, nx, spec, real, FFTW_ESTIMATE);
    const Vec3 h = g.spacing();
    auto symbol = [](int n, double hd) {
      std::vector<double> s(static_cast<std::size_t>(n));
      for (int k = 0; k < n; ++k) s[static_cast<std::size_t>(k)] = std::sin(2.0 * std::numbers::pi * k / n) / hd;
      return s;
    };
    gx = symbol(nx, h.x());
    gy = symbol(ny, h.y());
    gz = symbol(nz, h.z());
    auto laplacian = [](int n, double hd) {
      std::vector<double> s(static_cast<std::size_t>(n));
      for (int k = 0; k < n; ++k) {
        const double v = 2.0 * std::sin(std::numbers::pi * k / n) / hd;
        s[static_cast<std::size_t>(k)] = v * v;
      }
      return s;
    };
    lx = laplacian(nx, h.x());
    ly = laplacian(ny, h.y());
    lz = laplacian(nz, h.z());
  }
  ~Impl() {
    fftw_destroy_plan(forward);
    fftw_destroy_plan(backward);
    fftw_free(real);
    fftw_free(spec);
  }
};

PoissonSolver::PoissonSolver(const EulerianGrid& grid) : grid_(grid) {
  require_resolution(grid);
  impl_ = std::make_unique<Impl>(grid);
}

PoissonSolver::~PoissonSolver() = default;

StrayFieldPotential PoissonSolver::solve(const VoxelField& source) const {
  Impl& m = *impl_;
  const EulerianGrid& g = grid_;
  const auto nsmall = static_cast<std::size_t>(g.voxel_count());
  if (source.values.size() != nsmall) {
    throw Error(ErrorCode::GridMismatch, "source does not match the solver grid");
  }
  StrayFieldPotential pot;
  pot.grid = grid_;
  pot.source = source.values;
  pot.zeta.assign(nsmall, 0.0);
  pot.grad_zeta.assign(nsmall, Vec3::Zero());

  // Position of small-grid voxel v in the padded transform array.
  std::vector<std::size_t> slot(nsmall);
  for (int v = 0; v < g.voxel_count(); ++v) {
    const Index3 c = g.ijk(v);
    slot[static_cast<std::size_t>(v)] = static_cast<std::size_t>(c[0] + m.nx * (c[1] + m.ny * c[2]));
  }

  Vec3 mean = Vec3::Zero();
  for (const auto& s : source.values) mean += s;
  mean /= static_cast<double>(m.nreal);

  // g . s_hat per mode.
  std::vector<std::complex<double>> gdot(m.ncomplex, 0.0);
  for (int d = 0; d < 3; ++d) {
    std::fill(m.real, m.real + m.nreal, 0.0);
    for (std::size_t v = 0; v < nsmall; ++v) m.real[slot[v]] = source.values[v][d];
    fftw_execute(m.forward);
    std::size_t idx = 0;
    for (int k = 0; k < m.nz; ++k)
      for (int j = 0; j < m.ny; ++j)
        for (int i = 0; i < m.nxc; ++i, ++idx) {
          const double gd = d == 0 ? m.gx[static_cast<std::size_t>(i)]
                                   : (d == 1 ? m.gy[static_cast<std::size_t>(j)] : m.gz[static_cast<std::size_t>(k)]);
          gdot[idx] += gd * std::complex<double>(m.spec[idx][0], m.spec[idx][1]);
        }
  }

  const double scale = 1.0 / static_cast<double>(m.nreal);
  auto inverse_into = [&](auto&& multiplier, auto&& store) {
    std::size_t idx = 0;
    for (int k = 0; k < m.nz; ++k)
      for (int j = 0; j < m.ny; ++j)
        for (int i = 0; i < m.nxc; ++i, ++idx) {
          const double lap = m.lx[static_cast<std::size_t>(i)] + m.ly[static_cast<std::size_t>(j)] +
                             m.lz[static_cast<std::size_t>(k)];
          std::complex<double> c = 0.0;
          if (idx != 0) c = multiplier(i, j, k, lap, gdot[idx]);
          m.spec[idx][0] = c.real();
          m.spec[idx][1] = c.imag();
        }
    fftw_execute(m.backward);
    for (std::size_t v = 0; v < nsmall; ++v) store(v, m.real[slot[v]] * scale);
  };

  inverse_into([](int, int, int, double lap, std::complex<double> gd) { return std::complex<double>(0.0, -1.0) * gd / lap; },
               [&](std::size_t v, double x) { pot.zeta[v] = x; });
  double zmean = 0.0;
  for (double z : pot.zeta) zmean += z;
  zmean /= static_cast<double>(nsmall);
  for (double& z : pot.zeta) z -= zmean;
  for (int d = 0; d < 3; ++d) {
    inverse_into(
        [&](int i, int j, int k, double lap, std::complex<double> gd) {
          const double gc = d == 0 ? m.gx[static_cast<std::size_t>(i)]
                                   : (d == 1 ? m.gy[static_cast<std::size_t>(j)] : m.gz[static_cast<std::size_t>(k)]);
          return gc * gd / lap;
        },
        [&](std::size_t v, double x) { pot.grad_zeta[v][d] = x + mean[d] / 3.0; });
  }
  return pot;
}

StrayFieldPotential solve_potential(const VoxelField& source) {
  const PoissonSolver solver(source.grid);
  return solver.solve(source);
}

double magnetostatic_energy(const StrayFieldPotential& pot, const MaterialModel& M) {
  double sum = 0.0;
  for (std::size_t v = 0; v < pot.source.size(); ++v) sum += pot.source[v].dot(pot.grad_zeta[v]);
  return 0.5 * M.mu0 * sum * pot.grid.voxel_volume();
}

double weak_form_residual(const StrayFieldPotential& pot, const std::vector<double>& phi) {
  // The discrete weak form lives on voxel faces: forward differences of zeta
  // and phi against the face average of the source.
  const EulerianGrid& g = pot.grid;
  const Vec3 h = g.spacing();
  double num = 0.0, den = 0.0;
  for (int v = 0; v < g.voxel_count(); ++v) {
    const Index3 c = g.ijk(v);
    const auto i = static_cast<std::size_t>(v);
    for (int d = 0; d < 3; ++d) {
      Index3 a = c;
      a[d] = (c[d] + 1) % g.n[d];
      const auto j = static_cast<std::size_t>(g.index(a[0], a[1], a[2]));
      const double dphi = (phi[j] - phi[i]) / h[d];
      const double dzeta = (pot.zeta[j] - pot.zeta[i]) / h[d];
      const double sface = 0.5 * (pot.source[i][d] + pot.source[j][d]);
      num += (dzeta - sface) * dphi;
      den += std::abs(dzeta * dphi) + std::abs(sface * dphi);
    }
  }
  return den > 0.0 ? std::abs(num) / den : std::abs(num);
}

VoxelField rasterize(const State& q, const DeformedConfiguration& dc) {
  VoxelField f;
  f.grid = dc.grid;
  f.values.assign(static_cast<std::size_t>(dc.grid.voxel_count()), Vec3::Zero());
  parallel_for(f.values.size(), [&](std::size_t v) {
    if (!dc.in_mask(static_cast<int>(v))) return;
    const Preimage& p = dc.preimage[v];
    if (!p.valid()) return;
    f.values[v] = point_kinematics(q, p.cell, p.xi).lambda;
  });
  return f;
}

VoxelField rasterize(const State& q, const EulerianGrid& grid) {
  return rasterize(q, deformed_configuration(q, grid));
}

StrayField::StrayField(const EulerianGrid& grid, DeformedConfigurationOptions options)
    : solver_(std::make_shared<PoissonSolver>(grid)), options_(options) {}

void StrayField::check_domain(const State& q) const {
  // y(Omega) has to stay clear of the periodic images: keep a margin of one
  // eighth of the box extent on every side.
  const Box bb = bounding_box(q.y.nodes);
  const Box& box = grid().box;
  const Vec3 margin = 0.125 * box.extent();
  for (int d = 0; d < 3; ++d) {
    if (bb.lo[d] < box.lo[d] + margin[d] || bb.hi[d] > box.hi[d] - margin[d]) {
      std::ostringstream os;
      os << "deformed body [" << bb.lo.transpose() << "] - [" << bb.hi.transpose()
         << "] escaped the inner part of the Eulerian box";
      throw Error(ErrorCode::DomainEscaped, os.str());
    }
  }
}

const DeformedConfiguration& StrayField::configuration(const State& q) const {
  if (!cached_dc_ || cached_y_ != q.y.nodes) {
    check_domain(q);
    cached_dc_ = deformed_configuration(q, grid(), options_);
    cached_y_ = q.y.nodes;
  }
  return *cached_dc_;
}

StrayFieldPotential StrayField::potential(const State& q) const {
  return solver_->solve(rasterize(q, configuration(q)));
}

double StrayField::energy(const State& q, const MaterialModel& M) const {
  return magnetostatic_energy(potential(q), M);
}

double StrayField::energy_and_gradient(const State& q, const MaterialModel& M, NodalVectors* dy,
                                       NodalVectors* dmu) const {
  const DeformedConfiguration& dc = configuration(q);
  const StrayFieldPotential pot = solver_->solve(rasterize(q, dc));
  const double e = magnetostatic_energy(pot, M);
  if (!dy && !dmu) return e;
  const std::size_t nn = q.y.nodes.size();
  if (dy) dy->assign(nn, Vec3::Zero());
  if (dmu) dmu->assign(nn, Vec3::Zero());
  const double w_scale = M.mu0 * dc.grid.voxel_volume();
  for (int v = 0; v < dc.grid.voxel_count(); ++v) {
    if (!dc.in_mask(v)) continue;
    const Preimage& p = dc.preimage[static_cast<std::size_t>(v)];
    if (!p.valid()) continue;
    const Vec3 w = w_scale * pot.grad_zeta[static_cast<std::size_t>(v)];
    const PointKinematics pk = point_kinematics(q, p.cell, p.xi);
    const auto N = shape_values(p.xi);
    const auto ids = q.grid.cell_nodes(p.cell);
    const Vec3 gmu = (w - pk.lambda * pk.lambda.dot(w)) / pk.mu_norm;
    Vec3 gy = Vec3::Zero();
    if (dy && has_positive_determinant(pk.F)) gy = -(inverse_gradient(pk.F).transpose() * (pk.grad_m.transpose() * w));
    for (int a = 0; a < 8; ++a) {
      const auto n = static_cast<std::size_t>(ids[a]);
      if (dmu) (*dmu)[n] += N[a] * gmu;
      if (dy) (*dy)[n] += N[a] * gy;
    }
  }
  return e;
}

} // namespace chiralmag
