#pragma once

#include "chiralmag/energy.hpp"
#include "chiralmag/eulerian_grid.hpp"
#include "chiralmag/geometry.hpp"

#include <memory>
#include <optional>
#include <vector>

namespace chiralmag {

/// One vector per voxel of an EulerianGrid.
struct VoxelField {
  EulerianGrid grid;
  std::vector<Vec3> values;
};

struct StrayFieldPotential {
  EulerianGrid grid;
  std::vector<double> zeta;       // mean zero
  std::vector<Vec3> grad_zeta;    // central differences plus the k = 0 free-space part
  std::vector<Vec3> source;       // the rasterized chi m that produced it
};

/// Spectral solver of the periodic face-based weak form
///   sum_faces (D zeta - A s) . D phi = 0,
/// D the forward difference and A the face average. The source is
/// zero-padded to twice the box per axis before the periodic solve. The
/// voxel gradient is the average of the two adjacent face values, i.e. the
/// central difference of zeta. The mean of the source, which the periodic
/// problem cannot see, is restored as the field of a uniformly magnetized
/// sphere (mean / 3).
class PoissonSolver {
 public:
  explicit PoissonSolver(const EulerianGrid& grid);
  ~PoissonSolver();
  PoissonSolver(const PoissonSolver&) = delete;
  PoissonSolver& operator=(const PoissonSolver&) = delete;

  StrayFieldPotential solve(const VoxelField& source) const;
  const EulerianGrid& grid() const { return grid_; }

 private:
  struct Impl;
  EulerianGrid grid_;
  std::unique_ptr<Impl> impl_;
};

/// Throws DegenerateGrid if any voxel count is below 8.
StrayFieldPotential solve_potential(const VoxelField& source);

/// (mu0/2) sum_v s_v . grad zeta_v |voxel|, the whole-space energy
/// int_{R^3} |grad zeta|^2 of the truncated source.
double magnetostatic_energy(const StrayFieldPotential& pot, const MaterialModel& M);

/// |sum (D zeta - A s) . D phi| / (sum |D zeta . D phi| + sum |A s . D phi|)
/// over voxel faces, phi sampled at voxel centres. phi has to vanish on the
/// outermost voxel layer.
double weak_form_residual(const StrayFieldPotential& pot, const std::vector<double>& phi);

/// chi_{Omega^y} m at voxel centres, from the mask and preimages of `dc`.
VoxelField rasterize(const State& q, const DeformedConfiguration& dc);
VoxelField rasterize(const State& q, const EulerianGrid& grid);

/// Magnetostatic term on a fixed Eulerian grid. The deformed configuration is
/// cached per deformation; throws DomainEscaped if y(Omega) leaves the inner
/// half of the box.
class StrayField {
 public:
  explicit StrayField(const EulerianGrid& grid, DeformedConfigurationOptions options = {});

  double energy(const State& q, const MaterialModel& M) const;
  /// Energy with gradients with respect to the nodal y and raw mu. The mask is
  /// held fixed (its change is a measure-zero event for the rasterizer).
  double energy_and_gradient(const State& q, const MaterialModel& M, NodalVectors* dy,
                             NodalVectors* dmu) const;
  StrayFieldPotential potential(const State& q) const;
  const DeformedConfiguration& configuration(const State& q) const;
  const EulerianGrid& grid() const { return solver_->grid(); }

 private:
  void check_domain(const State& q) const;
  std::shared_ptr<PoissonSolver> solver_;
  DeformedConfigurationOptions options_;
  mutable std::vector<Vec3> cached_y_;
  mutable std::optional<DeformedConfiguration> cached_dc_;
};

} // namespace chiralmag
