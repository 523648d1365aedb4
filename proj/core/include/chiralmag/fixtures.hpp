#pragma once

#include "chiralmag/strayfield.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace chiralmag {

struct FixtureOptions {
  Index3 cells{8, 8, 8};
  double omega = 1.0;         // helix frequency
  std::uint64_t seed = 1;     // random_smooth
  double amplitude = 0.25;    // random_smooth: bound on |grad u|
  bool pin_dirichlet = false; // random_smooth: keep y = x on Gamma
};

/// identity, helix, ball_map, wrap_3pi, random_smooth. Throws UnknownFixture.
State build_fixture(const std::string& name, const FixtureOptions& options = {});
const std::vector<std::string>& fixture_names();

/// y = x on the unit cube with constant mu.
State identity_state(const Grid& grid, const Vec3& mu = Vec3::UnitX());
/// y = x and mu = (cos w x3, sin w x3, 0).
State helix_state(const Grid& grid, double omega);
/// y(x) = (x1, x2, |x1| x3) on (-1,1)^3; `cells` must be even so x1 = 0 is a
/// face plane.
State ball_map_state(int cells);
/// y(x) = ((1+x1) cos 3 pi x2, (1+x1) sin 3 pi x2, x3) on the unit cube.
State wrap_state(int cells);
/// Smooth injective y = x + u with |grad u| <= amplitude and a smooth
/// nowhere-vanishing mu, both from a few random Fourier modes.
State random_smooth_state(const Grid& grid, std::uint64_t seed, double amplitude = 0.25,
                          bool pin_dirichlet = false);

/// Voxel field equal to m inside the ball and 0 outside. Voxels cut by the
/// sphere carry m times their volume fraction, estimated from subsamples^3
/// points (1 gives the plain centre test).
VoxelField uniform_ball_raster(const EulerianGrid& grid, const Vec3& m, double radius = 1.0,
                               const Vec3& centre = Vec3::Zero(), int subsamples = 1);

/// Unit cube grid with Dirichlet face x- (and `neumann` as given).
Grid unit_cube_grid(Index3 cells, FaceSet dirichlet = FaceSet{1}, FaceSet neumann = {});

/// Analytic helix energy density alpha w^2 - kappa w.
double helix_energy_density(double omega, double alpha, double kappa);

} // namespace chiralmag
