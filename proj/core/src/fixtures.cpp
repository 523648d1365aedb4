#include "chiralmag/fixtures.hpp"

#include "chiralmag/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace chiralmag {

namespace {
constexpr double kPi = std::numbers::pi;
}

Grid unit_cube_grid(Index3 cells, FaceSet dirichlet, FaceSet neumann) {
  return Grid(Box{Vec3::Zero(), Vec3::Ones()}, cells, dirichlet, neumann);
}

const std::vector<std::string>& fixture_names() {
  static const std::vector<std::string> names{"identity", "helix", "ball_map", "wrap_3pi", "random_smooth"};
  return names;
}

State identity_state(const Grid& grid, const Vec3& mu) {
  State q{grid, {}, {}};
  q.y.nodes = sample_nodal(grid, [](const Vec3& x) { return x; });
  q.mu.nodes.assign(static_cast<std::size_t>(grid.node_count()), mu.normalized());
  return q;
}

State helix_state(const Grid& grid, double omega) {
  State q = identity_state(grid);
  q.mu.nodes = sample_nodal(grid, [&](const Vec3& x) { return Vec3(std::cos(omega * x.z()), std::sin(omega * x.z()), 0.0); });
  return q;
}

State ball_map_state(int cells) {
  if (cells < 2 || cells % 2 != 0) throw Error(ErrorCode::InvalidGrid, "ball_map needs an even cell count");
  const Grid grid(Box{-Vec3::Ones(), Vec3::Ones()}, {cells, cells, cells}, FaceSet{1});
  State q{grid, {}, {}};
  q.y.nodes = sample_nodal(grid, [](const Vec3& x) { return Vec3(x.x(), x.y(), std::abs(x.x()) * x.z()); });
  q.mu.nodes.assign(static_cast<std::size_t>(grid.node_count()), Vec3::UnitZ());
  return q;
}

State wrap_state(int cells) {
  const Grid grid = unit_cube_grid({cells, cells, cells});
  State q{grid, {}, {}};
  q.y.nodes = sample_nodal(grid, [](const Vec3& x) {
    const double r = 1.0 + x.x();
    return Vec3(r * std::cos(3.0 * kPi * x.y()), r * std::sin(3.0 * kPi * x.y()), x.z());
  });
  q.mu.nodes.assign(static_cast<std::size_t>(grid.node_count()), Vec3::UnitZ());
  return q;
}

namespace {

struct Mode {
  Vec3 k;
  Vec3 amp;
  double phase;
};

std::vector<Mode> random_modes(std::mt19937_64& rng, int count) {
  std::uniform_int_distribution<int> wave(0, 2);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * kPi);
  std::vector<Mode> modes;
  for (int i = 0; i < count; ++i) {
    Mode m;
    m.k = Vec3(wave(rng), wave(rng), wave(rng));
    if (m.k.isZero()) m.k.x() = 1.0;
    m.amp = Vec3(unit(rng), unit(rng), unit(rng));
    m.phase = phase(rng);
    modes.push_back(m);
  }
  return modes;
}

Vec3 evaluate(const std::vector<Mode>& modes, const Vec3& x, const Box& box) {
  const Vec3 s = (x - box.lo).cwiseQuotient(box.extent());
  Vec3 v = Vec3::Zero();
  for (const auto& m : modes) v += m.amp * std::sin(kPi * m.k.dot(s) + m.phase);
  return v;
}

/// Upper bound of |grad sum| (Frobenius) over the box.
double gradient_bound(const std::vector<Mode>& modes, const Box& box) {
  double b = 0.0;
  for (const auto& m : modes) b += m.amp.norm() * kPi * m.k.cwiseQuotient(box.extent()).norm();
  return b;
}

} // namespace

State random_smooth_state(const Grid& grid, std::uint64_t seed, double amplitude, bool pin_dirichlet) {
  std::mt19937_64 rng(seed);
  const Box box = grid.box();
  const auto ymodes = random_modes(rng, 3);
  const auto mmodes = random_modes(rng, 3);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  Vec3 base(unit(rng), unit(rng), unit(rng));
  if (base.norm() < 1e-3) base = Vec3::UnitX();
  base.normalize();

  // The cut-off vanishes on every Dirichlet face: phi = prod s_d or (1 - s_d),
  // with |grad phi| <= sum 1/extent and phi <= 1.
  double cutoff_grad = 0.0;
  for (Face f : kAllFaces) {
    if (pin_dirichlet && grid.dirichlet_faces().test(static_cast<int>(f))) cutoff_grad += 1.0 / box.extent()[face_axis(f)];
  }
  double sup = 0.0;
  for (const auto& m : ymodes) sup += m.amp.norm();
  const double bound = gradient_bound(ymodes, box) + cutoff_grad * sup;
  const double scale = amplitude / bound;

  State q{grid, {}, {}};
  q.y.nodes = sample_nodal(grid, [&](const Vec3& x) {
    double phi = 1.0;
    if (pin_dirichlet) {
      const Vec3 s = (x - box.lo).cwiseQuotient(box.extent());
      for (Face f : kAllFaces) {
        if (!grid.dirichlet_faces().test(static_cast<int>(f))) continue;
        phi *= face_is_max(f) ? 1.0 - s[face_axis(f)] : s[face_axis(f)];
      }
    }
    return Vec3(x + scale * phi * evaluate(ymodes, x, box));
  });
  double msup = 0.0;
  for (const auto& m : mmodes) msup += m.amp.norm();
  q.mu.nodes = sample_nodal(grid, [&](const Vec3& x) {
    return Vec3((base + (0.6 / msup) * evaluate(mmodes, x, box)).normalized());
  });
  return q;
}

VoxelField uniform_ball_raster(const EulerianGrid& grid, const Vec3& m, double radius, const Vec3& centre,
                               int subsamples) {
  VoxelField f;
  f.grid = grid;
  f.values.assign(static_cast<std::size_t>(grid.voxel_count()), Vec3::Zero());
  const Vec3 h = grid.spacing();
  const int s = std::max(1, subsamples);
  const double half_diag = 0.5 * h.norm();
  for (int v = 0; v < grid.voxel_count(); ++v) {
    const Vec3 c = grid.center(v);
    const double r = (c - centre).norm();
    if (r <= radius - half_diag) {
      f.values[static_cast<std::size_t>(v)] = m;
      continue;
    }
    if (r >= radius + half_diag) continue;
    int inside = 0;
    for (int k = 0; k < s; ++k)
      for (int j = 0; j < s; ++j)
        for (int i = 0; i < s; ++i) {
          const Vec3 off((i + 0.5) / s - 0.5, (j + 0.5) / s - 0.5, (k + 0.5) / s - 0.5);
          if ((c + off.cwiseProduct(h) - centre).norm() < radius) ++inside;
        }
    f.values[static_cast<std::size_t>(v)] = m * (static_cast<double>(inside) / (s * s * s));
  }
  return f;
}

double helix_energy_density(double omega, double alpha, double kappa) { return alpha * omega * omega - kappa * omega; }

State build_fixture(const std::string& name, const FixtureOptions& options) {
  const Index3 n = options.cells;
  if (name == "identity") return identity_state(unit_cube_grid(n));
  if (name == "helix") return helix_state(unit_cube_grid(n), options.omega);
  if (name == "ball_map") return ball_map_state(n[0]);
  if (name == "wrap_3pi") return wrap_state(n[0]);
  if (name == "random_smooth") {
    return random_smooth_state(unit_cube_grid(n), options.seed, options.amplitude, options.pin_dirichlet);
  }
  throw Error(ErrorCode::UnknownFixture, "no fixture named '" + name + "'");
}

} // namespace chiralmag
