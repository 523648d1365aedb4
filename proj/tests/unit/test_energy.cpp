#include "support.hpp"

#include "chiralmag/energy.hpp"
#include "chiralmag/fixtures.hpp"
#include "chiralmag/kinematics.hpp"

#include <cmath>

using namespace chiralmag;

namespace {

EnergyOptions plain() { return EnergyOptions{false, false}; }

} // namespace

TEST(Energy, StoredEnergyAtIdentity) {
  MaterialModel M;
  const Vec3 l = Vec3(1, 2, 2).normalized();
  // W(I, l) = a (3^{p/2} - 3^{p/2}) + gamma(1) + b |l|^2 = b
  EXPECT_NEAR(elastic_density(Mat3::Identity(), l, M), M.b, 1e-14);
}

TEST(Energy, StoredEnergyClosedForm) {
  MaterialModel M;
  M.a = 0.7;
  M.p = 3.5;
  M.s = 1.5;
  M.b = 0.4;
  std::mt19937_64 rng(6);
  const Mat3 F = test::random_gradient(rng);
  const Vec3 l = test::random_unit(rng);
  const double h = F.determinant();
  const Mat3 C = h * F.inverse().transpose();
  const double expected = M.a * (std::pow(F.norm(), M.p) - std::pow(3.0, M.p / 2)) + std::pow(h, -M.s) + h * h - 2 +
                          M.b * (C * l).squaredNorm();
  EXPECT_NEAR(elastic_density(F, l, M), expected, 1e-12 * std::abs(expected));
}

TEST(Energy, CompressionBarrierBlowsUp) {
  EXPECT_NEAR(compression_barrier(1.0, 2.0), 0.0, 1e-15);
  EXPECT_GT(compression_barrier(1e-3, 2.0), 1e5);
  Mat3 F = Mat3::Identity();
  F(0, 0) = -0.5;
  test::expect_error(ErrorCode::NonPositiveDeterminant, [&] { elastic_density(F, Vec3::UnitX(), MaterialModel{}); });
}

TEST(Energy, MaterialValidation) {
  MaterialModel M;
  M.p = 2.5;
  test::expect_error(ErrorCode::InvalidMaterial, [&] { M.validate(); });
  M = MaterialModel{};
  M.alpha = 0;
  test::expect_error(ErrorCode::InvalidMaterial, [&] { M.validate(); });
}

TEST(Energy, IdentityStateEnergies) {
  const State q = identity_state(unit_cube_grid({4, 4, 4}), Vec3(0, 0, 1));
  MaterialModel M;
  const EnergyBreakdown e = total_energy(0.0, q, M, {}, plain(), nullptr);
  EXPECT_NEAR(e.elastic, M.b * q.grid.volume(), 1e-13);
  EXPECT_NEAR(e.exchange, 0.0, 1e-15);
  EXPECT_NEAR(e.dmi, 0.0, 1e-15);
  EXPECT_EQ(e.load_work, 0.0);
  EXPECT_NEAR(e.total, e.internal(), 1e-15);
}

class HelixEnergy : public ::testing::TestWithParam<double> {};

TEST_P(HelixEnergy, MatchesScalarCalculus) {
  const double w = GetParam();
  MaterialModel M;
  M.alpha = 1.3;
  M.kappa = 0.8;
  const State q = helix_state(unit_cube_grid({12, 12, 12}), w);
  // m = (cos wz, sin wz, 0): |grad m|^2 = w^2 and curl m . m = -w.
  EXPECT_NEAR(exchange_energy(q, M), M.alpha * w * w, 2e-3 * M.alpha * w * w);
  EXPECT_NEAR(dmi_energy(q, M), -M.kappa * w, 2e-3 * M.kappa * w);
  EXPECT_NEAR(helix_energy_density(w, M.alpha, M.kappa), M.alpha * w * w - M.kappa * w, 1e-15);
}

INSTANTIATE_TEST_SUITE_P(Frequencies, HelixEnergy, ::testing::Values(0.5, 1.0, 2.0));

TEST(Energy, ZeroKappaGivesExactlyZeroDmi) {
  MaterialModel M;
  M.kappa = 0.0;
  const State q = random_smooth_state(unit_cube_grid({3, 3, 3}), 8, 0.2);
  EXPECT_EQ(dmi_energy(q, M), 0.0);
}

TEST(Energy, DmiIsOddInMagnetization) {
  MaterialModel M;
  State q = random_smooth_state(unit_cube_grid({3, 3, 3}), 9, 0.2);
  const double d = dmi_energy(q, M);
  for (auto& m : q.mu.nodes) m = -m;
  EXPECT_NEAR(dmi_energy(q, M), d, 1e-12); // curl(-m).(-m) = curl m . m
  M.kappa = -M.kappa;
  EXPECT_NEAR(dmi_energy(q, M), -d, 1e-12);
}

TEST(Energy, UniformLoadWork) {
  const Grid g = unit_cube_grid({3, 3, 3}, FaceSet{1}, FaceSet{2});
  const State q = identity_state(g, Vec3::UnitZ());
  LoadSchedule L;
  L.f.coeffs = {Vec3(1, 0, 0)};
  L.g.coeffs = {Vec3(0, 0, 0), Vec3(2, 0, 0)};
  L.h.coeffs = {Vec3(0, 0, 3)};
  // int f.y = 1/2; traction on x = 1: int g.y = 2t; field: 3 |Omega|.
  EXPECT_NEAR(load_work(0.5, q, L), 0.5 + 1.0 + 3.0, 1e-13);
  EXPECT_NEAR(load_power(0.5, q, L), -2.0, 1e-13);
  const EnergyBreakdown e = total_energy(0.5, q, MaterialModel{}, L, plain(), nullptr);
  EXPECT_NEAR(e.total, e.internal() - e.load_work, 1e-13);
}

TEST(Energy, PolynomialLoad) {
  PolynomialLoad l{{Vec3(1, 0, 0), Vec3(0, 2, 0), Vec3(0, 0, 3)}};
  EXPECT_LT((l.value(2.0) - Vec3(1, 4, 12)).norm(), 1e-15);
  EXPECT_LT((l.rate(2.0) - Vec3(0, 2, 12)).norm(), 1e-15);
  EXPECT_FALSE(l.is_constant());
  EXPECT_TRUE(PolynomialLoad{}.is_zero());
}

TEST(Energy, RegularizerVanishesForAffineMaps) {
  const Grid g = unit_cube_grid({3, 3, 3});
  Mat3 A;
  A << 1, 0.2, 0, 0, 1.1, 0, 0.1, 0, 0.9;
  DeformationField y{sample_nodal(g, [&](const Vec3& x) { return Vec3(A * x); })};
  EXPECT_NEAR(tv_regularizer(g, y), 0.0, 1e-13);
  const State q = random_smooth_state(g, 10, 0.3);
  EXPECT_GT(tv_regularizer(g, q.y), 0.0);
}

TEST(Energy, CellCenterCofactors) {
  const State q = ball_map_state(4);
  const auto C = cell_center_cofactors(q.grid, q.y);
  ASSERT_EQ(static_cast<int>(C.size()), q.grid.cell_count());
  const Vec3 x = q.grid.reference_point(0, Vec3::Constant(0.5));
  Mat3 expected;
  expected << std::abs(x.x()), 0, x.z(), 0, std::abs(x.x()), 0, 0, 0, 1; // x1 < 0 in cell 0
  EXPECT_LT((C[0] - expected).norm(), 1e-13);
}

TEST(Coercivity, FloorHoldsOnRandomStates) {
  MaterialModel M;
  for (int s = 0; s < 10; ++s) {
    const State q = random_smooth_state(unit_cube_grid({3, 3, 3}), 40 + s, 0.4);
    const CoercivityReport r = coercivity_floor(q, M);
    EXPECT_TRUE(r.floor_holds) << r.energy << " vs " << r.floor;
    EXPECT_GT(r.c1, 0);
    EXPECT_GT(r.c2, 0);
    EXPECT_NEAR(r.grad_y_p_norm, gradient_p_norm(q, M.p), 1e-12);
  }
}

TEST(Coercivity, StretchingIncreasesGradientNorm) {
  const Grid g = unit_cube_grid({2, 2, 2});
  State q = identity_state(g);
  EXPECT_NEAR(gradient_p_norm(q, 4.0), 9.0, 1e-13); // |I|^4 = 9
  for (auto& y : q.y.nodes) y *= 2;
  EXPECT_NEAR(gradient_p_norm(q, 4.0), 144.0, 1e-12);
}
