#pragma once

#include "chiralmag/fields.hpp"

#include <vector>

namespace chiralmag {

class StrayField;

/// Parameters of the stored energy
///   W(F, l) = a (|F|^p - 3^{p/2}) + gamma(det F) + b |cof F l|^2,
///   gamma(h) = h^{-s} + h^2 - 2,
/// together with the micromagnetic constants.
struct MaterialModel {
  double a = 1.0;     // elastic stiffness K
  double p = 4.0;     // growth exponent, p > 3
  double s = 2.0;     // compression blow-up exponent
  double b = 0.5;     // magnetoelastic coupling
  double alpha = 1.0; // exchange constant
  double mu0 = 1.0;   // vacuum permeability
  double kappa = 2.0; // DMI constant, any sign

  /// Throws InvalidMaterial.
  void validate() const;
};

/// Spatially uniform vector load with polynomial time dependence
/// v(t) = sum_k coeffs[k] t^k.
struct PolynomialLoad {
  std::vector<Vec3> coeffs;

  Vec3 value(double t) const;
  Vec3 rate(double t) const;
  bool is_zero() const;
  bool is_constant() const;
};

/// Body force f on Omega, surface traction g on Sigma (the Neumann faces) and
/// Eulerian magnetic field h.
struct LoadSchedule {
  PolynomialLoad f;
  PolynomialLoad g;
  PolynomialLoad h;
};

struct EnergyBreakdown {
  double elastic = 0.0;
  double exchange = 0.0;
  double magnetostatic = 0.0;
  double dmi = 0.0;
  double regularizer = 0.0;
  double load_work = 0.0;
  double total = 0.0;

  double internal() const { return elastic + exchange + magnetostatic + dmi + regularizer; }
};

struct EnergyOptions {
  bool magnetostatics = true;
  bool regularizer = false; // adds |D(cof grad y)|(Omega)
};

double compression_barrier(double h, double s);
/// W(F, lambda). Throws NonPositiveDeterminant.
double elastic_density(const Mat3& F, const Vec3& lambda, const MaterialModel& M);

/// Partial derivatives of one quadrature-point density with respect to the
/// point kinematics: F, the raw interpolated mu and its raw gradient.
struct DensityGradient {
  Mat3 dF = Mat3::Zero();
  Vec3 dmu = Vec3::Zero();
  Mat3 dgrad_mu = Mat3::Zero();

  DensityGradient& operator+=(const DensityGradient& o) {
    dF += o.dF;
    dmu += o.dmu;
    dgrad_mu += o.dgrad_mu;
    return *this;
  }
};

/// Densities per unit reference volume, each optionally with gradient.
double elastic_density(const PointKinematics& pk, const MaterialModel& M, DensityGradient* grad);
double exchange_density(const PointKinematics& pk, const MaterialModel& M, DensityGradient* grad);
double dmi_density(const PointKinematics& pk, const MaterialModel& M, DensityGradient* grad);
/// -h . m det F (pullback of the Eulerian field work, sign included).
double field_work_density(const PointKinematics& pk, const Vec3& h, DensityGradient* grad);

/// Chain rule helper: derivative of a function of lambda = mu/|mu| and of
/// grad m = (I - l l^T) grad mu / |mu| back to (mu, grad mu).
void pull_back_direction_gradient(const PointKinematics& pk, const Vec3& d_lambda, const Mat3& d_grad_m,
                                  DensityGradient& out);

double elastic_energy(const State& q, const MaterialModel& M);
double exchange_energy(const State& q, const MaterialModel& M);
double dmi_energy(const State& q, const MaterialModel& M);

/// int f.y dx + int_Sigma g.y dA + int_{Omega^y} h.m dxi, the last in pullback.
double load_work(double t, const State& q, const LoadSchedule& loads);
/// d/dt of the total energy at fixed state: minus the load-work rate.
double load_power(double t, const State& q, const LoadSchedule& loads);

/// Integrals of y over Omega and over Sigma, and of m det grad y over Omega.
struct LoadMoments {
  Vec3 volume_y = Vec3::Zero();
  Vec3 surface_y = Vec3::Zero();
  Vec3 magnetic_moment = Vec3::Zero();
};
LoadMoments load_moments(const State& q);

/// Cell-centered cofactors cof grad y (one per cell, cell order).
std::vector<Mat3> cell_center_cofactors(const Grid& grid, const DeformationField& y);

/// Discrete total variation of cof grad y: sum over cells of
/// |cell| * sqrt(sum_d |Delta_d C|_F^2 / h_d^2), with forward differences and a
/// backward difference in the last cell layer of each axis.
double tv_regularizer(const Grid& grid, const DeformationField& y);

/// Fills every term. The magnetostatic term is taken from `stray` when
/// options.magnetostatics is set; stray may be null only if it is not.
EnergyBreakdown total_energy(double t, const State& q, const MaterialModel& M, const LoadSchedule& loads,
                             const EnergyOptions& options, const StrayField* stray);

/// Constants of the lower bound
///   E(q) >= C1 ||grad y||_p^p + C2 ||grad m||^2_{L^2(Omega^y)} - C3 - offset,
/// C = 3^{-3/2}, r = p/3, delta = alpha/2 and epsilon half its admissible bound.
/// `elastic_offset` carries a 3^{p/2} |Omega| plus any negative part of gamma,
/// which the chosen W needs on top of the DMI constant C3.
struct CoercivityReport {
  double c1 = 0.0;
  double c2 = 0.0;
  double c3 = 0.0;
  double elastic_offset = 0.0;
  double energy = 0.0;        // E(q) evaluated (magnetostatics excluded: it is >= 0)
  double grad_y_p_norm = 0.0; // ||grad y||_p^p
  double grad_m_sq = 0.0;     // ||grad m||^2 over Omega^y
  double floor = 0.0;
  bool floor_holds = false;
};

struct CoercivityConstants {
  double c1, c2, c3, elastic_offset;
};

CoercivityConstants coercivity_constants(const MaterialModel& M, double volume);
CoercivityReport coercivity_floor(const State& q, const MaterialModel& M);

/// ||grad y||^p_{L^p} by quadrature.
double gradient_p_norm(const State& q, double p);

} // namespace chiralmag
