#pragma once

#include "chiralmag/optimizer.hpp"

#include <functional>
#include <vector>

namespace chiralmag {

struct Partition {
  std::vector<double> times;

  static Partition uniform(double T, int steps);
  /// Throws ConfigError unless t_0 = 0 and times strictly increase.
  void validate() const;
  double final_time() const { return times.back(); }
  double mesh() const;
};

/// Constants of |d/dt E~(t, q)| <= L (E~(t, q) + M).
struct GronwallConstants {
  double L = 0.0;
  double M = 0.0;
};

struct StepAudit {
  int step = 0;
  double t = 0.0;
  EnergyBreakdown energy;
  double dissipation = 0.0;            // D(q^{i-1}, q^i)
  double cumulative_dissipation = 0.0; // sum_{j <= i}
  double power_integral = 0.0;         // int_{t_{i-1}}^{t_i} dE/dt(tau, q^{i-1})
  double energy_inequality_gap = 0.0;  // lhs - rhs, must be <= tol
  double apriori_gap = 0.0;            // lhs - rhs, must be <= tol
  double stability_margin = 0.0;
  bool stability_passed = true;
  int iterations = 0;
  bool kept_previous = false;
};

struct Trajectory {
  Partition partition;
  std::vector<State> states;
  std::vector<StepAudit> steps; // steps[0] describes q^0
  GronwallConstants gronwall;
};

struct EvolveOptions {
  OptimizerConfig optimizer;
  StabilityOptions stability;
  bool audit_stability = true;
  /// Called after each completed step (index, state, audit).
  std::function<void(int, const State&, const StepAudit&)> on_step;
};

/// Runs the incremental problem at t = 0 from q0_raw and audits stability.
State prepare_initial(const State& q0_raw, const Problem& problem, const OptimizerConfig& config,
                      const StabilityOptions& stability, StabilityReport* report = nullptr);

/// Throws StepFailed wrapping optimizer errors and CertificationFailed if the
/// Gronwall pair does not bound the load power on the trajectory.
Trajectory evolve(const State& q0, const Partition& partition, const Problem& problem, const EvolveOptions& options);

/// 5-point Gauss integral of load_power over [a, b] at fixed q.
double power_integral(double a, double b, const State& q, const LoadSchedule& loads);

/// (L, M) from sup norms of the loads and their rates over [0, T] and the
/// coercivity constants. `q_scale` supplies the grid and Dirichlet data.
GronwallConstants estimate_gronwall_constants(const State& q_scale, const Problem& problem, double T);

/// Checks |dE/dt| <= L (E + M) at `samples` times on each state; returns the
/// smallest margin L (E + M) - |dE/dt| and throws CertificationFailed if it
/// is negative beyond roundoff.
double certify_gronwall(const GronwallConstants& c, const std::vector<State>& states, const Problem& problem,
                        double T, int samples = 20);

struct EnergyBalanceReport {
  /// E(t_i, q^i) + Var_D[0, t_i] - E(0, q^0) - int_0^{t_i} dE/dt(tau, q(tau-)).
  std::vector<double> upper_gap;
  /// The same left-hand side minus the right-hand side with the integrand
  /// held at q^i on (t_{i-1}, t_i]. Nonnegative by stability of q^{i-1}; it
  /// closes at rate O(|Pi|).
  std::vector<double> lower_gap;
  double worst_upper = 0.0;
  double worst_lower = 0.0;
};

EnergyBalanceReport energy_balance_report(const Trajectory& traj, const Problem& problem);

} // namespace chiralmag
