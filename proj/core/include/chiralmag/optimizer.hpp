#pragma once

#include "chiralmag/objective.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace chiralmag {

struct OptimizerConfig {
  int max_outer_iters = 200;
  double grad_tol = 1e-6;    // on max_a |dE/dq_a| / |cell|
  double armijo_c1 = 1e-4;
  double backtrack = 0.5;
  double step_cap_y = 0.1;   // largest nodal move per step, in units of the smallest cell spacing
  double step_cap_mu = 0.5;  // largest tangent move per step (radians, roughly)
  double huber_eps_d = 1e-4;
  double huber_eps_tv = 1e-3;
  double det_floor = 1e-6;
  int max_backtracks = 60;

  /// Throws ConfigError.
  void validate() const;
};

struct ConvergenceRecord {
  int iteration = 0;
  double objective = 0.0;
  double grad_y = 0.0;
  double grad_mu = 0.0;
  double step_y = 0.0;
  double step_mu = 0.0;
};

struct OptimizeResult {
  State state;
  EnergyBreakdown energy; // exact, at the returned state
  double dissipation = 0.0; // exact D(anchor, state) for incremental problems
  int iterations = 0;
  bool converged = false;
  bool kept_previous = false; // incremental only: the stay-put competitor won
  std::vector<ConvergenceRecord> log;
};

/// Scaled block gradient norms: the largest nodal gradient over the cell
/// volume, Dirichlet nodes excluded for y and tangent part only for mu.
struct BlockGradientNorms {
  double y = 0.0;
  double mu = 0.0;
};
BlockGradientNorms block_gradient_norms(const State& q, const NodalVectors& dy, const NodalVectors& dmu);

/// Block-coordinate descent on E~(t, .). Throws LineSearchStalled.
OptimizeResult minimize_static(double t, const State& q0, const Problem& problem, const OptimizerConfig& config);

/// Minimizes E~(t, .) + D(q_prev, .) warm-started at q_prev. The returned
/// state never has a larger exact incremental objective than q_prev.
OptimizeResult minimize_incremental(double t, const State& q_prev, const Problem& problem,
                                    const OptimizerConfig& config);

struct StabilityOptions {
  std::array<double, 3> mu_amplitudes{1e-3, 1e-2, 1e-1};
  std::array<double, 3> y_amplitudes{1e-3, 1e-2, 1e-1}; // times the smallest cell spacing
  int samples_per_amplitude = 3;
  /// Rigid rotations move the Dirichlet nodes, so they are only admissible
  /// competitors when explicitly requested.
  int rotations = 0;
  std::vector<State> previous;
  std::uint64_t seed = 1;
  double tolerance = 1e-8; // relative to the energy scale
};

struct StabilityReport {
  double energy = 0.0;
  double worst_margin = 0.0; // min over competitors of E(q^) + D(q, q^) - E(q)
  std::string worst_kind;
  int competitors = 0;
  int skipped = 0; // inadmissible samples
  double scale = 1.0;
  bool passed = true;
};

StabilityReport stability_audit(double t, const State& q, const Problem& problem, const StabilityOptions& options);

/// Central finite-difference check of the objective gradient on all free
/// nodes. Returns the largest relative error over components.
struct GradientCheck {
  double max_rel_error_y = 0.0;
  double max_rel_error_mu = 0.0;
};
GradientCheck check_gradient(const Objective& objective, const State& q, double step = 1e-6);

} // namespace chiralmag
