#pragma once

#include "chiralmag/dissipation.hpp"
#include "chiralmag/energy.hpp"
#include "chiralmag/strayfield.hpp"

#include <optional>

namespace chiralmag {

/// Everything that defines E~(t, .) besides the state.
struct Problem {
  MaterialModel material;
  LoadSchedule loads;
  EnergyOptions options;
  const StrayField* stray = nullptr; // required when options.magnetostatics

  EnergyBreakdown energy(double t, const State& q) const;
};

/// E~(t, q) + D(anchor, q) with the two nonsmooth terms (TV and D) replaced by
/// pseudo-Huber versions sqrt(r^2 + eps^2) - eps. Used only inside the solver.
class Objective {
 public:
  Objective(const Problem& problem, double huber_eps_tv, double huber_eps_d);

  void set_time(double t) { t_ = t; }
  double time() const { return t_; }
  /// Adds the dissipation D(anchor, .) to the objective.
  void set_anchor(const State& anchor);
  void clear_anchor() { anchor_.reset(); }
  bool has_anchor() const { return anchor_.has_value(); }

  /// Smoothed value; throws NonPositiveDeterminant like the energy.
  double value(const State& q) const;
  /// Smoothed value with gradients with respect to every nodal y and raw mu.
  double value_and_gradient(const State& q, NodalVectors* dy, NodalVectors* dmu) const;

  /// Exact E~(t, q) + D(anchor, q).
  double exact(const State& q) const;

  const Problem& problem() const { return problem_; }

 private:
  double local_terms(const State& q, NodalVectors* dy, NodalVectors* dmu) const;
  double smoothed_tv(const State& q, NodalVectors* dy) const;

  Problem problem_;
  double eps_tv_;
  double eps_d_;
  double t_ = 0.0;
  std::optional<LagrangeanMagnetization> anchor_;
};

/// Global shape-function gradients of a cell at local coordinate xi.
std::array<Vec3, 8> shape_gradients(const Grid& grid, const Vec3& xi);

} // namespace chiralmag
