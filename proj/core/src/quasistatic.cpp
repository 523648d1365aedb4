#include "chiralmag/quasistatic.hpp"

#include "chiralmag/errors.hpp"
#include "chiralmag/logging.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace chiralmag {

Partition Partition::uniform(double T, int steps) {
  if (!(T > 0.0) || steps < 1) throw Error(ErrorCode::ConfigError, "uniform partition needs T > 0 and N >= 1");
  Partition p;
  p.times.resize(static_cast<std::size_t>(steps) + 1);
  for (int i = 0; i <= steps; ++i) p.times[static_cast<std::size_t>(i)] = T * i / steps;
  p.times.back() = T;
  return p;
}

void Partition::validate() const {
  if (times.size() < 2) throw Error(ErrorCode::ConfigError, "partition needs at least two times");
  if (times.front() != 0.0) throw Error(ErrorCode::ConfigError, "partition must start at t = 0");
  for (std::size_t i = 1; i < times.size(); ++i) {
    if (!(times[i] > times[i - 1])) throw Error(ErrorCode::ConfigError, "partition times must strictly increase");
  }
}

double Partition::mesh() const {
  double m = 0.0;
  for (std::size_t i = 1; i < times.size(); ++i) m = std::max(m, times[i] - times[i - 1]);
  return m;
}

double power_integral(double a, double b, const State& q, const LoadSchedule& loads) {
  // Load power is affine in the moments, so the moments are computed once.
  static const double x[5] = {-0.9061798459386640, -0.5384693101056831, 0.0, 0.5384693101056831,
                              0.9061798459386640};
  static const double w[5] = {0.2369268850561891, 0.4786286704993665, 0.5688888888888889, 0.4786286704993665,
                              0.2369268850561891};
  const LoadMoments m = load_moments(q);
  double s = 0.0;
  for (int k = 0; k < 5; ++k) {
    const double t = 0.5 * (a + b) + 0.5 * (b - a) * x[k];
    s += w[k] * -(loads.f.rate(t).dot(m.volume_y) + loads.g.rate(t).dot(m.surface_y) +
                  loads.h.rate(t).dot(m.magnetic_moment));
  }
  return 0.5 * (b - a) * s;
}

State prepare_initial(const State& q0_raw, const Problem& problem, const OptimizerConfig& config,
                      const StabilityOptions& stability, StabilityReport* report) {
  OptimizeResult res = minimize_incremental(0.0, q0_raw, problem, config);
  StabilityOptions opts = stability;
  opts.previous.push_back(q0_raw);
  const StabilityReport rep = stability_audit(0.0, res.state, problem, opts);
  if (report) *report = rep;
  return res.state;
}

namespace {

struct SupNorms {
  double f = 0.0, g = 0.0, h = 0.0;
};

SupNorms sup_norms(const LoadSchedule& loads, double T, bool rates) {
  SupNorms s;
  const int n = 400;
  for (int k = 0; k <= n; ++k) {
    const double t = T * k / n;
    auto val = [&](const PolynomialLoad& l) { return (rates ? l.rate(t) : l.value(t)).norm(); };
    s.f = std::max(s.f, val(loads.f));
    s.g = std::max(s.g, val(loads.g));
    s.h = std::max(s.h, val(loads.h));
  }
  // Sampling can miss an interior maximum by a hair.
  const double safety = 1.01;
  s.f *= safety;
  s.g *= safety;
  s.h *= safety;
  return s;
}

/// int over one boundary face of |y|.
double face_integral_abs(const State& q, Face f) {
  const Grid& grid = q.grid;
  const Vec3 h = grid.spacing();
  const Index3 n = grid.cells();
  const int axis = face_axis(f);
  const int u = (axis + 1) % 3, v = (axis + 2) % 3;
  const int layer = face_is_max(f) ? n[axis] - 1 : 0;
  double s = 0.0;
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
        s += 0.25 * h[u] * h[v] * interpolate(grid, q.y.nodes, c, xi).norm();
      }
    }
  }
  return s;
}

/// max over x >= 0 of x^r - theta x.
double young_constant(double r, double theta) {
  return (1.0 - r) * std::pow(r / theta, r / (1.0 - r));
}

/// Bound of the load work  c0 + c1 P^{1/p} + c3 P^{3/p}  for load magnitudes
/// (f, g, h), P = ||grad y||_p^p.
struct WorkBound {
  double c0 = 0.0, c1 = 0.0, c3 = 0.0;
};

WorkBound work_bound(const State& q, double p, const SupNorms& s) {
  const Grid& grid = q.grid;
  const double vol = grid.volume();
  const Vec3 ext = grid.box().extent();
  Face gamma = Face::XMin;
  for (Face f : kAllFaces) {
    if (grid.dirichlet_faces().test(static_cast<int>(f))) {
      gamma = f;
      break;
    }
  }
  const double ld = ext[face_axis(gamma)];
  const double grad_l1 = std::pow(vol, 1.0 - 1.0 / p); // int |grad y| <= this * P^{1/p}
  const double y0 = ld * face_integral_abs(q, gamma);
  const double y1 = ld * grad_l1;
  double s0 = 0.0, s1 = 0.0;
  for (Face f : kAllFaces) {
    if (!grid.neumann_faces().test(static_cast<int>(f))) continue;
    const double ln = ext[face_axis(f)];
    s0 += y0 / ln;
    s1 += y1 / ln + grad_l1;
  }
  const double d3 = std::pow(3.0, -1.5) * std::pow(vol, 1.0 - 3.0 / p);
  WorkBound b;
  b.c0 = s.f * y0 + s.g * s0;
  b.c1 = s.f * y1 + s.g * s1;
  b.c3 = s.h * d3;
  return b;
}

} // namespace

GronwallConstants estimate_gronwall_constants(const State& q_scale, const Problem& problem, double T) {
  const MaterialModel& M = problem.material;
  const CoercivityConstants cc = coercivity_constants(M, q_scale.grid.volume());
  const double p = M.p;
  const WorkBound lower = work_bound(q_scale, p, sup_norms(problem.loads, T, false));
  const WorkBound rate = work_bound(q_scale, p, sup_norms(problem.loads, T, true));

  // E~ >= (C1/2) P - K: half of C1 absorbs the load work by Young.
  double K = cc.c3 + cc.elastic_offset + lower.c0;
  if (lower.c1 > 0.0) K += lower.c1 * young_constant(1.0 / p, cc.c1 / (4.0 * lower.c1));
  if (lower.c3 > 0.0) K += lower.c3 * young_constant(3.0 / p, cc.c1 / (4.0 * lower.c3));

  // |dE~/dt| <= A P + B.
  const double A = rate.c1 + rate.c3;
  const double B = rate.c0 + rate.c1 * young_constant(1.0 / p, 1.0) + rate.c3 * young_constant(3.0 / p, 1.0);

  GronwallConstants g;
  g.L = std::max(2.0 * A / cc.c1, 1e-12);
  g.M = std::max(K + B / g.L, 1e-12);
  if (A == 0.0 && B == 0.0) g.M = std::max(K, 1e-12);
  return g;
}

double certify_gronwall(const GronwallConstants& c, const std::vector<State>& states, const Problem& problem,
                        double T, int samples) {
  double worst = std::numeric_limits<double>::infinity();
  for (const auto& q : states) {
    const EnergyBreakdown e0 = problem.energy(0.0, q);
    const double internal = e0.internal();
    for (int k = 0; k < samples; ++k) {
      const double t = samples > 1 ? T * k / (samples - 1) : 0.0;
      const double e = internal - load_work(t, q, problem.loads);
      const double power = load_power(t, q, problem.loads);
      const double margin = c.L * (e + c.M) - std::abs(power);
      worst = std::min(worst, margin);
      if (margin < -1e-10 * (std::abs(e) + c.M + 1.0)) {
        std::ostringstream os;
        os << "|dE/dt| = " << std::abs(power) << " exceeds L (E + M) = " << c.L * (e + c.M) << " at t = " << t;
        throw Error(ErrorCode::CertificationFailed, os.str());
      }
    }
  }
  return worst;
}

Trajectory evolve(const State& q0, const Partition& partition, const Problem& problem, const EvolveOptions& options) {
  partition.validate();
  options.optimizer.validate();
  Trajectory traj;
  traj.partition = partition;
  const double T = partition.final_time();
  traj.gronwall = estimate_gronwall_constants(q0, problem, T);
  const GronwallConstants& gc = traj.gronwall;

  traj.states.push_back(q0);
  StepAudit first;
  first.t = 0.0;
  first.energy = problem.energy(0.0, q0);
  if (options.audit_stability) {
    const StabilityReport rep = stability_audit(0.0, q0, problem, options.stability);
    first.stability_margin = rep.worst_margin;
    first.stability_passed = rep.passed;
  }
  traj.steps.push_back(first);
  if (options.on_step) options.on_step(0, q0, first);
  const double e0 = first.energy.total;

  for (std::size_t i = 1; i < partition.times.size(); ++i) {
    const double t_prev = partition.times[i - 1];
    const double t = partition.times[i];
    const State& q_prev = traj.states.back();
    OptimizeResult res;
    try {
      res = minimize_incremental(t, q_prev, problem, options.optimizer);
    } catch (const Error& e) {
      throw StepFailed(static_cast<int>(i), e.what());
    }
    StepAudit a;
    a.step = static_cast<int>(i);
    a.t = t;
    a.energy = res.energy;
    a.dissipation = res.dissipation;
    a.cumulative_dissipation = traj.steps.back().cumulative_dissipation + res.dissipation;
    a.iterations = res.iterations;
    a.kept_previous = res.kept_previous;
    a.power_integral = power_integral(t_prev, t, q_prev, problem.loads);
    a.energy_inequality_gap = res.energy.total - traj.steps.back().energy.total + res.dissipation - a.power_integral;
    a.apriori_gap = res.energy.total + gc.M + a.cumulative_dissipation - (e0 + gc.M) * std::exp(gc.L * t);
    if (options.audit_stability) {
      StabilityOptions so = options.stability;
      so.seed = options.stability.seed + i;
      so.previous.insert(so.previous.end(), traj.states.begin(), traj.states.end());
      const StabilityReport rep = stability_audit(t, res.state, problem, so);
      a.stability_margin = rep.worst_margin;
      a.stability_passed = rep.passed;
    }
    traj.states.push_back(res.state);
    traj.steps.push_back(a);
    log_info("step " + std::to_string(i) + " t=" + std::to_string(t) + " E=" + std::to_string(a.energy.total) +
             " D=" + std::to_string(a.dissipation));
    if (options.on_step) options.on_step(static_cast<int>(i), traj.states.back(), a);
  }
  certify_gronwall(gc, traj.states, problem, T);
  return traj;
}

EnergyBalanceReport energy_balance_report(const Trajectory& traj, const Problem& problem) {
  EnergyBalanceReport rep;
  const auto& ts = traj.partition.times;
  const double e0 = traj.steps.front().energy.total;
  double left = 0.0, right = 0.0;
  rep.upper_gap.push_back(0.0);
  rep.lower_gap.push_back(0.0);
  for (std::size_t i = 1; i < traj.states.size(); ++i) {
    left += power_integral(ts[i - 1], ts[i], traj.states[i - 1], problem.loads);
    right += power_integral(ts[i - 1], ts[i], traj.states[i], problem.loads);
    const double lhs = traj.steps[i].energy.total + traj.steps[i].cumulative_dissipation;
    rep.upper_gap.push_back(lhs - (e0 + left));
    rep.lower_gap.push_back(lhs - (e0 + right));
  }
  rep.worst_upper = *std::max_element(rep.upper_gap.begin(), rep.upper_gap.end());
  rep.worst_lower = *std::max_element(rep.lower_gap.begin(), rep.lower_gap.end());
  return rep;
}

} // namespace chiralmag
