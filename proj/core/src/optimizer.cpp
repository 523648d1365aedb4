#include "chiralmag/optimizer.hpp"

#include "chiralmag/errors.hpp"
#include "chiralmag/kinematics.hpp"
#include "chiralmag/logging.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

namespace chiralmag {

void OptimizerConfig::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0)) throw Error(ErrorCode::ConfigError, std::string("optimizer.") + name + " must be > 0");
  };
  if (max_outer_iters < 0) throw Error(ErrorCode::ConfigError, "optimizer.max_outer_iters must be >= 0");
  positive(grad_tol, "grad_tol");
  positive(armijo_c1, "armijo_c1");
  if (!(armijo_c1 < 1.0)) throw Error(ErrorCode::ConfigError, "optimizer.armijo_c1 must be < 1");
  positive(backtrack, "backtrack");
  if (!(backtrack < 1.0)) throw Error(ErrorCode::ConfigError, "optimizer.backtrack must be < 1");
  positive(step_cap_y, "step_cap_y");
  positive(step_cap_mu, "step_cap_mu");
  positive(huber_eps_d, "huber_eps_d");
  positive(huber_eps_tv, "huber_eps_tv");
  positive(det_floor, "det_floor");
  if (max_backtracks < 1) throw Error(ErrorCode::ConfigError, "optimizer.max_backtracks must be >= 1");
}

BlockGradientNorms block_gradient_norms(const State& q, const NodalVectors& dy, const NodalVectors& dmu) {
  BlockGradientNorms n;
  const double vol = q.grid.cell_volume();
  for (int a = 0; a < q.grid.node_count(); ++a) {
    const auto i = static_cast<std::size_t>(a);
    if (!q.grid.is_dirichlet_node(a)) n.y = std::max(n.y, dy[i].norm());
    const Vec3& m = q.mu.nodes[i];
    n.mu = std::max(n.mu, (dmu[i] - m * m.dot(dmu[i])).norm());
  }
  n.y /= vol;
  n.mu /= vol;
  return n;
}

namespace {

double dot(const NodalVectors& a, const NodalVectors& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i].dot(b[i]);
  return s;
}

double max_norm(const NodalVectors& a) {
  double m = 0.0;
  for (const auto& v : a) m = std::max(m, v.norm());
  return m;
}

/// Outcome of one backtracking line search.
struct LineSearch {
  bool moved = false;
  bool resolved = true; // false: backtracking exhausted with a resolvable predicted decrease
  double alpha = 0.0;
  double value = 0.0;
};

class BlockDescent {
 public:
  BlockDescent(const Objective& obj, const OptimizerConfig& cfg, State q)
      : obj_(obj), cfg_(cfg), q_(std::move(q)) {
    const Grid& g = q_.grid;
    free_.resize(static_cast<std::size_t>(g.node_count()));
    for (int a = 0; a < g.node_count(); ++a) free_[static_cast<std::size_t>(a)] = !g.is_dirichlet_node(a);
    hmin_ = g.spacing().minCoeff();
  }

  OptimizeResult run() {
    OptimizeResult res;
    NodalVectors dy, dmu;
    double value = obj_.value_and_gradient(q_, &dy, &dmu);
    for (int it = 0;; ++it) {
      const BlockGradientNorms norms = block_gradient_norms(q_, dy, dmu);
      ConvergenceRecord rec{it, value, norms.y, norms.mu, 0.0, 0.0};
      if (norms.y < cfg_.grad_tol && norms.mu < cfg_.grad_tol) {
        res.converged = true;
        res.log.push_back(rec);
        break;
      }
      if (it >= cfg_.max_outer_iters) {
        res.log.push_back(rec);
        break;
      }
      bool progress = false;
      if (norms.mu >= cfg_.grad_tol) {
        const LineSearch ls = mu_step(value, dmu);
        if (!ls.resolved) throw LineSearchStalled("mu", stall_message(it));
        if (ls.moved) {
          value = ls.value;
          progress = true;
          value = obj_.value_and_gradient(q_, &dy, &dmu);
        }
        rec.step_mu = ls.alpha;
      }
      if (block_gradient_norms(q_, dy, dmu).y >= cfg_.grad_tol) {
        const LineSearch ls = y_step(value, dy);
        if (!ls.resolved) {
          // The rasterized stray field jumps when a voxel enters or leaves
          // y(Omega), so its y-gradient is only almost-everywhere exact.
          if (!obj_.problem().options.magnetostatics) throw LineSearchStalled("y", stall_message(it));
        }
        if (ls.moved) {
          progress = true;
          value = obj_.value_and_gradient(q_, &dy, &dmu);
        }
        rec.step_y = ls.alpha;
      }
      res.log.push_back(rec);
      log_debug("iter " + std::to_string(it) + " objective " + std::to_string(value));
      res.iterations = it + 1;
      if (!progress) {
        // Neither block can decrease the objective beyond roundoff.
        res.converged = true;
        res.log.push_back({it + 1, value, block_gradient_norms(q_, dy, dmu).y, block_gradient_norms(q_, dy, dmu).mu, 0.0, 0.0});
        break;
      }
    }
    res.state = q_;
    return res;
  }

 private:
  std::string stall_message(int it) const {
    std::ostringstream os;
    os << "step underflow after " << cfg_.max_backtracks << " backtracks at outer iteration " << it;
    return os.str();
  }

  bool resolvable(double predicted, double value) const {
    return predicted > 1e-13 * (std::abs(value) + 1.0);
  }

  LineSearch mu_step(double value, const NodalVectors& dmu) {
    const std::size_t n = dmu.size();
    NodalVectors d(n);
    for (std::size_t i = 0; i < n; ++i) {
      const Vec3& m = q_.mu.nodes[i];
      d[i] = -(dmu[i] - m * m.dot(dmu[i]));
    }
    const double dd = dot(d, d);
    const double dmax = max_norm(d);
    double alpha = cfg_.step_cap_mu / dmax;
    if (!prev_mu_dir_.empty()) {
      NodalVectors ydiff(n);
      for (std::size_t i = 0; i < n; ++i) ydiff[i] = prev_mu_dir_[i] - d[i];
      const double sy = dot(prev_mu_step_, ydiff);
      if (sy > 0.0) alpha = std::min(alpha, dot(prev_mu_step_, prev_mu_step_) / sy);
    }
    LineSearch ls;
    State trial = q_;
    for (int k = 0; k < cfg_.max_backtracks; ++k, alpha *= cfg_.backtrack) {
      const double predicted = cfg_.armijo_c1 * alpha * dd;
      if (!resolvable(predicted, value)) return ls;
      for (std::size_t i = 0; i < n; ++i) trial.mu.nodes[i] = (q_.mu.nodes[i] + alpha * d[i]).normalized();
      double v;
      try {
        v = obj_.value(trial);
      } catch (const Error&) {
        continue;
      }
      if (v <= value - predicted) {
        prev_mu_step_.assign(n, Vec3::Zero());
        for (std::size_t i = 0; i < n; ++i) prev_mu_step_[i] = trial.mu.nodes[i] - q_.mu.nodes[i];
        prev_mu_dir_ = d;
        q_.mu = trial.mu;
        ls.moved = true;
        ls.alpha = alpha;
        ls.value = v;
        return ls;
      }
    }
    ls.resolved = false;
    return ls;
  }

  LineSearch y_step(double value, const NodalVectors& dy) {
    const std::size_t n = dy.size();
    NodalVectors d(n, Vec3::Zero());
    for (std::size_t i = 0; i < n; ++i) {
      if (free_[i]) d[i] = -dy[i];
    }
    const double dd = dot(d, d);
    const double dmax = max_norm(d);
    double alpha = cfg_.step_cap_y * hmin_ / dmax;
    if (!prev_y_dir_.empty()) {
      NodalVectors ydiff(n);
      for (std::size_t i = 0; i < n; ++i) ydiff[i] = prev_y_dir_[i] - d[i];
      const double sy = dot(prev_y_step_, ydiff);
      if (sy > 0.0) alpha = std::min(alpha, dot(prev_y_step_, prev_y_step_) / sy);
    }
    LineSearch ls;
    State trial = q_;
    for (int k = 0; k < cfg_.max_backtracks; ++k, alpha *= cfg_.backtrack) {
      const double predicted = cfg_.armijo_c1 * alpha * dd;
      if (!resolvable(predicted, value)) return ls;
      for (std::size_t i = 0; i < n; ++i) trial.y.nodes[i] = q_.y.nodes[i] + alpha * d[i];
      if (!(min_quadrature_determinant(trial.grid, trial.y) > cfg_.det_floor)) continue;
      double v;
      try {
        v = obj_.value(trial);
      } catch (const Error&) {
        continue;
      }
      if (v <= value - predicted) {
        prev_y_step_.assign(n, Vec3::Zero());
        for (std::size_t i = 0; i < n; ++i) prev_y_step_[i] = alpha * d[i];
        prev_y_dir_ = d;
        q_.y = trial.y;
        ls.moved = true;
        ls.alpha = alpha;
        ls.value = v;
        return ls;
      }
    }
    ls.resolved = false;
    return ls;
  }

  const Objective& obj_;
  const OptimizerConfig& cfg_;
  State q_;
  std::vector<bool> free_;
  double hmin_ = 1.0;
  NodalVectors prev_mu_step_, prev_mu_dir_, prev_y_step_, prev_y_dir_;
};

} // namespace

OptimizeResult minimize_static(double t, const State& q0, const Problem& problem, const OptimizerConfig& config) {
  config.validate();
  Objective obj(problem, config.huber_eps_tv, config.huber_eps_d);
  obj.set_time(t);
  OptimizeResult res = BlockDescent(obj, config, q0).run();
  res.energy = problem.energy(t, res.state);
  const EnergyBreakdown start = problem.energy(t, q0);
  if (res.energy.total > start.total) {
    // Smoothing of TV can trade an exact increase for a smoothed decrease.
    res.state = q0;
    res.energy = start;
    res.kept_previous = true;
  }
  return res;
}

OptimizeResult minimize_incremental(double t, const State& q_prev, const Problem& problem,
                                    const OptimizerConfig& config) {
  config.validate();
  Objective obj(problem, config.huber_eps_tv, config.huber_eps_d);
  obj.set_time(t);
  obj.set_anchor(q_prev);
  OptimizeResult res = BlockDescent(obj, config, q_prev).run();
  res.energy = problem.energy(t, res.state);
  res.dissipation = dissipation_distance(q_prev, res.state);
  const EnergyBreakdown stay = problem.energy(t, q_prev);
  if (res.energy.total + res.dissipation > stay.total) {
    res.state = q_prev;
    res.energy = stay;
    res.dissipation = 0.0;
    res.kept_previous = true;
  }
  return res;
}

StabilityReport stability_audit(double t, const State& q, const Problem& problem, const StabilityOptions& options) {
  StabilityReport rep;
  rep.energy = problem.energy(t, q).total;
  rep.scale = std::max(1.0, std::abs(rep.energy));
  rep.worst_margin = std::numeric_limits<double>::infinity();
  const LagrangeanMagnetization zq = lagrangean_magnetization(q);
  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto gauss = [&] { return Vec3(normal(rng), normal(rng), normal(rng)); };

  auto consider = [&](const State& c, const std::string& kind) {
    try {
      if (!(min_quadrature_determinant(c.grid, c.y) > 0.0)) {
        ++rep.skipped;
        return;
      }
      const double margin = problem.energy(t, c).total + dissipation_distance(zq, lagrangean_magnetization(c)) - rep.energy;
      ++rep.competitors;
      if (margin < rep.worst_margin) {
        rep.worst_margin = margin;
        rep.worst_kind = kind;
      }
    } catch (const Error&) {
      ++rep.skipped;
    }
  };

  const double hmin = q.grid.spacing().minCoeff();
  for (double amp : options.mu_amplitudes) {
    for (int s = 0; s < options.samples_per_amplitude; ++s) {
      State c = q;
      for (auto& m : c.mu.nodes) {
        Vec3 r = gauss();
        r -= m * m.dot(r);
        m = (m + amp * r).normalized();
      }
      consider(c, "mu");
    }
  }
  for (double amp : options.y_amplitudes) {
    for (int s = 0; s < options.samples_per_amplitude; ++s) {
      State c = q;
      for (int a = 0; a < q.grid.node_count(); ++a) {
        if (!q.grid.is_dirichlet_node(a)) c.y.nodes[static_cast<std::size_t>(a)] += amp * hmin * gauss();
      }
      consider(c, "y");
    }
  }
  for (const auto& p : options.previous) {
    if (p.grid.same_layout(q.grid)) consider(p, "previous");
  }
  if (options.rotations > 0) {
    Vec3 centre = Vec3::Zero();
    for (const auto& y : q.y.nodes) centre += y;
    centre /= static_cast<double>(q.y.nodes.size());
    std::uniform_real_distribution<double> angle(0.0, std::numbers::pi);
    for (int s = 0; s < options.rotations; ++s) {
      const Mat3 R = Eigen::AngleAxisd(angle(rng), gauss().normalized()).toRotationMatrix();
      State c = q;
      for (auto& y : c.y.nodes) y = centre + R * (y - centre);
      for (auto& m : c.mu.nodes) m = R * m;
      consider(c, "rotation");
    }
  }
  rep.passed = rep.worst_margin >= -options.tolerance * rep.scale;
  return rep;
}

GradientCheck check_gradient(const Objective& objective, const State& q, double step) {
  NodalVectors dy, dmu;
  objective.value_and_gradient(q, &dy, &dmu);
  GradientCheck out;
  double scale_y = 0.0, scale_mu = 0.0, err_y = 0.0, err_mu = 0.0;
  State p = q;
  for (int a = 0; a < q.grid.node_count(); ++a) {
    const auto i = static_cast<std::size_t>(a);
    for (int d = 0; d < 3; ++d) {
      if (!q.grid.is_dirichlet_node(a)) {
        p.y.nodes[i][d] = q.y.nodes[i][d] + step;
        const double fp = objective.value(p);
        p.y.nodes[i][d] = q.y.nodes[i][d] - step;
        const double fm = objective.value(p);
        p.y.nodes[i][d] = q.y.nodes[i][d];
        err_y = std::max(err_y, std::abs((fp - fm) / (2.0 * step) - dy[i][d]));
        scale_y = std::max(scale_y, std::abs(dy[i][d]));
      }
      p.mu.nodes[i][d] = q.mu.nodes[i][d] + step;
      const double fp = objective.value(p);
      p.mu.nodes[i][d] = q.mu.nodes[i][d] - step;
      const double fm = objective.value(p);
      p.mu.nodes[i][d] = q.mu.nodes[i][d];
      err_mu = std::max(err_mu, std::abs((fp - fm) / (2.0 * step) - dmu[i][d]));
      scale_mu = std::max(scale_mu, std::abs(dmu[i][d]));
    }
  }
  out.max_rel_error_y = scale_y > 0.0 ? err_y / scale_y : err_y;
  out.max_rel_error_mu = scale_mu > 0.0 ? err_mu / scale_mu : err_mu;
  return out;
}

} // namespace chiralmag
