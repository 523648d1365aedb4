#include "chiralmag/energy.hpp"

#include <algorithm>
#include <cmath>

namespace chiralmag {

CoercivityConstants coercivity_constants(const MaterialModel& M, double volume) {
  const double C = std::pow(3.0, -1.5); // det F <= |F|^3 / 3^{3/2}
  const double r = M.p / 3.0;
  const double r_conj = r / (r - 1.0);
  const double K = M.a;
  const double delta = 0.5 * M.alpha;

  CoercivityConstants out{K, M.alpha - delta, 0.0, 0.0};
  if (M.kappa != 0.0) {
    const double k2 = M.kappa * M.kappa;
    const double eps = 0.5 * std::pow(r * K * delta / (C * k2), 1.0 / r);
    out.c1 = K - C * k2 * std::pow(eps, r) / (r * delta);
    out.c3 = C * k2 / (r_conj * std::pow(eps, r_conj) * delta) * volume;
  }
  // gamma(h) = h^{-s} + h^2 - 2 attains its minimum at h^{s+2} = s/2.
  double gamma_min = 0.0;
  if (M.s > 0.0) {
    const double hstar = std::pow(0.5 * M.s, 1.0 / (M.s + 2.0));
    gamma_min = compression_barrier(hstar, M.s);
  } else {
    gamma_min = -1.0; // s = 0: gamma(h) = h^2 - 1
  }
  out.elastic_offset = (K * std::pow(3.0, 0.5 * M.p) + std::max(0.0, -gamma_min)) * volume;
  return out;
}

CoercivityReport coercivity_floor(const State& q, const MaterialModel& M) {
  const CoercivityConstants k = coercivity_constants(M, q.grid.volume());
  CoercivityReport rep;
  rep.c1 = k.c1;
  rep.c2 = k.c2;
  rep.c3 = k.c3;
  rep.elastic_offset = k.elastic_offset;
  const double exchange = exchange_energy(q, M);
  rep.energy = elastic_energy(q, M) + exchange + dmi_energy(q, M);
  rep.grad_y_p_norm = gradient_p_norm(q, M.p);
  rep.grad_m_sq = exchange / M.alpha;
  rep.floor = k.c1 * rep.grad_y_p_norm + k.c2 * rep.grad_m_sq - k.c3 - k.elastic_offset;
  const double scale = 1.0 + std::abs(rep.energy) + std::abs(rep.floor);
  rep.floor_holds = rep.energy >= rep.floor - 1e-12 * scale;
  return rep;
}

} // namespace chiralmag
