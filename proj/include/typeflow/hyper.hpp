#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "typeflow/coupling.hpp"
#include "typeflow/dsbs.hpp"
#include "typeflow/lp.hpp"

namespace typeflow::hyper {

using dsbs::Direction;

// p or q may be +infinity (reciprocal 0)
struct HolderPair {
  double p, q;
  double inv_p() const { return std::isinf(p) ? 0.0 : 1.0 / p; }
  double inv_q() const { return std::isinf(q) ? 0.0 : 1.0 / q; }
};

inline void check_pair(const HolderPair& pq, std::optional<Direction> which) {
  if (!(pq.p > 0.0 && pq.q > 0.0)) throw std::domain_error("holder pair: p,q must be positive");
  if (which == Direction::forward && !(pq.p >= 1.0 && pq.q >= 1.0))
    throw std::domain_error("forward region: p,q must be >= 1");
  if (which == Direction::reverse && !(pq.p <= 1.0 && pq.q <= 1.0))
    throw std::domain_error("reverse region: p,q must be in (0,1]");
}

inline void check_box(const ExponentSurface& sf, double alpha, double beta) {
  if (!(alpha >= 0.0 && beta >= 0.0 && alpha <= sf.e1_max + 1e-12 && beta <= sf.e2_max + 1e-12))
    throw std::domain_error("hyper: (alpha,beta) outside [0,E1max] x [0,E2max]");
}

// min over alpha <= s, beta <= t of the forward exponent minus the plane s/p + t/q
inline double lambda_lower(const ExponentSurface& phi_surface, const HolderPair& pq, double alpha, double beta) {
  check_pair(pq, std::nullopt);
  check_box(phi_surface, alpha, beta);
  if (phi_surface.kind != SurfaceKind::lower) throw std::invalid_argument("lambda_lower: needs a lower surface");
  lp::Problem prob({lp::Sense::ge, lp::Sense::ge, lp::Sense::eq}, {alpha, beta, 1.0});
  for (const auto& k : phi_surface.samples())
    prob.add_column(-(k.v - k.s * pq.inv_p() - k.t * pq.inv_q()), {k.s, k.t, 1.0});
  auto sol = prob.solve();
  if (sol.status != lp::Status::optimal) throw std::runtime_error("lambda_lower: LP failed");
  return -sol.objective;
}

// min over alpha <= s <= E1max, beta <= t <= E2max of s/p + t/q minus the reverse exponent
inline double lambda_upper(const ExponentSurface& psi_surface, const HolderPair& pq, double alpha, double beta) {
  check_pair(pq, std::nullopt);
  check_box(psi_surface, alpha, beta);
  if (psi_surface.kind != SurfaceKind::upper) throw std::invalid_argument("lambda_upper: needs an upper surface");
  if (psi_surface.source_has_zero) return -kInf;
  // rows: s >= alpha, t >= beta, s - mean_s >= 0, t - mean_t >= 0, s <= E1max, t <= E2max, sum mu = 1
  using S = lp::Sense;
  lp::Problem prob({S::ge, S::ge, S::ge, S::ge, S::le, S::le, S::eq},
                   {alpha, beta, 0.0, 0.0, psi_surface.e1_max, psi_surface.e2_max, 1.0});
  prob.add_column(-pq.inv_p(), {1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 0.0});
  prob.add_column(-pq.inv_q(), {0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0});
  for (const auto& k : psi_surface.samples()) prob.add_column(k.v, {0.0, 0.0, -k.s, -k.t, 0.0, 0.0, 1.0});
  auto sol = prob.solve();
  if (sol.status != lp::Status::optimal) throw std::runtime_error("lambda_upper: LP failed");
  return -sol.objective;
}

struct Membership {
  bool member = true;
  // most violating sample when not a member
  double s = 0.0, t = 0.0, surface_value = 0.0, plane_value = 0.0;
};

// plane below the forward exponent (forward) or above the reverse exponent (reverse) everywhere;
// for nonnegative slopes this is decided exactly by the samples themselves
inline Membership region_member(const HolderPair& pq, Direction which, const SurfacePair& sp, double tol = 1e-12) {
  check_pair(pq, which);
  const ExponentSurface& sf = which == Direction::forward ? sp.phi : sp.psi;
  Membership m;
  if (which == Direction::reverse && sf.source_has_zero) {
    m.member = false;
    m.surface_value = kInf;
    return m;
  }
  double worst = 0.0;
  for (const auto& k : sf.samples()) {
    double plane = k.s * pq.inv_p() + k.t * pq.inv_q();
    double gap = which == Direction::forward ? plane - k.v : k.v - plane;
    if (gap > tol * (1.0 + std::abs(plane)) && gap > worst) {
      worst = gap;
      m = {false, k.s, k.t, k.v, plane};
    }
  }
  return m;
}

// same plane test on the box [alpha,E1max] x [beta,E2max], through the Λ factors
inline bool restricted_region_member(const HolderPair& pq, double alpha, double beta, Direction which,
                                     const SurfacePair& sp, double tol = 1e-9) {
  check_pair(pq, std::nullopt);
  double lam = which == Direction::forward ? lambda_lower(sp.phi, pq, alpha, beta)
                                           : lambda_upper(sp.psi, pq, alpha, beta);
  return lam >= -tol;
}

struct SlopeEstimate {
  std::vector<double> scales, ratios;
  bool monotone = true;
  double extrapolated = 0.0;
};

// (1/t) Θ(tE1, tE2) for t = 2^-3 .. 2^-10, Richardson-extrapolated to t -> 0
inline SlopeEstimate limit_slope(const SurfacePair& sp, double e1, double e2, Direction which) {
  if (e1 < 0.0 || e2 < 0.0) throw std::domain_error("limit_slope: exponents must be nonnegative");
  if (which == Direction::reverse && (e1 <= 0.0 || e2 <= 0.0))
    throw std::domain_error("limit_slope: reverse direction needs E1, E2 > 0");
  SlopeEstimate r;
  for (int l = 3; l <= 10; ++l) {
    double t = std::ldexp(1.0, -l);
    double v = which == Direction::forward ? theta_lower_star(sp.phi, t * e1, t * e2)
                                           : theta_upper_star(sp.psi, t * e1, t * e2);
    r.scales.push_back(t);
    r.ratios.push_back(v / t);
  }
  // convex through the origin: ratios shrink with t (forward); concave: they grow (reverse)
  for (std::size_t i = 1; i < r.ratios.size(); ++i) {
    double d = r.ratios[i] - r.ratios[i - 1];
    double slack = 1e-9 * (1.0 + std::abs(r.ratios[i]));
    if (which == Direction::forward ? d > slack : d < -slack) r.monotone = false;
  }
  std::size_t n = r.ratios.size();
  r.extrapolated = 2.0 * r.ratios[n - 1] - r.ratios[n - 2];
  return r;
}

}  // namespace typeflow::hyper
