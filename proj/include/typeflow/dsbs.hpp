#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "typeflow/coupling.hpp"
#include "typeflow/parallel.hpp"
#include "typeflow/probcore.hpp"

// Doubly symmetric binary source; everything here is in bits.
namespace typeflow::dsbs {

struct Params {
  double rho;
  explicit Params(double r) : rho(r) {
    if (!(r > 0.0 && r < 1.0)) throw std::domain_error("dsbs: rho must lie in (0,1)");
  }
  double k() const {
    double r = (1.0 + rho) / (1.0 - rho);
    return r * r;
  }
  double same() const { return (1.0 + rho) / 4.0; }
  double diff() const { return (1.0 - rho) / 4.0; }
  JointDist joint() const {
    return JointDist(std::vector<std::vector<double>>{{same(), diff()}, {diff(), same()}}, LogBase::bits);
  }
};

inline double h2(double x) {
  if (!(x >= 0.0 && x <= 1.0)) throw std::domain_error("h2: argument outside [0,1]");
  if (x <= 0.0 || x >= 1.0) return 0.0;
  return -(x * std::log2(x) + (1.0 - x) * std::log2(1.0 - x));
}

// inverse of h2 restricted to [0, 1/2]
inline double h2_inv(double y) {
  if (!(y >= -1e-15 && y <= 1.0 + 1e-15)) throw std::domain_error("h2_inv: argument outside [0,1]");
  if (y <= 0.0) return 0.0;
  if (y >= 1.0) return 0.5;
  double lo = 0.0, hi = 0.5;
  for (int i = 0; i < 200 && hi - lo > 1e-17; ++i) {
    double mid = 0.5 * (lo + hi);
    if (h2(mid) < y) lo = mid;
    else hi = mid;
  }
  return 0.5 * (lo + hi);
}

namespace detail {
inline double term(double q, double p) { return q > 0.0 ? q * std::log2(q / p) : 0.0; }
}  // namespace detail

// divergence of the coupling with P(X=1,Y=1)=p and marginals P(X=1)=alpha, P(Y=1)=beta
inline double d_alpha_beta(const Params& P, double alpha, double beta, double p) {
  double lo = std::max(0.0, alpha + beta - 1.0), hi = std::min(alpha, beta);
  if (p < lo - 1e-12 || p > hi + 1e-12) throw std::domain_error("d_alpha_beta: p outside the coupling interval");
  p = std::clamp(p, lo, hi);
  return detail::term(p, P.same()) + detail::term(alpha - p, P.diff()) + detail::term(beta - p, P.diff()) +
         detail::term(1.0 + p - alpha - beta, P.same());
}

inline double p_star(const Params& P, double alpha, double beta) {
  if (!(alpha >= 0.0 && alpha <= 1.0 && beta >= 0.0 && beta <= 1.0)) throw std::domain_error("p_star: marginals");
  double k = P.k();
  double c = (k - 1.0) * (alpha + beta) + 1.0;
  double disc = std::max(0.0, c * c - 4.0 * k * (k - 1.0) * alpha * beta);
  // smaller root, written without the cancellation of c - sqrt(disc)
  double p = 2.0 * k * alpha * beta / (c + std::sqrt(disc));
  return std::clamp(p, std::max(0.0, alpha + beta - 1.0), std::min(alpha, beta));
}

inline double dd(const Params& P, double alpha, double beta) {
  return std::max(0.0, d_alpha_beta(P, alpha, beta, p_star(P, alpha, beta)));
}

inline std::pair<double, double> phi_psi_dsbs(const Params& P, double s, double t) {
  if (!(s >= -1e-12 && s <= 1.0 + 1e-12 && t >= -1e-12 && t <= 1.0 + 1e-12))
    throw std::domain_error("phi_psi_dsbs: (s,t) outside [0,1]^2");
  double a = h2_inv(1.0 - std::clamp(s, 0.0, 1.0)), b = h2_inv(1.0 - std::clamp(t, 0.0, 1.0));
  double f = dd(P, a, b), g = dd(P, a, 1.0 - b);
  return {std::min(f, g), std::max(f, g)};
}

struct Bounds {
  double forward, reverse;
};

inline Bounds correlation_bounds(const Params& P, double e1, double e2) {
  double r = P.rho, r2 = r * r;
  double mid_f = (e1 + e2 - 2.0 * r * std::sqrt(e1 * e2)) / (1.0 - r2);
  double fwd = e2 < r2 * e1 ? e1 : (e2 > e1 / r2 ? e2 : mid_f);
  return {fwd, (e1 + e2 + 2.0 * r * std::sqrt(e1 * e2)) / (1.0 - r2)};
}

enum class Direction { forward, reverse };

inline bool ribbon_member(const Params& P, double p, double q, Direction which) {
  if (which == Direction::forward) {
    if (!(p >= 1.0 && q >= 1.0)) throw std::domain_error("forward ribbon: p,q must be >= 1");
    if (std::isinf(p) || std::isinf(q)) return p > 1.0 && q > 1.0;
    return (p - 1.0) * (q - 1.0) >= P.rho * P.rho;
  }
  if (!(p > 0.0 && p <= 1.0 && q > 0.0 && q <= 1.0)) throw std::domain_error("reverse ribbon: p,q must be in (0,1]");
  return (1.0 - p) * (1.0 - q) >= P.rho * P.rho;
}

// pairs on the ribbon boundary parametrized by u: forward p-1 = rho e^u, q-1 = rho e^-u;
// reverse 1-p = rho e^u, 1-q = rho e^-u with |u| <= -ln rho
inline std::pair<double, double> ribbon_pair(const Params& P, double u, Direction which) {
  if (which == Direction::forward) return {1.0 + P.rho * std::exp(u), 1.0 + P.rho * std::exp(-u)};
  return {1.0 - P.rho * std::exp(u), 1.0 - P.rho * std::exp(-u)};
}

// forward: max over the ribbon of E1/p + E2/q; reverse: min over the reverse ribbon
inline double ribbon_optimum(const Params& P, double e1, double e2, Direction which) {
  bool fwd = which == Direction::forward;
  double lim = fwd ? 30.0 : -std::log(P.rho);
  auto val = [&](double u) {
    auto [p, q] = ribbon_pair(P, u, which);
    return e1 / p + e2 / q;
  };
  double best = fwd ? std::max(e1, e2) : kInf;  // forward closure p or q -> infinity
  const int N = 2000;
  double bu = 0.0;
  for (int i = 0; i <= N; ++i) {
    double u = -lim + 2.0 * lim * double(i) / N, v = val(u);
    if (fwd ? v > best : v < best) best = v, bu = u;
  }
  double h = 2.0 * lim / N, lo = std::max(-lim, bu - h), hi = std::min(lim, bu + h);
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  for (int i = 0; i < 200; ++i) {
    double a = hi - g * (hi - lo), b = lo + g * (hi - lo);
    bool left = fwd ? val(a) > val(b) : val(a) < val(b);
    if (left) hi = b;
    else lo = a;
  }
  double v = val(0.5 * (lo + hi));
  return fwd ? std::max(best, v) : std::min(best, v);
}

// samples where the conditional-channel coupling is optimal: value equals the moved marginal's divergence
inline std::vector<Sample> valley_samples(const Params& P, std::size_t n) {
  std::vector<Sample> out;
  for (std::size_t i = 1; i <= n; ++i) {
    double s = double(i) / double(n);
    double a = h2_inv(1.0 - s);
    double b = a * (1.0 + P.rho) / 2.0 + (1.0 - a) * (1.0 - P.rho) / 2.0;
    double t = 1.0 - h2(b);
    out.push_back({s, t, s});
    out.push_back({t, s, s});
  }
  return out;
}

inline SurfaceOptions default_surface_options() {
  SurfaceOptions o;
  o.grid = 64;
  o.origin_levels = 12;
  o.origin_angles = 32;
  o.axis_points = 1024;
  return o;
}

inline SurfacePair surfaces(const Params& P, const SurfaceOptions& o = default_surface_options()) {
  return build_surfaces(1.0, 1.0, LogBase::bits, o, [&](double s, double t) { return phi_psi_dsbs(P, s, t); },
                        valley_samples(P, 4 * o.grid));
}

// reverse exponent along an axis, Θ̄*(0,E) = Θ̄*(E,0): concave hull of g(t) = dd(1/2, h2_inv(1-t))
class AxisHull {
 public:
  explicit AxisHull(const Params& P, std::size_t n = 20000) {
    std::vector<std::pair<double, double>> pts;
    for (std::size_t i = 0; i <= n; ++i) {
      double b = 0.5 * double(i) / double(n);
      pts.emplace_back(1.0 - h2(b), dd(P, 0.5, b));
      double t = double(i) / double(n);
      pts.emplace_back(t, dd(P, 0.5, h2_inv(1.0 - t)));
    }
    std::sort(pts.begin(), pts.end());
    for (const auto& q : pts) {
      while (hull_.size() >= 2) {
        auto& a = hull_[hull_.size() - 2];
        auto& b = hull_.back();
        double cross = (b.first - a.first) * (q.second - a.second) - (b.second - a.second) * (q.first - a.first);
        if (cross >= 0.0) hull_.pop_back();
        else break;
      }
      if (!hull_.empty() && q.first - hull_.back().first < 1e-15) {
        hull_.back().second = std::max(hull_.back().second, q.second);
        continue;
      }
      hull_.push_back(q);
    }
  }
  // max over t <= e of the hull
  double operator()(double e) const {
    if (e < -1e-12 || e > 1.0 + 1e-12) throw std::domain_error("axis hull: exponent outside [0,1]");
    double best = 0.0;
    for (std::size_t i = 0; i + 1 < hull_.size(); ++i) {
      const auto& a = hull_[i];
      const auto& b = hull_[i + 1];
      if (a.first > e) break;
      double v = b.first <= e ? b.second : a.second + (b.second - a.second) * (e - a.first) / (b.first - a.first);
      best = std::max(best, v);
    }
    return best;
  }
  const std::vector<std::pair<double, double>>& vertices() const { return hull_; }

 private:
  std::vector<std::pair<double, double>> hull_;
};

// same quantity by a direct two-atom search over the auxiliary variable
inline double axis_two_atom(const Params& P, double e) {
  auto g = [&](double t) { return dd(P, 0.5, h2_inv(1.0 - std::clamp(t, 0.0, 1.0))); };
  auto chord = [&](double t1, double t2) {
    if (t2 - t1 < 1e-14) return g(t1);
    double l = (t2 - e) / (t2 - t1);
    return l * g(t1) + (1.0 - l) * g(t2);
  };
  double best = 0.0;
  for (int i = 0; i <= 400; ++i) best = std::max(best, g(e * i / 400.0));
  double b1 = e, b2 = e;
  const int N = 200;
  for (int i = 0; i <= N; ++i)
    for (int j = 0; j <= N; ++j) {
      double t1 = e * i / N, t2 = e + (1.0 - e) * j / N;
      double v = chord(t1, t2);
      if (v > best) best = v, b1 = t1, b2 = t2;
    }
  // coordinate refinement
  double h1 = e / N, h2s = (1.0 - e) / N;
  for (int round = 0; round < 60; ++round) {
    bool moved = false;
    for (int d1 = -1; d1 <= 1; ++d1)
      for (int d2 = -1; d2 <= 1; ++d2) {
        double t1 = std::clamp(b1 + d1 * h1, 0.0, e), t2 = std::clamp(b2 + d2 * h2s, e, 1.0);
        double v = chord(t1, t2);
        if (v > best + 1e-15) best = v, b1 = t1, b2 = t2, moved = true;
      }
    if (!moved) h1 *= 0.5, h2s *= 0.5;
  }
  return best;
}

// Θ̄*(E1,0) - E1, the gap against the operational boundary value
inline double discontinuity_check(const Params& P, double e1) {
  if (!(e1 >= 0.0 && e1 <= 1.0)) throw std::domain_error("discontinuity_check: E1 outside [0,1]");
  if (e1 <= 0.0) return 0.0;
  return AxisHull(P)(e1) - e1;
}

// ---------- binary adder channel ----------

inline double bac_target(double rho) { return 1.5 - std::log2(3.0 - rho); }

// max over admissible lambda of lhs - rhs for the rate pair (1-eps, r2); >= 0 means not excluded
inline double bac_bound(const Params& P, double eps, double r2, const ExponentSurface* psi_surface = nullptr,
                        const AxisHull* axis = nullptr) {
  if (eps < 0.0) throw std::domain_error("bac_bound: eps must be >= 0");
  double w = std::sqrt(std::log(2.0) * eps / 2.0);
  double rhs_const = 2.5 - std::log2(3.0 - P.rho);
  if (eps == 0.0) {
    std::optional<AxisHull> local;
    if (!axis) axis = &local.emplace(P);
    const AxisHull& h = *axis;
    double e2 = std::clamp(1.0 - 2.0 * r2, 0.0, 1.0);
    return 0.5 * h(e2) - (0.5 * rhs_const - 0.5);
  }
  SurfacePair own;
  if (!psi_surface) {
    own = surfaces(P);
    psi_surface = &own.psi;
  }
  double best = -kInf;
  const int L = 41;
  for (int i = 0; i < L; ++i) {
    double lam = 0.5 - w + 2.0 * w * double(i) / double(L - 1);
    if (lam <= 0.0) continue;
    double a = eps / lam, b = (lam + eps - r2) / lam;
    if (a > 1.0) continue;
    b = std::clamp(b, 0.0, 1.0);
    double lhs = lam * theta_upper_star(*psi_surface, a, b);
    double rhs = lam * rhs_const - 0.5 - eps - w;
    best = std::max(best, lhs - rhs);
  }
  return best;
}

struct BacResult {
  double rho_best;
  double r2_bound;
};

// largest r2 not excluded at this rho (eps = 0)
inline double bac_r2_for_rho(double rho, const AxisHull* axis = nullptr) {
  Params P(rho);
  std::optional<AxisHull> local;
  if (!axis) axis = &local.emplace(P);
  const AxisHull& h = *axis;
  double c = bac_target(rho);
  // smallest E2 with h(E2) >= c, h nondecreasing
  double lo = 0.0, hi = 1.0;
  if (h(1.0) < c) return 0.0;
  for (int i = 0; i < 60; ++i) {
    double mid = 0.5 * (lo + hi);
    if (h(mid) >= c) hi = mid;
    else lo = mid;
  }
  return (1.0 - hi) / 2.0;
}

inline BacResult bac_r2_max(double rho_lo = 0.5, double rho_hi = 0.9, double step = 1e-3, std::size_t hull_n = 20000) {
  std::size_t N = std::size_t(std::llround((rho_hi - rho_lo) / step));
  std::vector<double> r2(N + 1);
  auto eval = [&](double rho) {
    AxisHull h(Params(rho), hull_n);
    return bac_r2_for_rho(rho, &h);
  };
  parallel_for(N + 1, [&](std::size_t i) { r2[i] = eval(rho_lo + step * double(i)); });
  std::size_t bi = std::size_t(std::min_element(r2.begin(), r2.end()) - r2.begin());
  double lo = rho_lo + step * double(bi == 0 ? 0 : bi - 1), hi = rho_lo + step * double(std::min(bi + 1, N));
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = hi - g * (hi - lo), b = lo + g * (hi - lo), fa = eval(a), fb = eval(b);
  for (int i = 0; i < 30 && hi - lo > 1e-6; ++i) {
    if (fa < fb) {
      hi = b, b = a, fb = fa, a = hi - g * (hi - lo), fa = eval(a);
    } else {
      lo = a, a = b, fa = fb, b = lo + g * (hi - lo), fb = eval(b);
    }
  }
  BacResult res{rho_lo + step * double(bi), r2[bi]};
  double rm = 0.5 * (lo + hi), vm = eval(rm);
  if (vm < res.r2_bound) res = {rm, vm};
  return res;
}

// largest r2 not excluded at this rho for eps > 0; the bound is nonincreasing in r2
inline double bac_r2_for_rho_eps(double rho, double eps, const ExponentSurface* psi_surface = nullptr) {
  if (eps == 0.0) return bac_r2_for_rho(rho);
  Params P(rho);
  SurfacePair own;
  if (!psi_surface) {
    own = surfaces(P);
    psi_surface = &own.psi;
  }
  if (bac_bound(P, eps, 0.0, psi_surface) < 0.0) return 0.0;
  double lo = 0.0, hi = 1.0;
  if (bac_bound(P, eps, hi, psi_surface) >= 0.0) return hi;
  for (int i = 0; i < 40; ++i) {
    double mid = 0.5 * (lo + hi);
    if (bac_bound(P, eps, mid, psi_surface) >= 0.0) lo = mid;
    else hi = mid;
  }
  return lo;
}

// ---------- convexity premises ----------

struct PremiseReport {
  std::size_t grid = 0;
  std::size_t convexity_checks = 0, convexity_violations = 0;
  std::size_t concavity_checks = 0, concavity_violations = 0;
  double worst_convexity = 0.0, worst_concavity = 0.0;
};

namespace detail {
template <class F>
double golden_min(F&& f, double lo, double hi, int iters = 120) {
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = hi - g * (hi - lo), b = lo + g * (hi - lo), fa = f(a), fb = f(b);
  for (int i = 0; i < iters && hi - lo > 1e-15; ++i) {
    if (fa < fb) hi = b, b = a, fb = fa, a = hi - g * (hi - lo), fa = f(a);
    else lo = a, a = b, fa = fb, b = lo + g * (hi - lo), fb = f(b);
  }
  return std::min({fa, fb, f(lo), f(hi)});
}
}  // namespace detail

// min over s >= E1, t >= E2 of phi, as a box-constrained minimum of the (jointly convex) dd
inline double phi_quadrant_min(const Params& P, double e1, double e2) {
  double a = h2_inv(1.0 - e1), b = h2_inv(1.0 - e2);
  return detail::golden_min(
      [&](double al) { return detail::golden_min([&](double be) { return dd(P, al, be); }, 0.0, b); }, 0.0, a);
}

template <class Grid>
void midpoint_sweep(const Grid& v, std::size_t G, bool convex, double tol, std::size_t& checks, std::size_t& bad,
                    double& worst) {
  for (std::size_t i1 = 0; i1 < G; ++i1)
    for (std::size_t j1 = 0; j1 < G; ++j1)
      for (std::size_t i2 = i1; i2 < G; i2 += 1)
        for (std::size_t j2 = 0; j2 < G; ++j2) {
          if ((i1 + i2) % 2 || (j1 + j2) % 2) continue;
          if (i2 == i1 && j2 <= j1) continue;
          double m = v[((i1 + i2) / 2) * G + (j1 + j2) / 2];
          double avg = 0.5 * (v[i1 * G + j1] + v[i2 * G + j2]);
          double gap = convex ? m - avg : avg - m;
          ++checks;
          if (gap > worst) worst = gap;
          if (gap > tol) ++bad;
        }
}

inline PremiseReport convexity_premise_check(const Params& P, std::size_t grid = 40, double tol = 1e-9) {
  PremiseReport r;
  r.grid = grid;
  std::vector<double> f(grid * grid), ps(grid * grid);
  parallel_for(grid * grid, [&](std::size_t k) {
    double e1 = double(k / grid) / double(grid - 1), e2 = double(k % grid) / double(grid - 1);
    f[k] = phi_quadrant_min(P, e1, e2);
    ps[k] = phi_psi_dsbs(P, e1, e2).second;
  });
  midpoint_sweep(f, grid, true, tol, r.convexity_checks, r.convexity_violations, r.worst_convexity);
  midpoint_sweep(ps, grid, false, tol, r.concavity_checks, r.concavity_violations, r.worst_concavity);
  return r;
}

}  // namespace typeflow::dsbs
