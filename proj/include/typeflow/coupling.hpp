#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <stdexcept>
#include <vector>

#include "typeflow/lp.hpp"
#include "typeflow/parallel.hpp"
#include "typeflow/probcore.hpp"

namespace typeflow {

struct CouplingProblem {
  Dist qx, qy;
  JointDist p;
};

struct CouplingResult {
  double value = kInf;  // nats
  bool feasible = false;
  std::vector<double> coupling;  // row-major |X|x|Y|, empty when infeasible
  std::vector<double> a, b;      // scaling factors: coupling = a(x) b(y) p(x,y)
  int iterations = 0;
  double marginal_error = 0.0;
  // infeasibility certificate: a set S of x with qx(S) > qy(N(S)) on the support graph of p
  std::vector<std::size_t> hall_set;
  double hall_excess = 0.0;
};

namespace detail {

// max flow on source -> x -> y -> sink with capacities qx, [p>0 ? inf : 0], qy
inline double support_max_flow(const std::vector<double>& qx, const std::vector<double>& qy,
                               const std::vector<double>& p, std::size_t R, std::size_t C,
                               std::vector<char>* reach_x) {
  const std::size_t N = R + C + 2, S = R + C, T = R + C + 1;
  std::vector<std::vector<double>> cap(N, std::vector<double>(N, 0.0));
  for (std::size_t x = 0; x < R; ++x) cap[S][x] = qx[x];
  for (std::size_t y = 0; y < C; ++y) cap[R + y][T] = qy[y];
  for (std::size_t x = 0; x < R; ++x)
    for (std::size_t y = 0; y < C; ++y)
      if (p[x * C + y] > 0.0) cap[x][R + y] = 10.0;
  double flow = 0.0;
  std::vector<long> prev(N);
  for (;;) {
    std::fill(prev.begin(), prev.end(), -1);
    std::vector<std::size_t> queue{S};
    prev[S] = long(S);
    for (std::size_t h = 0; h < queue.size() && prev[T] < 0; ++h) {
      std::size_t u = queue[h];
      for (std::size_t v = 0; v < N; ++v)
        if (prev[v] < 0 && cap[u][v] > 1e-15) {
          prev[v] = long(u);
          queue.push_back(v);
        }
    }
    if (prev[T] < 0) break;
    double aug = kInf;
    for (std::size_t v = T; v != S; v = std::size_t(prev[v])) aug = std::min(aug, cap[std::size_t(prev[v])][v]);
    for (std::size_t v = T; v != S; v = std::size_t(prev[v])) {
      cap[std::size_t(prev[v])][v] -= aug;
      cap[v][std::size_t(prev[v])] += aug;
    }
    flow += aug;
  }
  if (reach_x) {
    reach_x->assign(R, 0);
    std::vector<char> seen(N, 0);
    std::vector<std::size_t> st{S};
    seen[S] = 1;
    while (!st.empty()) {
      std::size_t u = st.back();
      st.pop_back();
      for (std::size_t v = 0; v < N; ++v)
        if (!seen[v] && cap[u][v] > 1e-15) {
          seen[v] = 1;
          st.push_back(v);
        }
    }
    for (std::size_t x = 0; x < R; ++x) (*reach_x)[x] = seen[x];
  }
  return flow;
}

}  // namespace detail

struct IpfOptions {
  double tol = 1e-11;
  int max_iter = 100000;
};

inline CouplingResult min_kl_coupling(const std::vector<double>& qx, const std::vector<double>& qy,
                                      const JointDist& p, const IpfOptions& opt = {}) {
  const std::size_t R = p.rows(), C = p.cols();
  if (qx.size() != R || qy.size() != C) throw std::invalid_argument("min_kl_coupling: marginal sizes mismatch");
  const auto& P = p.flat();
  CouplingResult res;
  std::vector<char> reach;
  double flow = detail::support_max_flow(qx, qy, P, R, C, &reach);
  if (flow < 1.0 - 1e-10) {
    double sx = 0.0, sy = 0.0;
    std::vector<char> ny(C, 0);
    for (std::size_t x = 0; x < R; ++x)
      if (reach[x] && qx[x] > 0.0) {
        res.hall_set.push_back(x);
        sx += qx[x];
        for (std::size_t y = 0; y < C; ++y)
          if (P[x * C + y] > 0.0) ny[y] = 1;
      }
    for (std::size_t y = 0; y < C; ++y)
      if (ny[y]) sy += qy[y];
    res.hall_excess = sx - sy;
    return res;
  }
  res.feasible = true;
  std::vector<double> a(R, 0.0), b(C, 0.0);
  for (std::size_t x = 0; x < R; ++x) a[x] = qx[x] > 0.0 ? 1.0 : 0.0;
  for (std::size_t y = 0; y < C; ++y) b[y] = qy[y] > 0.0 ? 1.0 : 0.0;
  double err = kInf;
  int it = 0;
  for (; it < opt.max_iter; ++it) {
    for (std::size_t x = 0; x < R; ++x) {
      if (qx[x] <= 0.0) continue;
      double s = 0.0;
      for (std::size_t y = 0; y < C; ++y) s += P[x * C + y] * b[y];
      a[x] = qx[x] / s;
    }
    for (std::size_t y = 0; y < C; ++y) {
      if (qy[y] <= 0.0) continue;
      double s = 0.0;
      for (std::size_t x = 0; x < R; ++x) s += P[x * C + y] * a[x];
      b[y] = qy[y] / s;
    }
    err = 0.0;
    for (std::size_t x = 0; x < R; ++x) {
      double s = 0.0;
      for (std::size_t y = 0; y < C; ++y) s += a[x] * P[x * C + y] * b[y];
      err = std::max(err, std::abs(s - qx[x]));
    }
    if (err <= opt.tol) {
      ++it;
      break;
    }
  }
  res.iterations = it;
  res.marginal_error = err;
  res.a = a;
  res.b = b;
  res.coupling.assign(R * C, 0.0);
  double v = 0.0;
  for (std::size_t x = 0; x < R; ++x)
    for (std::size_t y = 0; y < C; ++y) {
      double q = a[x] * P[x * C + y] * b[y];
      res.coupling[x * C + y] = q;
      if (q > 0.0) v += q * std::log(q / P[x * C + y]);
    }
  res.value = std::max(0.0, v);
  return res;
}

inline CouplingResult min_kl_coupling(const CouplingProblem& cp, const IpfOptions& opt = {}) {
  return min_kl_coupling(cp.qx.probs(), cp.qy.probs(), cp.p, opt);
}

// ---------- KL spheres ----------

namespace detail {

// points q on the segment from p along direction d (sum d = 0) with D(q||p) = s; returns empty if unreachable
inline std::vector<double> sphere_along(const std::vector<double>& p, const std::vector<double>& d, double s) {
  double tmax = kInf;
  for (std::size_t i = 0; i < p.size(); ++i)
    if (d[i] < 0.0) tmax = std::min(tmax, -p[i] / d[i]);
  if (!std::isfinite(tmax)) return {};
  auto at = [&](double t) {
    std::vector<double> q(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) q[i] = std::max(0.0, p[i] + t * d[i]);
    return q;
  };
  auto qend = at(tmax);
  for (std::size_t i = 0; i < p.size(); ++i)
    if (d[i] < 0.0 && std::abs(p[i] + tmax * d[i]) < 1e-15) qend[i] = 0.0;
  double dend = kl_raw(qend, p);
  if (s > dend * (1.0 + 1e-12) + 1e-15) return {};
  if (s >= dend) return qend;
  double lo = 0.0, hi = tmax;
  for (int k = 0; k < 200 && hi - lo > 1e-16 * tmax; ++k) {
    double mid = 0.5 * (lo + hi);
    if (kl_raw(at(mid), p) < s) lo = mid;
    else hi = mid;
  }
  auto q = at(0.5 * (lo + hi));
  double sum = 0.0;
  for (double v : q) sum += v;
  for (double& v : q) v /= sum;
  return q;
}

}  // namespace detail

// points of {q : D(q||p) = s}: exact for two-symbol supports, sampled directions otherwise
inline std::vector<std::vector<double>> kl_sphere_points(const std::vector<double>& p, double s, int directions = 24,
                                                         unsigned seed = 2024) {
  std::vector<std::size_t> supp;
  for (std::size_t i = 0; i < p.size(); ++i)
    if (p[i] > 0.0) supp.push_back(i);
  double smax = 0.0;
  for (auto i : supp) smax = std::max(smax, -std::log(p[i]));
  if (s < -1e-15 || s > smax + 1e-12) throw std::domain_error("kl sphere: radius outside [0, -log min p]");
  if (s <= 0.0) return {p};
  std::vector<std::vector<double>> out;
  const std::size_t k = supp.size();
  if (k == 1) return out;
  std::vector<std::vector<double>> dirs;
  if (k == 2) {
    std::vector<double> d(p.size(), 0.0);
    d[supp[0]] = 1.0;
    d[supp[1]] = -1.0;
    dirs.push_back(d);
    for (auto& v : d) v = -v;
    dirs.push_back(d);
  } else {
    // towards each vertex and each edge midpoint of the support simplex, plus seeded random directions
    for (std::size_t i = 0; i < k; ++i) {
      std::vector<double> d(p.size(), 0.0);
      for (std::size_t j = 0; j < k; ++j) d[supp[j]] = (i == j ? 1.0 : 0.0) - p[supp[j]];
      dirs.push_back(d);
    }
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = i + 1; j < k; ++j) {
        std::vector<double> d(p.size(), 0.0);
        for (std::size_t l = 0; l < k; ++l) d[supp[l]] = (l == i || l == j ? 0.5 : 0.0) - p[supp[l]];
        dirs.push_back(d);
      }
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    for (int r = 0; r < directions; ++r) {
      std::vector<double> d(p.size(), 0.0);
      double m = 0.0;
      for (auto i : supp) m += (d[i] = nd(rng));
      for (auto i : supp) d[i] -= m / double(k);
      dirs.push_back(d);
    }
  }
  for (const auto& d : dirs) {
    auto q = detail::sphere_along(p, d, s);
    if (!q.empty()) out.push_back(std::move(q));
  }
  return out;
}

inline double emax_of(const std::vector<double>& m) {
  double mn = kInf;
  for (double v : m)
    if (v > 0.0) mn = std::min(mn, v);
  return -std::log(mn);
}

struct PhiPsi {
  double phi = kInf, psi = -kInf;
  std::vector<double> qx_phi, qy_phi, qx_psi, qy_psi;
};

namespace detail {
inline std::vector<double> unit_direction(const std::vector<double>& v, const std::vector<double>& p) {
  std::vector<double> d(p.size(), 0.0);
  double m = 0.0;
  std::size_t k = 0;
  for (std::size_t i = 0; i < p.size(); ++i)
    if (p[i] > 0.0) m += v[i], ++k;
  for (std::size_t i = 0; i < p.size(); ++i)
    if (p[i] > 0.0) d[i] = v[i] - m / double(k);
  return d;
}

// Nelder-Mead on R^n, minimizing f
inline std::pair<double, std::vector<double>> nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                                                         std::vector<double> x0, double step, int max_eval) {
  const std::size_t n = x0.size();
  std::vector<std::vector<double>> sx(n + 1, x0);
  std::vector<double> fx(n + 1);
  for (std::size_t i = 0; i < n; ++i) sx[i + 1][i] += step;
  for (std::size_t i = 0; i <= n; ++i) fx[i] = f(sx[i]);
  int evals = int(n + 1);
  while (evals < max_eval) {
    std::vector<std::size_t> idx(n + 1);
    for (std::size_t i = 0; i <= n; ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return fx[a] < fx[b]; });
    auto sx2 = sx;
    auto fx2 = fx;
    for (std::size_t i = 0; i <= n; ++i) sx[i] = sx2[idx[i]], fx[i] = fx2[idx[i]];
    if (std::abs(fx[n] - fx[0]) < 1e-12 * (1.0 + std::abs(fx[0]))) break;
    std::vector<double> c(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) c[j] += sx[i][j] / double(n);
    auto lerp = [&](double t) {
      std::vector<double> r(n);
      for (std::size_t j = 0; j < n; ++j) r[j] = c[j] + t * (sx[n][j] - c[j]);
      return r;
    };
    auto xr = lerp(-1.0);
    double fr = f(xr);
    ++evals;
    if (fr < fx[0]) {
      auto xe = lerp(-2.0);
      double fe = f(xe);
      ++evals;
      if (fe < fr) sx[n] = xe, fx[n] = fe;
      else sx[n] = xr, fx[n] = fr;
    } else if (fr < fx[n - 1]) {
      sx[n] = xr, fx[n] = fr;
    } else {
      auto xc = lerp(fr < fx[n] ? -0.5 : 0.5);
      double fc = f(xc);
      ++evals;
      if (fc < std::min(fr, fx[n])) {
        sx[n] = xc, fx[n] = fc;
      } else {
        for (std::size_t i = 1; i <= n; ++i) {
          for (std::size_t j = 0; j < n; ++j) sx[i][j] = sx[0][j] + 0.5 * (sx[i][j] - sx[0][j]);
          fx[i] = f(sx[i]);
          ++evals;
        }
      }
    }
  }
  std::size_t b = std::size_t(std::min_element(fx.begin(), fx.end()) - fx.begin());
  return {fx[b], sx[b]};
}
}  // namespace detail

struct SphereSearchOptions {
  int directions = 24;
  int refine_starts = 4;
  int refine_evals = 300;
  unsigned seed = 2024;
};

// phi and psi together (nats): min / max of the coupling divergence over the product of the two KL spheres
inline PhiPsi phi_psi(const JointDist& p, double s, double t, const SphereSearchOptions& o = {}) {
  auto px = p.marginal_x_vec(), py = p.marginal_y_vec();
  double e1 = emax_of(px), e2 = emax_of(py);
  if (s < -1e-12 || t < -1e-12 || s > e1 + 1e-9 || t > e2 + 1e-9)
    throw std::domain_error("phi/psi: (s,t) outside [0,E1max] x [0,E2max]");
  s = std::clamp(s, 0.0, e1);
  t = std::clamp(t, 0.0, e2);
  auto xs = kl_sphere_points(px, s, o.directions, o.seed);
  auto ys = kl_sphere_points(py, t, o.directions, o.seed + 1);
  PhiPsi r;
  struct Pair {
    double v;
    std::size_t i, j;
  };
  std::vector<Pair> vals;
  for (std::size_t i = 0; i < xs.size(); ++i)
    for (std::size_t j = 0; j < ys.size(); ++j) {
      double v = min_kl_coupling(xs[i], ys[j], p).value;
      vals.push_back({v, i, j});
      if (v < r.phi) r.phi = v, r.qx_phi = xs[i], r.qy_phi = ys[j];
      if (v > r.psi) r.psi = v, r.qx_psi = xs[i], r.qy_psi = ys[j];
    }
  bool exact = std::count_if(px.begin(), px.end(), [](double v) { return v > 0.0; }) <= 2 &&
               std::count_if(py.begin(), py.end(), [](double v) { return v > 0.0; }) <= 2;
  if (exact || s <= 0.0 || t <= 0.0 || vals.empty()) return r;
  // local refinement over sphere directions from the best sampled pairs
  auto refine = [&](bool minimize) {
    std::vector<Pair> order = vals;
    std::sort(order.begin(), order.end(), [&](auto& a, auto& b) { return minimize ? a.v < b.v : a.v > b.v; });
    for (int k = 0; k < o.refine_starts && k < int(order.size()); ++k) {
      const auto& qx0 = xs[order[std::size_t(k)].i];
      const auto& qy0 = ys[order[std::size_t(k)].j];
      std::vector<double> x0;
      for (std::size_t i = 0; i < px.size(); ++i) x0.push_back(qx0[i] - px[i]);
      for (std::size_t i = 0; i < py.size(); ++i) x0.push_back(qy0[i] - py[i]);
      auto f = [&](const std::vector<double>& v) {
        std::vector<double> dx(v.begin(), v.begin() + std::ptrdiff_t(px.size()));
        std::vector<double> dy(v.begin() + std::ptrdiff_t(px.size()), v.end());
        auto qx = detail::sphere_along(px, detail::unit_direction(dx, px), s);
        auto qy = detail::sphere_along(py, detail::unit_direction(dy, py), t);
        if (qx.empty() || qy.empty()) return kInf;
        double val = min_kl_coupling(qx, qy, p).value;
        if (minimize) {
          if (val < r.phi) r.phi = val, r.qx_phi = qx, r.qy_phi = qy;
          return val;
        }
        if (val > r.psi) r.psi = val, r.qx_psi = qx, r.qy_psi = qy;
        return -val;
      };
      detail::nelder_mead(f, x0, 0.05, o.refine_evals);
    }
  };
  refine(true);
  refine(false);
  return r;
}

inline double phi(const JointDist& p, double s, double t) { return phi_psi(p, s, t).phi; }
inline double psi(const JointDist& p, double s, double t) { return phi_psi(p, s, t).psi; }

// ---------- sampled surfaces and their envelopes ----------

enum class SurfaceKind { lower, upper };

struct Sample {
  double s, t, v;
};

struct ExponentSurface {
  SurfaceKind kind = SurfaceKind::lower;
  LogBase unit = LogBase::nats;
  std::vector<double> s_grid, t_grid;
  std::vector<double> values;    // [i * t_grid.size() + j], may hold +inf
  std::vector<double> envelope;  // same layout; empty until computed
  std::vector<Sample> extra;     // exact off-grid samples
  double e1_max = 0.0, e2_max = 0.0;
  bool source_has_zero = false;

  double value(std::size_t i, std::size_t j) const { return values[i * t_grid.size() + j]; }
  std::vector<Sample> samples() const {
    std::vector<Sample> out;
    for (std::size_t i = 0; i < s_grid.size(); ++i)
      for (std::size_t j = 0; j < t_grid.size(); ++j) {
        double v = value(i, j);
        if (std::isfinite(v)) out.push_back({s_grid[i], t_grid[j], v});
      }
    for (const auto& e : extra)
      if (std::isfinite(e.v)) out.push_back(e);
    return out;
  }
};

namespace detail {

enum class Rel { eq, quadrant };

// optimum of sum l_k v_k over mixtures of samples with mean location tied to (s,t)
inline double hull_query(const std::vector<Sample>& smp, SurfaceKind kind, double s, double t, Rel rel) {
  if (smp.size() < 1) throw std::invalid_argument("envelope: no finite samples");
  double sign = kind == SurfaceKind::lower ? -1.0 : 1.0;  // the LP maximizes
  std::vector<lp::Sense> sen(3);
  if (rel == Rel::eq) sen = {lp::Sense::eq, lp::Sense::eq, lp::Sense::eq};
  else if (kind == SurfaceKind::lower) sen = {lp::Sense::ge, lp::Sense::ge, lp::Sense::eq};
  else sen = {lp::Sense::le, lp::Sense::le, lp::Sense::eq};
  lp::Problem prob(sen, {s, t, 1.0});
  for (const auto& k : smp) prob.add_column(sign * k.v, {k.s, k.t, 1.0});
  auto sol = prob.solve();
  if (sol.status == lp::Status::infeasible) return std::numeric_limits<double>::quiet_NaN();
  if (sol.status != lp::Status::optimal) throw std::runtime_error("envelope: LP failed");
  return sign * sol.objective;
}

}  // namespace detail

// envelope value at (s,t): lower convex / upper concave hull of the samples, NaN outside their hull
inline double envelope_at(const ExponentSurface& sf, double s, double t) {
  return detail::hull_query(sf.samples(), sf.kind, s, t, detail::Rel::eq);
}

inline ExponentSurface with_envelope(ExponentSurface sf) {
  auto smp = sf.samples();
  const std::size_t S = sf.s_grid.size(), T = sf.t_grid.size();
  sf.envelope.assign(S * T, 0.0);
  parallel_for(S * T, [&](std::size_t k) {
    sf.envelope[k] = detail::hull_query(smp, sf.kind, sf.s_grid[k / T], sf.t_grid[k % T], detail::Rel::eq);
  });
  return sf;
}

inline ExponentSurface lower_convex_envelope(ExponentSurface sf) {
  sf.kind = SurfaceKind::lower;
  return with_envelope(std::move(sf));
}
inline ExponentSurface upper_concave_envelope(ExponentSurface sf) {
  sf.kind = SurfaceKind::upper;
  return with_envelope(std::move(sf));
}

inline void check_exponent_range(const ExponentSurface& sf, double e1, double e2) {
  const double tol = 1e-9;
  if (!(e1 >= -tol && e2 >= -tol && e1 <= sf.e1_max + tol && e2 <= sf.e2_max + tol))
    throw std::domain_error("exponent pair outside [0,E1max] x [0,E2max]");
}

// min over s >= E1, t >= E2 of the lower convex envelope
inline double theta_lower_star(const ExponentSurface& phi_surface, double e1, double e2) {
  if (phi_surface.kind != SurfaceKind::lower) throw std::invalid_argument("theta_lower_star: needs a lower surface");
  check_exponent_range(phi_surface, e1, e2);
  return detail::hull_query(phi_surface.samples(), SurfaceKind::lower, e1, e2, detail::Rel::quadrant);
}

// max over s <= E1, t <= E2 of the upper concave envelope (the formula value, also on the axes)
inline double theta_upper_star(const ExponentSurface& psi_surface, double e1, double e2) {
  if (psi_surface.kind != SurfaceKind::upper) throw std::invalid_argument("theta_upper_star: needs an upper surface");
  check_exponent_range(psi_surface, e1, e2);
  if (psi_surface.source_has_zero) return kInf;
  return detail::hull_query(psi_surface.samples(), SurfaceKind::upper, e1, e2, detail::Rel::quadrant);
}

// operational reverse exponent: the formula inside, the case table on the axes
inline double theta_upper(const ExponentSurface& psi_surface, double e1, double e2) {
  check_exponent_range(psi_surface, e1, e2);
  if (e1 <= 0.0) return std::max(0.0, e2);
  if (e2 <= 0.0) return e1;
  return theta_upper_star(psi_surface, e1, e2);
}

struct SurfaceOptions {
  std::size_t grid = 64;
  // extra samples near the origin: shells at radius ratio^l (max-norm, scaled by the E_max pair),
  // each shell carrying 2*origin_angles+1 boundary points
  int origin_levels = 0;
  int origin_angles = 0;
  double origin_ratio = 0.5;
  // extra samples along each axis
  std::size_t axis_points = 0;
  SphereSearchOptions sphere;
};

struct SurfacePair {
  ExponentSurface phi, psi;
};

inline std::vector<double> linear_grid(double hi, std::size_t n) {
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i) g[i] = n == 1 ? 0.0 : hi * double(i) / double(n - 1);
  if (n > 1) g.back() = hi;
  return g;
}

// build phi/psi surfaces from a point evaluator returning (phi, psi)
template <class Eval>
SurfacePair build_surfaces(double e1max, double e2max, LogBase unit, const SurfaceOptions& o, Eval&& eval,
                           const std::vector<Sample>& lower_extra = {}) {
  SurfacePair sp;
  for (auto* sf : {&sp.phi, &sp.psi}) {
    sf->unit = unit;
    sf->e1_max = e1max;
    sf->e2_max = e2max;
    sf->s_grid = linear_grid(e1max, o.grid);
    sf->t_grid = linear_grid(e2max, o.grid);
    sf->values.assign(o.grid * o.grid, 0.0);
  }
  sp.phi.kind = SurfaceKind::lower;
  sp.psi.kind = SurfaceKind::upper;
  const std::size_t G = o.grid;
  parallel_for(G * G, [&](std::size_t k) {
    auto pp = eval(sp.phi.s_grid[k / G], sp.phi.t_grid[k % G]);
    sp.phi.values[k] = pp.first;
    sp.psi.values[k] = pp.second;
  });
  std::vector<std::pair<double, double>> pts;
  double r = 1.0;
  for (int l = 0; l < o.origin_levels; ++l) {
    r *= o.origin_ratio;
    for (int a = 0; a <= o.origin_angles; ++a) {
      // quadratic spacing: exponent ratios down to 1/angles^2 near each axis
      double u = o.origin_angles == 0 ? 1.0 : double(a) * double(a) / double(o.origin_angles * o.origin_angles);
      pts.emplace_back(r * e1max, r * e2max * u);
      if (a < o.origin_angles) pts.emplace_back(r * e1max * u, r * e2max);
    }
  }
  if (o.axis_points > 1) {
    for (std::size_t a = 1; a < o.axis_points; ++a) {
      double u = double(a) / double(o.axis_points);
      pts.emplace_back(u * e1max, 0.0);
      pts.emplace_back(0.0, u * e2max);
    }
  }
  std::vector<std::pair<double, double>> vals(pts.size());
  parallel_for(pts.size(), [&](std::size_t k) { vals[k] = eval(pts[k].first, pts[k].second); });
  for (std::size_t k = 0; k < pts.size(); ++k) {
    sp.phi.extra.push_back({pts[k].first, pts[k].second, vals[k].first});
    sp.psi.extra.push_back({pts[k].first, pts[k].second, vals[k].second});
  }
  for (const auto& e : lower_extra) sp.phi.extra.push_back(e);
  return sp;
}

// points where the product-channel coupling is exactly optimal: value equals the moved marginal's divergence
inline std::vector<Sample> valley_samples(const JointDist& p, const std::vector<double>& s_grid,
                                          const std::vector<double>& t_grid, const SphereSearchOptions& so = {}) {
  std::vector<Sample> out;
  auto px = p.marginal_x_vec(), py = p.marginal_y_vec();
  const std::size_t R = p.rows(), C = p.cols();
  for (double s : s_grid) {
    if (s <= 0.0) continue;
    for (const auto& qx : kl_sphere_points(px, s, so.directions, so.seed)) {
      std::vector<double> qy(C, 0.0);
      for (std::size_t x = 0; x < R; ++x)
        if (px[x] > 0.0)
          for (std::size_t y = 0; y < C; ++y) qy[y] += qx[x] * p.at(x, y) / px[x];
      out.push_back({s, kl_raw(qy, py), s});
    }
  }
  for (double t : t_grid) {
    if (t <= 0.0) continue;
    for (const auto& qy : kl_sphere_points(py, t, so.directions, so.seed + 1)) {
      std::vector<double> qx(R, 0.0);
      for (std::size_t y = 0; y < C; ++y)
        if (py[y] > 0.0)
          for (std::size_t x = 0; x < R; ++x) qx[x] += qy[y] * p.at(x, y) / py[y];
      out.push_back({kl_raw(qx, px), t, t});
    }
  }
  return out;
}

inline SurfacePair coupling_surfaces(const JointDist& p, const SurfaceOptions& o = {}) {
  double e1 = emax_of(p.marginal_x_vec()), e2 = emax_of(p.marginal_y_vec());
  auto sg = linear_grid(e1, o.grid), tg = linear_grid(e2, o.grid);
  auto sp = build_surfaces(e1, e2, LogBase::nats, o,
                           [&](double s, double t) {
                             auto r = phi_psi(p, s, t, o.sphere);
                             return std::make_pair(r.phi, r.psi);
                           },
                           valley_samples(p, sg, tg, o.sphere));
  sp.psi.source_has_zero = sp.phi.source_has_zero = !p.full_support();
  return sp;
}

// ---------- coupling polytope distance ----------

struct ConditionalFamily {
  std::vector<double> q_w;
  std::vector<std::vector<double>> qx_given_w, qy_given_w;
};

// min over per-w couplings of the total variation between the induced mixture and the target
inline double coupling_polytope_distance(const JointDist& target, const ConditionalFamily& fam) {
  const std::size_t W = fam.q_w.size(), R = target.rows(), C = target.cols();
  if (fam.qx_given_w.size() != W || fam.qy_given_w.size() != W)
    throw std::invalid_argument("coupling_polytope_distance: family sizes disagree");
  for (std::size_t w = 0; w < W; ++w) {
    (void)Dist(fam.qx_given_w[w]);
    (void)Dist(fam.qy_given_w[w]);
    if (fam.qx_given_w[w].size() != R || fam.qy_given_w[w].size() != C)
      throw std::invalid_argument("coupling_polytope_distance: alphabet sizes disagree");
  }
  (void)Dist(fam.q_w);
  const std::size_t rows = W * (R + C) + R * C;
  std::vector<lp::Sense> sen(rows, lp::Sense::eq);
  std::vector<double> rhs(rows, 0.0);
  for (std::size_t w = 0; w < W; ++w) {
    for (std::size_t x = 0; x < R; ++x) rhs[w * (R + C) + x] = fam.qx_given_w[w][x];
    for (std::size_t y = 0; y < C; ++y) rhs[w * (R + C) + R + y] = fam.qy_given_w[w][y];
  }
  for (std::size_t c = 0; c < R * C; ++c) rhs[W * (R + C) + c] = target.flat()[c];
  lp::Problem prob(sen, rhs);
  for (std::size_t w = 0; w < W; ++w)
    for (std::size_t x = 0; x < R; ++x)
      for (std::size_t y = 0; y < C; ++y) {
        std::vector<double> a(rows, 0.0);
        a[w * (R + C) + x] = 1.0;
        a[w * (R + C) + R + y] = 1.0;
        a[W * (R + C) + x * C + y] = fam.q_w[w];
        prob.add_column(0.0, a);
      }
  for (std::size_t c = 0; c < R * C; ++c)
    for (double sgn : {1.0, -1.0}) {
      std::vector<double> a(rows, 0.0);
      a[W * (R + C) + c] = -sgn;
      prob.add_column(-0.5, a);
    }
  auto sol = prob.solve();
  if (sol.status != lp::Status::optimal) throw std::runtime_error("coupling_polytope_distance: LP failed");
  return std::max(0.0, -sol.objective);
}

// ---------- marginal continuity ----------

inline double total_variation(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return 0.5 * s;
}

// coupling of (from, to) keeping the common mass on the diagonal; indexed [i * n + j] with i over `to`
inline std::vector<double> maximal_coupling(const std::vector<double>& to, const std::vector<double>& from) {
  const std::size_t n = to.size();
  std::vector<double> c(n * n, 0.0), rt(n), rf(n);
  double delta = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double m = std::min(to[i], from[i]);
    c[i * n + i] = m;
    rt[i] = to[i] - m;
    rf[i] = from[i] - m;
    delta += rt[i];
  }
  if (delta > 0.0)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) c[i * n + j] += rt[i] * rf[j] / delta;
  return c;
}

struct ContinuityReport {
  std::vector<double> coupling;  // in C(px, py), row-major
  double distance = 0.0;         // TV to the given coupling
  double bound = 0.0;            // TV(px,qx) + TV(py,qy)
  double marginal_error = 0.0;
  bool ok = false;
};

inline ContinuityReport marginal_continuity_check(const std::vector<double>& qx, const std::vector<double>& qy,
                                                  const std::vector<double>& px, const std::vector<double>& py,
                                                  const std::vector<double>& q) {
  const std::size_t R = qx.size(), C = qy.size();
  if (px.size() != R || py.size() != C || q.size() != R * C)
    throw std::invalid_argument("marginal_continuity_check: size mismatch");
  auto cx = maximal_coupling(px, qx);  // [x' * R + x]
  auto cy = maximal_coupling(py, qy);  // [y' * C + y]
  ContinuityReport rep;
  rep.coupling.assign(R * C, 0.0);
  for (std::size_t x = 0; x < R; ++x)
    for (std::size_t y = 0; y < C; ++y) {
      double m = q[x * C + y];
      if (m <= 0.0) continue;
      for (std::size_t xp = 0; xp < R; ++xp) {
        double kx = cx[xp * R + x] / qx[x];
        if (kx <= 0.0) continue;
        for (std::size_t yp = 0; yp < C; ++yp) rep.coupling[xp * C + yp] += m * kx * cy[yp * C + y] / qy[y];
      }
    }
  rep.distance = total_variation(rep.coupling, q);
  rep.bound = total_variation(px, qx) + total_variation(py, qy);
  for (std::size_t x = 0; x < R; ++x) {
    double s = 0.0;
    for (std::size_t y = 0; y < C; ++y) s += rep.coupling[x * C + y];
    rep.marginal_error = std::max(rep.marginal_error, std::abs(s - px[x]));
  }
  for (std::size_t y = 0; y < C; ++y) {
    double s = 0.0;
    for (std::size_t x = 0; x < R; ++x) s += rep.coupling[x * C + y];
    rep.marginal_error = std::max(rep.marginal_error, std::abs(s - py[y]));
  }
  rep.ok = rep.distance <= rep.bound + 1e-12 && rep.marginal_error <= 1e-12;
  return rep;
}

}  // namespace typeflow
