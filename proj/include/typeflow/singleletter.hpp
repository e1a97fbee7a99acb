#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "typeflow/lp.hpp"
#include "typeflow/probcore.hpp"

namespace typeflow {

struct RatePoint {
  double r1 = 0.0, r2 = 0.0;
};

// q(w|x,y): one row per cell of the |X|x|Y| table (row-major), each a Dist over W
struct AuxiliaryChannel {
  CondKernel q_w_given_xy;

  struct Induced {
    std::vector<double> q_w;
    std::vector<std::vector<double>> q_x_given_w, q_y_given_w;
  };
  Induced induced(const JointDist& t) const {
    const std::size_t W = q_w_given_xy.out_size();
    Induced r;
    r.q_w.assign(W, 0.0);
    r.q_x_given_w.assign(W, std::vector<double>(t.rows(), 0.0));
    r.q_y_given_w.assign(W, std::vector<double>(t.cols(), 0.0));
    for (std::size_t x = 0; x < t.rows(); ++x)
      for (std::size_t y = 0; y < t.cols(); ++y)
        for (std::size_t w = 0; w < W; ++w) {
          double m = t.at(x, y) * q_w_given_xy[x * t.cols() + y][w];
          r.q_w[w] += m;
          r.q_x_given_w[w][x] += m;
          r.q_y_given_w[w][y] += m;
        }
    for (std::size_t w = 0; w < W; ++w)
      if (r.q_w[w] > 0.0) {
        for (auto& v : r.q_x_given_w[w]) v /= r.q_w[w];
        for (auto& v : r.q_y_given_w[w]) v /= r.q_w[w];
      }
    return r;
  }
};

struct SlackTerms {
  static double eps_n(long long n, std::size_t ax, std::size_t ay) {
    double xy = double(ax * ay), nn = double(n);
    return ((xy + 2.0) * xy / nn) *
           std::log((nn + 1.0) * std::pow(nn, 6) / (std::pow(double(ax), 4) * std::pow(double(ay), 4)));
  }
  static double eps1_n(long long n, std::size_t ax, std::size_t ay) {
    double nn = double(n);
    return (double(ax * ay) / nn) * std::log(std::pow(nn, 4) * (nn + 1.0) / (16.0 * double(ax)));
  }
  static double eps2_n(long long n, std::size_t ax, std::size_t ay) {
    double nn = double(n);
    return (double(ax * ay) / nn) * std::log(std::pow(nn, 4) * (nn + 1.0) / (16.0 * double(ay) * double(ay)));
  }
};

namespace detail {

// entropy bookkeeping for an atom living on a list of cells
struct CellMap {
  std::vector<std::size_t> cx, cy;  // cell -> x, y
  std::size_t nx = 0, ny = 0;
  double h(const std::vector<double>& p) const { return entropy(p); }
  std::vector<double> mx(const std::vector<double>& p) const {
    std::vector<double> m(nx, 0.0);
    for (std::size_t i = 0; i < p.size(); ++i) m[cx[i]] += p[i];
    return m;
  }
  std::vector<double> my(const std::vector<double>& p) const {
    std::vector<double> m(ny, 0.0);
    for (std::size_t i = 0; i < p.size(); ++i) m[cy[i]] += p[i];
    return m;
  }
  double hx(const std::vector<double>& p) const { return entropy(mx(p)); }
  double hy(const std::vector<double>& p) const { return entropy(my(p)); }
};

inline void simplex_grid(std::size_t k, int res, std::vector<std::vector<double>>& out) {
  for (auto& c : compositions(k, res)) {
    std::vector<double> p(k);
    for (std::size_t i = 0; i < k; ++i) p[i] = double(c[i]) / res;
    out.push_back(std::move(p));
  }
}

inline double binom_d(std::size_t n, std::size_t k) {
  double r = 1.0;
  for (std::size_t i = 1; i <= k; ++i) r = r * double(n - k + i) / double(i);
  return r;
}

}  // namespace detail

struct FStarOptions {
  std::size_t grid_columns = 700;  // target size of the initial atom grid
  int max_rounds = 80;
  double pricing_tol = 1e-9;
};

struct FStarResult {
  double value = 0.0;  // nats; a certified-feasible lower bound on F*
  double h_x_given_w = 0.0, h_y_given_w = 0.0;
  std::vector<double> weights;             // Q_W
  std::vector<std::vector<double>> atoms;  // P_{XY|W=w}, row-major |X|x|Y|
  double last_pricing_gap = 0.0;           // best reduced cost left when stopping
  int rounds = 0;
  AuxiliaryChannel witness(const JointDist& t) const {
    std::vector<Dist> rows;
    const std::size_t W = weights.size();
    for (std::size_t c = 0; c < t.flat().size(); ++c) {
      std::vector<double> q(W, 0.0);
      if (t.flat()[c] > 0.0) {
        for (std::size_t w = 0; w < W; ++w) q[w] = weights[w] * atoms[w][c] / t.flat()[c];
        rows.push_back(Dist::normalize(q));
      } else {
        rows.push_back(Dist::normalize(weights));
      }
    }
    return AuxiliaryChannel{CondKernel(std::move(rows))};
  }
};

namespace detail {
// pool: extra starting atoms in support-cell coordinates; on return it also receives the final basic atoms
inline FStarResult f_star_impl(const JointDist& t, RatePoint r, const FStarOptions& opt,
                               std::vector<std::vector<double>>* pool) {
  if (!(r.r1 >= 0.0) || !(r.r2 >= 0.0)) throw std::invalid_argument("f_star: rates must be nonnegative");
  detail::CellMap cm;
  cm.nx = t.rows();
  cm.ny = t.cols();
  std::vector<double> target;
  std::vector<std::size_t> cell_index;
  for (std::size_t x = 0; x < t.rows(); ++x)
    for (std::size_t y = 0; y < t.cols(); ++y)
      if (t.at(x, y) > 0.0) {
        cm.cx.push_back(x);
        cm.cy.push_back(y);
        target.push_back(t.at(x, y));
        cell_index.push_back(x * t.cols() + y);
      }
  const std::size_t m0 = target.size();
  FStarResult res;
  auto expand = [&](const std::vector<double>& p) {
    std::vector<double> f(t.flat().size(), 0.0);
    for (std::size_t i = 0; i < m0; ++i) f[cell_index[i]] = p[i];
    return f;
  };
  if (m0 == 1) {
    res.weights = {1.0};
    res.atoms = {expand({1.0})};
    return res;
  }

  std::vector<lp::Sense> senses(m0, lp::Sense::eq);
  senses.push_back(lp::Sense::le);
  senses.push_back(lp::Sense::le);
  std::vector<double> rhs = target;
  rhs.push_back(r.r1);
  rhs.push_back(r.r2);
  lp::Problem prob(senses, rhs);

  std::vector<std::vector<double>> atoms;
  auto add_atom = [&](const std::vector<double>& p) {
    std::vector<double> a = p;
    a.push_back(cm.hx(p));
    a.push_back(cm.hy(p));
    prob.add_column(cm.h(p), a);
    atoms.push_back(p);
  };

  int resolution = 2;
  for (int rr = 400; rr >= 2; --rr)
    if (detail::binom_d(std::size_t(rr) + m0 - 1, m0 - 1) <= double(opt.grid_columns)) {
      resolution = rr;
      break;
    }
  std::vector<std::vector<double>> grid;
  detail::simplex_grid(m0, resolution, grid);
  for (const auto& p : grid) add_atom(p);
  // structured seeds: T itself and its row/column conditionals
  add_atom(target);
  for (std::size_t x = 0; x < cm.nx; ++x) {
    std::vector<double> p(m0, 0.0);
    double s = 0.0;
    for (std::size_t i = 0; i < m0; ++i)
      if (cm.cx[i] == x) p[i] = target[i], s += target[i];
    if (s > 0.0) {
      for (auto& v : p) v /= s;
      add_atom(p);
    }
  }
  for (std::size_t y = 0; y < cm.ny; ++y) {
    std::vector<double> p(m0, 0.0);
    double s = 0.0;
    for (std::size_t i = 0; i < m0; ++i)
      if (cm.cy[i] == y) p[i] = target[i], s += target[i];
    if (s > 0.0) {
      for (auto& v : p) v /= s;
      add_atom(p);
    }
  }
  if (pool)
    for (const auto& p : *pool)
      if (p.size() == m0) add_atom(p);

  lp::Solution sol;
  std::vector<double> nu(m0);
  double l1 = 0.0, l2 = 0.0;
  // mirror ascent on the simplex face of the start point; logs are shared by value and gradient
  std::vector<double> lp_(m0), lq(m0), g(m0), q(m0), mxv(cm.nx), myv(cm.ny), lmx(cm.nx), lmy(cm.ny);
  auto eval = [&](const std::vector<double>& p, std::vector<double>& lg) {
    std::fill(mxv.begin(), mxv.end(), 0.0);
    std::fill(myv.begin(), myv.end(), 0.0);
    double v = 0.0;
    for (std::size_t i = 0; i < m0; ++i) {
      mxv[cm.cx[i]] += p[i];
      myv[cm.cy[i]] += p[i];
      lg[i] = p[i] > 0.0 ? std::log(p[i]) : 0.0;
      v -= p[i] * lg[i] + nu[i] * p[i];
    }
    for (std::size_t x = 0; x < cm.nx; ++x) {
      lmx[x] = mxv[x] > 0.0 ? std::log(mxv[x]) : 0.0;
      v += l1 * mxv[x] * lmx[x];
    }
    for (std::size_t y = 0; y < cm.ny; ++y) {
      lmy[y] = myv[y] > 0.0 ? std::log(myv[y]) : 0.0;
      v += l2 * myv[y] * lmy[y];
    }
    return v;
  };
  auto ascend = [&](std::vector<double> p) {
    double f = eval(p, lp_), eta = 1.0;
    for (int it = 0; it < 300; ++it) {
      double gmax = -kInf;
      for (std::size_t i = 0; i < m0; ++i) {
        if (p[i] <= 0.0) continue;
        g[i] = -lp_[i] - nu[i] + l1 * lmx[cm.cx[i]] + l2 * lmy[cm.cy[i]];
        gmax = std::max(gmax, g[i]);
      }
      bool moved = false;
      double gain = 0.0;
      while (eta > 1e-10) {
        double s = 0.0;
        for (std::size_t i = 0; i < m0; ++i) {
          q[i] = p[i] > 0.0 ? p[i] * std::exp(eta * (g[i] - gmax)) : 0.0;
          s += q[i];
        }
        for (auto& v : q) v /= s;
        double fq = eval(q, lq);
        if (fq > f + 1e-15) {
          gain = fq - f;
          moved = true;
          p.swap(q);
          lp_.swap(lq);
          f = fq;
          eta = std::min(eta * 2.0, 8.0);
          break;
        }
        eta *= 0.5;
      }
      if (!moved || gain < 1e-13) break;
    }
    return std::make_pair(f, p);
  };
  auto reduced = [&](const std::vector<double>& p) { return eval(p, lq); };

  for (int round = 0; round < opt.max_rounds; ++round) {
    sol = prob.solve();
    if (sol.status != lp::Status::optimal) throw std::runtime_error("f_star: LP did not reach optimality (status " + std::to_string(int(sol.status)) + ", round " + std::to_string(round) + ")");
    for (std::size_t i = 0; i < m0; ++i) nu[i] = sol.duals[i];
    l1 = sol.duals[m0];
    l2 = sol.duals[m0 + 1];
    res.rounds = round + 1;

    // candidate starts: best existing atoms by reduced cost plus basic atoms
    std::vector<std::pair<double, std::size_t>> rc;
    rc.reserve(atoms.size());
    for (std::size_t j = 0; j < atoms.size(); ++j) rc.emplace_back(reduced(atoms[j]), j);
    std::partial_sort(rc.begin(), rc.begin() + std::min<std::size_t>(4, rc.size()), rc.end(),
                      [](auto& a, auto& b) { return a.first > b.first; });
    std::vector<std::size_t> starts;
    for (std::size_t k = 0; k < std::min<std::size_t>(4, rc.size()); ++k) starts.push_back(rc[k].second);
    for (std::size_t j = 0; j < sol.x.size(); ++j)
      if (sol.x[j] > 1e-12) starts.push_back(j);
    std::sort(starts.begin(), starts.end());
    starts.erase(std::unique(starts.begin(), starts.end()), starts.end());

    std::vector<std::pair<double, std::vector<double>>> found;
    for (auto j : starts) {
      auto [f, p] = ascend(atoms[j]);
      if (f > opt.pricing_tol) found.emplace_back(f, std::move(p));
    }
    // a fully interior start as well, in case every seed sits on a poor face
    {
      auto [f, p] = ascend(target);
      if (f > opt.pricing_tol) found.emplace_back(f, std::move(p));
    }
    double best = 0.0;
    for (auto& fp : found) best = std::max(best, fp.first);
    res.last_pricing_gap = best;
    if (found.empty()) break;
    std::sort(found.begin(), found.end(), [](auto& a, auto& b) { return a.first > b.first; });
    std::size_t added = 0;
    for (auto& fp : found) {
      bool dup = false;
      for (std::size_t k = atoms.size() - added; k < atoms.size(); ++k) {
        double d = 0.0;
        for (std::size_t i = 0; i < m0; ++i) d = std::max(d, std::abs(atoms[k][i] - fp.second[i]));
        if (d < 1e-9) dup = true;
      }
      if (dup) continue;
      add_atom(fp.second);
      if (++added >= 6) break;
    }
    if (added == 0) break;
    if (round + 1 == opt.max_rounds) sol = prob.solve();
  }

  res.value = 0.0;
  for (std::size_t j = 0; j < sol.x.size(); ++j) {
    double mu = sol.x[j];
    if (mu <= 1e-13) continue;
    res.weights.push_back(mu);
    res.atoms.push_back(expand(atoms[j]));
    res.value += mu * cm.h(atoms[j]);
    res.h_x_given_w += mu * cm.hx(atoms[j]);
    res.h_y_given_w += mu * cm.hy(atoms[j]);
  }
  double ws = 0.0;
  for (double w : res.weights) ws += w;
  for (double& w : res.weights) w /= ws;
  if (pool) {
    for (std::size_t j = 0; j < sol.x.size(); ++j)
      if (sol.x[j] > 1e-13 && j > grid.size() + cm.nx + cm.ny) pool->push_back(atoms[j]);
    if (pool->size() > 400) pool->erase(pool->begin(), pool->begin() + std::ptrdiff_t(pool->size() - 400));
  }
  return res;
}
}  // namespace detail

inline FStarResult f_star_solve(const JointDist& t, RatePoint r, const FStarOptions& opt = {}) {
  return detail::f_star_impl(t, r, opt, nullptr);
}

// Repeated solves for one joint distribution; atoms found by earlier solves seed later ones.
class FStarSolver {
 public:
  explicit FStarSolver(JointDist t, FStarOptions opt = {}) : t_(std::move(t)), opt_(opt) {}
  FStarResult solve(RatePoint r) { return detail::f_star_impl(t_, r, opt_, &pool_); }
  double f(double r1, double r2) { return solve({r1, r2}).value; }
  const JointDist& joint() const { return t_; }

 private:
  JointDist t_;
  FStarOptions opt_;
  std::vector<std::vector<double>> pool_;
};

inline double f_star(const JointDist& t, RatePoint r) { return f_star_solve(t, r).value; }
inline double e_star(const JointDist& t, RatePoint r) { return r.r1 + r.r2 - f_star(t, r); }
// minimum common rate: E* = R1 + R2 - H(XY) + G*
inline double g_star(const JointDist& t, RatePoint r) {
  return std::max(0.0, entropy(t.flat()) - f_star(t, r));
}

inline double upsilon_star(const JointDist& t, double e1, double e2) {
  auto im = info_measures(t);
  const double tol = 1e-12;
  if (e1 < -tol || e2 < -tol || e1 > im.H_X + tol || e2 > im.H_Y + tol)
    throw std::domain_error("upsilon_star: exponents outside [0,H(X)] x [0,H(Y)]");
  return g_star(t, {std::max(0.0, im.H_X - e1), std::max(0.0, im.H_Y - e2)});
}

// ---------- biclique region ----------

struct RegionVertex {
  double r1, r2;
  double alpha;                     // weight of the first component
  std::vector<double> p, q;         // P_XY and Q_XY, row-major
};

struct BicliqueRegion {
  std::vector<RegionVertex> frontier;  // ordered by increasing r1, from (0, H(Y|X)) to (H(X|Y), 0)
  // largest r2 on the frontier above r1 (piecewise linear); -inf outside [0, max r1]
  double max_r2(double r1) const {
    if (r1 < 0.0 || frontier.empty() || r1 > frontier.back().r1 + 1e-15) return -kInf;
    for (std::size_t i = 1; i < frontier.size(); ++i) {
      const auto& a = frontier[i - 1];
      const auto& b = frontier[i];
      if (r1 <= b.r1) {
        if (b.r1 - a.r1 < 1e-15) return std::max(a.r2, b.r2);
        double u = (r1 - a.r1) / (b.r1 - a.r1);
        return a.r2 + u * (b.r2 - a.r2);
      }
    }
    return frontier.back().r2;
  }
  bool contains(double r1, double r2, double tol = 1e-9) const {
    if (r2 < -tol) return false;
    return r2 <= max_r2(std::min(std::max(r1 - tol, 0.0), frontier.back().r1)) + tol && r1 <= frontier.back().r1 + tol;
  }
};

namespace detail {
// alpha*H_P(X|Y) for the unnormalized measure A = alpha*P
inline double cond_x_given_y_mass(const std::vector<double>& a, std::size_t rows, std::size_t cols) {
  double v = 0.0;
  for (std::size_t y = 0; y < cols; ++y) {
    double col = 0.0;
    for (std::size_t x = 0; x < rows; ++x) col += a[x * cols + y];
    for (std::size_t x = 0; x < rows; ++x) {
      double c = a[x * cols + y];
      if (c > 0.0) v += c * std::log(col / c);
    }
  }
  return v;
}
inline double cond_y_given_x_mass(const std::vector<double>& b, std::size_t rows, std::size_t cols) {
  double v = 0.0;
  for (std::size_t x = 0; x < rows; ++x) {
    double row = 0.0;
    for (std::size_t y = 0; y < cols; ++y) row += b[x * cols + y];
    for (std::size_t y = 0; y < cols; ++y) {
      double c = b[x * cols + y];
      if (c > 0.0) v += c * std::log(row / c);
    }
  }
  return v;
}
}  // namespace detail

// Support function of the region in direction (lam, 1-lam), maximized over the split A + B = T.
inline RegionVertex biclique_support_point(const JointDist& t, double lam) {
  const std::size_t R = t.rows(), C = t.cols(), N = R * C;
  const auto& T = t.flat();
  std::vector<double> u(N, 0.5), a(N), b(N);
  auto split = [&](const std::vector<double>& uu) {
    for (std::size_t i = 0; i < N; ++i) {
      a[i] = T[i] * uu[i];
      b[i] = T[i] - a[i];
    }
  };
  auto objective = [&](const std::vector<double>& uu) {
    split(uu);
    return lam * detail::cond_x_given_y_mass(a, R, C) + (1.0 - lam) * detail::cond_y_given_x_mass(b, R, C);
  };
  double f = objective(u), step = 1.0;
  std::vector<double> g(N), cand(N);
  for (int it = 0; it < 5000; ++it) {
    split(u);
    for (std::size_t y = 0; y < C; ++y) {
      double col = 0.0;
      for (std::size_t x = 0; x < R; ++x) col += a[x * C + y];
      for (std::size_t x = 0; x < R; ++x) {
        std::size_t i = x * C + y;
        g[i] = T[i] > 0.0 ? lam * std::log(std::max(col, 1e-300) / std::max(a[i], 1e-300)) : 0.0;
      }
    }
    for (std::size_t x = 0; x < R; ++x) {
      double row = 0.0;
      for (std::size_t y = 0; y < C; ++y) row += b[x * C + y];
      for (std::size_t y = 0; y < C; ++y) {
        std::size_t i = x * C + y;
        if (T[i] > 0.0) g[i] -= (1.0 - lam) * std::log(std::max(row, 1e-300) / std::max(b[i], 1e-300));
        g[i] *= T[i];
      }
    }
    bool moved = false;
    while (step > 1e-14) {
      double lin = 0.0;
      for (std::size_t i = 0; i < N; ++i) {
        cand[i] = std::clamp(u[i] + step * g[i], 0.0, 1.0);
        lin += g[i] * (cand[i] - u[i]);
      }
      double fc = objective(cand);
      if (fc >= f + 1e-4 * lin && fc > f) {
        moved = fc - f > 1e-15;
        u.swap(cand);
        f = fc;
        step *= 2.0;
        break;
      }
      step *= 0.5;
    }
    if (!moved) break;
  }
  split(u);
  RegionVertex v;
  v.r1 = detail::cond_x_given_y_mass(a, R, C);
  v.r2 = detail::cond_y_given_x_mass(b, R, C);
  double al = 0.0;
  for (double x : a) al += x;
  v.alpha = al;
  v.p.assign(N, 0.0);
  v.q.assign(N, 0.0);
  for (std::size_t i = 0; i < N; ++i) {
    if (al > 0.0) v.p[i] = a[i] / al;
    if (al < 1.0) v.q[i] = b[i] / (1.0 - al);
  }
  return v;
}

inline BicliqueRegion biclique_region_star(const JointDist& t, int resolution = 101) {
  if (resolution < 2) throw std::invalid_argument("biclique_region_star: resolution must be >= 2");
  auto im = info_measures(JointDist(t.rows(), t.cols(), t.flat()));
  std::vector<RegionVertex> pts;
  RegionVertex top{0.0, im.H_Y_given_X, 0.0, std::vector<double>(t.flat().size(), 0.0), t.flat()};
  RegionVertex right{im.H_X_given_Y, 0.0, 1.0, t.flat(), std::vector<double>(t.flat().size(), 0.0)};
  pts.push_back(top);
  pts.push_back(right);
  for (int k = 1; k < resolution - 1; ++k) pts.push_back(biclique_support_point(t, double(k) / (resolution - 1)));
  std::sort(pts.begin(), pts.end(), [](auto& a, auto& b) { return a.r1 < b.r1 || (a.r1 == b.r1 && a.r2 > b.r2); });
  // upper concave hull from the top-left corner to the bottom-right corner
  std::vector<RegionVertex> hull;
  for (auto& p : pts) {
    if (p.r1 < -1e-15) continue;
    while (hull.size() >= 2) {
      auto& o = hull[hull.size() - 2];
      auto& a = hull.back();
      double cr = (a.r1 - o.r1) * (p.r2 - o.r2) - (a.r2 - o.r2) * (p.r1 - o.r1);
      if (cr >= -1e-14) hull.pop_back();
      else break;
    }
    hull.push_back(p);
  }
  BicliqueRegion reg;
  reg.frontier = std::move(hull);
  return reg;
}

inline bool triangle_condition(const JointDist& t, double tol = 1e-9) {
  auto im = info_measures(JointDist(t.rows(), t.cols(), t.flat()));
  if (im.H_X_given_Y <= 1e-12 || im.H_Y_given_X <= 1e-12)
    throw std::domain_error("triangle_condition: requires positive conditional entropies");
  auto px = t.marginal_x_vec(), py = t.marginal_y_vec();
  for (std::size_t x = 0; x < t.rows(); ++x)
    for (std::size_t y = 0; y < t.cols(); ++y) {
      double v = t.at(x, y);
      if (v <= 0.0) continue;
      double lhs = std::log(v / py[y]) / im.H_X_given_Y;
      double rhs = std::log(v / px[x]) / im.H_Y_given_X;
      if (std::abs(std::exp(lhs) - std::exp(rhs)) > tol) return false;
    }
  return true;
}

inline bool hk_region_member(const JointDist& t, RatePoint r, double tol = 1e-6) {
  return e_star(t, r) <= tol;
}

// ---------- property harness over F* ----------

struct ExponentPropertyReport {
  int samples = 0;
  int monotone_violations = 0;
  int bound_violations = 0;
  int closed_form_violations = 0;
  int concavity_violations = 0;
  int lipschitz_violations = 0;
  double eps_opt = 1e-3;
  double worst_closed_form_error = 0.0;
  int total_violations() const {
    return monotone_violations + bound_violations + closed_form_violations + concavity_violations +
           lipschitz_violations;
  }
};

inline ExponentPropertyReport exponent_property_harness(const JointDist& t, int trials, unsigned seed = 2024, double eps_opt = 1e-3,
                                   double d1 = 0.05, double d2 = 0.07) {
  ExponentPropertyReport rep;
  rep.eps_opt = eps_opt;
  auto im = info_measures(JointDist(t.rows(), t.cols(), t.flat()));
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(0.0, im.H_X), uy(0.0, im.H_Y);
  FStarSolver solver(t);
  auto F = [&](double a, double b) { return solver.f(a, b); };
  for (int k = 0; k < trials; ++k) {
    ++rep.samples;
    double r1 = ux(rng), r2 = uy(rng);
    double s1 = ux(rng), s2 = uy(rng);
    double f = F(r1, r2);
    double f_d1 = F(r1 + d1, r2), f_d2 = F(r1, r2 + d2), f_dd = F(r1 + d1, r2 + d2);
    if (f_d1 < f - eps_opt || f_d2 < f - eps_opt) ++rep.monotone_violations;
    double ub = std::min({im.H_XY, r1 + r2, r1 + im.H_Y_given_X, r2 + im.H_X_given_Y});
    if (f > ub + eps_opt || f < -eps_opt) ++rep.bound_violations;
    double c1 = F(0.0, r2), c2 = F(r1, 0.0);
    double e1 = std::abs(c1 - std::min(r2, im.H_Y_given_X)), e2 = std::abs(c2 - std::min(r1, im.H_X_given_Y));
    rep.worst_closed_form_error = std::max({rep.worst_closed_form_error, e1, e2});
    if (e1 > eps_opt || e2 > eps_opt) ++rep.closed_form_violations;
    double fs = F(s1, s2), fm = F(0.5 * (r1 + s1), 0.5 * (r2 + s2));
    if (fm < 0.5 * (f + fs) - eps_opt) ++rep.concavity_violations;
    double inc = f_dd - f;
    if (inc < -eps_opt || inc > d1 + d2 + eps_opt) ++rep.lipschitz_violations;
  }
  return rep;
}

}  // namespace typeflow
