#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "typeflow/coupling.hpp"
#include "typeflow/dsbs.hpp"

using namespace typeflow;

namespace {

const double kLog2 = std::log(2.0);

JointDist dsbs_joint(double rho) {
  double s = (1 + rho) / 4, d = (1 - rho) / 4;
  return JointDist(std::vector<std::vector<double>>{{s, d}, {d, s}});
}

double kl_cells(const std::vector<double>& q, const std::vector<double>& p) {
  double v = 0;
  for (std::size_t i = 0; i < q.size(); ++i)
    if (q[i] > 0) v += q[i] * std::log(q[i] / p[i]);
  return v;
}

// 2x2 couplings of (a, 1-a) and (b, 1-b) are a segment in the (0,0) cell
std::vector<double> coupling2(double a, double b, double c00) { return {c00, a - c00, b - c00, 1 - a - b + c00}; }

}  // namespace

TEST(MinKl, OwnMarginalsGiveZero) {
  JointDist p(std::vector<std::vector<double>>{{0.3, 0.1, 0.1}, {0.05, 0.15, 0.3}});
  auto r = min_kl_coupling(p.marginal_x_vec(), p.marginal_y_vec(), p);
  ASSERT_TRUE(r.feasible);
  EXPECT_NEAR(r.value, 0.0, 1e-12);
  for (std::size_t c = 0; c < 6; ++c) EXPECT_NEAR(r.coupling[c], p.flat()[c], 1e-10);
}

TEST(MinKl, DegenerateMarginalForcesCoupling) {
  JointDist p(std::vector<std::vector<double>>{{0.3, 0.1, 0.1}, {0.05, 0.15, 0.3}});
  std::vector<double> qx{0.4, 0.6}, qy{0.0, 1.0, 0.0};
  auto r = min_kl_coupling(qx, qy, p);
  ASSERT_TRUE(r.feasible);
  double want = 0.4 * std::log(0.4 / 0.1) + 0.6 * std::log(0.6 / 0.15);
  EXPECT_NEAR(r.value, want, 1e-10);
  EXPECT_NEAR(r.coupling[1], 0.4, 1e-10);
  EXPECT_NEAR(r.coupling[4], 0.6, 1e-10);
}

TEST(MinKl, DsbsMatchesSegmentSearchAndClosedForm) {
  auto p = dsbs_joint(0.5);
  double a = 0.3, b = 0.3;
  auto r = min_kl_coupling({a, 1 - a}, {b, 1 - b}, p);
  ASSERT_TRUE(r.feasible);
  // golden-section over the free cell (the objective is convex along the segment)
  double lo = 0.0, hi = std::min(a, b);
  const double g = (std::sqrt(5.0) - 1) / 2;
  for (int i = 0; i < 200; ++i) {
    double m1 = hi - g * (hi - lo), m2 = lo + g * (hi - lo);
    if (kl_cells(coupling2(a, b, m1), p.flat()) < kl_cells(coupling2(a, b, m2), p.flat())) hi = m2;
    else lo = m1;
  }
  double best = kl_cells(coupling2(a, b, 0.5 * (lo + hi)), p.flat());
  EXPECT_NEAR(r.value, best, 1e-9);
  EXPECT_NEAR(r.value, dsbs::dd(dsbs::Params(0.5), a, b) * kLog2, 1e-9);
}

TEST(MinKl, InfeasibleReturnsHallCertificate) {
  JointDist p(std::vector<std::vector<double>>{{0.5, 0.0}, {0.0, 0.5}});
  std::vector<double> qx{0.6, 0.4}, qy{0.3, 0.7};
  auto r = min_kl_coupling(qx, qy, p);
  EXPECT_FALSE(r.feasible);
  EXPECT_TRUE(std::isinf(r.value));
  ASSERT_FALSE(r.hall_set.empty());
  // independent check: mass of the set exceeds the mass of its support neighbourhood
  double ms = 0, mn = 0;
  std::vector<char> nb(2, 0);
  for (auto x : r.hall_set) {
    ms += qx[x];
    for (std::size_t y = 0; y < 2; ++y)
      if (p.at(x, y) > 0) nb[y] = 1;
  }
  for (std::size_t y = 0; y < 2; ++y)
    if (nb[y]) mn += qy[y];
  EXPECT_GT(ms - mn, 1e-9);
  EXPECT_NEAR(r.hall_excess, ms - mn, 1e-12);
}

TEST(PhiPsi, OriginAndBinaryClosedForms) {
  auto p = dsbs_joint(0.6);
  auto o = phi_psi(p, 0.0, 0.0);
  EXPECT_NEAR(o.phi, 0.0, 1e-12);
  EXPECT_NEAR(o.psi, 0.0, 1e-12);
  dsbs::Params P(0.6);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 0.95);
  for (int k = 0; k < 10; ++k) {
    double s = u(rng), t = u(rng);
    auto got = phi_psi(p, s * kLog2, t * kLog2);
    auto want = dsbs::phi_psi_dsbs(P, s, t);
    EXPECT_NEAR(got.phi, want.first * kLog2, 1e-8) << s << "," << t;
    EXPECT_NEAR(got.psi, want.second * kLog2, 1e-8) << s << "," << t;
  }
}

TEST(PhiPsi, OrderedOnGrid) {
  JointDist p(std::vector<std::vector<double>>{{0.2, 0.1, 0.05}, {0.05, 0.25, 0.35}});
  double e1 = emax_of(p.marginal_x_vec()), e2 = emax_of(p.marginal_y_vec());
  for (int i = 0; i <= 8; ++i)
    for (int j = 0; j <= 8; ++j) {
      auto v = phi_psi(p, e1 * i / 8.0, e2 * j / 8.0);
      EXPECT_LE(v.phi, v.psi + 1e-9);
      EXPECT_GE(v.phi, -1e-12);
    }
}

TEST(KlSphere, PointsLieOnTheSphere) {
  std::vector<double> p{0.2, 0.3, 0.5};
  for (const auto& q : kl_sphere_points(p, 0.1)) {
    EXPECT_NEAR(kl_cells(q, p), 0.1, 1e-9);
    double s = 0;
    for (double v : q) s += v;
    EXPECT_NEAR(s, 1.0, 1e-12);
  }
}

namespace {

ExponentSurface make_surface(SurfaceKind kind, std::size_t n, double (*f)(double, double)) {
  ExponentSurface sf;
  sf.kind = kind;
  sf.s_grid = linear_grid(1.0, n);
  sf.t_grid = linear_grid(1.0, n);
  sf.e1_max = sf.e2_max = 1.0;
  for (double s : sf.s_grid)
    for (double t : sf.t_grid) sf.values.push_back(f(s, t));
  return sf;
}

}  // namespace

TEST(Envelope, AffineIsItsOwnEnvelope) {
  auto f = +[](double s, double t) { return s + t; };
  auto lo = lower_convex_envelope(make_surface(SurfaceKind::lower, 9, f));
  auto up = upper_concave_envelope(make_surface(SurfaceKind::upper, 9, f));
  for (std::size_t k = 0; k < lo.values.size(); ++k) {
    EXPECT_NEAR(lo.envelope[k], lo.values[k], 1e-12);
    EXPECT_NEAR(up.envelope[k], up.values[k], 1e-12);
  }
}

TEST(Envelope, TentFunction) {
  // min(s, 1-s): lower hull is the chord through the endpoints (zero), upper hull is the tent itself
  auto f = +[](double s, double) { return std::min(s, 1 - s); };
  auto lo = lower_convex_envelope(make_surface(SurfaceKind::lower, 11, f));
  auto up = upper_concave_envelope(make_surface(SurfaceKind::upper, 11, f));
  for (std::size_t k = 0; k < lo.values.size(); ++k) {
    EXPECT_NEAR(lo.envelope[k], 0.0, 1e-12);
    EXPECT_NEAR(up.envelope[k], up.values[k], 1e-12);
  }
  // a nonconvex bump is flattened from below
  auto g = +[](double s, double t) { return std::cos(6 * s) + t * t; };
  auto lg = lower_convex_envelope(make_surface(SurfaceKind::lower, 13, g));
  for (std::size_t k = 0; k < lg.values.size(); ++k) EXPECT_LE(lg.envelope[k], lg.values[k] + 1e-12);
}

TEST(Theta, DsbsBoundaryValuesAndOrdering) {
  dsbs::Params P(0.5);
  auto sp = dsbs::surfaces(P);
  for (double e : {0.1, 0.4, 0.8}) {
    EXPECT_NEAR(theta_lower_star(sp.phi, e, 0.0), e, 1e-6);
    EXPECT_DOUBLE_EQ(theta_upper(sp.psi, e, 0.0), e);
    EXPECT_GT(theta_upper_star(sp.psi, e, 0.0), e + 1e-3);
  }
  // every cell of the largest-exponent box: max cell probability
  EXPECT_NEAR(theta_lower_star(sp.phi, 1.0, 1.0), -std::log2((1 + 0.5) / 4), 1e-6);
  for (double e1 : {0.2, 0.5})
    for (double e2 : {0.3, 0.6}) {
      auto b = dsbs::correlation_bounds(P, e1, e2);
      double lo = theta_lower_star(sp.phi, e1, e2), hi = theta_upper_star(sp.psi, e1, e2);
      EXPECT_GE(lo, b.forward - 1e-6);
      EXPECT_LE(hi, b.reverse + 1e-6);
      EXPECT_LE(lo, hi);
    }
  EXPECT_THROW(theta_lower_star(sp.phi, 1.5, 0.0), std::domain_error);
}

TEST(Theta, ZeroCellMakesReverseInfinite) {
  JointDist p(std::vector<std::vector<double>>{{0.5, 0.0}, {0.25, 0.25}});
  SurfaceOptions o;
  o.grid = 6;
  auto sp = coupling_surfaces(p, o);
  EXPECT_TRUE(std::isinf(theta_upper_star(sp.psi, 0.1, 0.1)));
}

TEST(PolytopeDistance, Cases) {
  JointDist t(std::vector<std::vector<double>>{{0.1, 0.4}, {0.4, 0.1}});
  ConditionalFamily own{{1.0}, {t.marginal_x_vec()}, {t.marginal_y_vec()}};
  EXPECT_NEAR(coupling_polytope_distance(t, own), 0.0, 1e-12);
  ConditionalFamily det{{0.5, 0.5}, {{1, 0}, {0, 1}}, {{1, 0}, {0, 1}}};
  EXPECT_NEAR(coupling_polytope_distance(t, det), 0.8, 1e-12);
}

TEST(PolytopeDistance, MatchesGridOverPerSymbolCouplings) {
  JointDist t(std::vector<std::vector<double>>{{0.1, 0.4}, {0.3, 0.2}});
  ConditionalFamily fam{{0.4, 0.6}, {{0.7, 0.3}, {0.2, 0.8}}, {{0.5, 0.5}, {0.9, 0.1}}};
  double lp = coupling_polytope_distance(t, fam);
  const int N = 400;
  double best = kInf;
  auto seg = [&](int w, int i) {
    double a = fam.qx_given_w[std::size_t(w)][0], b = fam.qy_given_w[std::size_t(w)][0];
    double lo = std::max(0.0, a + b - 1), hi = std::min(a, b);
    return coupling2(a, b, lo + (hi - lo) * i / N);
  };
  for (int i = 0; i <= N; ++i)
    for (int j = 0; j <= N; ++j) {
      auto c0 = seg(0, i), c1 = seg(1, j);
      double tv = 0;
      for (std::size_t c = 0; c < 4; ++c) tv += std::abs(0.4 * c0[c] + 0.6 * c1[c] - t.flat()[c]);
      best = std::min(best, tv / 2);
    }
  EXPECT_LE(lp, best + 1e-12);
  EXPECT_GE(lp, best - 2e-3);
  EXPECT_GE(lp, 0.0);
}

TEST(MarginalContinuity, Cases) {
  std::vector<double> qx{0.3, 0.7}, qy{0.6, 0.4}, q{0.2, 0.1, 0.4, 0.3};
  auto same = marginal_continuity_check(qx, qy, qx, qy, q);
  EXPECT_NEAR(same.distance, 0.0, 1e-15);
  for (std::size_t c = 0; c < 4; ++c) EXPECT_NEAR(same.coupling[c], q[c], 1e-15);
  auto pert = marginal_continuity_check(qx, qy, {0.31, 0.69}, {0.59, 0.41}, q);
  EXPECT_TRUE(pert.ok);
  EXPECT_LE(pert.distance, 0.02 + 1e-12);
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.05, 1);
  for (int k = 0; k < 50; ++k) {
    auto rd = [&](std::size_t n) {
      std::vector<double> v(n);
      double s = 0;
      for (auto& x : v) s += (x = u(rng));
      for (auto& x : v) x /= s;
      return v;
    };
    auto qq = rd(9);
    std::vector<double> mx(3, 0), my(3, 0);
    for (std::size_t x = 0; x < 3; ++x)
      for (std::size_t y = 0; y < 3; ++y) mx[x] += qq[x * 3 + y], my[y] += qq[x * 3 + y];
    auto rep = marginal_continuity_check(mx, my, rd(3), rd(3), qq);
    EXPECT_TRUE(rep.ok);
  }
}
