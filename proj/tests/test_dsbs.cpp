#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "typeflow/coupling.hpp"
#include "typeflow/dsbs.hpp"

using namespace typeflow;
using namespace typeflow::dsbs;

namespace {

double direct_d(double rho, double a, double b, double p) {
  double s = (1 + rho) / 4, d = (1 - rho) / 4;
  double q[4] = {p, a - p, b - p, 1 - a - b + p}, r[4] = {s, d, d, s};
  double v = 0;
  for (int i = 0; i < 4; ++i)
    if (q[i] > 0) v += q[i] * std::log2(q[i] / r[i]);
  return v;
}

double grid_argmin(double rho, double a, double b) {
  double lo = std::max(0.0, a + b - 1), hi = std::min(a, b);
  double best = lo, bv = direct_d(rho, a, b, lo);
  const int N = 100000;
  for (int i = 1; i <= N; ++i) {
    double p = lo + (hi - lo) * i / N, v = direct_d(rho, a, b, p);
    if (v < bv) bv = v, best = p;
  }
  return best;
}

}  // namespace

TEST(BinaryEntropy, ValuesAndInverse) {
  EXPECT_DOUBLE_EQ(h2(0.5), 1.0);
  EXPECT_DOUBLE_EQ(h2(0.0), 0.0);
  EXPECT_NEAR(h2_inv(1.0), 0.5, 1e-12);
  EXPECT_NEAR(h2_inv(0.0), 0.0, 1e-12);
  double lo = 0, hi = 0.5;
  for (int i = 0; i < 100; ++i) {
    double m = 0.5 * (lo + hi);
    (-m * std::log2(m) - (1 - m) * std::log2(1 - m) < 0.5 ? lo : hi) = m;
  }
  EXPECT_NEAR(h2_inv(0.5), lo, 1e-12);
}

TEST(Divergence, Examples) {
  Params P(0.5);
  EXPECT_NEAR(d_alpha_beta(P, 0.5, 0.5, 0.375), 0.0, 1e-15);
  EXPECT_TRUE(std::isfinite(d_alpha_beta(P, 0.3, 0.4, 0.3)));
  EXPECT_NEAR(d_alpha_beta(P, 0.3, 0.4, 0.2), direct_d(0.5, 0.3, 0.4, 0.2), 1e-15);
}

TEST(PStar, AgainstGridSearch) {
  Params P(0.5);
  EXPECT_NEAR(p_star(P, 0.5, 0.5), 0.375, 1e-15);
  EXPECT_NEAR(dd(P, 0.5, 0.5), 0.0, 1e-15);
  EXPECT_NEAR(p_star(P, 0.3, 0.3), grid_argmin(0.5, 0.3, 0.3), 1e-5);
  // finer check with golden section on the convex objective
  double lo = 0, hi = 0.3;
  const double g = (std::sqrt(5.0) - 1) / 2;
  for (int i = 0; i < 200; ++i) {
    double a = hi - g * (hi - lo), b = lo + g * (hi - lo);
    (direct_d(0.5, 0.3, 0.3, a) < direct_d(0.5, 0.3, 0.3, b) ? hi : lo) = (direct_d(0.5, 0.3, 0.3, a) < direct_d(0.5, 0.3, 0.3, b) ? b : a);
  }
  EXPECT_NEAR(p_star(P, 0.3, 0.3), 0.5 * (lo + hi), 1e-6);
}

TEST(PStar, SymmetryAndOrdering) {
  for (double rho : {0.3, 0.6, 0.9}) {
    Params P(rho);
    for (double a = 0.02; a <= 0.5; a += 0.04)
      for (double b = 0.02; b <= 0.5; b += 0.04) {
        EXPECT_NEAR(dd(P, a, b), dd(P, 1 - a, 1 - b), 1e-12);
        EXPECT_LE(dd(P, a, b), dd(P, a, 1 - b) + 1e-12);
      }
  }
}

TEST(PhiPsiDsbs, OriginAndOrder) {
  Params P(0.9);
  auto o = phi_psi_dsbs(P, 0.0, 0.0);
  EXPECT_NEAR(o.first, 0.0, 1e-12);
  EXPECT_NEAR(o.second, 0.0, 1e-12);
  for (double s = 0; s <= 1.0; s += 0.1)
    for (double t = 0; t <= 1.0; t += 0.1) {
      auto v = phi_psi_dsbs(P, s, t);
      EXPECT_LE(v.first, v.second + 1e-12);
    }
}

TEST(CorrelationBounds, CaseTable) {
  Params P(0.6);
  EXPECT_DOUBLE_EQ(correlation_bounds(P, 0.5, 0.1).forward, 0.5);
  EXPECT_NEAR(correlation_bounds(P, 0.4, 0.4).forward, 0.8 / 1.6, 1e-12);
  EXPECT_NEAR(correlation_bounds(P, 0.4, 0.4).reverse, (0.8 + 2 * 0.6 * 0.4) / (1 - 0.36), 1e-12);
}

TEST(Ribbon, Examples) {
  Params P(0.5);
  EXPECT_TRUE(ribbon_member(P, 1.5, 1.5, Direction::forward));
  EXPECT_FALSE(ribbon_member(P, 1.0, 3.0, Direction::forward));
  EXPECT_TRUE(ribbon_member(P, 0.5, 0.5, Direction::reverse));
  auto fp = ribbon_pair(P, 0.3, Direction::forward);
  EXPECT_NEAR((fp.first - 1) * (fp.second - 1), 0.25, 1e-12);
}

TEST(Discontinuity, GapAndContinuity) {
  Params P(0.9);
  EXPECT_GT(discontinuity_check(P, 1.0), 0.0);
  double prev = kInf;
  for (double e : {0.2, 0.05, 0.01, 0.001}) {
    double m = discontinuity_check(P, e);
    EXPECT_LT(m, prev);
    prev = m;
  }
  EXPECT_LT(prev, 0.02);
  Params Q(0.5);
  auto sp = surfaces(Q);
  double env = theta_upper_star(sp.psi, 0.5, 0.0) - 0.5;
  EXPECT_NEAR(discontinuity_check(Q, 0.5), env, 1e-4);
  EXPECT_NEAR(discontinuity_check(Q, 0.5), axis_two_atom(Q, 0.5) - 0.5, 1e-4);
}

TEST(Bac, BoundAtReportedCorrelation) {
  EXPECT_NEAR(bac_r2_for_rho(0.6933), 0.4177, 5e-4);
  EXPECT_NEAR(0.5 * (bac_target(1.0 - 1e-9) + 1.0) - 0.5, 0.25, 1e-8);
  auto r = bac_r2_max(0.68, 0.71, 0.005, 5000);
  EXPECT_LT(r.r2_bound, 0.4228);
  EXPECT_GT(r.rho_best, 0.68);
  EXPECT_LT(r.rho_best, 0.71);
  // positive slack can only loosen the bound
  EXPECT_GE(bac_r2_for_rho_eps(0.6933, 0.01), bac_r2_for_rho(0.6933) - 1e-3);
}

TEST(ConvexityPremises, PremisesOnSmallGrid) {
  for (double rho : {0.3, 0.9}) {
    auto r = convexity_premise_check(Params(rho), 12);
    EXPECT_EQ(r.convexity_violations, 0u);
    EXPECT_EQ(r.concavity_violations, 0u);
    EXPECT_GT(r.convexity_checks, 0u);
  }
}

TEST(Params, Validation) {
  EXPECT_THROW(Params(0.0), std::domain_error);
  EXPECT_THROW(Params(1.0), std::domain_error);
  EXPECT_THROW(discontinuity_check(Params(0.5), 1.5), std::domain_error);
}
