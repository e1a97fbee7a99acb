#include <gtest/gtest.h>

#include <cmath>

#include "typeflow/hyper.hpp"

using namespace typeflow;
using namespace typeflow::hyper;

namespace {

const SurfacePair& dsbs_surfaces(double rho) {
  static std::map<double, SurfacePair> cache;
  auto it = cache.find(rho);
  if (it == cache.end()) it = cache.emplace(rho, dsbs::surfaces(dsbs::Params(rho))).first;
  return it->second;
}

HolderPair scaled_ribbon(double rho, double factor) {
  // symmetric pair with (p-1)(q-1) = factor * rho^2
  double a = rho * std::sqrt(factor);
  return {1 + a, 1 + a};
}

}  // namespace

TEST(Lambda, ZeroAtOriginOnForwardRibbon) {
  auto& sp = dsbs_surfaces(0.5);
  EXPECT_NEAR(lambda_lower(sp.phi, scaled_ribbon(0.5, 1.2), 0.0, 0.0), 0.0, 1e-9);
}

TEST(Lambda, LowerMatchesDenseGrid) {
  auto& sp = dsbs_surfaces(0.5);
  HolderPair pq{1.5, 1.5};
  double lam = lambda_lower(sp.phi, pq, 0.2, 0.2);
  EXPECT_GT(lam, 0.0);
  double best = kInf;
  const int N = 60;
  for (int i = 0; i <= N; ++i)
    for (int j = 0; j <= N; ++j) {
      double s = 0.2 + 0.8 * i / N, t = 0.2 + 0.8 * j / N;
      best = std::min(best, theta_lower_star(sp.phi, s, t) - s / pq.p - t / pq.q);
    }
  EXPECT_LE(lam, best + 1e-9);
  EXPECT_GE(lam, best - 1e-2);
}

TEST(Lambda, MonotoneInBoxCorner) {
  auto& sp = dsbs_surfaces(0.5);
  HolderPair f{1.3, 1.4}, r{0.6, 0.5};
  double prev_l = -kInf, prev_u = -kInf;
  for (double a : {0.0, 0.1, 0.3, 0.6}) {
    double l = lambda_lower(sp.phi, f, a, a), u = lambda_upper(sp.psi, r, a, a);
    EXPECT_GE(l, prev_l - 1e-9);
    EXPECT_GE(u, prev_u - 1e-9);
    prev_l = l, prev_u = u;
  }
}

TEST(Region, ForwardStraddlesRibbon) {
  for (double rho : {0.5, 0.9}) {
    auto& sp = dsbs_surfaces(rho);
    EXPECT_TRUE(region_member(scaled_ribbon(rho, 1.01), Direction::forward, sp).member);
    auto out = region_member(scaled_ribbon(rho, 0.99), Direction::forward, sp);
    EXPECT_FALSE(out.member);
    EXPECT_GT(out.plane_value, out.surface_value);
  }
}

TEST(Region, ReverseWithUnitQMatchesSampleScan) {
  auto& sp = dsbs_surfaces(0.5);
  for (double p : {0.2, 0.5, 0.9, 1.0}) {
    HolderPair pq{p, 1.0};
    bool scan = true;
    for (const auto& k : sp.psi.samples())
      if (k.v > k.s / p + k.t + 1e-12 * (1 + k.s / p + k.t)) scan = false;
    EXPECT_EQ(region_member(pq, Direction::reverse, sp).member, scan) << p;
  }
}

TEST(Region, RejectsWrongRange) {
  auto& sp = dsbs_surfaces(0.5);
  EXPECT_THROW(region_member({0.5, 2.0}, Direction::forward, sp), std::domain_error);
  EXPECT_THROW(region_member({1.5, 0.5}, Direction::reverse, sp), std::domain_error);
  EXPECT_THROW(lambda_lower(sp.phi, {1.5, 1.5}, 1.5, 0.0), std::domain_error);
}

TEST(Restricted, AgreesAtOriginAndGrowsWithBox) {
  auto& sp = dsbs_surfaces(0.5);
  for (double f : {0.8, 0.99, 1.01, 1.3}) {
    auto pq = scaled_ribbon(0.5, f);
    EXPECT_EQ(restricted_region_member(pq, 0.0, 0.0, Direction::forward, sp),
              region_member(pq, Direction::forward, sp).member)
        << f;
  }
  // some pair outside the forward region is inside the restricted one at alpha = beta = 0.3
  bool found = false;
  for (double f = 0.05; f < 1.0 && !found; f += 0.05) {
    auto pq = scaled_ribbon(0.5, f);
    if (!region_member(pq, Direction::forward, sp).member && restricted_region_member(pq, 0.3, 0.3, Direction::forward, sp)) {
      found = true;
      for (double a : {0.4, 0.6}) EXPECT_TRUE(restricted_region_member(pq, a, a, Direction::forward, sp));
    }
  }
  EXPECT_TRUE(found);
}

TEST(LimitSlope, ForwardValues) {
  const double rho = 0.5;
  auto& sp = dsbs_surfaces(rho);
  auto sym = limit_slope(sp, 1.0, 1.0, Direction::forward);
  EXPECT_TRUE(sym.monotone);
  EXPECT_NEAR(sym.extrapolated, 2.0 / (1.0 + rho), 1e-3);
  auto axis = limit_slope(sp, 1.0, 0.0, Direction::forward);
  EXPECT_NEAR(axis.extrapolated, 1.0, 1e-3);
  EXPECT_NEAR(dsbs::ribbon_optimum(dsbs::Params(rho), 1.0, 1.0, Direction::forward), 2.0 / (1.0 + rho), 1e-6);
  EXPECT_THROW(limit_slope(sp, 1.0, 0.0, Direction::reverse), std::domain_error);
}
