#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "typeflow/singleletter.hpp"
#include "typeflow/typegraph.hpp"

using namespace typeflow;

namespace {

// independent oracle: sequences by next_permutation, adjacency by direct joint-type comparison
struct Oracle {
  std::vector<std::vector<int>> xs, ys;
  std::vector<std::vector<char>> adj;

  static std::vector<std::vector<int>> seqs(const std::vector<long long>& counts) {
    std::vector<int> s;
    for (std::size_t a = 0; a < counts.size(); ++a) s.insert(s.end(), std::size_t(counts[a]), int(a));
    std::vector<std::vector<int>> out;
    do out.push_back(s);
    while (std::next_permutation(s.begin(), s.end()));
    return out;
  }

  explicit Oracle(const JointNType& t) {
    xs = seqs(t.marginal_x().counts);
    ys = seqs(t.marginal_y().counts);
    adj.assign(xs.size(), std::vector<char>(ys.size(), 0));
    for (std::size_t i = 0; i < xs.size(); ++i)
      for (std::size_t j = 0; j < ys.size(); ++j) {
        std::vector<std::vector<long long>> c(t.rows(), std::vector<long long>(t.cols(), 0));
        for (std::size_t k = 0; k < xs[i].size(); ++k) ++c[std::size_t(xs[i][k])][std::size_t(ys[j][k])];
        adj[i][j] = c == t.counts();
      }
  }

  // max edges over all |A| = m1, |B| = m2 by enumerating both sides
  std::size_t max_edges(std::size_t m1, std::size_t m2) const {
    std::size_t best = 0;
    std::vector<char> sa(xs.size(), 0), sb(ys.size(), 0);
    std::fill(sa.end() - long(m1), sa.end(), 1);
    do {
      std::fill(sb.begin(), sb.end(), 0);
      std::fill(sb.end() - long(m2), sb.end(), 1);
      do {
        std::size_t e = 0;
        for (std::size_t i = 0; i < xs.size(); ++i)
          if (sa[i])
            for (std::size_t j = 0; j < ys.size(); ++j) e += sa[i] && sb[j] && adj[i][j];
        best = std::max(best, e);
      } while (std::next_permutation(sb.begin(), sb.end()));
    } while (std::next_permutation(sa.begin(), sa.end()));
    return best;
  }
};

}  // namespace

TEST(BuildGraph, Examples) {
  auto g = build_graph(JointNType({{0, 1}, {1, 0}}, 2));
  EXPECT_EQ(g.nx(), 2u);
  EXPECT_EQ(g.edges, 2u);
  EXPECT_DOUBLE_EQ(g.density(), 0.5);
  auto p = build_graph(JointNType({{1, 1}, {1, 1}}, 4));
  EXPECT_DOUBLE_EQ(p.density(), 24.0 / 36.0);
  auto d = build_graph(JointNType({{1, 0}, {0, 1}}, 2));
  EXPECT_EQ(d.n1, 1u);
  EXPECT_EQ(d.n2, 1u);
}

TEST(BuildGraph, MatchesOracleAndRegularDegrees) {
  for (long long n = 1; n <= 5; ++n)
    for (const auto& t : enumerate_ntypes(2, 2, n)) {
      auto g = build_graph(t);
      Oracle o(t);
      ASSERT_EQ(g.nx(), o.xs.size());
      std::size_t e = 0;
      for (std::size_t i = 0; i < g.nx(); ++i) {
        EXPECT_EQ(g.adj[i].count(), g.n1);
        for (std::size_t j = 0; j < g.ny(); ++j) e += o.adj[i][j];
      }
      for (std::size_t j = 0; j < g.ny(); ++j) EXPECT_EQ(g.radj[j].count(), g.n2);
      EXPECT_EQ(g.edges, e);
      EXPECT_EQ(BigInt(g.edges), type_class_count(t));
    }
}

TEST(BuildGraph, RefusesOversizedClasses) {
  EXPECT_THROW(build_graph(JointNType({{8, 8}, {8, 8}}, 32)), BudgetError);
}

TEST(GammaN, Examples) {
  auto g = build_graph(JointNType({{0, 1}, {1, 0}}, 2));
  EXPECT_DOUBLE_EQ(gamma_n(g, 1, 1).density, 1.0);
  EXPECT_DOUBLE_EQ(gamma_n(g, 2, 2).density, 0.5);
  EXPECT_THROW(gamma_n(g, 3, 1), std::invalid_argument);
}

TEST(GammaN, ExactMatchesOracleAndGreedyIsBelow) {
  for (long long n = 2; n <= 4; ++n)
    for (const auto& t : enumerate_ntypes(2, 2, n)) {
      auto g = build_graph(t);
      Oracle o(t);
      for (std::size_t m1 = 1; m1 <= g.nx(); ++m1)
        for (std::size_t m2 = 1; m2 <= g.ny(); ++m2) {
          auto ex = gamma_n(g, m1, m2);
          EXPECT_EQ(ex.edges, o.max_edges(m1, m2));
          SearchBudget unpruned;
          unpruned.symmetry_pruning = false;
          EXPECT_EQ(gamma_n(g, m1, m2, SearchMode::exact, unpruned).edges, ex.edges);
          EXPECT_LE(gamma_n(g, m1, m2, SearchMode::greedy).density, ex.density + 1e-15);
          if (m1 > 1) EXPECT_GE(gamma_n(g, m1 - 1, m2).density, ex.density - 1e-15);
          if (m2 > 1) EXPECT_GE(gamma_n(g, m1, m2 - 1).density, ex.density - 1e-15);
        }
      EXPECT_DOUBLE_EQ(gamma_n(g, g.nx(), g.ny()).density, g.density());
    }
}

TEST(GammaN, BudgetExceeded) {
  auto g = build_graph(JointNType({{2, 2}, {2, 2}}, 8));
  SearchBudget b;
  b.max_subsets = 10;
  EXPECT_THROW(gamma_n(g, 10, 10, SearchMode::exact, b), BudgetError);
}

TEST(ExponentN, RatesAndFullSize) {
  auto t = JointNType({{2, 1}, {1, 2}}, 6);
  auto g = build_graph(t);
  EXPECT_THROW(exponent_n(g, 0.1, 0.1), RateError);
  EXPECT_NEAR(exponent_n(g, 0.0, 0.0), 0.0, 1e-15);
  double full = std::log(double(g.nx())) / 6.0;
  EXPECT_NEAR(exponent_n(g, full, full), -std::log(g.density()) / 6.0, 1e-12);
  // the full-size density equals |T_XY| / (|T_X||T_Y|) exactly
  double ratio = log_big(type_class_count(t)) - log_big(type_class_count(t.marginal_x())) -
                 log_big(type_class_count(t.marginal_y()));
  EXPECT_NEAR(std::log(g.density()), ratio, 1e-12);
}

TEST(GammaDirected, Sandwich) {
  for (const auto& t : enumerate_ntypes(2, 2, 4)) {
    if (t.marginal_x().counts != t.marginal_y().counts) continue;
    auto g = build_graph(t);
    for (std::size_t m = 2; m <= g.nx(); m += 2) {
      double d = gamma_directed(g, m).density;
      EXPECT_LE(d, gamma_n(g, m, m).density + 1e-15);
      EXPECT_GE(d, 0.25 * gamma_n(g, m / 2, m / 2).density - 1e-15);
    }
  }
}

TEST(Bicliques, Examples) {
  auto g = build_graph(JointNType({{0, 1}, {1, 0}}, 2));
  auto f = biclique_points_n(g);
  EXPECT_TRUE(f.contains(1, 1));
  EXPECT_FALSE(f.contains(2, 2));
  auto m = build_graph(JointNType({{2, 0}, {0, 2}}, 4));
  auto fm = biclique_points_n(m);
  EXPECT_TRUE(fm.contains(1, 1));
  EXPECT_FALSE(fm.contains(1, 2));
  EXPECT_FALSE(fm.contains(2, 1));
}

TEST(Bicliques, MatchOracle) {
  for (const auto& t : enumerate_ntypes(2, 2, 4)) {
    auto g = build_graph(t);
    Oracle o(t);
    auto f = biclique_points_n(g);
    auto fi = independent_set_points_n(g);
    for (std::size_t m1 = 1; m1 <= g.nx(); ++m1)
      for (std::size_t m2 = 1; m2 <= g.ny(); ++m2) {
        bool full = o.max_edges(m1, m2) == m1 * m2;
        EXPECT_EQ(f.contains(m1, m2), full);
        // min edges = 0 iff an m1 x m2 empty rectangle exists; oracle via complement graph
        Oracle oc = o;
        for (auto& r : oc.adj)
          for (auto& v : r) v = !v;
        EXPECT_EQ(fi.contains(m1, m2), oc.max_edges(m1, m2) == m1 * m2);
      }
  }
}

TEST(IndependentSets, Trivial) {
  auto m = build_graph(JointNType({{1, 0}, {0, 1}}, 2));
  EXPECT_TRUE(independent_set_points_n(m).contains(1, 1));
  auto full = build_graph(JointNType({{1, 0}, {0, 0}}, 1));
  EXPECT_TRUE(independent_set_points_n(full).empty());
}

TEST(UpsilonN, Examples) {
  auto t = JointNType({{1, 1}, {1, 1}}, 4);
  auto g = build_graph(t);
  EXPECT_NEAR(upsilon_n(g, 0.0, 0.0), 0.0, 1e-15);
  auto m = build_graph(JointNType({{1, 0}, {0, 1}}, 2));
  EXPECT_NEAR(upsilon_n_sizes(m, 1, 1), std::log(2.0) / 2.0, 1e-15);
  // consistency with the density exponent at the matching rates
  for (std::size_t m1 = 1; m1 <= g.nx(); ++m1)
    for (std::size_t m2 = 1; m2 <= g.ny(); ++m2) {
      double r1 = std::log(double(m1)) / 4.0, r2 = std::log(double(m2)) / 4.0;
      double e = exponent_n(g, r1, r2);
      double lhs = upsilon_n_sizes(g, m1, m2);
      double rhs = e + log_big(type_class_count(t)) / 4.0 - r1 - r2;
      EXPECT_NEAR(lhs, rhs, 1e-12);
    }
}

TEST(Achievability, ConstantAndSplit) {
  auto t = JointNType({{1, 1}, {1, 1}}, 4);
  auto g = build_graph(t);
  TripleNType c{{{{1}, {1}}, {{1}, {1}}}, 4};
  auto code = achievability_code(g, c, {0, 0, 0, 0});
  EXPECT_EQ(code.a.size(), g.nx());
  EXPECT_EQ(code.b.size(), g.ny());
  EXPECT_DOUBLE_EQ(code.density, g.density());
  auto d = build_graph(JointNType({{1, 0}, {0, 1}}, 2));
  TripleNType s{{{{1, 0}, {0, 0}}, {{0, 0}, {0, 1}}}, 2};
  auto cs = achievability_code(d, s, {0, 1});
  EXPECT_EQ(cs.a.size(), 1u);
  EXPECT_DOUBLE_EQ(cs.density, 1.0);
}

TEST(Achievability, BelowExhaustive) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 30; ++trial) {
    // random split of a random 2x2 n=4 type over |W| = 2
    auto types = enumerate_ntypes(2, 2, 4);
    const auto& t = types[rng() % types.size()];
    TripleNType p{{{{0, 0}, {0, 0}}, {{0, 0}, {0, 0}}}, 4};
    for (std::size_t x = 0; x < 2; ++x)
      for (std::size_t y = 0; y < 2; ++y) {
        long long c = t.count(x, y), a = c == 0 ? 0 : (long long)(rng() % std::uint64_t(c + 1));
        p.counts[x][y] = {a, c - a};
      }
    std::vector<long long> pw(2, 0);
    for (auto& r : p.counts)
      for (auto& v : r) pw[0] += v[0], pw[1] += v[1];
    auto g = build_graph(t);
    auto code = achievability_code(g, p, canonical_sequence(pw));
    if (code.a.empty() || code.b.empty()) continue;
    EXPECT_LE(code.density, gamma_n(g, code.a.size(), code.b.size()).density + 1e-15);
  }
}
