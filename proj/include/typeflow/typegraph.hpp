#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "typeflow/errors.hpp"
#include "typeflow/probcore.hpp"

namespace typeflow {

using Sequence = std::vector<std::uint8_t>;

// all sequences with the given symbol counts, in lexicographic order
inline std::vector<Sequence> sequences_of_type(const std::vector<long long>& counts) {
  std::vector<Sequence> out;
  long long n = 0;
  for (long long c : counts) n += c;
  Sequence cur(static_cast<std::size_t>(n));
  std::vector<long long> left = counts;
  auto rec = [&](auto&& self, std::size_t pos) -> void {
    if (pos == cur.size()) {
      out.push_back(cur);
      return;
    }
    for (std::size_t s = 0; s < left.size(); ++s) {
      if (left[s] == 0) continue;
      --left[s];
      cur[pos] = std::uint8_t(s);
      self(self, pos + 1);
      ++left[s];
    }
  };
  rec(rec, 0);
  return out;
}

class Bits {
 public:
  Bits() = default;
  explicit Bits(std::size_t n) : n_(n), w_((n + 63) / 64, 0) {}
  void set(std::size_t i) { w_[i >> 6] |= std::uint64_t(1) << (i & 63); }
  bool test(std::size_t i) const { return (w_[i >> 6] >> (i & 63)) & 1u; }
  std::size_t count() const {
    std::size_t c = 0;
    for (auto v : w_) c += std::size_t(std::popcount(v));
    return c;
  }
  std::size_t size() const { return n_; }
  Bits& operator&=(const Bits& o) {
    for (std::size_t i = 0; i < w_.size(); ++i) w_[i] &= o.w_[i];
    return *this;
  }
  Bits& operator|=(const Bits& o) {
    for (std::size_t i = 0; i < w_.size(); ++i) w_[i] |= o.w_[i];
    return *this;
  }
  static Bits all(std::size_t n) {
    Bits b(n);
    for (std::size_t i = 0; i < n; ++i) b.set(i);
    return b;
  }
  std::size_t and_count(const Bits& o) const {
    std::size_t c = 0;
    for (std::size_t i = 0; i < w_.size(); ++i) c += std::size_t(std::popcount(w_[i] & o.w_[i]));
    return c;
  }

 private:
  std::size_t n_ = 0;
  std::vector<std::uint64_t> w_;
};

struct TypeGraph {
  std::vector<Sequence> x_vertices, y_vertices;
  std::vector<Bits> adj;   // per x-vertex, over y-vertices
  std::vector<Bits> radj;  // per y-vertex, over x-vertices
  JointNType joint_type;
  std::size_t n1 = 0, n2 = 0;  // left and right degrees
  std::size_t edges = 0;

  std::size_t nx() const { return x_vertices.size(); }
  std::size_t ny() const { return y_vertices.size(); }
  double density() const { return double(edges) / (double(nx()) * double(ny())); }
  long long n() const { return joint_type.n(); }
};

struct GraphLimits {
  std::size_t max_side = 4096;
  double max_potential_edges = 1e6;
};

inline TypeGraph build_graph(const JointNType& t, const GraphLimits& lim = {}) {
  auto mx = t.marginal_x(), my = t.marginal_y();
  BigInt cx = type_class_count(mx), cy = type_class_count(my);
  if (cx > BigInt(lim.max_side) || cy > BigInt(lim.max_side) ||
      cx.convert_to<double>() * cy.convert_to<double>() > lim.max_potential_edges)
    throw BudgetError("build_graph: type classes have " + cx.str() + " x-sequences and " + cy.str() +
                      " y-sequences, over the enumeration cap");
  TypeGraph g;
  g.joint_type = t;
  g.x_vertices = sequences_of_type(mx.counts);
  g.y_vertices = sequences_of_type(my.counts);
  const std::size_t R = t.rows(), C = t.cols();
  g.adj.assign(g.nx(), Bits(g.ny()));
  g.radj.assign(g.ny(), Bits(g.nx()));
  std::vector<long long> cnt(R * C);
  for (std::size_t i = 0; i < g.nx(); ++i)
    for (std::size_t j = 0; j < g.ny(); ++j) {
      std::fill(cnt.begin(), cnt.end(), 0);
      const auto& xs = g.x_vertices[i];
      const auto& ys = g.y_vertices[j];
      for (std::size_t k = 0; k < xs.size(); ++k) ++cnt[xs[k] * C + ys[k]];
      bool ok = true;
      for (std::size_t a = 0; a < R && ok; ++a)
        for (std::size_t b = 0; b < C; ++b)
          if (cnt[a * C + b] != t.count(a, b)) {
            ok = false;
            break;
          }
      if (ok) {
        g.adj[i].set(j);
        g.radj[j].set(i);
        ++g.edges;
      }
    }
  g.n1 = g.adj[0].count();
  g.n2 = g.radj[0].count();
  return g;
}

enum class SearchMode { exact, greedy };

struct DensityReport {
  std::size_t a_size = 0, b_size = 0;
  std::size_t edges = 0;
  double density = 0.0;
  SearchMode method = SearchMode::exact;
  std::vector<std::size_t> a, b;  // a witness pair of vertex index sets
};

namespace detail {

inline double binom_count(std::size_t n, std::size_t k) {
  if (k > n) return 0.0;
  double r = 1.0;
  for (std::size_t i = 1; i <= k; ++i) r = r * double(n - k + i) / double(i);
  return r;
}

// top-m entries of a count vector (values in [0, cap]); returns their sum and, optionally, the indices
inline std::size_t top_sum(const std::vector<std::size_t>& c, std::size_t m, std::size_t cap,
                           std::vector<std::size_t>* pick = nullptr) {
  std::vector<std::size_t> hist(cap + 1, 0);
  for (auto v : c) ++hist[v];
  std::size_t sum = 0, left = m;
  std::size_t threshold = 0, take_at_threshold = 0;
  for (std::size_t v = cap + 1; v-- > 0 && left > 0;) {
    std::size_t k = std::min(left, hist[v]);
    sum += k * v;
    left -= k;
    threshold = v;
    take_at_threshold = k;
  }
  if (pick) {
    pick->clear();
    std::size_t at = 0;
    for (std::size_t j = 0; j < c.size(); ++j) {
      if (c[j] > threshold) pick->push_back(j);
      else if (c[j] == threshold && at < take_at_threshold) {
        pick->push_back(j);
        ++at;
      }
    }
  }
  return sum;
}

// DFS over subsets of {0..N-1} of size k that contain vertex 0 (symmetry pruning) or all subsets
template <class Visit>
void for_each_subset(std::size_t N, std::size_t k, bool pin_first, Visit&& visit) {
  std::vector<std::size_t> cur;
  cur.reserve(k);
  auto rec = [&](auto&& self, std::size_t start) -> void {
    if (cur.size() == k) {
      visit(cur);
      return;
    }
    for (std::size_t v = start; v + (k - cur.size()) <= N; ++v) {
      cur.push_back(v);
      self(self, v + 1);
      cur.pop_back();
    }
  };
  if (k == 0) return;
  if (pin_first) {
    cur.push_back(0);
    rec(rec, 1);
  } else {
    rec(rec, 0);
  }
}

}  // namespace detail

struct SearchBudget {
  double max_subsets = 2e7;
  bool symmetry_pruning = true;
};

inline DensityReport gamma_n_greedy(const TypeGraph& g, std::size_t m1, std::size_t m2) {
  DensityReport best;
  best.method = SearchMode::greedy;
  best.a_size = m1;
  best.b_size = m2;
  const std::size_t seeds = std::min<std::size_t>(g.nx(), 8);
  std::vector<std::size_t> a, b, cy(g.ny()), cx(g.nx());
  for (std::size_t s = 0; s < seeds; ++s) {
    // seed: vertex s plus the vertices sharing the most neighbours with it
    for (std::size_t i = 0; i < g.nx(); ++i) cx[i] = i == s ? g.ny() + 1 : g.adj[i].and_count(g.adj[s]);
    detail::top_sum(cx, m1, g.ny() + 1, &a);
    std::size_t edges = 0;
    for (int it = 0; it < 100; ++it) {
      std::fill(cy.begin(), cy.end(), 0);
      for (auto i : a)
        for (std::size_t j = 0; j < g.ny(); ++j) cy[j] += g.adj[i].test(j);
      detail::top_sum(cy, m2, m1, &b);
      std::fill(cx.begin(), cx.end(), 0);
      for (auto j : b)
        for (std::size_t i = 0; i < g.nx(); ++i) cx[i] += g.radj[j].test(i);
      std::vector<std::size_t> a2;
      std::size_t e = detail::top_sum(cx, m1, m2, &a2);
      if (it > 0 && e <= edges) break;
      edges = e;
      a = a2;
    }
    // final B for the current A
    std::fill(cy.begin(), cy.end(), 0);
    for (auto i : a)
      for (std::size_t j = 0; j < g.ny(); ++j) cy[j] += g.adj[i].test(j);
    edges = detail::top_sum(cy, m2, m1, &b);
    if (edges > best.edges || best.a.empty()) {
      best.edges = edges;
      best.a = a;
      best.b = b;
    }
  }
  best.density = double(best.edges) / (double(m1) * double(m2));
  return best;
}

inline DensityReport gamma_n(const TypeGraph& g, std::size_t m1, std::size_t m2,
                             SearchMode mode = SearchMode::exact, const SearchBudget& budget = {}) {
  if (m1 < 1 || m1 > g.nx() || m2 < 1 || m2 > g.ny())
    throw std::invalid_argument("gamma_n: sizes must satisfy 1 <= M1 <= |T_X| and 1 <= M2 <= |T_Y|");
  if (mode == SearchMode::greedy) return gamma_n_greedy(g, m1, m2);
  // enumerate the side with fewer candidate subsets; the other side is filled optimally
  bool pin = budget.symmetry_pruning;
  double ca = pin ? detail::binom_count(g.nx() - 1, m1 - 1) : detail::binom_count(g.nx(), m1);
  double cb = pin ? detail::binom_count(g.ny() - 1, m2 - 1) : detail::binom_count(g.ny(), m2);
  if (std::min(ca, cb) > budget.max_subsets)
    throw BudgetError("gamma_n: exact search needs " + std::to_string(std::min(ca, cb)) +
                      " subsets, over budget; use greedy mode");
  bool left = ca <= cb;
  const auto& rows = left ? g.adj : g.radj;
  std::size_t k = left ? m1 : m2, other = left ? m2 : m1;
  std::size_t N = left ? g.nx() : g.ny(), Nother = left ? g.ny() : g.nx();
  DensityReport best;
  best.method = SearchMode::exact;
  best.a_size = m1;
  best.b_size = m2;
  std::vector<std::size_t> counts(Nother);
  std::vector<std::size_t> best_set;
  std::size_t best_edges = 0;
  bool have = false;
  detail::for_each_subset(N, k, pin, [&](const std::vector<std::size_t>& s) {
    std::fill(counts.begin(), counts.end(), 0);
    for (auto i : s)
      for (std::size_t j = 0; j < Nother; ++j) counts[j] += rows[i].test(j);
    std::size_t e = detail::top_sum(counts, other, k);
    if (!have || e > best_edges) {
      have = true;
      best_edges = e;
      best_set = s;
    }
  });
  std::fill(counts.begin(), counts.end(), 0);
  for (auto i : best_set)
    for (std::size_t j = 0; j < Nother; ++j) counts[j] += rows[i].test(j);
  std::vector<std::size_t> pick;
  detail::top_sum(counts, other, k, &pick);
  best.edges = best_edges;
  best.density = double(best_edges) / (double(m1) * double(m2));
  if (left) {
    best.a = best_set;
    best.b = pick;
  } else {
    best.a = pick;
    best.b = best_set;
  }
  return best;
}

// max edges for every (M1, M2), indexed [M1][M2] with 1-based sizes
inline std::vector<std::vector<std::size_t>> gamma_table(const TypeGraph& g, const SearchBudget& budget = {}) {
  bool left = g.nx() <= g.ny();
  std::size_t N = left ? g.nx() : g.ny(), No = left ? g.ny() : g.nx();
  const auto& rows = left ? g.adj : g.radj;
  double total = std::ldexp(1.0, int(N) - (budget.symmetry_pruning ? 1 : 0));
  if (total > budget.max_subsets) throw BudgetError("gamma_table: 2^" + std::to_string(N) + " subsets over budget");
  std::vector<std::vector<std::size_t>> best(N + 1, std::vector<std::size_t>(No + 1, 0));
  std::vector<std::size_t> counts(No), sorted(No);
  for (std::size_t k = 1; k <= N; ++k) {
    detail::for_each_subset(N, k, budget.symmetry_pruning, [&](const std::vector<std::size_t>& s) {
      std::fill(counts.begin(), counts.end(), 0);
      for (auto i : s)
        for (std::size_t j = 0; j < No; ++j) counts[j] += rows[i].test(j);
      sorted = counts;
      std::sort(sorted.begin(), sorted.end(), std::greater<>());
      std::size_t acc = 0;
      for (std::size_t m = 1; m <= No; ++m) {
        acc += sorted[m - 1];
        best[k][m] = std::max(best[k][m], acc);
      }
    });
  }
  if (left) return best;
  std::vector<std::vector<std::size_t>> tr(g.nx() + 1, std::vector<std::size_t>(g.ny() + 1, 0));
  for (std::size_t a = 1; a <= g.nx(); ++a)
    for (std::size_t b = 1; b <= g.ny(); ++b) tr[a][b] = best[b][a];
  return tr;
}

// size e^{nR} as an integer, or a RateError naming the nearest admissible rates
inline std::size_t size_from_rate(double rate, long long n, std::size_t max_size, const char* which) {
  double m = std::exp(double(n) * rate);
  double r = std::round(m);
  if (!(rate >= 0.0) || std::abs(m - r) > 1e-9 * std::max(1.0, r) || r < 1.0 || r > double(max_size)) {
    double lo = std::clamp(std::floor(m), 1.0, double(max_size));
    double hi = std::clamp(std::ceil(m), 1.0, double(max_size));
    throw RateError(std::string(which) + " = " + std::to_string(rate) + " is not representable at n = " +
                    std::to_string(n) + "; nearest admissible rates are " + std::to_string(std::log(lo) / double(n)) +
                    " and " + std::to_string(std::log(hi) / double(n)));
  }
  return std::size_t(r);
}

inline double exponent_from_report(const DensityReport& d, long long n) { return -std::log(d.density) / double(n); }

inline double exponent_n(const TypeGraph& g, double r1, double r2, SearchMode mode = SearchMode::exact,
                         const SearchBudget& budget = {}) {
  std::size_t m1 = size_from_rate(r1, g.n(), g.nx(), "R1");
  std::size_t m2 = size_from_rate(r2, g.n(), g.ny(), "R2");
  return exponent_from_report(gamma_n(g, m1, m2, mode, budget), g.n());
}

inline DensityReport gamma_directed(const TypeGraph& g, std::size_t m, const SearchBudget& budget = {}) {
  if (g.joint_type.rows() != g.joint_type.cols() ||
      g.joint_type.marginal_x().counts != g.joint_type.marginal_y().counts)
    throw std::invalid_argument("gamma_directed: needs a common alphabet and equal marginal types");
  if (m < 1 || m > g.nx()) throw std::invalid_argument("gamma_directed: size out of range");
  double c = budget.symmetry_pruning ? detail::binom_count(g.nx() - 1, m - 1) : detail::binom_count(g.nx(), m);
  if (c > budget.max_subsets) throw BudgetError("gamma_directed: exact search over budget");
  DensityReport best;
  best.a_size = best.b_size = m;
  bool have = false;
  detail::for_each_subset(g.nx(), m, budget.symmetry_pruning, [&](const std::vector<std::size_t>& s) {
    std::size_t e = 0;
    for (auto i : s)
      for (auto j : s) e += g.adj[i].test(j);
    if (!have || e > best.edges) {
      have = true;
      best.edges = e;
      best.a = best.b = s;
    }
  });
  best.density = double(best.edges) / (double(m) * double(m));
  return best;
}

// Downward-closed size sets, stored by their frontier max_m2[M1] (0 = no point for this M1, -1 = unknown).
struct SizeFrontier {
  std::vector<long long> max_m2;  // index 0 unused
  bool partial = false;
  bool contains(std::size_t m1, std::size_t m2) const {
    if (m1 == 0 || m1 >= max_m2.size() || m2 == 0) return false;
    return max_m2[m1] >= 0 && (long long)m2 <= max_m2[m1];
  }
  std::vector<std::pair<std::size_t, std::size_t>> points() const {
    std::vector<std::pair<std::size_t, std::size_t>> p;
    for (std::size_t a = 1; a < max_m2.size(); ++a)
      for (long long b = 1; b <= max_m2[a]; ++b) p.emplace_back(a, std::size_t(b));
    return p;
  }
  bool empty() const {
    for (std::size_t a = 1; a < max_m2.size(); ++a)
      if (max_m2[a] > 0) return false;
    return true;
  }
};

namespace detail {
template <bool Union>
SizeFrontier neighbourhood_frontier(const TypeGraph& g, const SearchBudget& budget) {
  SizeFrontier f;
  f.max_m2.assign(g.nx() + 1, -1);
  double spent = 0.0;
  for (std::size_t k = 1; k <= g.nx(); ++k) {
    double c = budget.symmetry_pruning ? binom_count(g.nx() - 1, k - 1) : binom_count(g.nx(), k);
    if (spent + c > budget.max_subsets) {
      f.partial = true;
      break;
    }
    spent += c;
    long long best = Union ? 0 : -1;
    bool first = true;
    for_each_subset(g.nx(), k, budget.symmetry_pruning, [&](const std::vector<std::size_t>& s) {
      Bits acc = g.adj[s[0]];
      for (std::size_t i = 1; i < s.size(); ++i) {
        if constexpr (Union) acc |= g.adj[s[i]];
        else acc &= g.adj[s[i]];
      }
      long long v = Union ? (long long)(g.ny() - acc.count()) : (long long)acc.count();
      if (first || v > best) best = v;
      first = false;
    });
    f.max_m2[k] = best;
  }
  return f;
}
}  // namespace detail

inline SizeFrontier biclique_points_n(const TypeGraph& g, const SearchBudget& budget = {}) {
  return detail::neighbourhood_frontier<false>(g, budget);
}

inline SizeFrontier independent_set_points_n(const TypeGraph& g, const SearchBudget& budget = {}) {
  return detail::neighbourhood_frontier<true>(g, budget);
}

inline double upsilon_n_sizes(const TypeGraph& g, std::size_t m1, std::size_t m2, SearchMode mode = SearchMode::exact,
                              const SearchBudget& budget = {}) {
  auto d = gamma_n(g, m1, m2, mode, budget);
  double prob = double(d.edges) / double(g.edges);  // P(A x B) under the uniform law on the joint class
  return -std::log(prob) / double(g.n());
}

inline double upsilon_n(const TypeGraph& g, double e1, double e2, SearchMode mode = SearchMode::exact,
                        const SearchBudget& budget = {}) {
  auto sz = [&](double e, std::size_t total, const char* which) {
    double m = double(total) * std::exp(-double(g.n()) * e);
    double r = std::round(m);
    if (!(e >= 0.0) || std::abs(m - r) > 1e-9 * std::max(1.0, r) || r < 1.0)
      throw RateError(std::string(which) + " = " + std::to_string(e) + " does not give an integer set size");
    return std::size_t(r);
  };
  return upsilon_n_sizes(g, sz(e1, g.nx(), "E1"), sz(e2, g.ny(), "E2"), mode, budget);
}

// joint n-type on X x Y x W
struct TripleNType {
  std::vector<std::vector<std::vector<long long>>> counts;  // [x][y][w]
  long long n = 0;
  std::size_t nx() const { return counts.size(); }
  std::size_t ny() const { return counts[0].size(); }
  std::size_t nw() const { return counts[0][0].size(); }
};

struct AchievabilityCode {
  std::vector<std::size_t> a, b;
  std::size_t edges = 0;
  double density = 0.0;
};

inline AchievabilityCode achievability_code(const TypeGraph& g, const TripleNType& p, const std::vector<int>& w_seq) {
  const auto& t = g.joint_type;
  if (p.n != t.n() || p.nx() != t.rows() || p.ny() != t.cols())
    throw std::invalid_argument("achievability_code: triple type does not match the graph");
  std::vector<long long> pw(p.nw(), 0);
  std::vector<std::vector<long long>> pxw(p.nx(), std::vector<long long>(p.nw(), 0)),
      pyw(p.ny(), std::vector<long long>(p.nw(), 0));
  for (std::size_t x = 0; x < p.nx(); ++x)
    for (std::size_t y = 0; y < p.ny(); ++y) {
      long long s = 0;
      for (std::size_t w = 0; w < p.nw(); ++w) {
        long long c = p.counts[x][y][w];
        s += c;
        pw[w] += c;
        pxw[x][w] += c;
        pyw[y][w] += c;
      }
      if (s != t.count(x, y)) throw std::invalid_argument("achievability_code: XY-marginal differs from the graph type");
    }
  if ((long long)w_seq.size() != p.n) throw std::invalid_argument("achievability_code: w sequence has wrong length");
  std::vector<long long> seen(p.nw(), 0);
  for (int w : w_seq) {
    if (w < 0 || std::size_t(w) >= p.nw()) throw std::invalid_argument("achievability_code: w symbol out of range");
    ++seen[std::size_t(w)];
  }
  if (seen != pw) throw std::invalid_argument("achievability_code: w sequence type differs from P_W");
  auto matches = [&](const Sequence& s, const std::vector<std::vector<long long>>& want) {
    std::vector<std::vector<long long>> c(want.size(), std::vector<long long>(p.nw(), 0));
    for (std::size_t k = 0; k < s.size(); ++k) ++c[s[k]][std::size_t(w_seq[k])];
    return c == want;
  };
  AchievabilityCode code;
  for (std::size_t i = 0; i < g.nx(); ++i)
    if (matches(g.x_vertices[i], pxw)) code.a.push_back(i);
  for (std::size_t j = 0; j < g.ny(); ++j)
    if (matches(g.y_vertices[j], pyw)) code.b.push_back(j);
  for (auto i : code.a)
    for (auto j : code.b) code.edges += g.adj[i].test(j);
  code.density = double(code.edges) / (double(code.a.size()) * double(code.b.size()));
  return code;
}

// a w-sequence of the given type: symbols in increasing order
inline std::vector<int> canonical_sequence(const std::vector<long long>& counts) {
  std::vector<int> s;
  for (std::size_t w = 0; w < counts.size(); ++w)
    for (long long k = 0; k < counts[w]; ++k) s.push_back(int(w));
  return s;
}

}  // namespace typeflow
