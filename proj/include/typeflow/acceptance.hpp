#pragma once

#include <algorithm>
#include <chrono>
#include <cstdarg>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "typeflow/coupling.hpp"
#include "typeflow/dsbs.hpp"
#include "typeflow/exchange.hpp"
#include "typeflow/hyper.hpp"
#include "typeflow/singleletter.hpp"
#include "typeflow/typegraph.hpp"

namespace typeflow::acceptance {

struct Outcome {
  int id = 0;
  std::string title;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

namespace detail {

inline std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
inline std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

inline JointDist random_type(std::mt19937_64& rng, std::size_t rows, std::size_t cols, int lo = 1, int hi = 12) {
  std::uniform_int_distribution<int> d(lo, hi);
  std::vector<std::vector<long long>> c(rows, std::vector<long long>(cols));
  long long n = 0;
  for (auto& r : c)
    for (auto& v : r) n += (v = d(rng));
  return JointNType(c, n).to_joint_dist();
}

inline JointDist dsbs_nats(double rho) {
  dsbs::Params P(rho);
  return JointDist(std::vector<std::vector<double>>{{P.same(), P.diff()}, {P.diff(), P.same()}});
}

}  // namespace detail

using detail::fmt;

// 1: binary adder channel bound at eps = 0
inline Outcome bac_bound() {
  Outcome o{1, "BAC zero-error bound", false, {}, 0.0};
  auto t0 = std::chrono::steady_clock::now();
  auto r = dsbs::bac_r2_max();
  double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  o.pass = std::abs(r.rho_best - 0.6933) <= 0.003 && std::abs(r.r2_bound - 0.4177) <= 0.0005 && r.r2_bound < 0.4228 &&
           sec <= 300.0;
  o.detail = fmt("rho_best=%.5f r2_bound=%.6f (prior 0.4228) in %.1fs", r.rho_best, r.r2_bound, sec);
  return o;
}

// 2: closed-form p* against the general coupling solver
inline Outcome pstar_vs_solver() {
  Outcome o{2, "DSBS p* closed form vs coupling solver", false, {}, 0.0};
  auto t0 = std::chrono::steady_clock::now();
  double dv = 0.0, dp = 0.0;
  for (double rho : {0.3, 0.6, 0.9}) {
    dsbs::Params P(rho);
    auto J = detail::dsbs_nats(rho);
    for (int i = 1; i <= 20; ++i)
      for (int j = 1; j <= 20; ++j) {
        double a = i / 21.0, b = j / 21.0;
        auto r = min_kl_coupling({1.0 - a, a}, {1.0 - b, b}, J);
        dv = std::max(dv, std::abs(nats_to_bits(r.value) - dsbs::d_alpha_beta(P, a, b, dsbs::p_star(P, a, b))));
        dp = std::max(dp, std::abs(r.coupling[3] - dsbs::p_star(P, a, b)));
      }
  }
  double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  o.pass = dv <= 1e-6 && dp <= 1e-6 && sec <= 60.0;
  o.detail = fmt("max |value diff|=%.2e bits, max |argmin diff|=%.2e over 1200 points in %.2fs", dv, dp, sec);
  return o;
}

// 3: symmetry and ordering of the binary coupling divergence
inline Outcome divergence_ordering_grid() {
  Outcome o{3, "DSBS divergence symmetry/ordering on 50x50 grid", false, {}, 0.0};
  int bad = 0;
  double worst = 0.0;
  for (double rho : {0.3, 0.6, 0.9}) {
    dsbs::Params P(rho);
    for (int i = 1; i <= 50; ++i)
      for (int j = 1; j <= 50; ++j) {
        double a = i / 100.0, b = j / 100.0;
        double same = dsbs::dd(P, a, b), flip = dsbs::dd(P, 1 - a, 1 - b);
        double cross = dsbs::dd(P, a, 1 - b), cross2 = dsbs::dd(P, 1 - a, b);
        double e = std::max({std::abs(same - flip), std::abs(cross - cross2), same - cross});
        worst = std::max(worst, e);
        if (e > 1e-9) ++bad;
      }
  }
  o.pass = bad == 0;
  o.detail = fmt("%d violations of 7500 checks, worst %.2e", bad, worst);
  return o;
}

// 4: forward/reverse closed-form bounds sandwich the envelope exponents
inline Outcome correlation_sandwich() {
  Outcome o{4, "DSBS small-set bounds sandwich", false, {}, 0.0};
  int bad = 0;
  double wf = 0.0, wr = 0.0;
  for (double rho : {0.5, 0.9}) {
    dsbs::Params P(rho);
    auto sp = dsbs::surfaces(P);
    for (int i = 0; i < 30; ++i)
      for (int j = 0; j < 30; ++j) {
        double e1 = i / 29.0, e2 = j / 29.0;
        auto b = dsbs::correlation_bounds(P, e1, e2);
        double lo = theta_lower_star(sp.phi, e1, e2), up = theta_upper_star(sp.psi, e1, e2);
        wf = std::min(wf, lo - b.forward);
        wr = std::max(wr, up - b.reverse);
        if (lo < b.forward - 1e-6 || up > b.reverse + 1e-6) ++bad;
      }
  }
  o.pass = bad == 0;
  o.detail = fmt("%d violations on 2x900 points; min(lower-forward)=%.2e, max(upper-reverse)=%.2e bits", bad, wf, wr);
  return o;
}

struct ChainStats {
  int checks = 0, bad = 0;
  double worst = 0.0;
};

inline void chain_check(const SurfacePair& raw, double slack, ChainStats& st) {
  auto lo = with_envelope(raw.phi), hi = with_envelope(raw.psi);
  const std::size_t T = lo.t_grid.size();
  for (std::size_t k = 0; k < lo.values.size(); ++k) {
    double s = lo.s_grid[k / T], t = lo.t_grid[k % T];
    double chain[6] = {theta_lower_star(lo, s, t), lo.envelope[k], lo.values[k],
                       hi.values[k],               hi.envelope[k], theta_upper_star(hi, s, t)};
    for (int i = 0; i < 5; ++i) {
      double gap = chain[i] - chain[i + 1];
      ++st.checks;
      st.worst = std::max(st.worst, gap);
      if (gap > slack) ++st.bad;
    }
  }
}

// 5: Θ̲* <= lower envelope <= phi <= psi <= upper envelope <= Θ̄* on grids
inline Outcome ordering_chain() {
  Outcome o{5, "ordering chain of exponent surfaces", false, {}, 0.0};
  ChainStats bin, gen;
  for (double rho : {0.5, 0.9}) chain_check(dsbs::surfaces(dsbs::Params(rho)), 1e-6, bin);
  JointDist t3(std::vector<std::vector<double>>{{0.2, 0.1, 0.05}, {0.05, 0.1, 0.2}, {0.1, 0.1, 0.1}});
  SurfaceOptions so;
  so.grid = 10;
  chain_check(coupling_surfaces(t3, so), 1e-6 + 1e-3, gen);
  o.pass = bin.bad == 0 && gen.bad == 0;
  o.detail = fmt("binary: %d/%d violations (worst %.2e); 3x3: %d/%d (worst %.2e, slack 1e-3)", bin.bad, bin.checks,
                 bin.worst, gen.bad, gen.checks, gen.worst);
  return o;
}

// 6: exhaustive finite-n exponent against the single-letter exponent, and the achievability code
inline Outcome converse_desk_scale(double eps_opt = 1e-3) {
  Outcome o{6, "finite-n converse and achievability at n<=5", false, {}, 0.0};
  int types = 0, pairs = 0, bad = 0, code_checks = 0, code_bad = 0;
  double worst = kInf;
  for (long long n = 1; n <= 5; ++n)
    for (const auto& t : enumerate_ntypes(2, 2, n)) {
      ++types;
      auto g = build_graph(t);
      auto table = gamma_table(g);
      FStarSolver solver(t.to_joint_dist());
      for (std::size_t m1 = 1; m1 <= g.nx(); ++m1)
        for (std::size_t m2 = 1; m2 <= g.ny(); ++m2) {
          ++pairs;
          double r1 = std::log(double(m1)) / double(n), r2 = std::log(double(m2)) / double(n);
          std::size_t e = table[m1][m2];
          double en = e == 0 ? kInf : -std::log(double(e) / double(m1 * m2)) / double(n);
          double es = r1 + r2 - solver.f(r1, r2);
          worst = std::min(worst, en - es);
          if (en < es - eps_opt) ++bad;
        }
      // every split of the joint counts over a binary auxiliary symbol
      const auto& c = t.counts();
      std::vector<long long> cells{c[0][0], c[0][1], c[1][0], c[1][1]};
      std::vector<long long> k(4, 0);
      for (;;) {
        TripleNType p;
        p.n = n;
        p.counts.assign(2, std::vector<std::vector<long long>>(2, std::vector<long long>(2, 0)));
        std::vector<long long> pw(2, 0);
        for (int i = 0; i < 4; ++i) {
          p.counts[std::size_t(i / 2)][std::size_t(i % 2)][0] = k[std::size_t(i)];
          p.counts[std::size_t(i / 2)][std::size_t(i % 2)][1] = cells[std::size_t(i)] - k[std::size_t(i)];
          pw[0] += k[std::size_t(i)];
          pw[1] += cells[std::size_t(i)] - k[std::size_t(i)];
        }
        auto code = achievability_code(g, p, canonical_sequence(pw));
        if (!code.a.empty() && !code.b.empty()) {
          ++code_checks;
          double gam = double(table[code.a.size()][code.b.size()]) / double(code.a.size() * code.b.size());
          if (code.density > gam + 1e-12) ++code_bad;
        }
        int i = 0;
        while (i < 4 && k[std::size_t(i)] == cells[std::size_t(i)]) k[std::size_t(i++)] = 0;
        if (i == 4) break;
        ++k[std::size_t(i)];
      }
    }
  o.pass = bad == 0 && code_bad == 0;
  o.detail = fmt("%d types, %d rate pairs: %d below E*-%.0e (min margin %.2e); codes %d/%d above the exhaustive "
                 "density",
                 types, pairs, bad, eps_opt, worst, code_bad, code_checks);
  return o;
}

// 7: exponent at full rates equals mutual information
inline Outcome full_rate_identity() {
  Outcome o{7, "E*(H(X),H(Y)) = I(X;Y)", false, {}, 0.0};
  std::mt19937_64 rng(2024);
  double worst = 0.0;
  int count = 0;
  for (auto shape : {std::pair<std::size_t, std::size_t>{2, 2}, {2, 3}})
    for (int k = 0; k < 50; ++k) {
      auto t = detail::random_type(rng, shape.first, shape.second);
      auto im = info_measures(t);
      double e = e_star(t, {im.H_X, im.H_Y});
      worst = std::max(worst, std::abs(e - im.I_XY));
      ++count;
    }
  o.pass = worst <= 1e-3;
  o.detail = fmt("%d random types, max |E*-I| = %.2e nats", count, worst);
  return o;
}

// 8: structural properties of F*
inline Outcome exponent_properties() {
  Outcome o{8, "F* monotonicity/bounds/closed forms/concavity/Lipschitz", false, {}, 0.0};
  std::mt19937_64 rng(2024);
  int violations = 0, samples = 0;
  double worst_cf = 0.0;
  for (int k = 0; k < 100; ++k) {
    auto t = detail::random_type(rng, 2, k % 2 == 0 ? 2 : 3);
    auto rep = exponent_property_harness(t, 20, 2024u + unsigned(k));
    violations += rep.total_violations();
    samples += rep.samples;
    worst_cf = std::max(worst_cf, rep.worst_closed_form_error);
  }
  o.pass = violations == 0;
  o.detail = fmt("%d violations over %d samples (100 types), worst closed-form error %.2e", violations, samples,
                 worst_cf);
  return o;
}

inline double segment_distance(double px, double py, double ax, double ay, double bx, double by) {
  double dx = bx - ax, dy = by - ay, L = dx * dx + dy * dy;
  double u = L > 0.0 ? std::clamp(((px - ax) * dx + (py - ay) * dy) / L, 0.0, 1.0) : 0.0;
  return std::hypot(px - ax - u * dx, py - ay - u * dy);
}

// Hausdorff distance between a region frontier and the triangle hypotenuse
inline double triangle_hausdorff(const BicliqueRegion& reg, double hx, double hy) {
  double d = 0.0;
  for (const auto& v : reg.frontier) d = std::max(d, segment_distance(v.r1, v.r2, 0.0, hy, hx, 0.0));
  for (int i = 0; i <= 1000; ++i) {
    double u = i / 1000.0, px = u * hx, py = (1.0 - u) * hy, best = kInf;
    for (std::size_t k = 0; k + 1 < reg.frontier.size(); ++k) {
      const auto& a = reg.frontier[k];
      const auto& b = reg.frontier[k + 1];
      best = std::min(best, segment_distance(px, py, a.r1, a.r2, b.r1, b.r2));
    }
    if (reg.frontier.size() == 1) best = std::hypot(px - reg.frontier[0].r1, py - reg.frontier[0].r2);
    d = std::max(d, best);
  }
  return d;
}

// 9: triangle condition and the DSBS region shape
inline Outcome triangle_region() {
  Outcome o{9, "triangle region condition", false, {}, 0.0};
  std::vector<JointNType> yes{
      JointNType({{3, 1}, {1, 3}}, 8), JointNType({{2, 1}, {1, 2}}, 6), JointNType({{5, 2}, {2, 5}}, 14),
      JointNType({{2, 1, 0}, {0, 2, 1}, {1, 0, 2}}, 9),     // uniform marginals, equal alphabets
      JointNType({{1, 1, 1}, {1, 1, 1}}, 6),                // uniform and independent
      JointNType({{2, 2}, {2, 2}, {2, 2}}, 12)};
  int yes_ok = 0;
  for (const auto& t : yes) yes_ok += triangle_condition(t.to_joint_dist());
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> d(1, 12);
  int asym = 0, asym_false = 0;
  while (asym < 200) {
    long long a = d(rng), b = d(rng), c = d(rng), e = d(rng);
    if (a + b == c + e && a + c == b + e) continue;  // uniform marginals
    ++asym;
    asym_false += !triangle_condition(JointNType({{a, b}, {c, e}}, a + b + c + e).to_joint_dist());
  }
  double worst = 0.0;
  for (int k = 0; k < 3; ++k) {
    auto t = yes[std::size_t(k)].to_joint_dist();
    auto im = info_measures(t);
    worst = std::max(worst, triangle_hausdorff(biclique_region_star(t), im.H_X_given_Y, im.H_Y_given_X));
  }
  double frac = double(asym_false) / asym;
  o.pass = yes_ok == int(yes.size()) && frac >= 0.95 && worst <= 1e-3;
  o.detail = fmt("condition true on %d/%zu symmetric cases; false on %.1f%% of %d asymmetric types; DSBS frontier "
                 "Hausdorff %.2e nats",
                 yes_ok, yes.size(), 100.0 * frac, asym, worst);
  return o;
}

// 10: exchange partitions for random orthogonal splits
inline Outcome exchange_partitions() {
  Outcome o{10, "exchange partitions for random orthogonal matrices", false, {}, 0.0};
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> nd;
  int fails = 0, runs = 0;
  double worst = 0.0;
  for (int n = 4; n <= 10; ++n)
    for (int k = 0; k < 200; ++k) {
      exchange::Matrix g(n, n);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) g(i, j) = nd(rng);
      Eigen::HouseholderQR<exchange::Matrix> qr(g);
      exchange::Matrix q = qr.householderQ();
      exchange::SubspacePair sp(q);
      for (int n1 = 1; n1 < n; ++n1) {
        ++runs;
        try {
          auto p = exchange::exchange_partition(sp, n1);
          worst = std::max({worst, p.residual1, p.residual2});
          if (std::max(p.residual1, p.residual2) > 1e-8) ++fails;
        } catch (const std::exception&) {
          ++fails;
        }
      }
    }
  o.pass = fails == 0;
  o.detail = fmt("%d failures over %d splits, worst reconstruction residual %.2e", fails, runs, worst);
  return o;
}

// 11: region membership against the ribbon law, and nonnegative Λ factors inside the regions
inline Outcome hyper_regions() {
  Outcome o{11, "hypercontractivity regions vs ribbon law", false, {}, 0.0};
  int pairs = 0, mis = 0, lam_checks = 0, lam_bad = 0;
  double worst_lam = 0.0;
  for (double rho : {0.5, 0.9}) {
    dsbs::Params P(rho);
    auto sp = dsbs::surfaces(P);
    for (auto which : {dsbs::Direction::forward, dsbs::Direction::reverse}) {
      double umax = which == dsbs::Direction::forward ? 1.5 : 0.9 * -std::log(rho);
      for (int i = 0; i < 25; ++i) {
        double u = -umax + 2.0 * umax * i / 24.0;
        for (double c : {1.01, 0.99}) {
          auto base = dsbs::ribbon_pair(P, u, which);
          double sc = std::sqrt(c);
          double p = which == dsbs::Direction::forward ? 1.0 + (base.first - 1.0) * sc : 1.0 - (1.0 - base.first) * sc;
          double q =
              which == dsbs::Direction::forward ? 1.0 + (base.second - 1.0) * sc : 1.0 - (1.0 - base.second) * sc;
          ++pairs;
          bool law = dsbs::ribbon_member(P, p, q, which);
          bool got = hyper::region_member({p, q}, which, sp).member;
          if (law != got) ++mis;
          if (law && i % 4 == 0)
            for (double a : {0.0, 0.1, 0.3, 0.6})
              for (double b : {0.0, 0.2, 0.5}) {
                double lam = which == dsbs::Direction::forward ? hyper::lambda_lower(sp.phi, {p, q}, a, b)
                                                               : hyper::lambda_upper(sp.psi, {p, q}, a, b);
                ++lam_checks;
                worst_lam = std::min(worst_lam, lam);
                if (lam < -1e-9) ++lam_bad;
              }
        }
      }
    }
  }
  o.pass = mis == 0 && lam_bad == 0;
  o.detail = fmt("%d misclassified of %d straddling pairs; %d/%d negative Lambda values (min %.2e)", mis, pairs,
                 lam_bad, lam_checks, worst_lam);
  return o;
}

// 12: the reverse exponent jumps above E1 off the axis
inline Outcome discontinuity() {
  Outcome o{12, "reverse exponent discontinuity on the axis", false, {}, 0.0};
  dsbs::Params P(0.9);
  auto sp = dsbs::surfaces(P);
  bool ok = true;
  std::string d;
  for (double e1 : {0.25, 0.5, 1.0}) {
    double env = theta_upper_star(sp.psi, e1, 0.0) - e1;
    double two = dsbs::axis_two_atom(P, e1) - e1;
    ok = ok && env > 0.05 && std::abs(env - two) <= 1e-4;
    d += fmt("E1=%.2f gap %.5f (two-atom %.5f) ", e1, env, two);
  }
  o.pass = ok;
  o.detail = d + "bits";
  return o;
}

// 13: convexity/concavity premises
inline Outcome convexity_premises() {
  Outcome o{13, "convexity/concavity premises on 40x40 grids", false, {}, 0.0};
  std::size_t bad = 0, checks = 0;
  double worst = 0.0;
  for (double rho : {0.3, 0.6, 0.9}) {
    auto r = dsbs::convexity_premise_check(dsbs::Params(rho), 40);
    bad += r.convexity_violations + r.concavity_violations;
    checks += r.convexity_checks + r.concavity_checks;
    worst = std::max({worst, r.worst_convexity, r.worst_concavity});
  }
  o.pass = bad == 0;
  o.detail = fmt("%zu violations over %zu midpoint checks, worst gap %.2e", bad, checks, worst);
  return o;
}

inline std::vector<std::function<Outcome()>> all() {
  return {bac_bound,          pstar_vs_solver,   divergence_ordering_grid,      correlation_sandwich, ordering_chain,
          [] { return converse_desk_scale(); }, full_rate_identity, exponent_properties, triangle_region,
          exchange_partitions,     hyper_regions,     discontinuity,    convexity_premises};
}

inline Outcome run(int id) {
  auto list = all();
  if (id < 1 || id > int(list.size())) throw std::invalid_argument("unknown criterion " + std::to_string(id));
  auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = list[std::size_t(id - 1)]();
  } catch (const std::exception& e) {
    o.id = id;
    o.title = "criterion " + std::to_string(id);
    o.pass = false;
    o.detail = std::string("exception: ") + e.what();
  }
  o.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return o;
}

// wall time is left out when the line goes into a reproducible output file
inline std::string format_line(const Outcome& o, bool with_time = true) {
  return fmt("[%s] %2d %s: ", o.pass ? "PASS" : "FAIL", o.id, o.title.c_str()) + o.detail +
         (with_time ? fmt(" (%.1fs)", o.seconds) : std::string());
}

}  // namespace typeflow::acceptance
