// typeflow command-line front end
#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "typeflow/acceptance.hpp"
#include "typeflow/typeflow.hpp"

#ifndef TYPEFLOW_GIT_DESCRIBE
#define TYPEFLOW_GIT_DESCRIBE "unknown"
#endif

namespace {

using namespace typeflow;
using io::json;
using io::num;

constexpr int kExitOk = 0, kExitFailed = 1, kExitInvalid = 2, kExitBudget = 3;

// non-finite values become strings so the JSON stays standard
json jnum(double v) {
  if (std::isfinite(v)) return v + 0.0;
  return num(v);
}

json jvec(const std::vector<double>& v) {
  json a = json::array();
  for (double x : v) a.push_back(jnum(x));
  return a;
}

json jmatrix(const std::vector<double>& flat, std::size_t rows, std::size_t cols) {
  json m = json::array();
  for (std::size_t r = 0; r < rows; ++r)
    m.push_back(jvec(std::vector<double>(flat.begin() + long(r * cols), flat.begin() + long((r + 1) * cols))));
  return m;
}

struct Common {
  std::string out;
  bool dry_run = false;
  unsigned long seed = 2024;
  int threads = 0;
};

// every option of the subcommand except output plumbing, in declaration order
// numbers and booleans keep their type; everything else stays text
json typed(const std::string& s) {
  json v = json::parse(s, nullptr, false);
  if (!v.is_discarded() && (v.is_number() || v.is_boolean())) return v;
  return s;
}

json config_of(const CLI::App* sub) {
  json c = json::object();
  c["command"] = sub->get_name();
  for (const CLI::Option* o : sub->get_options()) {
    std::string name = o->get_single_name();
    if (name == "help" || name == "out" || name == "threads" || name == "dry-run") continue;
    if (o->count() > 0) {
      auto r = o->results();
      if (r.size() == 1) {
        c[name] = typed(r[0]);
      } else {
        json a = json::array();
        for (const auto& x : r) a.push_back(typed(x));
        c[name] = a;
      }
    } else if (!o->get_default_str().empty()) {
      c[name] = typed(o->get_default_str());
    }
  }
  return c;
}

void emit(const Common& cm, const std::string& text) {
  if (cm.out.empty()) {
    std::cout << text;
    std::cout.flush();
  } else {
    io::write_atomic(cm.out, text);
  }
}

void emit_json(const Common& cm, const CLI::App* sub, json result) {
  json doc = {{"git_describe", TYPEFLOW_GIT_DESCRIBE}, {"config", config_of(sub)}};
  doc.update(result);
  emit(cm, doc.dump(2) + "\n");
}

std::string csv_preamble(const CLI::App* sub, LogBase unit) {
  std::string s = "# typeflow " + std::string(TYPEFLOW_GIT_DESCRIBE) + "\n";
  s += "# config: " + config_of(sub).dump() + "\n";
  s += "# units: " + std::string(base_name(unit)) + "\n";
  return s;
}

bool dry_run_done(const Common& cm, const CLI::App* sub) {
  if (!cm.dry_run) return false;
  json doc = {{"dry_run", true}, {"valid", true}, {"git_describe", TYPEFLOW_GIT_DESCRIBE}, {"config", config_of(sub)}};
  std::cout << doc.dump(2) << "\n";
  return true;
}

double convert(double v, LogBase from, LogBase to) {
  if (from == to) return v;
  return to == LogBase::bits ? nats_to_bits(v) : bits_to_nats(v);
}

dsbs::Direction parse_direction(const std::string& s) {
  if (s == "forward") return dsbs::Direction::forward;
  if (s == "reverse") return dsbs::Direction::reverse;
  throw std::invalid_argument("direction must be forward or reverse");
}

double parse_exponent_value(const std::string& s) {
  if (s == "inf" || s == "infinity") return std::numeric_limits<double>::infinity();
  std::size_t used = 0;
  double v = std::stod(s, &used);
  if (used != s.size()) throw std::invalid_argument("bad number \"" + s + "\"");
  return v;
}

// "a,b;c,d" -> rows of counts
std::vector<std::vector<long long>> parse_counts(const std::string& s) {
  std::vector<std::vector<long long>> rows;
  std::stringstream rs(s);
  std::string row;
  while (std::getline(rs, row, ';')) {
    std::vector<long long> r;
    std::stringstream cs(row);
    std::string cell;
    while (std::getline(cs, cell, ',')) {
      std::size_t used = 0;
      long long v = std::stoll(cell, &used);
      if (used != cell.size()) throw std::invalid_argument("bad count \"" + cell + "\"");
      r.push_back(v);
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

// ---------- exponent ----------

struct ExponentArgs {
  std::string joint;
  double r1 = 0.0, r2 = 0.0;
  std::string base = "nats";
};

void run_exponent(const Common& cm, const CLI::App* sub, const ExponentArgs& a) {
  JointDist t = io::any_joint_from_json(io::read_json(a.joint));
  LogBase b = io::parse_base(a.base);
  double r1 = convert(a.r1, b, LogBase::nats), r2 = convert(a.r2, b, LogBase::nats);
  if (!(r1 >= 0.0 && r2 >= 0.0)) throw std::invalid_argument("rates must be nonnegative");
  if (dry_run_done(cm, sub)) return;
  auto res = f_star_solve(t, {r1, r2});
  double hxy = entropy(t.flat());
  double e = r1 + r2 - res.value, g = std::max(0.0, hxy - res.value);
  json atoms = json::array();
  for (const auto& at : res.atoms) atoms.push_back(jmatrix(at, t.rows(), t.cols()));
  json kernel = json::array();
  auto witness = res.witness(t);
  for (const auto& row : witness.q_w_given_xy.rows()) kernel.push_back(jvec(row.probs()));
  emit_json(cm, sub,
            {{"units", a.base},
             {"e_star", jnum(convert(e, LogBase::nats, b))},
             {"f_star", jnum(convert(res.value, LogBase::nats, b))},
             {"g_star", jnum(convert(g, LogBase::nats, b))},
             {"h_xy", jnum(convert(hxy, LogBase::nats, b))},
             {"witness", {{"q_w", jvec(res.weights)}, {"p_xy_given_w", atoms}, {"p_w_given_xy", kernel}}},
             {"pricing_gap", jnum(res.last_pricing_gap)},
             {"rounds", res.rounds}});
}

// ---------- region ----------

struct RegionArgs {
  std::string kind = "biclique", joint;
  int resolution = 101;
  double tol = 1e-6;
};

void run_region(const Common& cm, const CLI::App* sub, const RegionArgs& a) {
  JointDist t = io::any_joint_from_json(io::read_json(a.joint));
  if (a.kind != "biclique" && a.kind != "hk") throw std::invalid_argument("--kind must be biclique or hk");
  if (a.resolution < 2) throw std::invalid_argument("--resolution must be >= 2");
  if (!(a.tol > 0.0)) throw std::invalid_argument("--tol must be positive");
  if (dry_run_done(cm, sub)) return;
  std::string s = csv_preamble(sub, LogBase::nats) + "r1,r2\n";
  if (a.kind == "biclique") {
    for (const auto& v : biclique_region_star(t, a.resolution).frontier) s += num(v.r1) + "," + num(v.r2) + "\n";
  } else {
    // largest r2 with E* <= tol above each r1 in [0, H(X|Y)]
    auto im = info_measures(t);
    std::vector<double> r2(std::size_t(a.resolution));
    parallel_for(r2.size(), [&](std::size_t i) {
      FStarSolver solver(t);
      double r1 = im.H_X_given_Y * double(i) / double(a.resolution - 1);
      auto inside = [&](double y) { return r1 + y - solver.f(r1, y) <= a.tol; };
      double lo = 0.0, hi = im.H_Y;
      if (inside(hi)) lo = hi;
      else
        for (int k = 0; k < 40; ++k) {
          double mid = 0.5 * (lo + hi);
          (inside(mid) ? lo : hi) = mid;
        }
      r2[i] = lo;
    });
    for (std::size_t i = 0; i < r2.size(); ++i)
      s += num(im.H_X_given_Y * double(i) / double(a.resolution - 1)) + "," + num(r2[i]) + "\n";
  }
  emit(cm, s);
}

// ---------- coupling ----------

struct CouplingArgs {
  std::string p, qx, qy;
  double tol = 1e-11;
  int max_iter = 100000;
};

void run_coupling(const Common& cm, const CLI::App* sub, const CouplingArgs& a) {
  JointDist p = io::any_joint_from_json(io::read_json(a.p));
  Dist qx = io::dist_from_json(io::read_json(a.qx)), qy = io::dist_from_json(io::read_json(a.qy));
  if (!(a.tol > 0.0) || a.max_iter < 1) throw std::invalid_argument("--tol and --max-iter must be positive");
  CouplingProblem cp{qx, qy, p};
  if (dry_run_done(cm, sub)) return;
  auto r = min_kl_coupling(cp, IpfOptions{a.tol, a.max_iter});
  json out = {{"units", "nats"}, {"feasible", r.feasible}, {"value", jnum(r.value)}};
  if (r.feasible) {
    out["coupling"] = jmatrix(r.coupling, p.rows(), p.cols());
    out["iterations"] = r.iterations;
    out["marginal_error"] = jnum(r.marginal_error);
  } else {
    out["hall_set"] = r.hall_set;
    out["hall_excess"] = jnum(r.hall_excess);
  }
  emit_json(cm, sub, out);
}

// ---------- surfaces ----------

struct SurfaceArgs {
  std::string p, which = "phi";
  double rho = 0.0;
  std::size_t grid = 64;
};

void check_which(const std::string& w) {
  if (w != "phi" && w != "psi" && w != "theta-lower" && w != "theta-upper")
    throw std::invalid_argument("--which must be phi, psi, theta-lower or theta-upper");
}

std::string surface_csv(const CLI::App* sub, const SurfacePair& sp, const std::string& which) {
  const bool lower = which == "phi" || which == "theta-lower";
  ExponentSurface sf = lower ? lower_convex_envelope(sp.phi) : upper_concave_envelope(sp.psi);
  const std::size_t G = sf.s_grid.size();
  std::vector<double> value(G * G), env(G * G);
  parallel_for(G * G, [&](std::size_t k) {
    double s = sf.s_grid[k / G], t = sf.t_grid[k % G];
    if (which == "phi" || which == "psi") {
      value[k] = sf.values[k];
      env[k] = sf.envelope[k];
    } else if (which == "theta-lower") {
      value[k] = env[k] = theta_lower_star(sf, s, t);
    } else {
      value[k] = theta_upper(sf, s, t);
      env[k] = theta_upper_star(sf, s, t);
    }
  });
  std::string out = csv_preamble(sub, sf.unit) + "s,t,value,envelope_value\n";
  for (std::size_t k = 0; k < G * G; ++k)
    out += num(sf.s_grid[k / G]) + "," + num(sf.t_grid[k % G]) + "," + num(value[k]) + "," + num(env[k]) + "\n";
  return out;
}

SurfaceOptions surface_options(std::size_t grid, bool binary_source) {
  SurfaceOptions o = binary_source ? dsbs::default_surface_options() : SurfaceOptions{};
  o.grid = grid;
  return o;
}

void run_surface(const Common& cm, const CLI::App* sub, const SurfaceArgs& a) {
  check_which(a.which);
  if (a.grid < 2 || a.grid > 512) throw std::invalid_argument("--grid must lie in [2,512]");
  bool from_rho = sub->count("--rho") > 0;
  if (from_rho == !a.p.empty()) throw std::invalid_argument("give exactly one of --p or --rho");
  std::optional<JointDist> p;
  if (!from_rho) p = io::any_joint_from_json(io::read_json(a.p));
  else (void)dsbs::Params(a.rho);
  if (dry_run_done(cm, sub)) return;
  SurfacePair sp = from_rho ? dsbs::surfaces(dsbs::Params(a.rho), surface_options(a.grid, true))
                            : coupling_surfaces(*p, surface_options(a.grid, false));
  emit(cm, surface_csv(sub, sp, a.which));
}

// ---------- bruteforce ----------

struct BruteArgs {
  std::string counts, mode = "exact";
  long long n = 0;
  std::size_t m1 = 0, m2 = 0;
  double max_subsets = 2e7;
};

void run_bruteforce(const Common& cm, const CLI::App* sub, const BruteArgs& a) {
  JointNType t(parse_counts(a.counts), a.n);
  if (a.mode != "exact" && a.mode != "greedy") throw std::invalid_argument("--mode must be exact or greedy");
  if (a.m1 < 1 || a.m2 < 1) throw std::invalid_argument("--m1 and --m2 must be >= 1");
  if (!(a.max_subsets > 0.0)) throw std::invalid_argument("--max-subsets must be positive");
  TypeGraph g = build_graph(t);
  if (a.m1 > g.nx() || a.m2 > g.ny())
    throw std::invalid_argument("--m1/--m2 exceed the type class sizes " + std::to_string(g.nx()) + ", " +
                                std::to_string(g.ny()));
  if (dry_run_done(cm, sub)) return;
  SearchBudget budget;
  budget.max_subsets = a.max_subsets;
  auto r = gamma_n(g, a.m1, a.m2, a.mode == "exact" ? SearchMode::exact : SearchMode::greedy, budget);
  emit_json(cm, sub,
            {{"units", "nats"},
             {"A_size", r.a_size},
             {"B_size", r.b_size},
             {"edges", r.edges},
             {"density", jnum(r.density)},
             {"method", a.mode},
             {"exponent", jnum(exponent_from_report(r, g.n()))},
             {"witness", {{"a", r.a}, {"b", r.b}}},
             {"graph", {{"x_vertices", g.nx()}, {"y_vertices", g.ny()}, {"left_degree", g.n1}, {"right_degree", g.n2}}}});
}

// ---------- bac ----------

struct BacArgs {
  double eps = 0.0, rho_lo = 0.5, rho_hi = 0.9, step = 1e-3;
  std::size_t hull_n = 20000;
  std::size_t max_surfaces = 41;
};

void run_bac(const Common& cm, const CLI::App* sub, const BacArgs& a) {
  if (!(a.eps >= 0.0 && a.eps < 0.5)) throw std::invalid_argument("--eps must lie in [0,0.5)");
  if (!(a.rho_lo > 0.0 && a.rho_lo < a.rho_hi && a.rho_hi < 1.0)) throw std::invalid_argument("need 0 < rho-lo < rho-hi < 1");
  if (!(a.step > 0.0)) throw std::invalid_argument("--step must be positive");
  if (a.hull_n < 100) throw std::invalid_argument("--hull-n must be >= 100");
  std::size_t N = std::size_t(std::llround((a.rho_hi - a.rho_lo) / a.step)) + 1;
  if (a.eps > 0.0 && N > a.max_surfaces)
    throw BudgetError("bac: eps > 0 needs one surface per rho; " + std::to_string(N) + " exceeds --max-surfaces " +
                      std::to_string(a.max_surfaces));
  if (dry_run_done(cm, sub)) return;
  dsbs::BacResult r{0.0, 0.0};
  if (a.eps == 0.0) {
    r = dsbs::bac_r2_max(a.rho_lo, a.rho_hi, a.step, a.hull_n);
  } else {
    std::vector<double> r2(N);
    for (std::size_t i = 0; i < N; ++i) r2[i] = dsbs::bac_r2_for_rho_eps(a.rho_lo + a.step * double(i), a.eps);
    std::size_t bi = std::size_t(std::min_element(r2.begin(), r2.end()) - r2.begin());
    r = {a.rho_lo + a.step * double(bi), r2[bi]};
  }
  emit_json(cm, sub, {{"units", "bits"}, {"rho_best", jnum(r.rho_best)}, {"r2_bound", jnum(r.r2_bound)}, {"prior_bound", 0.4228}});
}

// ---------- hyper ----------

struct HyperArgs {
  std::string p, region = "forward", pq = "1.9,1.9";
  double rho = 0.0, alpha = 0.0, beta = 0.0;
  std::size_t grid = 32;
};

void run_hyper(const Common& cm, const CLI::App* sub, const HyperArgs& a) {
  dsbs::Direction dir = parse_direction(a.region);
  auto comma = a.pq.find(',');
  if (comma == std::string::npos) throw std::invalid_argument("--pq must be \"p,q\"");
  hyper::HolderPair pq{parse_exponent_value(a.pq.substr(0, comma)), parse_exponent_value(a.pq.substr(comma + 1))};
  hyper::check_pair(pq, dir);
  if (a.grid < 2 || a.grid > 512) throw std::invalid_argument("--grid must lie in [2,512]");
  bool from_rho = sub->count("--rho") > 0;
  if (from_rho == !a.p.empty()) throw std::invalid_argument("give exactly one of --p or --rho");
  std::optional<JointDist> p;
  if (!from_rho) p = io::any_joint_from_json(io::read_json(a.p));
  else (void)dsbs::Params(a.rho);
  if (!(a.alpha >= 0.0 && a.beta >= 0.0)) throw std::invalid_argument("--alpha and --beta must be nonnegative");
  if (dry_run_done(cm, sub)) return;
  SurfacePair sp = from_rho ? dsbs::surfaces(dsbs::Params(a.rho), surface_options(a.grid, true))
                            : coupling_surfaces(*p, surface_options(a.grid, false));
  auto m = hyper::region_member(pq, dir, sp);
  double lam = dir == dsbs::Direction::forward ? hyper::lambda_lower(sp.phi, pq, a.alpha, a.beta)
                                         : hyper::lambda_upper(sp.psi, pq, a.alpha, a.beta);
  json out = {{"units", base_name(sp.phi.unit)}, {"member", m.member}, {"lambda", jnum(lam)},
              {"restricted_member", lam >= -1e-9}};
  if (!m.member)
    out["witness"] = {{"s", jnum(m.s)}, {"t", jnum(m.t)}, {"surface_value", jnum(m.surface_value)},
                      {"plane_value", jnum(m.plane_value)}};
  if (from_rho) out["ribbon_member"] = dsbs::ribbon_member(dsbs::Params(a.rho), pq.p, pq.q, dir);
  emit_json(cm, sub, out);
}

// ---------- exchange ----------

struct ExchangeArgs {
  std::string matrix;
  int n1 = 0;
};

void run_exchange(const Common& cm, const CLI::App* sub, const ExchangeArgs& a) {
  auto rows = io::read_csv_matrix(a.matrix);
  exchange::Matrix u(Eigen::Index(rows.size()), Eigen::Index(rows[0].size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j) u(Eigen::Index(i), Eigen::Index(j)) = rows[i][j];
  exchange::SubspacePair sp(u);
  if (a.n1 < 1 || a.n1 > sp.n() - 1) throw std::invalid_argument("--n1 must lie in [1, n-1]");
  if (dry_run_done(cm, sub)) return;
  auto part = exchange::exchange_partition(sp, a.n1);
  emit_json(cm, sub,
            {{"J", part.j},
             {"Jc", part.jc},
             {"method", part.method},
             {"det1", jnum(part.det1)},
             {"det2", jnum(part.det2)},
             {"residuals", {jnum(part.residual1), jnum(part.residual2)}}});
}

// ---------- verify ----------

struct VerifyArgs {
  std::string suite = "all";
};

int run_verify(const Common& cm, const CLI::App* sub, const VerifyArgs& a) {
  const int total = int(acceptance::all().size());
  std::vector<int> ids;
  if (a.suite == "all") {
    for (int i = 1; i <= total; ++i) ids.push_back(i);
  } else {
    std::stringstream ss(a.suite);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      std::size_t used = 0;
      int id = std::stoi(tok, &used);
      if (used != tok.size() || id < 1 || id > total)
        throw std::invalid_argument("--suite takes \"all\" or comma-separated ids in 1.." + std::to_string(total));
      ids.push_back(id);
    }
  }
  if (dry_run_done(cm, sub)) return kExitOk;
  std::string table;
  int failed = 0;
  for (int id : ids) {
    auto o = acceptance::run(id);
    bool to_file = !cm.out.empty();
    if (to_file) std::cout << acceptance::format_line(o) << "\n" << std::flush;
    table += acceptance::format_line(o, !to_file) + "\n";
    failed += !o.pass;
  }
  table += std::to_string(ids.size()) + " criteria, " + std::to_string(failed) + " failed\n";
  emit(cm, table);
  return failed == 0 ? kExitOk : kExitFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"typeflow: type-graph exponents, couplings, small-set expansion and hypercontractivity tools"};
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();
  Common cm;

  auto common = [&](CLI::App* s) {
    s->add_option("--out,-o", cm.out, "output file (written atomically); stdout if omitted");
    s->add_flag("--dry-run", cm.dry_run, "validate inputs and exit without computing");
    s->add_option("--seed", cm.seed, "random seed")->capture_default_str();
    s->add_option("--threads", cm.threads, "worker threads (overrides TYPEFLOW_THREADS)")->check(CLI::NonNegativeNumber);
  };

  ExponentArgs ex;
  auto* s_ex = app.add_subcommand("exponent", "E*, F*, G* at a rate pair with a witness auxiliary channel");
  s_ex->add_option("--joint", ex.joint, "joint distribution JSON")->required();
  s_ex->add_option("--r1", ex.r1, "rate R1")->required();
  s_ex->add_option("--r2", ex.r2, "rate R2")->required();
  s_ex->add_option("--base", ex.base, "unit of rates and outputs (nats|bits)")->capture_default_str();
  common(s_ex);

  RegionArgs rg;
  auto* s_rg = app.add_subcommand("region", "biclique or Han-Kobayashi region boundary as CSV");
  s_rg->add_option("--kind", rg.kind, "biclique|hk")->capture_default_str();
  s_rg->add_option("--joint", rg.joint, "joint distribution JSON")->required();
  s_rg->add_option("--resolution", rg.resolution, "boundary resolution")->capture_default_str();
  s_rg->add_option("--tol", rg.tol, "E* tolerance for hk membership")->capture_default_str();
  common(s_rg);

  CouplingArgs cp;
  auto* s_cp = app.add_subcommand("coupling", "minimum-KL coupling with fixed marginals");
  s_cp->add_option("--p", cp.p, "reference joint distribution JSON")->required();
  s_cp->add_option("--qx", cp.qx, "first marginal JSON")->required();
  s_cp->add_option("--qy", cp.qy, "second marginal JSON")->required();
  s_cp->add_option("--tol", cp.tol, "marginal tolerance")->capture_default_str();
  s_cp->add_option("--max-iter", cp.max_iter, "iteration cap")->capture_default_str();
  common(s_cp);

  SurfaceArgs sf;
  auto* s_sf = app.add_subcommand("surface", "exponent surface on a grid as CSV");
  s_sf->add_option("--p", sf.p, "joint distribution JSON");
  s_sf->add_option("--rho", sf.rho, "use the doubly symmetric binary source with this correlation");
  s_sf->add_option("--which", sf.which, "phi|psi|theta-lower|theta-upper")->capture_default_str();
  s_sf->add_option("--grid", sf.grid, "points per axis")->capture_default_str();
  common(s_sf);

  BruteArgs bf;
  auto* s_bf = app.add_subcommand("bruteforce", "exact or greedy densest sub-rectangle of a type graph");
  s_bf->add_option("--counts", bf.counts, "joint type counts, rows separated by ';'")->required();
  s_bf->add_option("--n", bf.n, "block length")->required();
  s_bf->add_option("--m1", bf.m1, "size of the x-vertex subset")->required();
  s_bf->add_option("--m2", bf.m2, "size of the y-vertex subset")->required();
  s_bf->add_option("--mode", bf.mode, "exact|greedy")->capture_default_str();
  s_bf->add_option("--max-subsets", bf.max_subsets, "enumeration budget")->capture_default_str();
  common(s_bf);

  SurfaceArgs ds;
  auto* s_ds = app.add_subcommand("dsbs", "closed-form surfaces of the doubly symmetric binary source as CSV");
  s_ds->add_option("--rho", ds.rho, "correlation in (0,1)")->required();
  s_ds->add_option("--surface", ds.which, "phi|psi|theta-lower|theta-upper")->capture_default_str();
  s_ds->add_option("--grid", ds.grid, "points per axis")->capture_default_str();
  common(s_ds);

  BacArgs bc;
  auto* s_bc = app.add_subcommand("bac", "zero-error binary adder channel rate bound");
  s_bc->add_option("--eps", bc.eps, "error exponent slack")->capture_default_str();
  s_bc->add_option("--rho-lo", bc.rho_lo, "lower end of the correlation sweep")->capture_default_str();
  s_bc->add_option("--rho-hi", bc.rho_hi, "upper end of the correlation sweep")->capture_default_str();
  s_bc->add_option("--step", bc.step, "sweep step")->capture_default_str();
  s_bc->add_option("--hull-n", bc.hull_n, "axis hull resolution")->capture_default_str();
  s_bc->add_option("--max-surfaces", bc.max_surfaces, "surface budget when eps > 0")->capture_default_str();
  common(s_bc);

  HyperArgs hy;
  auto* s_hy = app.add_subcommand("hyper", "strengthened hypercontractivity region checks");
  s_hy->add_option("--p", hy.p, "joint distribution JSON");
  s_hy->add_option("--rho", hy.rho, "use the doubly symmetric binary source with this correlation");
  s_hy->add_option("--check-region", hy.region, "forward|reverse")->capture_default_str();
  s_hy->add_option("--pq", hy.pq, "Holder pair \"p,q\" (inf allowed)")->capture_default_str();
  s_hy->add_option("--alpha", hy.alpha, "lower corner of the restricted box")->capture_default_str();
  s_hy->add_option("--beta", hy.beta, "lower corner of the restricted box")->capture_default_str();
  s_hy->add_option("--grid", hy.grid, "surface grid points per axis")->capture_default_str();
  common(s_hy);

  ExchangeArgs xc;
  auto* s_xc = app.add_subcommand("exchange", "coordinate partition for a pair of orthogonal complements");
  s_xc->add_option("--matrix", xc.matrix, "CSV of an orthogonal matrix; first n1 rows span the first subspace")->required();
  s_xc->add_option("--n1", xc.n1, "dimension of the first subspace")->required();
  common(s_xc);

  VerifyArgs vf;
  auto* s_vf = app.add_subcommand("verify", "run acceptance criteria");
  s_vf->add_option("--suite", vf.suite, "all or comma-separated criterion ids")->capture_default_str();
  common(s_vf);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitInvalid;
  }

  if (cm.threads > 0) setenv("TYPEFLOW_THREADS", std::to_string(cm.threads).c_str(), 1);

  try {
    if (s_ex->parsed()) run_exponent(cm, s_ex, ex);
    else if (s_rg->parsed()) run_region(cm, s_rg, rg);
    else if (s_cp->parsed()) run_coupling(cm, s_cp, cp);
    else if (s_sf->parsed()) run_surface(cm, s_sf, sf);
    else if (s_bf->parsed()) run_bruteforce(cm, s_bf, bf);
    else if (s_ds->parsed()) {
      ds.p.clear();
      run_surface(cm, s_ds, ds);
    } else if (s_bc->parsed()) run_bac(cm, s_bc, bc);
    else if (s_hy->parsed()) run_hyper(cm, s_hy, hy);
    else if (s_xc->parsed()) run_exchange(cm, s_xc, xc);
    else if (s_vf->parsed()) return run_verify(cm, s_vf, vf);
  } catch (const BudgetError& e) {
    std::cerr << "typeflow: budget exceeded: " << e.what() << "\n";
    return kExitBudget;
  } catch (const io::json::exception& e) {
    std::cerr << "typeflow: invalid JSON: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const std::logic_error& e) {  // invalid_argument, domain_error, out_of_range
    std::cerr << "typeflow: invalid input: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const std::exception& e) {
    std::cerr << "typeflow: error: " << e.what() << "\n";
    return kExitFailed;
  }
  return kExitOk;
}
