#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

struct Run {
  int code;
  std::string out;
};

Run run(const std::string& args) {
  std::string cmd = std::string(TYPEFLOW_CLI) + " " + args + " 2>/dev/null";
  FILE* f = popen(cmd.c_str(), "r");
  if (!f) return {-1, ""};
  std::string out;
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, f)) > 0) out.append(buf, n);
  int st = pclose(f);
  return {WIFEXITED(st) ? WEXITSTATUS(st) : -1, out};
}

std::string sample(const std::string& name) { return std::string(TYPEFLOW_SAMPLES) + "/" + name; }

fs::path scratch(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / "typeflow_cli_test";
  fs::create_directories(dir);
  return dir / name;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST(Cli, BruteforceDensity) {
  auto r = run("bruteforce --counts \"0,1;1,0\" --n 2 --m1 1 --m2 1 --mode exact");
  ASSERT_EQ(r.code, 0) << r.out;
  auto j = json::parse(r.out);
  EXPECT_DOUBLE_EQ(j.at("density").get<double>(), 1.0);
  EXPECT_TRUE(j.contains("git_describe"));
  EXPECT_EQ(j.at("config").at("m1"), 1);
  EXPECT_EQ(j.at("config").at("counts"), "0,1;1,0");
}

TEST(Cli, ExponentIdentity) {
  auto r = run("exponent --joint " + sample("dsbs_0.5.json") + " --r1 0.3 --r2 0.4");
  ASSERT_EQ(r.code, 0) << r.out;
  auto j = json::parse(r.out);
  double e = j.at("e_star"), f = j.at("f_star");
  EXPECT_NEAR(e, 0.7 - f, 1e-12);
  EXPECT_GE(e, -1e-12);
}

TEST(Cli, CouplingHallCertificate) {
  auto r = run("coupling --p " + sample("zero_diag.json") + " --qx " + sample("qx.json") + " --qy " + sample("qy.json"));
  ASSERT_EQ(r.code, 0) << r.out;
  auto j = json::parse(r.out);
  if (!j.at("feasible").get<bool>()) {
    EXPECT_EQ(j.at("value"), "inf");
    EXPECT_TRUE(j.contains("hall_set"));
  }
  auto ok = json::parse(run("coupling --p " + sample("dsbs_0.5.json") + " --qx " + sample("qx.json") + " --qy " +
                            sample("qy.json")).out);
  EXPECT_TRUE(ok.at("feasible").get<bool>());
  EXPECT_LE(ok.at("marginal_error").get<double>(), 1e-9);
}

TEST(Cli, SurfaceCsvIsDeterministic) {
  auto a = scratch("phi_a.csv"), b = scratch("phi_b.csv");
  ASSERT_EQ(run("surface --rho 0.5 --which phi --grid 8 --out " + a.string()).code, 0);
  ASSERT_EQ(run("surface --rho 0.5 --which phi --grid 8 --threads 1 --out " + b.string()).code, 0);
  std::string sa = slurp(a);
  EXPECT_EQ(sa, slurp(b));
  std::istringstream in(sa);
  std::string line;
  std::vector<std::string> lines;
  while (std::getline(in, line)) lines.push_back(line);
  ASSERT_EQ(lines.size(), 4u + 64u);
  EXPECT_EQ(lines[0].rfind("# typeflow", 0), 0u);
  EXPECT_NE(lines[2].find("bits"), std::string::npos);
  EXPECT_EQ(lines[3], "s,t,value,envelope_value");
}

TEST(Cli, DryRunWritesNothing) {
  auto p = scratch("dry.csv");
  fs::remove(p);
  EXPECT_EQ(run("surface --rho 0.5 --grid 8 --dry-run --out " + p.string()).code, 0);
  EXPECT_FALSE(fs::exists(p));
}

TEST(Cli, HyperAndExchange) {
  auto h = json::parse(run("hyper --rho 0.5 --check-region forward --pq 1.6,1.6 --grid 8").out);
  EXPECT_TRUE(h.at("member").get<bool>());
  EXPECT_TRUE(h.at("ribbon_member").get<bool>());
  auto x = run("exchange --matrix " + sample("orthogonal_6.csv") + " --n1 3");
  ASSERT_EQ(x.code, 0) << x.out;
  auto j = json::parse(x.out);
  EXPECT_EQ(j.at("J").size(), 3u);
  EXPECT_EQ(j.at("Jc").size(), 3u);
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(run("").code, 2);
  EXPECT_EQ(run("exponent --joint /nonexistent.json --r1 0.1 --r2 0.1").code, 2);
  EXPECT_EQ(run("hyper --rho 0.5 --check-region reverse --pq 1.5,0.5").code, 2);
  EXPECT_EQ(run("surface --rho 0.5 --grid 1").code, 2);
  EXPECT_EQ(run("bruteforce --counts \"2,2;2,2\" --n 8 --m1 35 --m2 35 --max-subsets 10").code, 3);
}

TEST(Cli, VerifySingleCriterion) {
  auto r = run("verify --suite 7");
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("PASS"), std::string::npos);
}
