#pragma once

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "typeflow/probcore.hpp"

namespace typeflow::io {

using json = nlohmann::json;

inline LogBase parse_base(const std::string& s) {
  if (s == "nats") return LogBase::nats;
  if (s == "bits") return LogBase::bits;
  throw std::invalid_argument("base must be \"nats\" or \"bits\", got \"" + s + "\"");
}

inline LogBase base_of(const json& j) { return j.contains("base") ? parse_base(j.at("base").get<std::string>()) : LogBase::nats; }

inline std::vector<std::vector<double>> prob_rows(const json& j) {
  if (!j.is_object() || !j.contains("probs")) throw std::invalid_argument("expected an object with \"probs\"");
  const json& p = j.at("probs");
  if (!p.is_array() || p.empty()) throw std::invalid_argument("\"probs\" must be a nonempty array");
  if (p[0].is_array()) return p.get<std::vector<std::vector<double>>>();
  return {p.get<std::vector<double>>()};
}

// a single distribution: "probs" is a flat array or a one-row matrix
inline Dist dist_from_json(const json& j) {
  auto rows = prob_rows(j);
  if (rows.size() != 1) throw std::invalid_argument("a distribution needs a single row of probabilities");
  return Dist(rows[0], base_of(j));
}

inline JointDist joint_from_json(const json& j) {
  auto rows = prob_rows(j);
  for (const auto& r : rows)
    if (r.size() != rows[0].size()) throw std::invalid_argument("\"probs\" rows have different lengths");
  return JointDist(rows, base_of(j));
}

inline JointNType ntype_from_json(const json& j) {
  if (!j.is_object() || !j.contains("counts") || !j.contains("n"))
    throw std::invalid_argument("expected an object with \"counts\" and \"n\"");
  return JointNType(j.at("counts").get<std::vector<std::vector<long long>>>(), j.at("n").get<long long>());
}

// accepts either schema; counts are converted to their empirical distribution
inline JointDist any_joint_from_json(const json& j) {
  if (j.is_object() && j.contains("counts")) return ntype_from_json(j).to_joint_dist();
  return joint_from_json(j);
}

inline json to_json(const Dist& d) { return {{"probs", d.probs()}, {"base", base_name(d.base())}}; }
inline json to_json(const JointDist& d) { return {{"probs", d.matrix()}, {"base", base_name(d.base())}}; }
inline json to_json(const JointNType& t) { return {{"counts", t.counts()}, {"n", t.n()}}; }

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline json read_json(const std::string& path) { return json::parse(read_file(path)); }

// numeric CSV; blank lines and lines starting with '#' are skipped
inline std::vector<std::vector<double>> read_csv_matrix(const std::string& path) {
  std::istringstream in(read_file(path));
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#' || line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::vector<double> row;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) {
      std::size_t used = 0;
      double v = std::stod(cell, &used);
      if (cell.find_first_not_of(" \t\r", used) != std::string::npos)
        throw std::invalid_argument("csv: bad number \"" + cell + "\" in " + path);
      row.push_back(v);
    }
    if (!rows.empty() && row.size() != rows[0].size()) throw std::invalid_argument("csv: ragged rows in " + path);
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::invalid_argument("csv: no data in " + path);
  return rows;
}

// write to a sibling temp file, then rename over the target
inline void write_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  fs::rename(tmp, target);
}

// shortest text that round-trips the double
inline std::string num(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  for (int prec = 1; prec < 17; ++prec) {
    char b[32];
    std::snprintf(b, sizeof b, "%.*g", prec, v);
    if (std::strtod(b, nullptr) == v) return b;
  }
  return buf;
}

}  // namespace typeflow::io
