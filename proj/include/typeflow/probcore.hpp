#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace typeflow {

using BigInt = boost::multiprecision::cpp_int;

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kSimplexTol = 1e-12;
inline const double kLn2 = std::log(2.0);

enum class LogBase { nats, bits };

inline double to_base(double nats, LogBase b) { return b == LogBase::bits ? nats / kLn2 : nats; }
inline double nats_to_bits(double x) { return x / kLn2; }
inline double bits_to_nats(double x) { return x * kLn2; }
inline const char* base_name(LogBase b) { return b == LogBase::bits ? "bits" : "nats"; }

// -x log x with the 0 log 0 = 0 convention
inline double xlogx_neg(double x) { return x > 0.0 ? -x * std::log(x) : 0.0; }

inline double entropy(const std::vector<double>& p) {
  double h = 0.0;
  for (double v : p) h += xlogx_neg(v);
  return h;
}

namespace detail {
inline void check_simplex(const std::vector<double>& p, const char* what) {
  if (p.empty()) throw std::invalid_argument(std::string(what) + ": empty probability vector");
  double s = 0.0;
  for (double v : p) {
    if (!(v >= 0.0) || !std::isfinite(v))
      throw std::invalid_argument(std::string(what) + ": negative or non-finite entry");
    s += v;
  }
  if (std::abs(s - 1.0) > kSimplexTol)
    throw std::invalid_argument(std::string(what) + ": entries sum to " + std::to_string(s) + ", not 1");
}
}  // namespace detail

class Dist {
 public:
  Dist() = default;
  explicit Dist(std::vector<double> p, LogBase base = LogBase::nats) : p_(std::move(p)), base_(base) {
    detail::check_simplex(p_, "Dist");
  }
  static Dist normalize(std::vector<double> w, LogBase base = LogBase::nats) {
    double s = 0.0;
    for (double v : w) {
      if (!(v >= 0.0) || !std::isfinite(v)) throw std::invalid_argument("Dist::normalize: bad weight");
      s += v;
    }
    if (!(s > 0.0)) throw std::invalid_argument("Dist::normalize: zero total weight");
    for (double& v : w) v /= s;
    Dist d;
    d.p_ = std::move(w);
    d.base_ = base;
    return d;
  }
  static Dist uniform(std::size_t k, LogBase base = LogBase::nats) {
    return normalize(std::vector<double>(k, 1.0), base);
  }

  std::size_t size() const { return p_.size(); }
  double operator[](std::size_t i) const { return p_[i]; }
  const std::vector<double>& probs() const { return p_; }
  LogBase base() const { return base_; }
  std::vector<std::size_t> support() const {
    std::vector<std::size_t> s;
    for (std::size_t i = 0; i < p_.size(); ++i)
      if (p_[i] > 0.0) s.push_back(i);
    return s;
  }
  double min_prob() const { return *std::min_element(p_.begin(), p_.end()); }
  double entropy() const { return to_base(typeflow::entropy(p_), base_); }

 private:
  std::vector<double> p_;
  LogBase base_ = LogBase::nats;
};

class JointDist {
 public:
  JointDist() = default;
  JointDist(std::size_t rows, std::size_t cols, std::vector<double> flat, LogBase base = LogBase::nats)
      : r_(rows), c_(cols), p_(std::move(flat)), base_(base) {
    if (rows == 0 || cols == 0 || p_.size() != rows * cols)
      throw std::invalid_argument("JointDist: shape mismatch");
    detail::check_simplex(p_, "JointDist");
  }
  explicit JointDist(const std::vector<std::vector<double>>& m, LogBase base = LogBase::nats)
      : JointDist(m.size(), m.empty() ? 0 : m[0].size(), flatten(m), base) {}

  static JointDist normalize(std::size_t rows, std::size_t cols, std::vector<double> w,
                             LogBase base = LogBase::nats) {
    Dist d = Dist::normalize(std::move(w), base);
    return JointDist(rows, cols, d.probs(), base);
  }
  static JointDist product(const Dist& px, const Dist& py) {
    std::vector<double> f(px.size() * py.size());
    for (std::size_t x = 0; x < px.size(); ++x)
      for (std::size_t y = 0; y < py.size(); ++y) f[x * py.size() + y] = px[x] * py[y];
    return normalize(px.size(), py.size(), std::move(f), px.base());
  }

  std::size_t rows() const { return r_; }
  std::size_t cols() const { return c_; }
  double at(std::size_t x, std::size_t y) const { return p_[x * c_ + y]; }
  const std::vector<double>& flat() const { return p_; }
  LogBase base() const { return base_; }

  std::vector<double> marginal_x_vec() const {
    std::vector<double> m(r_, 0.0);
    for (std::size_t x = 0; x < r_; ++x)
      for (std::size_t y = 0; y < c_; ++y) m[x] += at(x, y);
    return m;
  }
  std::vector<double> marginal_y_vec() const {
    std::vector<double> m(c_, 0.0);
    for (std::size_t x = 0; x < r_; ++x)
      for (std::size_t y = 0; y < c_; ++y) m[y] += at(x, y);
    return m;
  }
  Dist marginal_x() const { return Dist::normalize(marginal_x_vec(), base_); }
  Dist marginal_y() const { return Dist::normalize(marginal_y_vec(), base_); }
  JointDist transpose() const {
    std::vector<double> f(p_.size());
    for (std::size_t x = 0; x < r_; ++x)
      for (std::size_t y = 0; y < c_; ++y) f[y * r_ + x] = at(x, y);
    JointDist t;
    t.r_ = c_;
    t.c_ = r_;
    t.p_ = std::move(f);
    t.base_ = base_;
    return t;
  }
  bool full_support() const {
    return std::all_of(p_.begin(), p_.end(), [](double v) { return v > 0.0; });
  }
  std::vector<std::vector<double>> matrix() const {
    std::vector<std::vector<double>> m(r_, std::vector<double>(c_));
    for (std::size_t x = 0; x < r_; ++x)
      for (std::size_t y = 0; y < c_; ++y) m[x][y] = at(x, y);
    return m;
  }

 private:
  static std::vector<double> flatten(const std::vector<std::vector<double>>& m) {
    std::vector<double> f;
    for (const auto& row : m) {
      if (!m.empty() && row.size() != m[0].size()) throw std::invalid_argument("JointDist: ragged matrix");
      f.insert(f.end(), row.begin(), row.end());
    }
    return f;
  }
  std::size_t r_ = 0, c_ = 0;
  std::vector<double> p_;
  LogBase base_ = LogBase::nats;
};

class CondKernel {
 public:
  CondKernel() = default;
  explicit CondKernel(std::vector<Dist> rows) : rows_(std::move(rows)) {
    if (rows_.empty()) throw std::invalid_argument("CondKernel: no rows");
    for (const auto& r : rows_)
      if (r.size() != rows_[0].size()) throw std::invalid_argument("CondKernel: rows differ in length");
  }
  std::size_t size() const { return rows_.size(); }
  std::size_t out_size() const { return rows_.front().size(); }
  const Dist& operator[](std::size_t w) const { return rows_[w]; }
  const std::vector<Dist>& rows() const { return rows_; }

 private:
  std::vector<Dist> rows_;
};

// marginal n-type: counts summing to n
struct NType {
  std::vector<long long> counts;
  long long n = 0;
  Dist to_dist() const {
    std::vector<double> p(counts.size());
    for (std::size_t i = 0; i < counts.size(); ++i) p[i] = double(counts[i]) / double(n);
    return Dist::normalize(std::move(p));
  }
};

class JointNType {
 public:
  JointNType() = default;
  JointNType(std::vector<std::vector<long long>> counts, long long n) : c_(std::move(counts)), n_(n) {
    if (n_ <= 0) throw std::invalid_argument("JointNType: n must be positive");
    if (c_.empty() || c_[0].empty()) throw std::invalid_argument("JointNType: empty count matrix");
    long long s = 0;
    for (const auto& row : c_) {
      if (row.size() != c_[0].size()) throw std::invalid_argument("JointNType: ragged count matrix");
      for (long long v : row) {
        if (v < 0) throw std::invalid_argument("JointNType: negative count");
        s += v;
      }
    }
    if (s != n_) throw std::invalid_argument("JointNType: counts sum to " + std::to_string(s) + ", not n");
  }
  std::size_t rows() const { return c_.size(); }
  std::size_t cols() const { return c_[0].size(); }
  long long n() const { return n_; }
  long long count(std::size_t x, std::size_t y) const { return c_[x][y]; }
  const std::vector<std::vector<long long>>& counts() const { return c_; }
  NType marginal_x() const {
    NType t{std::vector<long long>(rows(), 0), n_};
    for (std::size_t x = 0; x < rows(); ++x)
      for (std::size_t y = 0; y < cols(); ++y) t.counts[x] += c_[x][y];
    return t;
  }
  NType marginal_y() const {
    NType t{std::vector<long long>(cols(), 0), n_};
    for (std::size_t x = 0; x < rows(); ++x)
      for (std::size_t y = 0; y < cols(); ++y) t.counts[y] += c_[x][y];
    return t;
  }
  JointDist to_joint_dist() const {
    std::vector<double> f;
    for (const auto& row : c_)
      for (long long v : row) f.push_back(double(v) / double(n_));
    return JointDist::normalize(rows(), cols(), std::move(f));
  }
  bool operator==(const JointNType& o) const { return n_ == o.n_ && c_ == o.c_; }

 private:
  std::vector<std::vector<long long>> c_;
  long long n_ = 0;
};

struct InfoMeasures {
  double H_XY, H_X, H_Y, H_X_given_Y, H_Y_given_X, I_XY;
};

inline InfoMeasures info_measures(const JointDist& j) {
  const double hxy = entropy(j.flat());
  const double hx = entropy(j.marginal_x_vec());
  const double hy = entropy(j.marginal_y_vec());
  const LogBase b = j.base();
  InfoMeasures m{};
  m.H_XY = to_base(hxy, b);
  m.H_X = to_base(hx, b);
  m.H_Y = to_base(hy, b);
  m.H_X_given_Y = to_base(std::max(0.0, hxy - hy), b);
  m.H_Y_given_X = to_base(std::max(0.0, hxy - hx), b);
  m.I_XY = to_base(std::max(0.0, hx + hy - hxy), b);
  return m;
}

// D(q||p) on raw vectors, nats
inline double kl_raw(const std::vector<double>& q, const std::vector<double>& p) {
  if (q.size() != p.size()) throw std::invalid_argument("kl_div: length mismatch");
  double d = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (q[i] <= 0.0) continue;
    if (p[i] <= 0.0) return kInf;
    d += q[i] * std::log(q[i] / p[i]);
  }
  return std::max(0.0, d);
}

inline double kl_div(const Dist& q, const Dist& p) {
  if (q.base() != p.base()) throw std::invalid_argument("kl_div: mixed log bases");
  return to_base(kl_raw(q.probs(), p.probs()), q.base());
}

inline double cond_kl(const CondKernel& k, const Dist& ref, const Dist& weights) {
  if (k.size() != weights.size()) throw std::invalid_argument("cond_kl: kernel rows must match weights");
  double s = 0.0;
  for (std::size_t w = 0; w < k.size(); ++w) {
    if (weights[w] <= 0.0) continue;
    double d = kl_div(k[w], ref);
    if (std::isinf(d)) return kInf;
    s += weights[w] * d;
  }
  return s;
}

// all compositions of n into k nonnegative parts, lexicographically decreasing in the first part
inline std::vector<std::vector<long long>> compositions(std::size_t k, long long n) {
  std::vector<std::vector<long long>> out;
  std::vector<long long> cur(k, 0);
  auto rec = [&](auto&& self, std::size_t i, long long left) -> void {
    if (i + 1 == k) {
      cur[i] = left;
      out.push_back(cur);
      return;
    }
    for (long long v = left; v >= 0; --v) {
      cur[i] = v;
      self(self, i + 1, left - v);
    }
  };
  if (k == 0) return out;
  rec(rec, 0, n);
  return out;
}

inline std::vector<NType> enumerate_marginal_ntypes(std::size_t k, long long n) {
  if (n < 1) throw std::invalid_argument("enumerate_ntypes: n must be >= 1");
  std::vector<NType> out;
  for (auto& c : compositions(k, n)) out.push_back(NType{std::move(c), n});
  return out;
}

// counts n*p if every entry is a multiple of 1/n (within 1e-9), else nullopt
inline std::optional<std::vector<long long>> counts_of(const Dist& p, long long n) {
  std::vector<long long> c(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    double v = p[i] * double(n);
    long long r = std::llround(v);
    if (std::abs(v - double(r)) > 1e-9) return std::nullopt;
    c[i] = r;
  }
  return c;
}

inline std::vector<JointNType> enumerate_ntypes(std::size_t rows, std::size_t cols, long long n,
                                                const std::optional<std::pair<Dist, Dist>>& fixed = std::nullopt) {
  if (n < 1) throw std::invalid_argument("enumerate_ntypes: n must be >= 1");
  std::vector<JointNType> out;
  std::vector<long long> rx, cy;
  if (fixed) {
    if (fixed->first.size() != rows || fixed->second.size() != cols)
      throw std::invalid_argument("enumerate_ntypes: marginal sizes do not match shape");
    auto a = counts_of(fixed->first, n);
    auto b = counts_of(fixed->second, n);
    if (!a || !b) return out;
    rx = *a;
    cy = *b;
    std::vector<std::vector<long long>> m(rows, std::vector<long long>(cols, 0));
    std::vector<long long> colleft = cy;
    // fill row by row; each row a composition of rx[x] bounded by the remaining column totals
    auto rec = [&](auto&& self, std::size_t x, std::size_t y, long long rowleft) -> void {
      if (x == rows) {
        if (std::all_of(colleft.begin(), colleft.end(), [](long long v) { return v == 0; }))
          out.emplace_back(m, n);
        return;
      }
      if (y + 1 == cols) {
        if (rowleft > colleft[y]) return;
        m[x][y] = rowleft;
        colleft[y] -= rowleft;
        self(self, x + 1, 0, x + 1 < rows ? rx[x + 1] : 0);
        colleft[y] += rowleft;
        return;
      }
      for (long long v = std::min(rowleft, colleft[y]); v >= 0; --v) {
        m[x][y] = v;
        colleft[y] -= v;
        self(self, x, y + 1, rowleft - v);
        colleft[y] += v;
      }
    };
    rec(rec, 0, 0, rx[0]);
    return out;
  }
  for (auto& c : compositions(rows * cols, n)) {
    std::vector<std::vector<long long>> m(rows, std::vector<long long>(cols));
    for (std::size_t i = 0; i < rows * cols; ++i) m[i / cols][i % cols] = c[i];
    out.emplace_back(std::move(m), n);
  }
  return out;
}

inline BigInt factorial(long long n) {
  BigInt f = 1;
  for (long long i = 2; i <= n; ++i) f *= i;
  return f;
}

inline BigInt multinomial(const std::vector<long long>& parts) {
  long long n = 0;
  for (long long v : parts) n += v;
  BigInt r = factorial(n);
  for (long long v : parts) r /= factorial(v);
  return r;
}

inline BigInt type_class_count(const NType& t) { return multinomial(t.counts); }

inline BigInt type_class_count(const JointNType& t) {
  std::vector<long long> parts;
  for (const auto& row : t.counts()) parts.insert(parts.end(), row.begin(), row.end());
  return multinomial(parts);
}

// number of y-sequences whose joint type with a fixed x-sequence equals t
// (the x-sequence must have type t.marginal_x(); its arrangement does not matter)
inline BigInt conditional_class_count(const JointNType& t) {
  BigInt r = 1;
  for (const auto& row : t.counts()) r *= multinomial(row);
  return r;
}

inline BigInt conditional_class_count(const JointNType& t, const std::vector<int>& x_seq) {
  auto mx = t.marginal_x();
  std::vector<long long> seen(t.rows(), 0);
  if ((long long)x_seq.size() != t.n()) throw std::invalid_argument("conditional count: sequence length != n");
  for (int v : x_seq) {
    if (v < 0 || std::size_t(v) >= t.rows()) throw std::invalid_argument("conditional count: symbol out of range");
    ++seen[v];
  }
  if (seen != mx.counts) throw std::invalid_argument("conditional count: sequence type differs from the x-marginal");
  return conditional_class_count(t);
}

inline double log_big(const BigInt& v) {
  if (v <= 0) return -kInf;
  // scale down to fit a double without overflow
  unsigned bits = boost::multiprecision::msb(v);
  if (bits < 1000) return std::log(v.convert_to<double>());
  unsigned shift = bits - 60;
  BigInt top = v >> shift;
  return std::log(top.convert_to<double>()) + double(shift) * kLn2;
}

}  // namespace typeflow
