#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace typeflow::exchange {

using Matrix = Eigen::MatrixXd;
using Index = std::vector<int>;

// rows [0,n1) span the first subspace, rows [n1,n) the second
struct SubspacePair {
  Matrix u;
  explicit SubspacePair(Matrix m) : u(std::move(m)) {
    if (u.rows() != u.cols()) throw std::invalid_argument("subspace pair: matrix must be square");
    double err = (u * u.transpose() - Matrix::Identity(u.rows(), u.rows())).cwiseAbs().maxCoeff();
    if (err > 1e-10) throw std::invalid_argument("subspace pair: matrix is not orthogonal (err " + std::to_string(err) + ")");
  }
  int n() const { return int(u.rows()); }
};

inline Matrix select(const Matrix& m, const Index& rows, const Index& cols) {
  Matrix out(rows.size(), cols.size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < cols.size(); ++j) out(Eigen::Index(i), Eigen::Index(j)) = m(rows[i], cols[j]);
  return out;
}

inline Index complement(const Index& s, int n) {
  std::vector<char> in(std::size_t(n), 0);
  for (int v : s) in[std::size_t(v)] = 1;
  Index out;
  for (int i = 0; i < n; ++i)
    if (!in[std::size_t(i)]) out.push_back(i);
  return out;
}

inline Index range(int a, int b) {
  Index r;
  for (int i = a; i < b; ++i) r.push_back(i);
  return r;
}

// |det| after scaling every row to unit length; an empty block counts as nonsingular
inline double normalized_det(Matrix m) {
  if (m.rows() == 0) return 1.0;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    double nr = m.row(i).norm();
    if (nr == 0.0) return 0.0;
    m.row(i) /= nr;
  }
  return std::abs(m.partialPivLu().determinant());
}

constexpr double kSingularTol = 1e-12;

// leading pivot columns of a column-pivoted QR of the given rows
inline Index pivot_columns(const Matrix& rows_block, int k) {
  Eigen::ColPivHouseholderQR<Matrix> qr(rows_block);
  Index out;
  auto perm = qr.colsPermutation().indices();
  for (int i = 0; i < k; ++i) out.push_back(perm(i));
  std::sort(out.begin(), out.end());
  return out;
}

template <class Visit>
bool for_each_subset(int n, int k, Visit&& visit) {
  Index cur;
  std::function<bool(int)> rec = [&](int start) {
    if (int(cur.size()) == k) return visit(cur);
    for (int i = start; i <= n - (k - int(cur.size())); ++i) {
      cur.push_back(i);
      if (rec(i + 1)) return true;
      cur.pop_back();
    }
    return false;
  };
  return rec(0);
}

struct Partition {
  Index j, jc;
  Matrix f1, f2;  // x = x_J * f1 for x in the first subspace, y = y_Jc * f2 for y in the second
  double det1 = 0.0, det2 = 0.0;
  double residual1 = 0.0, residual2 = 0.0;
  std::string method;
};

inline Partition exchange_partition(const SubspacePair& sp, int n1) {
  const int n = sp.n();
  if (n1 < 1 || n1 > n - 1) throw std::domain_error("exchange_partition: need 1 <= n1 <= n-1");
  Matrix u1 = sp.u.topRows(n1), u2 = sp.u.bottomRows(n - n1);
  Index r1 = range(0, n1), r2 = range(0, n - n1);
  auto score = [&](const Index& j, double& d1, double& d2) {
    auto jc = complement(j, n);
    d1 = normalized_det(select(u1, r1, j));
    d2 = normalized_det(select(u2, r2, jc));
    return d1 > kSingularTol && d2 > kSingularTol;
  };
  Partition p;
  p.j = pivot_columns(u1, n1);
  p.method = "pivoted-qr";
  if (!score(p.j, p.det1, p.det2)) {
    if (n > 14) throw std::runtime_error("exchange_partition: pivoted choice is singular and n > 14 (det " +
                                         std::to_string(p.det1) + ", " + std::to_string(p.det2) + ")");
    double best = -1.0;
    Index bj;
    for_each_subset(n, n1, [&](const Index& j) {
      double a, b;
      score(j, a, b);
      if (std::min(a, b) > best) best = std::min(a, b), bj = j;
      return false;
    });
    p.j = bj;
    p.method = "exhaustive";
    if (!score(p.j, p.det1, p.det2))
      throw std::runtime_error("exchange_partition: no nonsingular partition (best det " + std::to_string(best) + ")");
  }
  p.jc = complement(p.j, n);
  Matrix a1 = select(u1, r1, p.j), a2 = select(u2, r2, p.jc);
  p.f1 = a1.partialPivLu().solve(u1);
  p.f2 = a2.partialPivLu().solve(u2);
  p.residual1 = (select(u1, r1, p.j) * p.f1 - u1).cwiseAbs().maxCoeff();
  p.residual2 = (select(u2, r2, p.jc) * p.f2 - u2).cwiseAbs().maxCoeff();
  return p;
}

// sign of the term for (H, L) in the generalized Laplace expansion
inline int laplace_sign(const Index& h, const Index& l) {
  long s = 0;
  for (int v : h) s += v + 1;
  for (int v : l) s += v + 1;
  return s % 2 == 0 ? 1 : -1;
}

// sum over all L with |L| = |H| of the signed complementary-minor products; equals det(B)
inline double laplace_expansion(const Matrix& b, const Index& h) {
  const int n = int(b.rows());
  auto hc = complement(h, n);
  double sum = 0.0;
  for_each_subset(n, int(h.size()), [&](const Index& l) {
    auto lc = complement(l, n);
    double a = h.empty() ? 1.0 : select(b, h, l).determinant();
    double c = hc.empty() ? 1.0 : select(b, hc, lc).determinant();
    sum += laplace_sign(h, l) * a * c;
    return false;
  });
  return sum;
}

// some L making both complementary minors nonsingular
inline Index laplace_certificate(const Matrix& b, const Index& h) {
  const int n = int(b.rows());
  if (b.cols() != n) throw std::invalid_argument("laplace_certificate: matrix must be square");
  for (int v : h)
    if (v < 0 || v >= n) throw std::invalid_argument("laplace_certificate: index out of range");
  if (normalized_det(b) <= kSingularTol) throw std::domain_error("laplace_certificate: matrix is singular");
  auto hc = complement(h, n);
  auto ok = [&](const Index& l, double& m) {
    m = std::min(normalized_det(select(b, h, l)), normalized_det(select(b, hc, complement(l, n))));
    return m > kSingularTol;
  };
  double m = 0.0;
  Index l = h.empty() ? Index{} : pivot_columns(select(b, h, range(0, n)), int(h.size()));
  if (ok(l, m)) return l;
  if (n > 14) throw std::runtime_error("laplace_certificate: pivoted choice failed and n > 14");
  double best = -1.0;
  Index bl;
  for_each_subset(n, int(h.size()), [&](const Index& cand) {
    double v;
    ok(cand, v);
    if (v > best) best = v, bl = cand;
    return false;
  });
  if (best <= kSingularTol) throw std::runtime_error("laplace_certificate: no nonsingular pair found");
  return bl;
}

}  // namespace typeflow::exchange
