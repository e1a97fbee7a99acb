#pragma once

// Dense revised simplex for small row counts and many columns.
// maximize c.x  s.t.  a_i.x (<=,>=,=) b_i,  x >= 0
// Columns may be appended after a solve; the next solve resumes from the last basis.

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace typeflow::lp {

enum class Sense { le, ge, eq };
enum class Status { optimal, infeasible, unbounded, iteration_limit };

struct Solution {
  Status status = Status::iteration_limit;
  double objective = 0.0;
  std::vector<double> x;      // one entry per user column
  std::vector<double> duals;  // one entry per row, sign convention of the user's rows
};

class Problem {
 public:
  Problem(std::vector<Sense> senses, std::vector<double> rhs) : m_(senses.size()), sense_(std::move(senses)) {
    if (rhs.size() != m_) throw std::invalid_argument("lp: rhs size mismatch");
    sign_.assign(m_, 1.0);
    b_.resize(m_);
    for (std::size_t i = 0; i < m_; ++i) {
      if (rhs[i] < 0.0) {
        sign_[i] = -1.0;
        if (sense_[i] == Sense::le) sense_[i] = Sense::ge;
        else if (sense_[i] == Sense::ge) sense_[i] = Sense::le;
      }
      b_[i] = rhs[i] * sign_[i];
    }
    for (std::size_t i = 0; i < m_; ++i) {
      if (sense_[i] == Sense::eq) continue;
      std::vector<double> a(m_, 0.0);
      a[i] = sense_[i] == Sense::le ? 1.0 : -1.0;
      cols_.push_back({0.0, std::move(a), Kind::slack});
    }
    for (std::size_t i = 0; i < m_; ++i) {
      std::vector<double> a(m_, 0.0);
      a[i] = 1.0;
      cols_.push_back({0.0, std::move(a), Kind::artificial});
    }
  }

  std::size_t rows() const { return m_; }
  std::size_t num_user_columns() const { return user_.size(); }

  std::size_t add_column(double cost, const std::vector<double>& a) {
    if (a.size() != m_) throw std::invalid_argument("lp: column length mismatch");
    std::vector<double> s(m_);
    for (std::size_t i = 0; i < m_; ++i) s[i] = a[i] * sign_[i];
    cols_.push_back({cost, std::move(s), Kind::user});
    user_.push_back(cols_.size() - 1);
    return user_.size() - 1;
  }

  Solution solve(int max_iter = 200000) {
    Solution sol;
    if (!started_) {
      init_basis();
      started_ = true;
      phase_ = 1;
    }
    if (phase_ == 1) {
      Status st = iterate(true, max_iter);
      if (st != Status::optimal) {
        sol.status = st;
        return sol;
      }
      double infeas = 0.0;
      for (std::size_t i = 0; i < m_; ++i)
        if (cols_[basis_[i]].kind == Kind::artificial) infeas += std::max(0.0, xb_[i]);
      if (infeas > kFeasTol * (1.0 + norm_b())) {
        sol.status = Status::infeasible;
        return sol;
      }
      drive_out_artificials();
      phase_ = 2;
    }
    Status st = iterate(false, max_iter);
    sol.status = st;
    if (st != Status::optimal) return sol;
    sol.x.assign(user_.size(), 0.0);
    std::vector<double> where(cols_.size(), -1.0);
    for (std::size_t i = 0; i < m_; ++i) where[basis_[i]] = double(i);
    for (std::size_t u = 0; u < user_.size(); ++u) {
      double w = where[user_[u]];
      if (w >= 0.0) sol.x[u] = std::max(0.0, xb_[std::size_t(w)]);
    }
    double obj = 0.0;
    for (std::size_t u = 0; u < user_.size(); ++u) obj += cols_[user_[u]].cost * sol.x[u];
    sol.objective = obj;
    auto y = duals(false);
    sol.duals.resize(m_);
    for (std::size_t i = 0; i < m_; ++i) sol.duals[i] = y[i] * sign_[i];
    return sol;
  }

 private:
  enum class Kind { user, slack, artificial };
  struct Column {
    double cost;
    std::vector<double> a;
    Kind kind;
  };
  static constexpr double kCostTol = 1e-11;
  static constexpr double kPivTol = 1e-9;
  static constexpr double kFeasTol = 1e-9;

  double norm_b() const {
    double s = 0.0;
    for (double v : b_) s = std::max(s, std::abs(v));
    return s;
  }

  double phase_cost(std::size_t j, bool phase1) const {
    if (phase1) return cols_[j].kind == Kind::artificial ? -1.0 : 0.0;
    return cols_[j].kind == Kind::user ? cols_[j].cost : 0.0;
  }

  void init_basis() {
    basis_.assign(m_, 0);
    std::vector<long> slack_of(m_, -1), art_of(m_, -1);
    for (std::size_t j = 0; j < cols_.size(); ++j) {
      for (std::size_t i = 0; i < m_; ++i) {
        if (cols_[j].a[i] != 0.0) {
          if (cols_[j].kind == Kind::slack) slack_of[i] = long(j);
          if (cols_[j].kind == Kind::artificial) art_of[i] = long(j);
          break;
        }
      }
    }
    for (std::size_t i = 0; i < m_; ++i) {
      if (sense_[i] == Sense::le && slack_of[i] >= 0) basis_[i] = std::size_t(slack_of[i]);
      else basis_[i] = std::size_t(art_of[i]);
    }
    refactor();
  }

  // B^{-1} from scratch by Gauss-Jordan with partial pivoting
  void refactor() {
    std::vector<double> B(m_ * m_);
    for (std::size_t i = 0; i < m_; ++i)
      for (std::size_t k = 0; k < m_; ++k) B[i * m_ + k] = cols_[basis_[k]].a[i];
    binv_.assign(m_ * m_, 0.0);
    for (std::size_t i = 0; i < m_; ++i) binv_[i * m_ + i] = 1.0;
    for (std::size_t c = 0; c < m_; ++c) {
      std::size_t piv = c;
      for (std::size_t r = c + 1; r < m_; ++r)
        if (std::abs(B[r * m_ + c]) > std::abs(B[piv * m_ + c])) piv = r;
      if (std::abs(B[piv * m_ + c]) < 1e-14) throw std::runtime_error("lp: singular basis");
      if (piv != c)
        for (std::size_t k = 0; k < m_; ++k) {
          std::swap(B[piv * m_ + k], B[c * m_ + k]);
          std::swap(binv_[piv * m_ + k], binv_[c * m_ + k]);
        }
      double d = B[c * m_ + c];
      for (std::size_t k = 0; k < m_; ++k) {
        B[c * m_ + k] /= d;
        binv_[c * m_ + k] /= d;
      }
      for (std::size_t r = 0; r < m_; ++r) {
        if (r == c) continue;
        double f = B[r * m_ + c];
        if (f == 0.0) continue;
        for (std::size_t k = 0; k < m_; ++k) {
          B[r * m_ + k] -= f * B[c * m_ + k];
          binv_[r * m_ + k] -= f * binv_[c * m_ + k];
        }
      }
    }
    xb_.assign(m_, 0.0);
    for (std::size_t i = 0; i < m_; ++i)
      for (std::size_t k = 0; k < m_; ++k) xb_[i] += binv_[i * m_ + k] * b_[k];
    for (double& v : xb_)
      if (v < 0.0 && v > -1e-11) v = 0.0;
    since_refactor_ = 0;
  }

  std::vector<double> duals(bool phase1) const {
    std::vector<double> y(m_, 0.0);
    for (std::size_t i = 0; i < m_; ++i) {
      double cb = phase_cost(basis_[i], phase1);
      if (cb == 0.0) continue;
      for (std::size_t k = 0; k < m_; ++k) y[k] += cb * binv_[i * m_ + k];
    }
    return y;
  }

  std::vector<double> ftran(const std::vector<double>& a) const {
    std::vector<double> r(m_, 0.0);
    for (std::size_t i = 0; i < m_; ++i) {
      double s = 0.0;
      for (std::size_t k = 0; k < m_; ++k) s += binv_[i * m_ + k] * a[k];
      r[i] = s;
    }
    return r;
  }

  void pivot(std::size_t r, std::size_t j, const std::vector<double>& alpha) {
    double ar = alpha[r];
    double step = xb_[r] / ar;
    for (std::size_t i = 0; i < m_; ++i) {
      if (i == r) continue;
      xb_[i] -= step * alpha[i];
      if (xb_[i] < 0.0 && xb_[i] > -1e-11) xb_[i] = 0.0;
    }
    xb_[r] = step;
    for (std::size_t k = 0; k < m_; ++k) binv_[r * m_ + k] /= ar;
    for (std::size_t i = 0; i < m_; ++i) {
      if (i == r || alpha[i] == 0.0) continue;
      double f = alpha[i];
      for (std::size_t k = 0; k < m_; ++k) binv_[i * m_ + k] -= f * binv_[r * m_ + k];
    }
    basis_[r] = j;
    if (++since_refactor_ >= 64) refactor();
  }

  Status iterate(bool phase1, int max_iter) {
    std::vector<char> in_basis(cols_.size(), 0);
    for (auto j : basis_) in_basis[j] = 1;
    int degenerate = 0;
    bool bland = false;
    for (int it = 0; it < max_iter; ++it) {
      auto y = duals(phase1);
      // once stalling is seen, stay on Bland's rule: tiny nonzero steps can otherwise cycle in floating point
      if (degenerate > int(2 * m_ + 20) || it > int(50 * m_ + 2000)) bland = true;
      std::size_t enter = cols_.size();
      double best = kCostTol;
      for (std::size_t j = 0; j < cols_.size(); ++j) {
        if (in_basis[j] || cols_[j].kind == Kind::artificial) continue;
        double d = phase_cost(j, phase1), mag = std::abs(d);
        const auto& a = cols_[j].a;
        for (std::size_t k = 0; k < m_; ++k) {
          d -= y[k] * a[k];
          mag += std::abs(y[k] * a[k]);
        }
        // reduced costs below round-off of their own sum are noise (duplicate columns otherwise 2-cycle)
        if (d <= kCostTol * 10.0 * (1.0 + mag)) continue;
        double scale = 1.0;
        for (double v : a) scale = std::max(scale, std::abs(v));
        d /= scale;
        if (d > best) {
          best = d;
          enter = j;
          if (bland) break;
        }
      }
      if (enter == cols_.size()) return Status::optimal;
      auto alpha = ftran(cols_[enter].a);
      std::size_t leave = m_;
      double ratio = 0.0, bestpiv = 0.0;
      for (std::size_t i = 0; i < m_; ++i) {
        double ai = alpha[i];
        bool art = cols_[basis_[i]].kind == Kind::artificial && !phase1;
        if (art && std::abs(ai) > kPivTol) {
          // keep zero-level artificials at zero by pivoting them out
          if (leave == m_ || ratio > 0.0 || std::abs(ai) > bestpiv) {
            leave = i;
            ratio = 0.0;
            bestpiv = std::abs(ai);
          }
          continue;
        }
        if (ai <= kPivTol) continue;
        double q = std::max(0.0, xb_[i]) / ai;
        bool take = false;
        if (leave == m_) take = true;
        else if (q < ratio - 1e-12) take = true;
        else if (q <= ratio + 1e-12) {
          if (bland) take = basis_[i] < basis_[leave];
          else take = ai > bestpiv;
        }
        if (take) {
          leave = i;
          ratio = q;
          bestpiv = std::abs(ai);
        }
      }
      if (leave == m_) return Status::unbounded;
      if (alpha[leave] < 0.0) {
        // artificial leaving on a negative pivot: flip its row sign so the step stays at zero
        xb_[leave] = 0.0;
      }
      degenerate = ratio <= 1e-12 ? degenerate + 1 : 0;
      in_basis[basis_[leave]] = 0;
      in_basis[enter] = 1;
      pivot(leave, enter, alpha);
    }
    return Status::iteration_limit;
  }

  void drive_out_artificials() {
    std::vector<char> in_basis(cols_.size(), 0);
    for (auto j : basis_) in_basis[j] = 1;
    for (std::size_t r = 0; r < m_; ++r) {
      if (cols_[basis_[r]].kind != Kind::artificial) continue;
      for (std::size_t j = 0; j < cols_.size(); ++j) {
        if (in_basis[j] || cols_[j].kind == Kind::artificial) continue;
        auto alpha = ftran(cols_[j].a);
        if (std::abs(alpha[r]) > 1e-7) {
          xb_[r] = 0.0;
          in_basis[basis_[r]] = 0;
          in_basis[j] = 1;
          pivot(r, j, alpha);
          break;
        }
      }
    }
    refactor();
  }

  std::size_t m_;
  std::vector<Sense> sense_;
  std::vector<double> sign_, b_;
  std::vector<Column> cols_;
  std::vector<std::size_t> user_;
  std::vector<std::size_t> basis_;
  std::vector<double> binv_, xb_;
  bool started_ = false;
  int phase_ = 1;
  int since_refactor_ = 0;
};

}  // namespace typeflow::lp
