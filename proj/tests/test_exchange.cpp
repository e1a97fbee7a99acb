#include <gtest/gtest.h>

#include <random>

#include "typeflow/exchange.hpp"

using namespace typeflow::exchange;

namespace {

Matrix random_orthogonal(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> g;
  Matrix a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = g(rng);
  Eigen::HouseholderQR<Matrix> qr(a);
  return qr.householderQ() * Matrix::Identity(n, n);
}

bool valid(const Matrix& u, int n1, const Index& j) {
  int n = int(u.rows());
  auto jc = complement(j, n);
  Matrix a = select(u, range(0, n1), j), b = select(u, range(n1, n), jc);
  return std::abs(a.determinant()) > 1e-9 && std::abs(b.determinant()) > 1e-9;
}

}  // namespace

TEST(Partition, TwoDimensional) {
  const double r = 1 / std::sqrt(2.0);
  Matrix u(2, 2);
  u << r, r, r, -r;
  auto p = exchange_partition(SubspacePair(u), 1);
  ASSERT_EQ(p.j.size(), 1u);
  EXPECT_TRUE(valid(u, 1, p.j));
  EXPECT_LE(std::max(p.residual1, p.residual2), 1e-12);
}

TEST(Partition, CoordinateSubspace) {
  auto p = exchange_partition(SubspacePair(Matrix::Identity(5, 5)), 2);
  EXPECT_EQ(p.j, (Index{0, 1}));
  EXPECT_EQ(p.jc, (Index{2, 3, 4}));
}

TEST(Partition, RandomAgainstExhaustive) {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 20; ++trial) {
    Matrix u = random_orthogonal(rng, 6);
    auto p = exchange_partition(SubspacePair(u), 3);
    EXPECT_TRUE(valid(u, 3, p.j));
    int ok = 0;
    for_each_subset(6, 3, [&](const Index& j) {
      ok += valid(u, 3, j);
      return false;
    });
    EXPECT_GT(ok, 0);
    // the maps reconstruct every row from the chosen coordinates
    Matrix x = u.topRows(3);
    EXPECT_LE((select(x, range(0, 3), p.j) * p.f1 - x).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(Partition, RejectsBadInput) {
  Matrix m = Matrix::Identity(3, 3);
  m(0, 1) = 0.5;
  EXPECT_THROW(SubspacePair{m}, std::invalid_argument);
  EXPECT_THROW(exchange_partition(SubspacePair(Matrix::Identity(3, 3)), 0), std::domain_error);
}

TEST(Laplace, IdentityAndPermutation) {
  EXPECT_EQ(laplace_certificate(Matrix::Identity(4, 4), {0, 1}), (Index{0, 1}));
  Matrix pm = Matrix::Zero(4, 4);
  int perm[4] = {2, 0, 3, 1};
  for (int i = 0; i < 4; ++i) pm(i, perm[i]) = 1;
  auto l = laplace_certificate(pm, {0, 2});
  EXPECT_EQ(l, (Index{2, 3}));
}

TEST(Laplace, RandomCertificatesAndExpansion) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 20; ++trial) {
    Matrix b(5, 5);
    for (int i = 0; i < 5; ++i)
      for (int j = 0; j < 5; ++j) b(i, j) = g(rng);
    Index h{0, 2};
    auto l = laplace_certificate(b, h);
    auto hc = complement(h, 5), lc = complement(l, 5);
    EXPECT_GT(std::abs(select(b, h, l).determinant()), 1e-12);
    EXPECT_GT(std::abs(select(b, hc, lc).determinant()), 1e-12);
    EXPECT_NEAR(laplace_expansion(b, h), b.determinant(), 1e-10 * (1 + std::abs(b.determinant())));
  }
  EXPECT_THROW(laplace_certificate(Matrix::Zero(3, 3), {0}), std::domain_error);
}
