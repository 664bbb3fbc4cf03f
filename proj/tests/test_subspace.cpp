#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <random>

#include "ssn/subspace.hpp"

using Eigen::MatrixXd;
using namespace ssn;

namespace {

MatrixXd random_matrix(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  MatrixXd m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = gauss(rng);
  return m;
}

SubspaceBasis random_basis(int n, std::mt19937_64& rng) {
  for (;;) {
    try {
      return make_basis(random_matrix(n, rng), random_matrix(n, rng));
    } catch (const RankDeficient&) {
    }
  }
}

}  // namespace

TEST(Subspace, RankCheckRejectsDegenerateBasis) {
  MatrixXd a = MatrixXd::Zero(2, 2);
  MatrixXd b = MatrixXd::Zero(2, 2);
  a(0, 0) = 1.0;  // second column of [a;b] vanishes
  EXPECT_THROW(make_basis(a, b), RankDeficient);
  b(1, 1) = 1.0;
  EXPECT_NO_THROW(make_basis(a, b));
}

TEST(Subspace, ProjectionIsIdempotentAndSpansBasis) {
  std::mt19937_64 rng(11);
  SubspaceBasis l = random_basis(4, rng);
  MatrixXd p = projection_matrix(l);
  EXPECT_LT((p * p - p).norm(), 1e-12);
  EXPECT_LT((p - p.transpose()).norm(), 1e-12);
  MatrixXd s = l.stacked();
  EXPECT_LT((p * s - s).norm(), 1e-10 * s.norm());
}

TEST(Subspace, MetricIsBasisIndependent) {
  std::mt19937_64 rng(12);
  SubspaceBasis l = random_basis(3, rng);
  // reparametrize with an invertible T: same subspace, different basis
  MatrixXd t = random_matrix(3, rng);
  while (std::abs(t.determinant()) < 0.1) t = random_matrix(3, rng);
  SubspaceBasis l2 = make_basis(l.a * t, l.b * t);
  EXPECT_LT(subspace_metric(l, l2), 1e-10);
  SubspaceBasis other = random_basis(3, rng);
  double d = subspace_metric(l, other);
  EXPECT_GT(d, 0.0);
  EXPECT_LE(d, 1.0 + 1e-12);
}

TEST(Subspace, DualOfScalarRayExample) {
  // L = rge(2,1) in R^2: the complement is span{(1,-2)}, so
  // L* = {(-v*,u*)} = span{(2,1)} and L is a fixed point of the dual map
  MatrixXd a(1, 1), b(1, 1);
  a << 2.0;
  b << 1.0;
  SubspaceBasis l = make_basis(a, b);
  EXPECT_LT(subspace_metric(dual_subspace(l), l), 1e-12);
  // a ray that is not fixed: rge(1,0) maps to rge(0,1) read as (y*,x*) pairs,
  // i.e. the same span in stacked coordinates is NOT preserved
  MatrixXd oa(1, 1), ob(1, 1);
  oa << 1.0;
  ob << 0.0;
  SubspaceBasis xray = make_basis(oa, ob);
  SubspaceBasis dual = dual_subspace(xray);
  EXPECT_NEAR(std::abs(dual.a(0, 0)), 1.0, 1e-12);
  EXPECT_NEAR(dual.b(0, 0), 0.0, 1e-12);
}

TEST(Subspace, DualIsInvolution) {
  std::mt19937_64 rng(13);
  for (int n : {1, 2, 5}) {
    SubspaceBasis l = random_basis(n, rng);
    SubspaceBasis ddual = dual_subspace(dual_subspace(l));
    EXPECT_LT(subspace_metric(l, ddual), 1e-10) << "n=" << n;
  }
}

TEST(Subspace, DualIsIsometry) {
  std::mt19937_64 rng(14);
  for (int trial = 0; trial < 10; ++trial) {
    SubspaceBasis l1 = random_basis(3, rng);
    SubspaceBasis l2 = random_basis(3, rng);
    double d = subspace_metric(l1, l2);
    double dstar = subspace_metric(dual_subspace(l1), dual_subspace(l2));
    EXPECT_NEAR(d, dstar, 1e-9);
  }
}

TEST(Subspace, DualAnnihilatesPrimal) {
  // every (x,y) in L and (y*,x*) in L* satisfy <x*,x> = <y*,y>
  std::mt19937_64 rng(15);
  SubspaceBasis l = random_basis(4, rng);
  SubspaceBasis dual = dual_subspace(l);
  for (int j = 0; j < 4; ++j)
    for (int k = 0; k < 4; ++k) {
      double lhs = dual.b.col(k).dot(l.a.col(j));   // <x*, x>
      double rhs = dual.a.col(k).dot(l.b.col(j));   // <y*, y>
      EXPECT_NEAR(lhs, rhs, 1e-9);
    }
}

TEST(Subspace, CMatrixOfGraphSubspace) {
  // L = rge(C, I) for a given C must recover C itself
  std::mt19937_64 rng(16);
  MatrixXd c = random_matrix(3, rng);
  SubspaceBasis l = make_basis(c, MatrixXd::Identity(3, 3));
  RegularSubspace reg = c_matrix(l);
  EXPECT_LT((reg.c - c).norm(), 1e-12);
  // basis independence: post-multiply by invertible T
  MatrixXd t = random_matrix(3, rng);
  while (std::abs(t.determinant()) < 0.1) t = random_matrix(3, rng);
  RegularSubspace reg2 = c_matrix(make_basis(c * t, t));
  EXPECT_LT((reg2.c - c).norm(), 1e-9);
}

TEST(Subspace, CMatrixRejectsVerticalSubspace) {
  MatrixXd a = MatrixXd::Identity(2, 2);
  MatrixXd b = MatrixXd::Zero(2, 2);
  EXPECT_THROW(c_matrix(make_basis(a, b)), NotRegular);
}

TEST(Subspace, RegularDualBound) {
  // for regular L, each (y*,x*) in L* obeys |y*| <= |C_L| |x*|
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 10; ++trial) {
    MatrixXd c = random_matrix(3, rng);
    SubspaceBasis l = make_basis(c, MatrixXd::Identity(3, 3));
    double mod = c_matrix(l).modulus();
    SubspaceBasis dual = dual_subspace(l);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int s = 0; s < 5; ++s) {
      Eigen::VectorXd u(3);
      for (int i = 0; i < 3; ++i) u(i) = gauss(rng);
      Eigen::VectorXd ystar = dual.a * u;
      Eigen::VectorXd xstar = dual.b * u;
      EXPECT_LE(ystar.norm(), mod * xstar.norm() + 1e-9);
    }
  }
}

TEST(Subspace, SumRulePrimalAndDualAreConsistent) {
  // primal transform of L and dual transform of L* stay dual to each other
  std::mt19937_64 rng(18);
  SubspaceBasis l = random_basis(3, rng);
  MatrixXd jac = random_matrix(3, rng);
  SubspaceBasis lp = sum_rule_transform(l, jac, SubspaceSide::Primal);
  SubspaceBasis ld =
      sum_rule_transform(dual_subspace(l), jac, SubspaceSide::Dual);
  EXPECT_LT(subspace_metric(dual_subspace(lp), ld), 1e-9);
}

TEST(Subspace, ProductBlocksLayout) {
  MatrixXd a1(1, 1), b1(1, 1), a2(1, 1), b2(1, 1);
  a1 << 1.0;
  b1 << 0.0;
  a2 << 0.0;
  b2 << 1.0;
  SubspaceBasis prod = product_blocks({{a1, b1}, {a2, b2}}, 2);
  ASSERT_EQ(prod.dim(), 4);
  MatrixXd ea = MatrixXd::Zero(4, 4), eb = MatrixXd::Zero(4, 4);
  ea(0, 0) = 1.0;
  eb(1, 1) = 1.0;
  ea(2, 2) = 1.0;  // (I, 0) tail
  ea(3, 3) = 1.0;
  EXPECT_EQ(prod.a, ea);
  EXPECT_EQ(prod.b, eb);
  EXPECT_NO_THROW(make_basis(prod.a, prod.b));
}
