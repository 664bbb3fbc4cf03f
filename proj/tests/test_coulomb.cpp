#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <random>

#include "ssn/coulomb.hpp"
#include "ssn/subspace.hpp"

using Eigen::MatrixXd;
using Eigen::Vector2d;
using Eigen::Vector3d;
using Eigen::VectorXd;
using namespace ssn;

namespace {
constexpr double kF = 0.23;
}

TEST(CoulombCell, ResolventClosedFormExample) {
  CellGraphPoint p = cell_resolvent(1.0, Vector3d(1.0, 0.0, -1.0), kF);
  EXPECT_DOUBLE_EQ(p.v(0), 0.77);
  EXPECT_DOUBLE_EQ(p.v(1), 0.0);
  EXPECT_DOUBLE_EQ(p.v(2), 0.0);
  EXPECT_DOUBLE_EQ(p.g(0), 0.23);
  EXPECT_DOUBLE_EQ(p.g(1), 0.0);
  EXPECT_DOUBLE_EQ(p.theta, -1.0);
}

TEST(CoulombCell, ResolventProducesGraphPoints) {
  // oracle: for any w, (v, w - gamma v) must satisfy the graph equations
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> uw(-10.0, 10.0);
  std::uniform_real_distribution<double> ug(-2.0, 4.0);
  for (int trial = 0; trial < 2000; ++trial) {
    double gamma = std::pow(10.0, ug(rng));
    Vector3d w(uw(rng), uw(rng), uw(rng));
    CellGraphPoint p = cell_resolvent(gamma, w, kF);
    // consistency with w: y components recombine to w
    Vector3d back;
    back.head<2>() = p.g + gamma * p.v.head<2>();
    back(2) = p.theta + gamma * p.v(2);
    EXPECT_LT((back - w).norm(), 1e-12 * (1.0 + w.norm()));
    EXPECT_LE(cell_graph_residual(p, kF), 1e-12 * (1.0 + w.norm()));
  }
}

TEST(CoulombCell, ResolventLipschitzBound) {
  // gamma |v(w) - v(w')| <= sqrt(2 (1 + F^2)) |w - w'|
  std::mt19937_64 rng(22);
  std::uniform_real_distribution<double> uw(-10.0, 10.0);
  const double bound = std::sqrt(2.0 * (1.0 + kF * kF));
  for (int trial = 0; trial < 2000; ++trial) {
    double gamma = std::pow(10.0, std::uniform_real_distribution<double>(-2.0, 4.0)(rng));
    Vector3d w1(uw(rng), uw(rng), uw(rng));
    Vector3d w2(uw(rng), uw(rng), uw(rng));
    Vector3d dv = cell_resolvent(gamma, w1, kF).v - cell_resolvent(gamma, w2, kF).v;
    EXPECT_LE(gamma * dv.norm(), bound * (w1 - w2).norm() * (1.0 + 1e-12));
  }
}

TEST(CoulombCell, GraphIsNotMonotone) {
  // two graph points with a negative pairing: resolvent regularization is
  // essential, a plain projection argument would not apply
  CellGraphPoint p1;
  p1.v = Vector3d(1.0, 0.0, 0.0);
  p1.theta = -2.0 / kF;
  p1.g = Vector2d(2.0, 0.0);  // sliding: g = -F theta e
  CellGraphPoint p2;
  p2.v = Vector3d(2.0, 0.0, 0.0);
  p2.theta = 0.0;
  p2.g = Vector2d::Zero();
  ASSERT_LE(cell_graph_residual(p1, kF), 1e-12);
  ASSERT_LE(cell_graph_residual(p2, kF), 1e-12);
  Vector3d dv = p1.v - p2.v;
  Vector3d dy = p1.y() - p2.y();
  EXPECT_NEAR(dv.dot(dy), -2.0, 1e-12);
}

TEST(CoulombCell, ClassifyAllStrata) {
  CellGraphPoint p;
  p.v = Vector3d(0.3, 0.0, 0.5);
  p.g = Vector2d::Zero();
  p.theta = 0.0;
  EXPECT_EQ(classify(p, kF), Stratum::L);

  p.v = Vector3d(1.0, 0.0, 0.0);
  p.theta = -1.0;
  p.g = Vector2d(kF, 0.0);
  EXPECT_EQ(classify(p, kF), Stratum::M1);

  p.v = Vector3d(1.0, -2.0, 0.0);
  p.theta = 0.0;
  p.g = Vector2d::Zero();
  EXPECT_EQ(classify(p, kF), Stratum::M2);

  p.v = Vector3d::Zero();
  p.theta = -1.0;
  p.g = Vector2d(0.1, 0.0);  // |g| < F
  EXPECT_EQ(classify(p, kF), Stratum::M3plus);

  p.g = Vector2d(0.0, kF);  // |g| = -F theta
  EXPECT_EQ(classify(p, kF), Stratum::M3minus);

  p.theta = 0.0;
  p.g = Vector2d::Zero();
  EXPECT_EQ(classify(p, kF), Stratum::M4);

  p.v = Vector3d(0.0, 0.0, -1.0);
  EXPECT_THROW(classify(p, kF), GraphViolation);
}

TEST(CoulombCell, SubspacesHaveFullRankAndCorrectDuality) {
  // at each stratum, the dual selection equals the dual of the primal one
  std::vector<CellGraphPoint> pts;
  CellGraphPoint p;
  p.v = Vector3d(0.3, -0.1, 0.5); p.g.setZero(); p.theta = 0.0;
  pts.push_back(p);  // L
  p.v = Vector3d(1.0, 0.5, 0.0); p.theta = -2.0;
  p.g = -kF * p.theta * p.v.head<2>().normalized();
  pts.push_back(p);  // M1
  p.v = Vector3d(-0.4, 1.0, 0.0); p.theta = 0.0; p.g.setZero();
  pts.push_back(p);  // M2
  p.v.setZero(); p.theta = -1.5; p.g = Vector2d(0.2, -0.1);
  pts.push_back(p);  // M3plus
  p.g = 1.5 * kF * Vector2d(0.6, 0.8);
  pts.push_back(p);  // M3minus
  p.theta = 0.0; p.g.setZero();
  pts.push_back(p);  // M4

  for (const auto& pt : pts) {
    SubspaceBasis lp = cell_subspace(pt, kF, SubspaceSide::Primal);
    SubspaceBasis ld = cell_subspace(pt, kF, SubspaceSide::Dual);
    EXPECT_NO_THROW(make_basis(lp.a, lp.b));
    EXPECT_NO_THROW(make_basis(ld.a, ld.b));
    // dual_subspace yields (-v*, u*) = (y*, x*) pairs directly
    SubspaceBasis expected = dual_subspace(lp);
    EXPECT_LT(subspace_metric(ld, expected), 1e-9)
        << stratum_name(classify(pt, kF));
  }
}

TEST(CoulombCell, SlidingBasisMatchesTangentSpace) {
  // on the smooth sliding stratum the selected subspace must contain every
  // finite-difference tangent of the graph parametrization w -> (v(w), y(w))
  CellGraphPoint base = cell_resolvent(1.0, Vector3d(2.0, 1.0, -1.0), kF);
  ASSERT_EQ(classify(base, kF), Stratum::M1);
  SubspaceBasis l = cell_subspace(base, kF, SubspaceSide::Primal);
  MatrixXd proj = projection_matrix(l);
  const double h = 1e-6;
  Vector3d w0(2.0, 1.0, -1.0);
  for (int dir = 0; dir < 3; ++dir) {
    Vector3d wp = w0, wm = w0;
    wp(dir) += h;
    wm(dir) -= h;
    CellGraphPoint pp = cell_resolvent(1.0, wp, kF);
    CellGraphPoint pm = cell_resolvent(1.0, wm, kF);
    Eigen::VectorXd t(6);
    t.head<3>() = (pp.v - pm.v) / (2.0 * h);
    t.tail<3>() = (pp.y() - pm.y()) / (2.0 * h);
    t /= t.norm();
    EXPECT_LT((t - proj * t).norm(), 1e-6);
  }
}

TEST(CoulombCell, SlidingBasisStaysBoundedNearWeakContact) {
  // the scaled basis must not blow up as v12 -> 0 with theta < 0 fixed
  for (double r : {1e-2, 1e-6, 1e-10}) {
    CellGraphPoint p;
    p.v = Vector3d(r, 0.0, 0.0);
    p.theta = -1.0;
    p.g = Vector2d(kF, 0.0);
    if (classify(p, kF) != Stratum::M1) continue;  // r below stratum tol
    SubspaceBasis l = detail::m1_basis(p, kF, SubspaceSide::Primal);
    EXPECT_LT(l.a.norm() + l.b.norm(), 10.0) << "r=" << r;
  }
}

TEST(CoulombCell, LimitEnumerations) {
  CellGraphPoint p;
  // M2: two limits, containing the default selection rge(I,0)
  p.v = Vector3d(0.5, 0.5, 0.0);
  p.theta = 0.0;
  p.g.setZero();
  auto lims = enumerate_limit_subspaces(p, kF, 4);
  ASSERT_EQ(lims.size(), 2u);
  EXPECT_LT(subspace_metric(lims[0], cell_subspace(p, kF, SubspaceSide::Primal)),
            1e-12);
  for (const auto& l : lims) EXPECT_NO_THROW(make_basis(l.a, l.b));

  // M3minus: two limits, containing the default rge(0,I)
  p.v.setZero();
  p.theta = -1.0;
  p.g = Vector2d(0.0, kF);
  lims = enumerate_limit_subspaces(p, kF, 4);
  ASSERT_EQ(lims.size(), 2u);
  EXPECT_LT(subspace_metric(lims[0], cell_subspace(p, kF, SubspaceSide::Primal)),
            1e-12);
  // the second limit comes from the sliding stratum along g
  EXPECT_LT(subspace_metric(lims[1], cell_subspace(p, kF, SubspaceSide::Primal,
                                                   M3minusSelection::SlidingLimit)),
            1e-12);
  for (const auto& l : lims) EXPECT_NO_THROW(make_basis(l.a, l.b));

  // M4: grid over the two-parameter family plus the two extremes
  p.theta = 0.0;
  p.g.setZero();
  lims = enumerate_limit_subspaces(p, kF, 6);
  EXPECT_GT(lims.size(), 10u);
  for (const auto& l : lims) EXPECT_NO_THROW(make_basis(l.a, l.b));

  // smooth strata have singleton collections
  p.v = Vector3d(0.0, 0.0, 1.0);
  EXPECT_THROW(enumerate_limit_subspaces(p, kF, 4), WrongStratum);
}

TEST(CoulombProduct, ResolventAndResidual) {
  CoulombProductMap q(2, 3, kF);
  EXPECT_EQ(q.dim(), 9);
  VectorXd w(9);
  w << 1.0, 0.0, -1.0, 0.0, 0.0, 2.0, 3.0, -1.0, 0.5;
  double gamma = 2.0;
  VectorXd v = q.resolvent(gamma, w);
  VectorXd y = w - gamma * v;
  EXPECT_LE(q.graph_residual(v, y), 1e-12);
  // tail behaves as the zero map: v = w/gamma, y = 0
  EXPECT_LT((v.tail(3) - w.tail(3) / gamma).norm(), 1e-14);
  EXPECT_LT(y.tail(3).norm(), 1e-14);
  // first cell matches the scalar resolvent
  CellGraphPoint c = cell_resolvent(gamma, w.head<3>(), kF);
  EXPECT_LT((v.head<3>() - c.v).norm(), 1e-14);
}

TEST(CoulombProduct, SparseSelectionMatchesDense) {
  CoulombProductMap q(3, 2, kF);
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> uw(-3.0, 3.0);
  VectorXd w(q.dim());
  for (int i = 0; i < w.size(); ++i) w(i) = uw(rng);
  double gamma = 1.5;
  VectorXd v = q.resolvent(gamma, w);
  VectorXd y = w - gamma * v;
  for (SubspaceSide side : {SubspaceSide::Primal, SubspaceSide::Dual}) {
    SubspaceBasis dense = q.select_subspace(v, y, side);
    SpMat first, second;
    q.select_subspace_sparse(v, y, side, first, second);
    EXPECT_LT((MatrixXd(first) - dense.a).norm(), 1e-14);
    EXPECT_LT((MatrixXd(second) - dense.b).norm(), 1e-14);
  }
}

TEST(CoulombProduct, StratumCensus) {
  CoulombProductMap q(3, 0, kF);
  VectorXd x(9), y(9);
  // cell 0: L; cell 1: M1; cell 2: M3plus
  x << 0.0, 0.0, 1.0,   1.0, 0.0, 0.0,   0.0, 0.0, 0.0;
  y << 0.0, 0.0, 0.0,   kF, 0.0, -1.0,   0.1, 0.0, -1.0;
  auto census = q.stratum_census(x, y);
  EXPECT_EQ(census[static_cast<int>(Stratum::L)], 1);
  EXPECT_EQ(census[static_cast<int>(Stratum::M1)], 1);
  EXPECT_EQ(census[static_cast<int>(Stratum::M3plus)], 1);
  EXPECT_EQ(census[static_cast<int>(Stratum::M2)], 0);
}
