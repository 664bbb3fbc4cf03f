#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "ssn/errors.hpp"

namespace ssn {

/// Basis (A,B) of an n-dimensional subspace L = rge(A,B) of R^{2n},
/// i.e. L = { (A u, B u) : u in R^n } with [A;B] of full column rank.
struct SubspaceBasis {
  Eigen::MatrixXd a;
  Eigen::MatrixXd b;

  int dim() const { return static_cast<int>(a.rows()); }

  Eigen::MatrixXd stacked() const {
    Eigen::MatrixXd s(2 * dim(), dim());
    s.topRows(dim()) = a;
    s.bottomRows(dim()) = b;
    return s;
  }
};

/// Regular subspace together with its C matrix: L = rge(C, I).
struct RegularSubspace {
  SubspaceBasis basis;
  Eigen::MatrixXd c;

  /// Spectral norm of C, the per-subspace contribution to the regularity modulus.
  double modulus() const { return c.jacobiSvd().singularValues()(0); }
};

namespace detail {

inline constexpr double kRankTol = 1e-10;
inline constexpr double kCondLimit = 1e14;

/// Orthonormal basis of the column span (thin Q of a Householder QR).
inline Eigen::MatrixXd orthonormalize(const Eigen::MatrixXd& m) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(m);
  return qr.householderQ() * Eigen::MatrixXd::Identity(m.rows(), m.cols());
}

inline double spectral_norm(const Eigen::MatrixXd& m) {
  if (m.size() == 0) return 0.0;
  return m.jacobiSvd().singularValues()(0);
}

}  // namespace detail

/// Builds a subspace basis, verifying full column rank of the stacked matrix.
inline SubspaceBasis make_basis(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.rows() != a.cols() || b.rows() != b.cols() || a.rows() != b.rows())
    throw Error("make_basis: a, b must be square of equal size");
  SubspaceBasis l{a, b};
  const int n = l.dim();
  if (n == 0) return l;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(l.stacked());
  qr.setThreshold(detail::kRankTol);
  if (qr.rank() < n)
    throw RankDeficient("make_basis: [a;b] has column rank " +
                        std::to_string(qr.rank()) + " < " + std::to_string(n));
  return l;
}

/// Orthogonal projection matrix onto rge(a,b).
inline Eigen::MatrixXd projection_matrix(const SubspaceBasis& l) {
  Eigen::MatrixXd q = detail::orthonormalize(l.stacked());
  return q * q.transpose();
}

/// Metric on Z_n: spectral norm of the difference of orthogonal projections.
inline double subspace_metric(const SubspaceBasis& l1, const SubspaceBasis& l2) {
  if (l1.dim() != l2.dim())
    throw Error("subspace_metric: dimension mismatch");
  return detail::spectral_norm(projection_matrix(l1) - projection_matrix(l2));
}

/// Dual subspace L* = { (-v*, u*) : (u*, v*) in L^perp }.
///
/// The orthogonal complement is the null space of [a^T b^T]; an orthonormal
/// kernel basis is taken from the right singular vectors.
inline SubspaceBasis dual_subspace(const SubspaceBasis& l) {
  const int n = l.dim();
  Eigen::MatrixXd m(n, 2 * n);
  m.leftCols(n) = l.a.transpose();
  m.rightCols(n) = l.b.transpose();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeFullV);
  // [a;b] has rank n, hence the kernel of m has dimension exactly n.
  Eigen::MatrixXd kernel = svd.matrixV().rightCols(n);
  SubspaceBasis out;
  out.a = -kernel.bottomRows(n);  // -v*
  out.b = kernel.topRows(n);      //  u*
  return out;
}

/// C matrix of a regular subspace: C = a b^{-1}, so that L = rge(C, I).
inline RegularSubspace c_matrix(const SubspaceBasis& l) {
  const int n = l.dim();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(l.b, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  double smin = sv(n - 1);
  double smax = sv(0);
  if (smin <= 0.0 || smax / smin > detail::kCondLimit)
    throw NotRegular("c_matrix: b is singular (condition estimate above limit)");
  Eigen::MatrixXd c = l.a * svd.solve(Eigen::MatrixXd::Identity(n, n));
  return RegularSubspace{l, c};
}

enum class SubspaceSide { Primal, Dual };

/// Sum-rule transformation for L in S(F) or S*(F) under F -> F + h.
///
/// Primal: (a, b) -> (a, jac a + b).  Dual, with (a,b) read as (Y*, X*):
/// (a, b) -> (a, jac^T a + b).
inline SubspaceBasis sum_rule_transform(const SubspaceBasis& l,
                                        const Eigen::MatrixXd& jac,
                                        SubspaceSide side) {
  SubspaceBasis out;
  out.a = l.a;
  if (side == SubspaceSide::Primal)
    out.b = jac * l.a + l.b;
  else
    out.b = jac.transpose() * l.a + l.b;
  return out;
}

/// Block-diagonal assembly of per-block bases with an (I, 0) tail.
inline SubspaceBasis product_blocks(const std::vector<SubspaceBasis>& blocks,
                                    int tail_dim) {
  int n = tail_dim;
  for (const auto& blk : blocks) n += blk.dim();
  SubspaceBasis out;
  out.a = Eigen::MatrixXd::Zero(n, n);
  out.b = Eigen::MatrixXd::Zero(n, n);
  int off = 0;
  for (const auto& blk : blocks) {
    const int m = blk.dim();
    out.a.block(off, off, m, m) = blk.a;
    out.b.block(off, off, m, m) = blk.b;
    off += m;
  }
  if (tail_dim > 0)
    out.a.block(off, off, tail_dim, tail_dim).setIdentity();
  return out;
}

}  // namespace ssn
