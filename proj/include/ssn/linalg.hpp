#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <cmath>
#include <string>
#include <vector>

#include "ssn/errors.hpp"

namespace ssn {

using SparseCSR = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Approximation of the largest eigenvalue of a symmetric PSD matrix by
/// exactly five power iterations from the normalized all-ones vector;
/// returns the final Rayleigh quotient.
inline double estimate_gamma(const SparseCSR& a) {
  const int n = static_cast<int>(a.rows());
  Eigen::VectorXd x = Eigen::VectorXd::Ones(n);
  x /= x.norm();
  for (int it = 0; it < 5; ++it) {
    Eigen::VectorXd y = a * x;
    double nrm = y.norm();
    if (nrm == 0.0) return 0.0;
    x = y / nrm;
  }
  return x.dot(a * x);
}

/// Zero fill-in incomplete LU factorization on the sparsity pattern of a.
/// L has unit diagonal; both factors share the CSR pattern of the input.
class Ilu0 {
 public:
  explicit Ilu0(const SparseCSR& a) : lu_(a) {
    lu_.makeCompressed();
    const int n = static_cast<int>(lu_.rows());
    const auto* outer = lu_.outerIndexPtr();
    const auto* inner = lu_.innerIndexPtr();
    auto* vals = lu_.valuePtr();
    diag_.assign(n, -1);
    std::vector<int> pos(n, -1);
    for (int i = 0; i < n; ++i) {
      for (int k = outer[i]; k < outer[i + 1]; ++k) pos[inner[k]] = k;
      for (int k = outer[i]; k < outer[i + 1]; ++k) {
        int col = inner[k];
        if (col >= i) break;
        if (diag_[col] < 0 || vals[diag_[col]] == 0.0)
          throw ZeroPivot("ilu0: zero pivot in row " + std::to_string(col));
        double factor = vals[k] / vals[diag_[col]];
        vals[k] = factor;
        for (int kk = diag_[col] + 1; kk < outer[col + 1]; ++kk) {
          int p = pos[inner[kk]];
          if (p >= 0) vals[p] -= factor * vals[kk];
        }
      }
      for (int k = outer[i]; k < outer[i + 1]; ++k)
        if (inner[k] == i) diag_[i] = k;
      if (diag_[i] < 0 || vals[diag_[i]] == 0.0)
        throw ZeroPivot("ilu0: zero pivot in row " + std::to_string(i));
      for (int k = outer[i]; k < outer[i + 1]; ++k) pos[inner[k]] = -1;
    }
  }

  /// Solves L U x = b by forward/back substitution.
  Eigen::VectorXd solve(const Eigen::VectorXd& b) const {
    const int n = static_cast<int>(lu_.rows());
    const auto* outer = lu_.outerIndexPtr();
    const auto* inner = lu_.innerIndexPtr();
    const auto* vals = lu_.valuePtr();
    Eigen::VectorXd x = b;
    for (int i = 0; i < n; ++i) {
      double s = x(i);
      for (int k = outer[i]; k < outer[i + 1] && inner[k] < i; ++k)
        s -= vals[k] * x(inner[k]);
      x(i) = s;
    }
    for (int i = n - 1; i >= 0; --i) {
      double s = x(i);
      for (int k = diag_[i] + 1; k < outer[i + 1]; ++k)
        s -= vals[k] * x(inner[k]);
      x(i) = s / vals[diag_[i]];
    }
    return x;
  }

 private:
  SparseCSR lu_;
  std::vector<int> diag_;
};

struct GmresResult {
  Eigen::VectorXd x;
  int iters = 0;
  double rel_residual = 0.0;
  bool converged = false;
};

/// Restarted GMRES with an optional right preconditioner.  The stopping test
/// uses the non-preconditioned relative residual |b - A x| / |b|, which with
/// right preconditioning is the residual produced by the Arnoldi recurrence.
///
/// MatVec: VectorXd(const VectorXd&); Precond: VectorXd(const VectorXd&).
template <class MatVec, class Precond>
GmresResult gmres_solve(int n, MatVec&& a, const Eigen::VectorXd& b,
                        Precond&& precond, double tol, int restart,
                        int max_inner) {
  GmresResult res;
  res.x = Eigen::VectorXd::Zero(n);
  double bnorm = b.norm();
  if (bnorm == 0.0) {
    res.converged = true;
    return res;
  }
  const int m = std::min(restart, n);
  Eigen::MatrixXd v(n, m + 1);
  Eigen::MatrixXd z(n, m);  // preconditioned basis vectors
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(m + 1, m);
  Eigen::VectorXd cs(m), sn(m), g(m + 1);

  while (res.iters < max_inner) {
    Eigen::VectorXd r = b - a(res.x);
    double beta = r.norm();
    res.rel_residual = beta / bnorm;
    if (res.rel_residual <= tol) {
      res.converged = true;
      return res;
    }
    v.col(0) = r / beta;
    g.setZero();
    g(0) = beta;
    int j = 0;
    for (; j < m && res.iters < max_inner; ++j) {
      z.col(j) = precond(v.col(j));
      Eigen::VectorXd w = a(z.col(j));
      for (int i = 0; i <= j; ++i) {
        h(i, j) = w.dot(v.col(i));
        w -= h(i, j) * v.col(i);
      }
      h(j + 1, j) = w.norm();
      if (h(j + 1, j) > 0.0) v.col(j + 1) = w / h(j + 1, j);
      // apply accumulated Givens rotations, then form a new one
      for (int i = 0; i < j; ++i) {
        double t = cs(i) * h(i, j) + sn(i) * h(i + 1, j);
        h(i + 1, j) = -sn(i) * h(i, j) + cs(i) * h(i + 1, j);
        h(i, j) = t;
      }
      double denom = std::hypot(h(j, j), h(j + 1, j));
      cs(j) = h(j, j) / denom;
      sn(j) = h(j + 1, j) / denom;
      h(j, j) = denom;
      h(j + 1, j) = 0.0;
      g(j + 1) = -sn(j) * g(j);
      g(j) = cs(j) * g(j);
      ++res.iters;
      res.rel_residual = std::abs(g(j + 1)) / bnorm;
      if (res.rel_residual <= tol) {
        ++j;
        break;
      }
    }
    // solve the triangular least-squares system and update x
    Eigen::VectorXd yk = h.topLeftCorner(j, j)
                             .triangularView<Eigen::Upper>()
                             .solve(g.head(j));
    res.x += z.leftCols(j) * yk;
    if (res.rel_residual <= tol) {
      res.converged = true;
      return res;
    }
  }
  res.converged = false;
  return res;
}

/// GMRES + ILU(0) on a sparse system; throws Stagnation on failure.
inline GmresResult gmres_ilu_solve(const SparseCSR& a, const Eigen::VectorXd& b,
                                   double tol, int restart, int max_inner) {
  Ilu0 precond(a);
  GmresResult res = gmres_solve(
      static_cast<int>(a.rows()),
      [&](const Eigen::VectorXd& x) -> Eigen::VectorXd { return a * x; }, b,
      [&](const Eigen::VectorXd& x) { return precond.solve(x); }, tol, restart,
      max_inner);
  if (!res.converged)
    throw Stagnation("gmres: no convergence within " +
                     std::to_string(max_inner) + " inner iterations");
  return res;
}

}  // namespace ssn
