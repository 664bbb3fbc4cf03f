#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <cmath>
#include <functional>
#include <memory>
#include <utility>

#include "ssn/errors.hpp"
#include "ssn/subspace.hpp"

namespace ssn {

using SpMat = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Interface an SCD mapping instance implements: resolvent evaluation and
/// derivative-subspace selection at graph points.
///
/// Contract: v = resolvent(gamma, w) implies (v, w - gamma v) lies on the
/// graph, with graph_residual(v, w - gamma v) <= 1e-10 (1 + |w|).
/// select_subspace returns a basis of one element of S Q(x,y) (primal) or
/// S* Q(x,y) (dual); at non-smooth graph points a designated limit subspace
/// is returned (documented per instance).
class ScdMap {
 public:
  virtual ~ScdMap() = default;

  virtual int dim() const = 0;

  virtual Eigen::VectorXd resolvent(double gamma, const Eigen::VectorXd& w) const = 0;

  /// Scaled residual of the graph equations at (x, y); zero iff y in Q(x).
  virtual double graph_residual(const Eigen::VectorXd& x,
                                const Eigen::VectorXd& y) const = 0;

  virtual SubspaceBasis select_subspace(const Eigen::VectorXd& x,
                                        const Eigen::VectorXd& y,
                                        SubspaceSide side) const = 0;

  /// Sparse form of select_subspace for large structured instances.
  /// Default densifies; structured maps override.
  virtual void select_subspace_sparse(const Eigen::VectorXd& x,
                                      const Eigen::VectorXd& y, SubspaceSide side,
                                      SpMat& first, SpMat& second) const {
    SubspaceBasis l = select_subspace(x, y, side);
    first = l.a.sparseView();
    second = l.b.sparseView();
  }
};

/// Normal cone to R_+ as a one-dimensional reference instance.
///
/// Resolvent: max(w,0)/gamma.  Subspaces: rge(1,0) on the x-axis ray (x>0),
/// rge(0,1) on the y-axis ray (y<0), and rge(1,0) at the corner (0,0),
/// matching the selection convention used for weak contact.
class NormalConeRPlus final : public ScdMap {
 public:
  int dim() const override { return 1; }

  Eigen::VectorXd resolvent(double gamma, const Eigen::VectorXd& w) const override {
    Eigen::VectorXd v(1);
    v(0) = std::max(w(0), 0.0) / gamma;
    return v;
  }

  double graph_residual(const Eigen::VectorXd& x,
                        const Eigen::VectorXd& y) const override {
    double scale = 1.0 + std::abs(x(0)) + std::abs(y(0));
    double r = std::max(std::max(-x(0), y(0)), std::abs(x(0) * y(0)) / scale);
    return std::max(r, 0.0) / scale;
  }

  SubspaceBasis select_subspace(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                                SubspaceSide) const override {
    double tol = 1e-10 * (1.0 + std::abs(x(0)) + std::abs(y(0)));
    if (graph_residual(x, y) > tol)
      throw GraphViolation("NormalConeRPlus: point not on graph");
    Eigen::MatrixXd one = Eigen::MatrixXd::Ones(1, 1);
    Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(1, 1);
    // Both rays are self-dual, so the same basis serves primal and dual.
    if (x(0) > tol) return SubspaceBasis{one, zero};
    if (y(0) < -tol) return SubspaceBasis{zero, one};
    return SubspaceBasis{one, zero};
  }
};

/// Single-valued continuously differentiable map as an SCD instance
/// (test device).  Subspace is rge(I, J(x)) with J the Jacobian.
class SmoothMap final : public ScdMap {
 public:
  using Func = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;
  using Jac = std::function<Eigen::MatrixXd(const Eigen::VectorXd&)>;

  SmoothMap(int n, Func f, Jac jac) : n_(n), f_(std::move(f)), jac_(std::move(jac)) {}

  int dim() const override { return n_; }

  /// Solves gamma v + f(v) = w by damped Newton.
  Eigen::VectorXd resolvent(double gamma, const Eigen::VectorXd& w) const override {
    Eigen::VectorXd v = w / gamma;
    double scale = 1.0 + w.norm();
    for (int it = 0; it < 100; ++it) {
      Eigen::VectorXd r = gamma * v + f_(v) - w;
      if (r.norm() <= 1e-14 * scale) return v;
      Eigen::MatrixXd m =
          gamma * Eigen::MatrixXd::Identity(n_, n_) + jac_(v);
      Eigen::VectorXd dv = m.partialPivLu().solve(-r);
      double alpha = 1.0;
      double rn = r.norm();
      while (alpha > 1e-8 &&
             (gamma * (v + alpha * dv) + f_(v + alpha * dv) - w).norm() >= rn)
        alpha *= 0.5;
      v += alpha * dv;
    }
    Eigen::VectorXd r = gamma * v + f_(v) - w;
    if (r.norm() <= 1e-10 * scale) return v;
    throw NoConvergence("SmoothMap::resolvent: inner Newton did not converge");
  }

  double graph_residual(const Eigen::VectorXd& x,
                        const Eigen::VectorXd& y) const override {
    return (y - f_(x)).norm() / (1.0 + x.norm() + y.norm());
  }

  SubspaceBasis select_subspace(const Eigen::VectorXd& x, const Eigen::VectorXd&,
                                SubspaceSide side) const override {
    Eigen::MatrixXd j = jac_(x);
    Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n_, n_);
    if (side == SubspaceSide::Primal) return SubspaceBasis{id, j};
    // Adjoint graph: pairs (y*, x*) with x* = J^T y*.
    return SubspaceBasis{id, j.transpose()};
  }

 private:
  int n_;
  Func f_;
  Jac jac_;
};

/// Zero map f = 0 (resolvent w/gamma, subspace rge(I,0)).
inline std::unique_ptr<SmoothMap> zero_map(int n) {
  return std::make_unique<SmoothMap>(
      n, [n](const Eigen::VectorXd&) { return Eigen::VectorXd::Zero(n); },
      [n](const Eigen::VectorXd&) { return Eigen::MatrixXd::Zero(n, n); });
}

}  // namespace ssn
