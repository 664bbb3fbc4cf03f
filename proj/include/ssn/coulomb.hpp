#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "ssn/errors.hpp"
#include "ssn/scd_map.hpp"
#include "ssn/subspace.hpp"

namespace ssn {

/// Point on the graph of the 3-dimensional contact cell mapping:
/// displacement v (v12 tangential, v3 normal), tangential force g,
/// normal reaction theta <= 0.
struct CellGraphPoint {
  Eigen::Vector3d v;
  Eigen::Vector2d g;
  double theta = 0.0;

  Eigen::Vector3d y() const { return Eigen::Vector3d(g(0), g(1), theta); }

  double norm() const { return std::sqrt(v.squaredNorm() + g.squaredNorm() + theta * theta); }
};

/// Contact states of a node (rows/columns of the stratification table):
/// L no contact, M1 strong-contact sliding, M2 weak-contact sliding,
/// M3plus strong sticking, M3minus weak sticking, M4 the origin.
enum class Stratum { L, M1, M2, M3plus, M3minus, M4 };

inline const char* stratum_name(Stratum s) {
  switch (s) {
    case Stratum::L: return "L";
    case Stratum::M1: return "M1";
    case Stratum::M2: return "M2";
    case Stratum::M3plus: return "M3p";
    case Stratum::M3minus: return "M3m";
    case Stratum::M4: return "M4";
  }
  return "?";
}

/// Checks the graph equations at p; returns the largest scaled violation.
inline double cell_graph_residual(const CellGraphPoint& p, double friction) {
  double scale = 1.0 + p.norm();
  double r = 0.0;
  r = std::max(r, -p.v(2));          // v3 >= 0
  r = std::max(r, p.theta);          // theta <= 0
  r = std::max(r, std::abs(p.v(2) * p.theta) / scale);
  Eigen::Vector2d v12 = p.v.head<2>();
  double nv = v12.norm();
  if (nv > 1e-10 * scale) {
    // sliding: g = -F theta v12/|v12|
    r = std::max(r, (p.g - (-friction * p.theta) * v12 / nv).norm());
  } else {
    // sticking: |g| <= -F theta
    r = std::max(r, p.g.norm() + friction * p.theta);
  }
  return std::max(r, 0.0) / scale;
}

/// Classifies a valid graph point into its stratum.
///
/// Boundary tests use absolute tolerance 1e-10 (1 + |p|); the v12 norm is
/// tested before the |g| = -F theta comparison, so near-boundary points
/// still receive a stratum whose selected subspace is a valid limit.
inline Stratum classify(const CellGraphPoint& p, double friction) {
  double tol = 1e-10 * (1.0 + p.norm());
  if (cell_graph_residual(p, friction) > tol)
    throw GraphViolation("classify: graph residual " +
                         std::to_string(cell_graph_residual(p, friction)) +
                         " exceeds tolerance");
  double nv12 = p.v.head<2>().norm();
  if (p.v(2) > tol) return Stratum::L;
  if (p.theta < -tol) {  // strong contact
    if (nv12 > tol) return Stratum::M1;
    return (p.g.norm() < -friction * p.theta - tol) ? Stratum::M3plus
                                                    : Stratum::M3minus;
  }
  // weak contact
  return (nv12 > tol) ? Stratum::M2 : Stratum::M4;
}

/// Closed-form resolvent of the cell mapping: v = (gamma I + Q~)^{-1}(w).
inline CellGraphPoint cell_resolvent(double gamma, const Eigen::Vector3d& w,
                                     double friction) {
  CellGraphPoint p;
  p.v(2) = std::max(w(2), 0.0) / gamma;
  p.theta = std::min(w(2), 0.0);
  Eigen::Vector2d w12 = w.head<2>();
  double nw = w12.norm();
  double fth = friction * (-p.theta);
  if (nw <= fth)
    p.v.head<2>().setZero();
  else
    p.v.head<2>() = (1.0 - fth / nw) / gamma * w12;
  p.g = w12 - gamma * p.v.head<2>();
  return p;
}

namespace detail {

inline SubspaceBasis basis33(const Eigen::Matrix3d& a, const Eigen::Matrix3d& b) {
  return SubspaceBasis{a, b};
}

inline SubspaceBasis rge_i3_0() {
  return basis33(Eigen::Matrix3d::Identity(), Eigen::Matrix3d::Zero());
}

inline SubspaceBasis rge_0_i3() {
  return basis33(Eigen::Matrix3d::Zero(), Eigen::Matrix3d::Identity());
}

/// Scaled (well-conditioned) basis of the sliding-stratum subspace, primal or
/// adjoint form.  The raw tangent-space representation blows up as v12 -> 0;
/// this one stays bounded.
inline SubspaceBasis m1_basis(const CellGraphPoint& p, double friction,
                              SubspaceSide side) {
  Eigen::Vector2d v12 = p.v.head<2>();
  double r = v12.norm();
  Eigen::Vector2d e = v12 / r;
  Eigen::Matrix2d pr = e * e.transpose();
  Eigen::Matrix2d i2 = Eigen::Matrix2d::Identity();
  double denom = r - friction * p.theta;  // > 0 since theta < 0
  Eigen::Matrix2d top = (r / denom) * i2 - (friction * p.theta / denom) * pr;
  Eigen::Matrix2d curv = (-friction * p.theta / denom) * (i2 - pr);

  Eigen::Matrix3d a = Eigen::Matrix3d::Zero();
  Eigen::Matrix3d b = Eigen::Matrix3d::Zero();
  a.topLeftCorner<2, 2>() = top;
  b.topLeftCorner<2, 2>() = curv;
  b(2, 2) = 1.0;
  if (side == SubspaceSide::Primal) {
    b.block<2, 1>(0, 2) = -friction * e;
  } else {
    a.block<1, 2>(2, 0) = friction * e.transpose();
  }
  return basis33(a, b);
}

}  // namespace detail

/// Which limit subspace to select at weak sticking points; the first form is
/// the one the Newton step uses by default.
enum class M3minusSelection { ForceRange, SlidingLimit };

/// Selected element of S Q~ (primal) or S* Q~ (dual) at a graph point.
///
/// L, M2, M4 -> rge(I3,0); M3plus, M3minus -> rge(0,I3); M1 -> the scaled
/// sliding basis.  At the non-smooth strata (M2, M3minus, M4) these are fixed
/// limit-subspace selections.
inline SubspaceBasis cell_subspace(
    const CellGraphPoint& p, double friction, SubspaceSide side,
    M3minusSelection m3m = M3minusSelection::ForceRange) {
  switch (classify(p, friction)) {
    case Stratum::L:
    case Stratum::M2:
    case Stratum::M4:
      return detail::rge_i3_0();
    case Stratum::M3plus:
      return detail::rge_0_i3();
    case Stratum::M3minus:
      if (m3m == M3minusSelection::ForceRange) return detail::rge_0_i3();
      {
        // limit from the sliding stratum, direction g/|g|
        Eigen::Vector2d e = p.g / p.g.norm();
        Eigen::Matrix2d pr = e * e.transpose();
        Eigen::Matrix3d a = Eigen::Matrix3d::Zero();
        Eigen::Matrix3d b = Eigen::Matrix3d::Zero();
        a.topLeftCorner<2, 2>() = pr;
        b.topLeftCorner<2, 2>() = Eigen::Matrix2d::Identity() - pr;
        b(2, 2) = 1.0;
        if (side == SubspaceSide::Primal)
          b.block<2, 1>(0, 2) = -friction * e;
        else
          a.block<1, 2>(2, 0) = friction * e.transpose();
        return detail::basis33(a, b);
      }
    case Stratum::M1:
      return detail::m1_basis(p, friction, side);
  }
  throw Error("cell_subspace: unreachable");
}

/// Full collection of primal limit subspaces at the non-smooth strata
/// (verification device; the solver uses single selections only).
/// At M4 the alpha/w family is sampled on a uniform grid controlled by
/// `samples`.
inline std::vector<SubspaceBasis> enumerate_limit_subspaces(
    const CellGraphPoint& p, double friction, int samples) {
  Stratum s = classify(p, friction);
  std::vector<SubspaceBasis> out;
  Eigen::Matrix2d i2 = Eigen::Matrix2d::Identity();
  auto family = [&](double alpha, const Eigen::Vector2d& w) {
    Eigen::Matrix3d a = Eigen::Matrix3d::Zero();
    Eigen::Matrix3d b = Eigen::Matrix3d::Zero();
    a.topLeftCorner<2, 2>() = (1.0 - alpha) * i2 + alpha * w * w.transpose();
    b.topLeftCorner<2, 2>() = alpha * (i2 - w * w.transpose());
    b.block<2, 1>(0, 2) = -friction * w;
    b(2, 2) = 1.0;
    return detail::basis33(a, b);
  };
  switch (s) {
    case Stratum::M2: {
      out.push_back(detail::rge_i3_0());
      out.push_back(family(0.0, p.v.head<2>().normalized()));
      break;
    }
    case Stratum::M3minus: {
      out.push_back(detail::rge_0_i3());
      out.push_back(family(1.0, p.g.normalized()));
      break;
    }
    case Stratum::M4: {
      out.push_back(detail::rge_i3_0());
      out.push_back(detail::rge_0_i3());
      int na = std::max(samples, 1);
      for (int ia = 0; ia <= na; ++ia) {
        double alpha = static_cast<double>(ia) / na;
        for (int iw = 0; iw < na; ++iw) {
          double phi = 2.0 * M_PI * iw / na;
          out.push_back(family(alpha, Eigen::Vector2d(std::cos(phi), std::sin(phi))));
        }
      }
      break;
    }
    default:
      throw WrongStratum(
          "enumerate_limit_subspaces: stratum has a singleton collection");
  }
  return out;
}

/// Product mapping: p contact cells followed by a zero-map tail,
/// Q(u) = prod_i Q~(u^i) x {0}.
class CoulombProductMap final : public ScdMap {
 public:
  CoulombProductMap(int cells, int tail_dim, double friction,
                    M3minusSelection m3m = M3minusSelection::ForceRange)
      : cells_(cells), tail_(tail_dim), friction_(friction), m3m_(m3m) {}

  int cells() const { return cells_; }
  int tail_dim() const { return tail_; }
  double friction() const { return friction_; }

  int dim() const override { return 3 * cells_ + tail_; }

  Eigen::VectorXd resolvent(double gamma, const Eigen::VectorXd& w) const override {
    Eigen::VectorXd v(dim());
    for (int i = 0; i < cells_; ++i) {
      CellGraphPoint c = cell_resolvent(gamma, w.segment<3>(3 * i), friction_);
      v.segment<3>(3 * i) = c.v;
    }
    v.tail(tail_) = w.tail(tail_) / gamma;
    return v;
  }

  double graph_residual(const Eigen::VectorXd& x,
                        const Eigen::VectorXd& y) const override {
    double r = 0.0;
    for (int i = 0; i < cells_; ++i)
      r = std::max(r, cell_graph_residual(cell_point(x, y, i), friction_));
    double scale = 1.0 + x.tail(tail_).norm();
    r = std::max(r, y.tail(tail_).norm() / scale);
    return r;
  }

  CellGraphPoint cell_point(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                            int i) const {
    CellGraphPoint c;
    c.v = x.segment<3>(3 * i);
    c.g = y.segment<2>(3 * i);
    c.theta = y(3 * i + 2);
    return c;
  }

  SubspaceBasis select_subspace(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                                SubspaceSide side) const override {
    std::vector<SubspaceBasis> blocks;
    blocks.reserve(cells_);
    for (int i = 0; i < cells_; ++i)
      blocks.push_back(cell_block(x, y, i, side));
    return product_blocks(blocks, tail_);
  }

  void select_subspace_sparse(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                              SubspaceSide side, SpMat& first,
                              SpMat& second) const override {
    const int n = dim();
    std::vector<Eigen::Triplet<double>> ta, tb;
    ta.reserve(9 * cells_ + tail_);
    tb.reserve(9 * cells_);
    for (int i = 0; i < cells_; ++i) {
      SubspaceBasis blk = cell_block(x, y, i, side);
      for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) {
          if (blk.a(r, c) != 0.0)
            ta.emplace_back(3 * i + r, 3 * i + c, blk.a(r, c));
          if (blk.b(r, c) != 0.0)
            tb.emplace_back(3 * i + r, 3 * i + c, blk.b(r, c));
        }
    }
    for (int i = 3 * cells_; i < n; ++i) ta.emplace_back(i, i, 1.0);
    first.resize(n, n);
    second.resize(n, n);
    first.setFromTriplets(ta.begin(), ta.end());
    second.setFromTriplets(tb.begin(), tb.end());
  }

  /// Per-cell stratum counts at a graph point (x, y).
  std::array<int, 6> stratum_census(const Eigen::VectorXd& x,
                                    const Eigen::VectorXd& y) const {
    std::array<int, 6> census{};
    for (int i = 0; i < cells_; ++i) {
      Stratum s = classify(cell_point(x, y, i), friction_);
      ++census[static_cast<int>(s)];
    }
    return census;
  }

 private:
  SubspaceBasis cell_block(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                           int i, SubspaceSide side) const {
    try {
      return cell_subspace(cell_point(x, y, i), friction_, side, m3m_);
    } catch (const GraphViolation& e) {
      throw GraphViolation("cell " + std::to_string(i) + ": " + e.what());
    }
  }

  int cells_;
  int tail_;
  double friction_;
  M3minusSelection m3m_;
};

}  // namespace ssn
