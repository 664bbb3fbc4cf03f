#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <vector>

#include "ssn/scd_map.hpp"
#include "ssn/subspace.hpp"

namespace ssn {
namespace oracles {

/// Unit directions in R^{2n} obtained from actual pairs of graph points at
/// distance <= radius from the base point (finite-radius tangent surrogate).
struct TangentSample {
  Eigen::VectorXd x_base;
  Eigen::VectorXd y_base;
  std::vector<Eigen::VectorXd> directions;  // unit vectors, (dx, dy) stacked
  double radius = 0.0;
};

/// Samples nearby graph points by perturbing in w-space and re-projecting
/// through the resolvent (the resolvent is total and single-valued, so every
/// sample is a valid graph point).
inline TangentSample sample_graph_directions(const ScdMap& map,
                                             const Eigen::VectorXd& x_base,
                                             const Eigen::VectorXd& y_base,
                                             double radius, int count,
                                             unsigned seed = 7) {
  const int n = map.dim();
  const double gamma = 1.0;
  TangentSample out{x_base, y_base, {}, radius};
  Eigen::VectorXd w_base = gamma * x_base + y_base;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  while (static_cast<int>(out.directions.size()) < count) {
    Eigen::VectorXd delta(n);
    for (int i = 0; i < n; ++i) delta(i) = gauss(rng);
    delta *= (radius / 4.0) / delta.norm();
    // shrink until the sampled point is inside the radius ball
    for (int shrink = 0; shrink < 60; ++shrink) {
      Eigen::VectorXd v = map.resolvent(gamma, w_base + delta);
      Eigen::VectorXd y = (w_base + delta) - gamma * v;
      Eigen::VectorXd t(2 * n);
      t.head(n) = v - x_base;
      t.tail(n) = y - y_base;
      double dist = t.norm();
      if (dist == 0.0) break;
      if (dist <= radius) {
        out.directions.push_back(t / dist);
        break;
      }
      delta *= 0.5;
    }
  }
  return out;
}

/// Largest distance of any sampled direction from the subspace:
/// max |(I - P_L) t| over unit tangents t.
inline double subspace_deviation(const TangentSample& sample,
                                 const SubspaceBasis& l) {
  Eigen::MatrixXd proj = projection_matrix(l);
  double dev = 0.0;
  for (const auto& t : sample.directions)
    dev = std::max(dev, (t - proj * t).norm());
  return dev;
}

/// Sampled surrogate of the semismooth* modulus at a base graph point:
/// max over graph points (x,y) within the radius and orthonormal pairs
/// (y*,x*) of the dual subspace selected at (x,y) of
/// |<x*, x-x0> - <y*, y-y0>| / |(x,y)-(x0,y0)|.
inline double semismooth_star_ratio(const ScdMap& map,
                                    const Eigen::VectorXd& x_base,
                                    const Eigen::VectorXd& y_base,
                                    double radius, int count,
                                    unsigned seed = 7) {
  const int n = map.dim();
  TangentSample sample;  // reuse the sampler but keep distances
  const double gamma = 1.0;
  Eigen::VectorXd w_base = gamma * x_base + y_base;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  double worst = 0.0;
  int accepted = 0;
  while (accepted < count) {
    Eigen::VectorXd delta(n);
    for (int i = 0; i < n; ++i) delta(i) = gauss(rng);
    delta *= (radius / 4.0) / delta.norm();
    Eigen::VectorXd v, y;
    double dist = 0.0;
    bool ok = false;
    for (int shrink = 0; shrink < 60; ++shrink) {
      v = map.resolvent(gamma, w_base + delta);
      y = (w_base + delta) - gamma * v;
      dist = std::sqrt((v - x_base).squaredNorm() + (y - y_base).squaredNorm());
      if (dist == 0.0) break;
      if (dist <= radius) {
        ok = true;
        break;
      }
      delta *= 0.5;
    }
    if (!ok) continue;
    ++accepted;
    SubspaceBasis l = map.select_subspace(v, y, SubspaceSide::Dual);
    Eigen::MatrixXd q = detail::orthonormalize(l.stacked());
    for (int j = 0; j < q.cols(); ++j) {
      Eigen::VectorXd ystar = q.col(j).head(n);
      Eigen::VectorXd xstar = q.col(j).tail(n);
      double bracket =
          std::abs(xstar.dot(v - x_base) - ystar.dot(y - y_base));
      worst = std::max(worst, bracket / dist);
    }
  }
  return worst;
}

/// Scaled residual of y in Q(x); zero iff (x,y) lies on the graph.
inline double check_inclusion(const ScdMap& map, const Eigen::VectorXd& x,
                              const Eigen::VectorXd& y) {
  return map.graph_residual(x, y);
}

/// Central finite-difference Jacobian of a vector map.
template <class F>
Eigen::MatrixXd fd_jacobian(F&& f, const Eigen::VectorXd& x, double h = 1e-6) {
  Eigen::VectorXd fx = f(x);
  Eigen::MatrixXd jac(fx.size(), x.size());
  for (int j = 0; j < x.size(); ++j) {
    Eigen::VectorXd xp = x, xm = x;
    xp(j) += h;
    xm(j) -= h;
    jac.col(j) = (f(xp) - f(xm)) / (2.0 * h);
  }
  return jac;
}

}  // namespace oracles
}  // namespace ssn
