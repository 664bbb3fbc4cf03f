#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <array>
#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "ssn/errors.hpp"
#include "ssn/linalg.hpp"
#include "ssn/scd_map.hpp"

namespace ssn {

/// Generalized equation 0 in f(x) + Q(x) with smooth f and SCD mapping Q.
struct GeProblem {
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> f;
  std::function<SparseCSR(const Eigen::VectorXd&)> jacobian;
  const ScdMap* q = nullptr;
};

/// Point on the graph of the decoupled mapping G(x,d) = (f(x)+Q(d), x-d),
/// produced by the approximation step.  y1 = gamma (x - d), y2 = x - d.
struct GraphPointGE {
  Eigen::VectorXd x_hat;
  Eigen::VectorXd d_hat;
  Eigen::VectorXd y1;
  Eigen::VectorXd y2;
  Eigen::VectorXd fx;  // f(x_hat), cached for the Newton step

  double residual_norm() const {
    return std::sqrt(y1.squaredNorm() + y2.squaredNorm());
  }
};

enum class NewtonVariant { DualA, PrimalB };
enum class LinearSolverKind { Direct, Gmres };

struct SolverConfig {
  double gamma = 0.0;  // <= 0 means: estimate from the Jacobian at x0
  double newton_rel_tol = 1e-12;
  int max_iters = 100;
  NewtonVariant variant = NewtonVariant::DualA;
  LinearSolverKind linear_solver = LinearSolverKind::Direct;
  double gmres_tol = 0.1;
  int gmres_restart = 200;
  int gmres_max_inner = 2000;
  bool line_search = true;
  /// Optional per-iteration stratum census of the Q-graph point (d, z).
  std::function<std::array<int, 6>(const Eigen::VectorXd&, const Eigen::VectorXd&)>
      census;
};

struct IterationRecord {
  double residual_norm = 0.0;
  double alpha = 0.0;
  int inner_iters = 0;
  std::array<int, 6> stratum_census{};
};

enum class SolveStatus { Converged, MaxIters, SingularSystem, LineSearchFailed };

inline const char* status_name(SolveStatus s) {
  switch (s) {
    case SolveStatus::Converged: return "converged";
    case SolveStatus::MaxIters: return "max_iters";
    case SolveStatus::SingularSystem: return "singular_system";
    case SolveStatus::LineSearchFailed: return "line_search_failed";
  }
  return "?";
}

struct SolverTrace {
  std::vector<IterationRecord> iterations;
  double gamma = 0.0;
  double initial_residual = 0.0;
  double final_residual = 0.0;
  SolveStatus status = SolveStatus::MaxIters;
  int total_inner_iters = 0;
  std::string message;
};

/// Projects (x, 0) approximately onto gph G through the resolvent:
/// d = (gamma I + Q)^{-1}(gamma x - f(x)).
inline GraphPointGE approximation_step(const Eigen::VectorXd& x, double gamma,
                                       const GeProblem& prob) {
  GraphPointGE gp;
  gp.x_hat = x;
  gp.fx = prob.f(x);
  gp.d_hat = prob.q->resolvent(gamma, gamma * x - gp.fx);
  gp.y2 = x - gp.d_hat;
  gp.y1 = gamma * gp.y2;
  return gp;
}

/// Q-graph point used for subspace selection: (d, z) with z = y1 - f(x).
inline Eigen::VectorXd q_value(const GraphPointGE& gp) { return gp.y1 - gp.fx; }

namespace detail {

inline Eigen::VectorXd solve_newton_system(const SparseCSR& m,
                                           const Eigen::VectorXd& rhs,
                                           const SolverConfig& cfg,
                                           int* inner_iters) {
  if (cfg.linear_solver == LinearSolverKind::Direct) {
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    Eigen::SparseMatrix<double> mc = m;
    lu.compute(mc);
    if (lu.info() != Eigen::Success)
      throw SingularSystem("newton direction: sparse factorization failed");
    if (inner_iters) *inner_iters = 0;
    return lu.solve(rhs);
  }
  // GMRES preconditioned by ILU(0) of the system being solved; the stopping
  // test uses the non-preconditioned relative residual
  try {
    GmresResult res = gmres_ilu_solve(m, rhs, cfg.gmres_tol, cfg.gmres_restart,
                                      cfg.gmres_max_inner);
    if (inner_iters) *inner_iters = res.iters;
    return res.x;
  } catch (const Stagnation& e) {
    throw SingularSystem(std::string("newton direction: ") + e.what());
  } catch (const ZeroPivot& e) {
    throw SingularSystem(std::string("newton direction: ") + e.what());
  }
}

}  // namespace detail

/// Newton direction, adjoint variant: solve
/// (Y*^T grad f + X*^T) dx = -(Y*^T y1 + X*^T y2).
inline Eigen::VectorXd newton_direction_dual(const GraphPointGE& gp,
                                             const GeProblem& prob,
                                             const SolverConfig& cfg,
                                             int* inner_iters = nullptr) {
  SpMat ystar, xstar;
  prob.q->select_subspace_sparse(gp.d_hat, q_value(gp), SubspaceSide::Dual,
                                 ystar, xstar);
  SparseCSR jac = prob.jacobian(gp.x_hat);
  SparseCSR m = SparseCSR(ystar.transpose() * jac) + SparseCSR(xstar.transpose());
  Eigen::VectorXd rhs = -(ystar.transpose() * gp.y1 + xstar.transpose() * gp.y2);
  return detail::solve_newton_system(m, rhs, cfg, inner_iters);
}

/// Newton direction, primal variant: solve (grad f X + Y) p2 = grad f y2 - y1
/// and set dx = X p2 - y2 (so that dx - dd = -y2 with dd = X p2).
inline Eigen::VectorXd newton_direction_primal(const GraphPointGE& gp,
                                               const GeProblem& prob,
                                               const SolverConfig& cfg,
                                               int* inner_iters = nullptr) {
  SpMat xmat, ymat;
  prob.q->select_subspace_sparse(gp.d_hat, q_value(gp), SubspaceSide::Primal,
                                 xmat, ymat);
  SparseCSR jac = prob.jacobian(gp.x_hat);
  SparseCSR m = SparseCSR(jac * xmat) + ymat;
  Eigen::VectorXd rhs = jac * gp.y2 - gp.y1;
  Eigen::VectorXd p2 = detail::solve_newton_system(m, rhs, cfg, inner_iters);
  return xmat * p2 - gp.y2;
}

/// First step length in the sequence 1, 1/2, 1/4, 1/8, 1/32, 1/128,
/// 0.1/128, 0.01/128, ... whose trial point satisfies the non-monotone
/// acceptance test |y(trial)| <= (1 - 0.1 a + 0.1/(k+1)) |y(k)|.
/// Returns the accepted step and the trial's graph point (reused as the
/// next iterate's approximation step).
inline std::pair<double, GraphPointGE> line_search(
    const Eigen::VectorXd& x, const Eigen::VectorXd& dx, int k,
    const GraphPointGE& current, double gamma, const GeProblem& prob) {
  static constexpr int kMaxTrials = 20;
  double res = current.residual_norm();
  double bound_term = 0.1 / (k + 1);
  double alpha = 1.0;
  double last_trial_res = 0.0;
  for (int t = 0; t < kMaxTrials; ++t) {
    GraphPointGE trial = approximation_step(x + alpha * dx, gamma, prob);
    last_trial_res = trial.residual_norm();
    if (last_trial_res <= (1.0 - 0.1 * alpha + bound_term) * res)
      return {alpha, std::move(trial)};
    if (t < 3)
      alpha *= 0.5;  // 1, 1/2, 1/4, 1/8
    else if (t == 3)
      alpha = 1.0 / 32.0;
    else if (t == 4)
      alpha = 1.0 / 128.0;
    else
      alpha *= 0.1;  // 0.1/128, 0.01/128, ...
  }
  throw LineSearchFailed("line search: no step accepted after " +
                         std::to_string(kMaxTrials) + " trials (residual " +
                         std::to_string(res) + ", last trial " +
                         std::to_string(last_trial_res) + ")");
}

struct SolveResult {
  Eigen::VectorXd x;
  SolverTrace trace;

  bool converged() const { return trace.status == SolveStatus::Converged; }
  int newton_iters() const { return static_cast<int>(trace.iterations.size()); }
};

/// SCD semismooth* Newton driver on the decoupled generalized equation.
/// Iterates approximation step + Newton step (+ line search) until the
/// residual |y| falls below newton_rel_tol * |y(0)|.  Failures are reported
/// through the trace status; the trace always carries the full history.
inline SolveResult solve(const GeProblem& prob, const Eigen::VectorXd& x0,
                         const SolverConfig& cfg) {
  SolveResult out;
  double gamma = cfg.gamma;
  if (gamma <= 0.0) gamma = estimate_gamma(prob.jacobian(x0));
  out.trace.gamma = gamma;

  Eigen::VectorXd x = x0;
  GraphPointGE gp = approximation_step(x, gamma, prob);
  out.trace.initial_residual = gp.residual_norm();

  for (int k = 0; k < cfg.max_iters; ++k) {
    double res = gp.residual_norm();
    out.trace.final_residual = res;
    if (res <= cfg.newton_rel_tol * out.trace.initial_residual) {
      out.trace.status = SolveStatus::Converged;
      out.x = x;
      return out;
    }

    IterationRecord rec;
    rec.residual_norm = res;
    if (cfg.census) rec.stratum_census = cfg.census(gp.d_hat, q_value(gp));

    Eigen::VectorXd dx;
    try {
      dx = (cfg.variant == NewtonVariant::DualA)
               ? newton_direction_dual(gp, prob, cfg, &rec.inner_iters)
               : newton_direction_primal(gp, prob, cfg, &rec.inner_iters);
    } catch (const SingularSystem& e) {
      out.trace.status = SolveStatus::SingularSystem;
      out.trace.message = e.what();
      out.trace.iterations.push_back(rec);
      out.x = x;
      return out;
    }
    out.trace.total_inner_iters += rec.inner_iters;

    try {
      if (cfg.line_search) {
        auto [alpha, next] = line_search(gp.x_hat, dx, k, gp, gamma, prob);
        rec.alpha = alpha;
        x = gp.x_hat + alpha * dx;
        gp = std::move(next);
      } else {
        rec.alpha = 1.0;
        x = gp.x_hat + dx;
        gp = approximation_step(x, gamma, prob);
      }
    } catch (const LineSearchFailed& e) {
      out.trace.status = SolveStatus::LineSearchFailed;
      out.trace.message = e.what();
      out.trace.iterations.push_back(rec);
      out.x = x;
      return out;
    }
    out.trace.iterations.push_back(rec);
  }
  out.trace.final_residual = gp.residual_norm();
  out.trace.status = SolveStatus::MaxIters;
  out.trace.message = "iteration limit reached";
  out.x = x;
  return out;
}

}  // namespace ssn
