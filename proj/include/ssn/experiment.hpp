#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "ssn/coulomb.hpp"
#include "ssn/errors.hpp"
#include "ssn/fem.hpp"
#include "ssn/newton.hpp"

namespace ssn {

enum class LoadCase { L1, L2 };

inline const char* load_name(LoadCase lc) {
  return lc == LoadCase::L1 ? "L1" : "L2";
}

inline Eigen::Vector3d traction_top(LoadCase) { return {0.0, 0.0, -1.0}; }

inline Eigen::Vector3d traction_right(LoadCase lc) {
  return lc == LoadCase::L1 ? Eigen::Vector3d(-0.2, 0.0, 0.0)
                            : Eigen::Vector3d(-0.17, -0.1, 0.0);
}

struct ExperimentConfig {
  int lev = 3;
  Geometry geometry = Geometry::d1;
  LoadCase load = LoadCase::L1;
  double friction = 0.23;
  double young = 70.0;  // GPa
  double nu = 0.334;
  double gmres_tol = 0.1;
  double newton_rel_tol = 1e-12;
  NewtonVariant variant = NewtonVariant::DualA;
  std::string warm_start;  // path to a coarser-level solution file, or empty
};

struct ExperimentSummary {
  int newton_iters = 0;
  int gmres_total = 0;
  double initial_residual = 0.0;
  double final_residual = 0.0;
  double gamma = 0.0;
  double seconds = 0.0;
  SolveStatus status = SolveStatus::MaxIters;
  std::array<int, 6> final_census{};
  Eigen::VectorXd solution;
};

/// Trilinear interpolation of a coarse solution onto the next finer mesh.
/// Works on the smooth displacement field u + gap_shift (the solver variable
/// is offset by the gap in the contact normal slots), adding the coarse gap
/// before interpolating and subtracting the fine gap afterwards; otherwise
/// the contact-slot offset would smear into the neighbouring layers.
inline Eigen::VectorXd interpolate_warm_start(const Eigen::VectorXd& coarse_u,
                                              const Mesh& coarse,
                                              const Mesh& fine) {
  if (fine.lev != coarse.lev + 1)
    throw LevelMismatch("interpolate_warm_start: meshes are not consecutive levels");
  if (fine.geometry != coarse.geometry)
    throw LevelMismatch("interpolate_warm_start: geometry mismatch");
  if (coarse_u.size() != coarse.n)
    throw LevelMismatch("interpolate_warm_start: coarse vector has wrong size");

  // smooth field on all coarse nodes (zero on the Dirichlet plane)
  Eigen::MatrixXd field = Eigen::MatrixXd::Zero(coarse.node_count(), 3);
  for (int node = 0; node < coarse.node_count(); ++node) {
    int dof = coarse.node_dof[node];
    if (dof >= 0) field.row(node) = coarse_u.segment<3>(dof).transpose();
  }
  for (int ci = 0; ci < coarse.p; ++ci)
    field(coarse.contact_nodes[ci], 2) +=
        coarse.coords(coarse.contact_nodes[ci], 2);

  Eigen::VectorXd fine_u = Eigen::VectorXd::Zero(fine.n);
  for (int i1 = 0; i1 <= fine.nx1; ++i1)
    for (int i2 = 0; i2 <= fine.nx2; ++i2)
      for (int i3 = 0; i3 <= fine.nx3; ++i3) {
        int dof = fine.node_dof[fine.node_id(i1, i2, i3)];
        if (dof < 0) continue;
        Eigen::Vector3d par = fine.node_param(i1, i2, i3);
        // locate the coarse cell in parametric space
        double s1 = par(0) / 2.0 * coarse.nx1;
        double s2 = par(1) * coarse.nx2;
        double s3 = par(2) * coarse.nx3;
        int c1 = std::clamp(static_cast<int>(s1), 0, coarse.nx1 - 1);
        int c2 = std::clamp(static_cast<int>(s2), 0, coarse.nx2 - 1);
        int c3 = std::clamp(static_cast<int>(s3), 0, coarse.nx3 - 1);
        double t1 = s1 - c1, t2 = s2 - c2, t3 = s3 - c3;
        Eigen::Vector3d val = Eigen::Vector3d::Zero();
        for (int a = 0; a < 8; ++a) {
          int o1 = a & 1, o2 = (a >> 1) & 1, o3 = (a >> 2) & 1;
          double w = (o1 ? t1 : 1.0 - t1) * (o2 ? t2 : 1.0 - t2) *
                     (o3 ? t3 : 1.0 - t3);
          val += w * field.row(coarse.node_id(c1 + o1, c2 + o2, c3 + o3))
                         .transpose();
        }
        fine_u.segment<3>(dof) = val;
      }
  for (int ci = 0; ci < fine.p; ++ci)
    fine_u(3 * ci + 2) -= fine.coords(fine.contact_nodes[ci], 2);
  return fine_u;
}

inline void save_solution(const std::string& path, const ExperimentConfig& cfg,
                          const Eigen::VectorXd& u) {
  std::ofstream os(path);
  if (!os) throw Error("save_solution: cannot open " + path);
  os.precision(17);
  os << cfg.lev << " " << geometry_name(cfg.geometry) << " " << u.size() << "\n";
  for (int i = 0; i < u.size(); ++i) os << u(i) << "\n";
}

inline Eigen::VectorXd load_solution(const std::string& path, int* lev,
                                     std::string* geometry) {
  std::ifstream is(path);
  if (!is) throw Error("load_solution: cannot open " + path);
  int n = 0;
  is >> *lev >> *geometry >> n;
  Eigen::VectorXd u(n);
  for (int i = 0; i < n; ++i) is >> u(i);
  if (!is) throw Error("load_solution: truncated file " + path);
  return u;
}

/// Builds the discrete model, runs the solver from u0 = 0 (or a warm start),
/// and writes convergence CSV, contact-state CSV/VTK, the solution, and a
/// summary JSON into out_dir.
inline ExperimentSummary run_experiment(const ExperimentConfig& cfg,
                                        const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  auto t0 = std::chrono::steady_clock::now();

  Mesh mesh = build_mesh(cfg.lev, cfg.geometry);
  ContactModel model = assemble(mesh, cfg.young, cfg.nu, traction_top(cfg.load),
                                traction_right(cfg.load), cfg.friction);
  CoulombProductMap q(model.contact_count, model.n - 3 * model.contact_count,
                      cfg.friction);

  GeProblem prob;
  prob.f = [&](const Eigen::VectorXd& u) -> Eigen::VectorXd {
    return model.stiffness * u - model.load;
  };
  prob.jacobian = [&](const Eigen::VectorXd&) { return model.stiffness; };
  prob.q = &q;

  SolverConfig scfg;
  scfg.newton_rel_tol = cfg.newton_rel_tol;
  scfg.variant = cfg.variant;
  scfg.linear_solver = LinearSolverKind::Gmres;
  scfg.gmres_tol = cfg.gmres_tol;
  scfg.census = [&](const Eigen::VectorXd& d, const Eigen::VectorXd& z) {
    return q.stratum_census(d, z);
  };

  Eigen::VectorXd u0 = Eigen::VectorXd::Zero(model.n);
  if (!cfg.warm_start.empty()) {
    int coarse_lev = 0;
    std::string geom;
    Eigen::VectorXd coarse_u = load_solution(cfg.warm_start, &coarse_lev, &geom);
    if (geom != geometry_name(cfg.geometry))
      throw LevelMismatch("run_experiment: warm start geometry " + geom);
    Mesh coarse = build_mesh(coarse_lev, cfg.geometry);
    u0 = interpolate_warm_start(coarse_u, coarse, mesh);
  }

  SolveResult res = solve(prob, u0, scfg);

  ExperimentSummary summary;
  summary.newton_iters = res.newton_iters();
  summary.gmres_total = res.trace.total_inner_iters;
  summary.initial_residual = res.trace.initial_residual;
  summary.final_residual = res.trace.final_residual;
  summary.gamma = res.trace.gamma;
  summary.status = res.trace.status;
  summary.solution = res.x;

  // final graph point for the contact-state report
  GraphPointGE gp = approximation_step(res.x, res.trace.gamma, prob);
  Eigen::VectorXd z = q_value(gp);
  summary.final_census = q.stratum_census(gp.d_hat, z);

  {
    std::ofstream os(fs::path(out_dir) / "convergence.csv");
    os << "iter,residual,alpha,gmres_iters,nL,nM1,nM2,nM3p,nM3m,nM4\n";
    os.precision(17);
    int it = 0;
    for (const auto& rec : res.trace.iterations) {
      os << it++ << "," << rec.residual_norm << "," << rec.alpha << ","
         << rec.inner_iters;
      for (int c : rec.stratum_census) os << "," << c;
      os << "\n";
    }
  }
  {
    std::ofstream os(fs::path(out_dir) / "contact_state.csv");
    os << "node_id,x1,x2,x3,state,ux,uy,uz,gx,gy,theta\n";
    os.precision(17);
    for (int ci = 0; ci < model.contact_count; ++ci) {
      CellGraphPoint cell = q.cell_point(gp.d_hat, z, ci);
      int node = mesh.contact_nodes[ci];
      os << node << "," << mesh.coords(node, 0) << "," << mesh.coords(node, 1)
         << "," << mesh.coords(node, 2) << ","
         << stratum_name(classify(cell, cfg.friction)) << "," << cell.v(0)
         << "," << cell.v(1) << "," << cell.v(2) << "," << cell.g(0) << ","
         << cell.g(1) << "," << cell.theta << "\n";
    }
  }
  {
    std::vector<int> states(model.contact_count);
    for (int ci = 0; ci < model.contact_count; ++ci)
      states[ci] = 1 + static_cast<int>(
                           classify(q.cell_point(gp.d_hat, z, ci), cfg.friction));
    write_vtk(mesh, (fs::path(out_dir) / "contact_state.vtk").string(), &states);
  }
  save_solution((fs::path(out_dir) / "solution.dat").string(), cfg, res.x);

  summary.seconds = std::chrono::duration<double>(
                        std::chrono::steady_clock::now() - t0)
                        .count();
  {
    nlohmann::json j;
    j["config"] = {{"lev", cfg.lev},
                   {"geometry", geometry_name(cfg.geometry)},
                   {"load", load_name(cfg.load)},
                   {"friction", cfg.friction},
                   {"E", cfg.young},
                   {"nu", cfg.nu},
                   {"gmres_tol", cfg.gmres_tol},
                   {"newton_tol", cfg.newton_rel_tol},
                   {"variant", cfg.variant == NewtonVariant::DualA ? "dual_a"
                                                                   : "primal_b"},
                   {"warm_start", cfg.warm_start}};
    j["it"] = summary.newton_iters;
    j["gmres"] = summary.gmres_total;
    j["gamma"] = summary.gamma;
    j["initial_residual"] = summary.initial_residual;
    j["final_residual"] = summary.final_residual;
    j["status"] = status_name(summary.status);
    j["seconds"] = summary.seconds;
    nlohmann::json census;
    const char* names[6] = {"L", "M1", "M2", "M3p", "M3m", "M4"};
    for (int s = 0; s < 6; ++s) census[names[s]] = summary.final_census[s];
    j["stratum_census"] = census;
    std::ofstream os(fs::path(out_dir) / "summary.json");
    os << j.dump(2) << "\n";
  }
  return summary;
}

}  // namespace ssn
