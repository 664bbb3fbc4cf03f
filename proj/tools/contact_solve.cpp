// Command-line driver for the frictional contact experiments.
//
// Exit codes: 0 solver converged, 2 solver did not converge, 3 bad
// configuration or I/O error.

#include <CLI11.hpp>
#include <cstdio>
#include <exception>
#include <fstream>
#include <json.hpp>
#include <string>

#include "ssn/experiment.hpp"

namespace {

int parse_geometry(const std::string& s, ssn::Geometry* out) {
  if (s == "d1") *out = ssn::Geometry::d1;
  else if (s == "d2") *out = ssn::Geometry::d2;
  else if (s == "d3") *out = ssn::Geometry::d3;
  else return 1;
  return 0;
}

int parse_load(const std::string& s, ssn::LoadCase* out) {
  if (s == "L1") *out = ssn::LoadCase::L1;
  else if (s == "L2") *out = ssn::LoadCase::L2;
  else return 1;
  return 0;
}

int parse_variant(const std::string& s, ssn::NewtonVariant* out) {
  if (s == "dual_a") *out = ssn::NewtonVariant::DualA;
  else if (s == "primal_b") *out = ssn::NewtonVariant::PrimalB;
  else return 1;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SCD semismooth Newton solver for 3D contact with Coulomb friction"};

  ssn::ExperimentConfig cfg;
  std::string geometry = "d1", load = "L1", variant = "dual_a";
  std::string out_dir = "out", config_path;

  app.add_option("--lev", cfg.lev, "Refinement level (>= 1)")
      ->check(CLI::Range(1, 12));
  app.add_option("--geometry", geometry, "Obstacle geometry: d1, d2, d3");
  app.add_option("--load", load, "Load case: L1, L2");
  app.add_option("--friction", cfg.friction, "Coulomb friction coefficient");
  app.add_option("--E", cfg.young, "Young's modulus");
  app.add_option("--nu", cfg.nu, "Poisson ratio");
  app.add_option("--gmres-tol", cfg.gmres_tol, "Inner GMRES relative tolerance");
  app.add_option("--newton-tol", cfg.newton_rel_tol,
                 "Outer relative residual tolerance");
  app.add_option("--variant", variant, "Newton variant: dual_a, primal_b");
  app.add_option("--warm-start", cfg.warm_start,
                 "Solution file from the previous level");
  app.add_option("--out-dir", out_dir, "Output directory");
  app.add_option("--config", config_path,
                 "JSON file whose keys override the flags above");

  CLI11_PARSE(app, argc, argv);

  try {
    if (!config_path.empty()) {
      std::ifstream is(config_path);
      if (!is) {
        std::fprintf(stderr, "error: cannot open config %s\n",
                     config_path.c_str());
        return 3;
      }
      nlohmann::json j = nlohmann::json::parse(is);
      cfg.lev = j.value("lev", cfg.lev);
      geometry = j.value("geometry", geometry);
      load = j.value("load", load);
      cfg.friction = j.value("friction", cfg.friction);
      cfg.young = j.value("E", cfg.young);
      cfg.nu = j.value("nu", cfg.nu);
      cfg.gmres_tol = j.value("gmres_tol", cfg.gmres_tol);
      cfg.newton_rel_tol = j.value("newton_tol", cfg.newton_rel_tol);
      variant = j.value("variant", variant);
      cfg.warm_start = j.value("warm_start", cfg.warm_start);
      out_dir = j.value("out_dir", out_dir);
    }
    if (parse_geometry(geometry, &cfg.geometry) ||
        parse_load(load, &cfg.load) || parse_variant(variant, &cfg.variant)) {
      std::fprintf(stderr, "error: bad geometry/load/variant value\n");
      return 3;
    }

    ssn::ExperimentSummary s = ssn::run_experiment(cfg, out_dir);
    std::printf("%s lev=%d %s/%s  it=%d  gmres=%d  residual %.3e -> %.3e  (%.1fs)\n",
                ssn::status_name(s.status), cfg.lev,
                ssn::geometry_name(cfg.geometry), ssn::load_name(cfg.load),
                s.newton_iters, s.gmres_total, s.initial_residual,
                s.final_residual, s.seconds);
    return s.status == ssn::SolveStatus::Converged ? 0 : 2;
  } catch (const nlohmann::json::exception& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 3;
  } catch (const ssn::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
}
