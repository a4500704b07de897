#include <CLI11.hpp>
#include <cstdlib>
#include <iostream>

#include "cosserat/acceptance.hpp"
#include "cosserat/study.hpp"

namespace {

using namespace cosserat;

std::string output_dir() {
  const char* env = std::getenv("COSSERAT_OUT_DIR");
  return env ? std::string(env) : std::string();
}

Mesh load_mesh(int dim, int n, const std::string& file, bool cube, bool barycentric) {
  Mesh mesh = !file.empty() ? import_simplicial(file)
                            : (cube || dim == 3 ? build_structured_cube(n) : build_structured_square(n));
  if (barycentric) mesh = barycentric_subdivide(mesh);
  return mesh;
}

int run_command(const StudyConfig& cfg, bool quiet) {
  const auto reports = run_case(cfg);
  write_reports(reports, cfg, output_dir());
  if (!quiet) emit_markdown(reports, std::cout);
  for (const auto& rep : reports)
    if (!rep.all_solved) {
      std::cerr << "solver failed in the " << formulation_name(rep.formulation)
                << " run; report is partial\n";
      return 1;
    }
  return 0;
}

void print_mesh_info(const Mesh& mesh) {
  std::cout << "dimension          " << mesh.dim() << "\n"
            << "vertices           " << mesh.num_vertices() << "\n"
            << "cells              " << mesh.num_cells() << "\n"
            << "facets             " << mesh.num_facets() << "\n"
            << "boundary facets    " << mesh.num_boundary_facets() << "\n"
            << "mesh size h        " << mesh.h() << "\n"
            << "total measure      " << mesh.total_measure() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mixed finite element convergence studies for linear Cosserat materials"};
  app.require_subcommand(1);

  // run ---------------------------------------------------------------
  auto* run = app.add_subcommand("run", "Run a convergence study and write its report");
  std::string config_path, scheme_str, ell_str, form_str, levels_str, out_str, format_str, mesh_files_str;
  int dim_opt = 0;
  double tol_opt = 0.0;
  bool quiet = false;
  run->add_option("-c,--config", config_path, "Flat key = value configuration file");
  run->add_option("--scheme", scheme_str, "bdm1-p0 | bdm1-l1 | rt1-l1 | rt1-p1");
  run->add_option("--dim", dim_opt, "2 or 3");
  run->add_option("--ell", ell_str, "one | varpi | zero");
  run->add_option("--levels", levels_str, "Comma-separated mesh parameters, e.g. 6,12,24");
  run->add_option("--formulation", form_str, "mfe | ms-mfe | both");
  run->add_option("--tol", tol_opt, "Solver tolerance (relative residual)");
  run->add_option("--out", out_str, "Output path stem");
  run->add_option("--format", format_str, "csv | markdown | both");
  run->add_option("--mesh-files", mesh_files_str, "Comma-separated msh files, one per level");
  run->add_flag("--quiet", quiet, "Suppress the table on stdout");

  // verify --------------------------------------------------------------
  auto* verify = app.add_subcommand("verify", "Run the acceptance suite (one line per criterion)");
  std::vector<int> criteria;
  verify->add_option("--criterion", criteria, "Run selected criteria only (1..12)");

  // mesh-info -----------------------------------------------------------
  auto* info = app.add_subcommand("mesh-info", "Build or load a mesh and print its statistics");
  int info_n = 6;
  std::string info_file;
  bool info_cube = false, info_bary = false;
  info->add_option("-n", info_n, "Structured grid parameter (multiple of 3)");
  info->add_option("--file", info_file, "Import an msh v2.2 file instead");
  info->add_flag("--cube", info_cube, "Structured cube instead of square");
  info->add_flag("--barycentric", info_bary, "Apply one barycentric subdivision");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      StudyConfig cfg;
      if (!config_path.empty()) cfg = parse_config_file(config_path);
      if (!scheme_str.empty()) apply_override(cfg, "scheme", scheme_str);
      if (dim_opt != 0) apply_override(cfg, "dim", std::to_string(dim_opt));
      if (!ell_str.empty()) apply_override(cfg, "ell", ell_str);
      if (!levels_str.empty()) apply_override(cfg, "levels", levels_str);
      if (!form_str.empty()) apply_override(cfg, "formulation", form_str);
      if (tol_opt != 0.0) apply_override(cfg, "tol", std::to_string(tol_opt));
      if (!out_str.empty()) apply_override(cfg, "out", out_str);
      if (!format_str.empty()) apply_override(cfg, "format", format_str);
      if (!mesh_files_str.empty()) apply_override(cfg, "mesh_files", mesh_files_str);
      if (cfg.levels.empty()) {
        // Default ladders keep desk-scale runtimes while exposing the rates.
        const bool rt = scheme_traits(cfg.scheme).stress == Family::RT1;
        if (cfg.dim == 2)
          cfg.levels = rt ? std::vector<int>{6, 12, 24} : std::vector<int>{6, 12, 24, 48};
        else
          cfg.levels = rt ? std::vector<int>{3, 6} : std::vector<int>{3, 6, 9};
      }
      return run_command(cfg, quiet);
    }
    if (verify->parsed()) {
      const auto results = run_acceptance(criteria, std::cout);
      return all_passed(results) ? 0 : 1;
    }
    if (info->parsed()) {
      print_mesh_info(load_mesh(2, info_n, info_file, info_cube, info_bary));
      return 0;
    }
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 2;
  }
  return 0;
}
