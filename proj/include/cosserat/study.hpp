#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "cosserat/assembly.hpp"
#include "cosserat/solve.hpp"

namespace cosserat {

enum class Formulation { Mfe, Msmfe };
const char* formulation_name(Formulation f);

enum class EllCase { One, Varpi, Zero };
const char* ell_case_name(EllCase e);
EllCase ell_case_from_name(const std::string& name);
LengthScale make_length_scale(EllCase e);

/// One convergence study: a scheme, a dimension, a length-scale case and a
/// ladder of refinement levels.
struct StudyConfig {
  Scheme scheme = Scheme::Bdm1P0;
  int dim = 2;
  EllCase ell = EllCase::One;
  std::vector<int> levels;  // strictly increasing mesh parameters
  bool run_mfe = true;
  bool run_msmfe = true;
  double tol = 1e-10;
  std::string out = "study";
  std::string format = "csv";  // csv | markdown | both
  std::vector<std::string> mesh_files;  // optional, one per level
  MaterialParams material;

  void validate() const;
};

/// Flat key = value configuration file; '#' starts a comment. Keys mirror
/// the fields above (scheme, dim, ell, levels, formulation, tol, out,
/// format, mesh_files and the six material parameters).
StudyConfig parse_config(std::istream& in);
StudyConfig parse_config_file(const std::string& path);
void apply_override(StudyConfig& cfg, const std::string& key, const std::string& value);

struct FieldErrors {
  double sigma = 0.0;
  double omega = 0.0;
  double u = 0.0;
  double r = 0.0;
  double u_mean = 0.0;  // || P0-projection of (u_h - u) ||, the cellwise-mean error
};

struct LevelResult {
  int n = 0;
  double h = 0.0;
  FieldErrors err;
  int dof_full = 0;
  int dof_schur = 0;
  int iterations = 0;
  double seconds = 0.0;
  double momentum_rel_inf = 0.0;
  double residual_rel_inf = 0.0;
  bool solved = false;
};

struct ConvergenceReport {
  Scheme scheme = Scheme::Bdm1P0;
  Formulation formulation = Formulation::Msmfe;
  int dim = 2;
  EllCase ell = EllCase::One;
  std::vector<LevelResult> rows;
  bool all_solved = true;
};

/// L2 errors of the four fields plus the cellwise-mean displacement error,
/// integrated with the data quadrature.
FieldErrors compute_errors(const SchemeSpaces& spaces, const std::vector<double>& eta,
                           const std::vector<double>& v, const ManufacturedCase& mc);

/// || Pi_R div(l omega_h) ||: the couple-stress flux divergence projected
/// onto the rotation space. Optional diagnostic; reports stay plain L2.
double projected_couple_flux_norm(const SchemeSpaces& spaces, const std::vector<double>& eta,
                                  const LengthScale& ell);

/// Observed order between consecutive rows: log(e_i/e_{i+1}) / log(h_i/h_{i+1});
/// NaN marks the first row and rows with non-positive errors (exact to
/// roundoff, order undefined).
std::vector<double> compute_orders(const std::vector<double>& errors, const std::vector<double>& hs);

/// Runs the study: one report per requested formulation. A solver failure
/// aborts the remaining levels and clears the report's all_solved flag.
std::vector<ConvergenceReport> run_case(const StudyConfig& cfg);

extern const char* const kCsvHeader;
void emit_csv(const std::vector<ConvergenceReport>& reports, std::ostream& out);
void emit_markdown(const std::vector<ConvergenceReport>& reports, std::ostream& out);
void write_reports(const std::vector<ConvergenceReport>& reports, const StudyConfig& cfg,
                   const std::string& out_dir);

}  // namespace cosserat
