#include "cosserat/study.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include "cosserat/krylov.hpp"
#include "cosserat/quadrature.hpp"

namespace cosserat {

const char* formulation_name(Formulation f) { return f == Formulation::Mfe ? "mfe" : "ms-mfe"; }

const char* ell_case_name(EllCase e) {
  switch (e) {
    case EllCase::One: return "one";
    case EllCase::Varpi: return "varpi";
    case EllCase::Zero: return "zero";
  }
  return "?";
}

EllCase ell_case_from_name(const std::string& name) {
  if (name == "one") return EllCase::One;
  if (name == "varpi") return EllCase::Varpi;
  if (name == "zero") return EllCase::Zero;
  throw std::invalid_argument("unknown ell case '" + name + "' (expected one, varpi or zero)");
}

LengthScale make_length_scale(EllCase e) {
  switch (e) {
    case EllCase::One: return LengthScale::make_constant(1.0);
    case EllCase::Varpi: return LengthScale::smooth_step();
    case EllCase::Zero: return LengthScale::make_constant(0.0);
  }
  return LengthScale::make_constant(1.0);
}

void StudyConfig::validate() const {
  if (dim != 2 && dim != 3) throw std::invalid_argument("StudyConfig: dim must be 2 or 3");
  if (levels.empty()) throw std::invalid_argument("StudyConfig: refinement list is empty");
  for (size_t i = 1; i < levels.size(); ++i)
    if (levels[i] <= levels[i - 1])
      throw std::invalid_argument("StudyConfig: refinement list must be strictly increasing");
  if (!run_mfe && !run_msmfe) throw std::invalid_argument("StudyConfig: no formulation selected");
  if (!(tol > 0.0) || tol > 1e-4)
    throw std::invalid_argument("StudyConfig: solver tolerance must lie in (0, 1e-4]");
  if (format != "csv" && format != "markdown" && format != "both")
    throw std::invalid_argument("StudyConfig: format must be csv, markdown or both");
  if (!mesh_files.empty() && mesh_files.size() != levels.size())
    throw std::invalid_argument("StudyConfig: mesh_files must match the refinement list");
  material.validate();
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

}  // namespace

void apply_override(StudyConfig& cfg, const std::string& key, const std::string& value) {
  if (key == "scheme") {
    cfg.scheme = scheme_from_name(value);
  } else if (key == "dim") {
    cfg.dim = std::stoi(value);
  } else if (key == "ell") {
    cfg.ell = ell_case_from_name(value);
  } else if (key == "levels") {
    cfg.levels.clear();
    for (const auto& item : split_list(value)) cfg.levels.push_back(std::stoi(item));
  } else if (key == "formulation") {
    if (value == "mfe") {
      cfg.run_mfe = true;
      cfg.run_msmfe = false;
    } else if (value == "ms-mfe") {
      cfg.run_mfe = false;
      cfg.run_msmfe = true;
    } else if (value == "both") {
      cfg.run_mfe = cfg.run_msmfe = true;
    } else {
      throw std::invalid_argument("unknown formulation '" + value + "' (expected mfe, ms-mfe or both)");
    }
  } else if (key == "tol") {
    cfg.tol = std::stod(value);
  } else if (key == "out") {
    cfg.out = value;
  } else if (key == "format") {
    cfg.format = value;
  } else if (key == "mesh_files") {
    cfg.mesh_files = split_list(value);
  } else if (key == "mu_sigma") {
    cfg.material.mu_sigma = std::stod(value);
  } else if (key == "mu_sigma_c") {
    cfg.material.mu_sigma_c = std::stod(value);
  } else if (key == "lambda_sigma") {
    cfg.material.lambda_sigma = std::stod(value);
  } else if (key == "mu_omega") {
    cfg.material.mu_omega = std::stod(value);
  } else if (key == "mu_omega_c") {
    cfg.material.mu_omega_c = std::stod(value);
  } else if (key == "lambda_omega") {
    cfg.material.lambda_omega = std::stod(value);
  } else {
    throw std::invalid_argument("unknown config key '" + key + "'");
  }
}

StudyConfig parse_config(std::istream& in) {
  StudyConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("config line " + std::to_string(lineno) + ": expected key = value");
    apply_override(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return cfg;
}

StudyConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file " + path);
  return parse_config(in);
}

namespace {

double ref_measure(int dim) { return dim == 2 ? 0.5 : 1.0 / 6.0; }

}  // namespace

FieldErrors compute_errors(const SchemeSpaces& spaces, const std::vector<double>& eta,
                           const std::vector<double>& v, const ManufacturedCase& mc) {
  const Mesh& mesh = spaces.sigma.mesh();
  const int d = mesh.dim();
  const int kd = rotation_components(d);
  const DofLayout layout = make_layout(spaces);
  const QuadratureRule rule = gauss_rule(d, 6, 1);

  CellEval sev(spaces.sigma, rule);
  CellEval wev(spaces.omega, rule);
  CellEval uev(spaces.u, rule);
  CellEval rev(spaces.r, rule);

  FieldErrors out;
  double e_sigma = 0.0, e_omega = 0.0, e_u = 0.0, e_r = 0.0, e_umean = 0.0;
  for (int c = 0; c < mesh.num_cells(); ++c) {
    sev.bind(c);
    wev.bind(c);
    uev.bind(c);
    rev.bind(c);
    const double scale = mesh.cell_measure(c) / ref_measure(d);
    const auto sdofs = spaces.sigma.cell_dofs(c);
    const auto wdofs = spaces.omega.cell_dofs(c);
    const auto udofs = spaces.u.cell_dofs(c);
    const auto rdofs = spaces.r.cell_dofs(c);

    std::array<double, 3> u_mean_diff = {0.0, 0.0, 0.0};
    for (int q = 0; q < rule.num_points(); ++q) {
      const double w = scale * rule.weights[static_cast<size_t>(q)];
      const auto x = sev.point(q);
      const Mat3 sig = mc.stress(x);
      const Mat3 om = mc.couple_stress(x);
      const Vec3 ue = mc.displacement(x);
      const Vec3 re = mc.rotation(x);

      for (int rho = 0; rho < d; ++rho) {
        double vh[3] = {0.0, 0.0, 0.0};
        for (int i = 0; i < spaces.sigma.local_dofs(); ++i) {
          const double cc = eta[static_cast<size_t>(spaces.sigma.global_dof(rho, sdofs[static_cast<size_t>(i)]))];
          const double* bv = sev.vector(q, i);
          for (int k = 0; k < d; ++k) vh[k] += cc * bv[k];
        }
        for (int k = 0; k < d; ++k) {
          const double diff = vh[k] - sig[static_cast<size_t>(rho)][static_cast<size_t>(k)];
          e_sigma += w * diff * diff;
        }
      }
      for (int kcomp = 0; kcomp < kd; ++kcomp) {
        double vh[3] = {0.0, 0.0, 0.0};
        for (int i = 0; i < spaces.omega.local_dofs(); ++i) {
          const double cc = eta[static_cast<size_t>(layout.omega_offset() +
                                                    spaces.omega.global_dof(kcomp, wdofs[static_cast<size_t>(i)]))];
          const double* bv = wev.vector(q, i);
          for (int j = 0; j < d; ++j) vh[j] += cc * bv[j];
        }
        for (int j = 0; j < d; ++j) {
          const double diff = vh[j] - om[static_cast<size_t>(j)][static_cast<size_t>(kcomp)];
          e_omega += w * diff * diff;
        }
      }
      for (int rho = 0; rho < d; ++rho) {
        double uh = 0.0;
        for (int i = 0; i < spaces.u.local_dofs(); ++i)
          uh += v[static_cast<size_t>(spaces.u.global_dof(rho, udofs[static_cast<size_t>(i)]))] * uev.scalar(q, i);
        const double diff = uh - ue[static_cast<size_t>(rho)];
        e_u += w * diff * diff;
        u_mean_diff[static_cast<size_t>(rho)] += w * diff;
      }
      for (int kcomp = 0; kcomp < kd; ++kcomp) {
        double rh = 0.0;
        for (int i = 0; i < spaces.r.local_dofs(); ++i)
          rh += v[static_cast<size_t>(layout.r_offset() +
                                      spaces.r.global_dof(kcomp, rdofs[static_cast<size_t>(i)]))] *
                rev.scalar(q, i);
        const double diff = rh - re[static_cast<size_t>(kcomp)];
        e_r += w * diff * diff;
      }
    }
    for (int rho = 0; rho < d; ++rho)
      e_umean += u_mean_diff[static_cast<size_t>(rho)] * u_mean_diff[static_cast<size_t>(rho)] / mesh.cell_measure(c);
  }
  out.sigma = std::sqrt(e_sigma);
  out.omega = std::sqrt(e_omega);
  out.u = std::sqrt(e_u);
  out.r = std::sqrt(e_r);
  out.u_mean = std::sqrt(e_umean);
  return out;
}

double projected_couple_flux_norm(const SchemeSpaces& spaces, const std::vector<double>& eta,
                                  const LengthScale& ell) {
  const Mesh& mesh = spaces.omega.mesh();
  const int d = mesh.dim();
  const int kd = rotation_components(d);
  const DofLayout layout = make_layout(spaces);
  const QuadratureRule rule = gauss_rule(d, 6);
  CellEval wev(spaces.omega, rule);
  CellEval rev(spaces.r, rule);

  // Moments (div(l omega_h), r'_b) per rotation component.
  std::vector<double> rhs(static_cast<size_t>(spaces.r.dofs()), 0.0);
  for (int c = 0; c < mesh.num_cells(); ++c) {
    wev.bind(c);
    rev.bind(c);
    const double scale = mesh.cell_measure(c) / ref_measure(d);
    const auto wdofs = spaces.omega.cell_dofs(c);
    const auto rdofs = spaces.r.cell_dofs(c);
    for (int q = 0; q < rule.num_points(); ++q) {
      const double w = scale * rule.weights[static_cast<size_t>(q)];
      const auto x = wev.point(q);
      const double lv = ell.value(x);
      const Vec3 lg = ell.gradient(x);
      for (int k = 0; k < kd; ++k) {
        double flux = 0.0;
        for (int i = 0; i < spaces.omega.local_dofs(); ++i) {
          const double cc = eta[static_cast<size_t>(layout.omega_offset() +
                                                    spaces.omega.global_dof(k, wdofs[static_cast<size_t>(i)]))];
          if (cc == 0.0) continue;
          const double* wi = wev.vector(q, i);
          double div = lv * wev.div(q, i);
          for (int j = 0; j < d; ++j) div += lg[static_cast<size_t>(j)] * wi[j];
          flux += cc * div;
        }
        for (int b = 0; b < spaces.r.local_dofs(); ++b)
          rhs[static_cast<size_t>(spaces.r.global_dof(k, rdofs[static_cast<size_t>(b)]))] +=
              w * flux * rev.scalar(q, b);
      }
    }
  }

  // ||Pi_R phi||^2 = xi . rhs with M xi = rhs.
  const Csr mass = mass_matrix(spaces.r);
  const auto diag = csr_diagonal(mass);
  LinOp op{mass.rows, [&](const double* x, double* y) { spmv(mass, x, y); }};
  LinOp jacobi{mass.rows, [&](const double* x, double* y) {
                 for (int i = 0; i < mass.rows; ++i) y[i] = x[i] / diag[static_cast<size_t>(i)];
               }};
  double norm2_sum = 0.0;
  std::vector<double> b(static_cast<size_t>(spaces.r.scalar_dofs())), xi;
  for (int k = 0; k < kd; ++k) {
    std::copy_n(rhs.begin() + static_cast<size_t>(k) * spaces.r.scalar_dofs(), spaces.r.scalar_dofs(), b.begin());
    IterControl ctl;
    ctl.tol = 1e-12;
    ctl.max_iterations = 400 + 20 * static_cast<int>(std::sqrt(static_cast<double>(mass.rows)));
    const IterStats st = pcg(op, jacobi, b, xi, ctl);
    if (!st.converged) throw std::runtime_error("projected_couple_flux_norm: mass solve did not converge");
    for (int i = 0; i < spaces.r.scalar_dofs(); ++i)
      norm2_sum += xi[static_cast<size_t>(i)] * b[static_cast<size_t>(i)];
  }
  return std::sqrt(std::max(0.0, norm2_sum));
}

std::vector<double> compute_orders(const std::vector<double>& errors, const std::vector<double>& hs) {
  if (errors.size() != hs.size()) throw std::invalid_argument("compute_orders: length mismatch");
  std::vector<double> orders(errors.size(), std::nan(""));
  for (size_t i = 1; i < errors.size(); ++i) {
    if (errors[i - 1] <= 0.0 || errors[i] <= 0.0) continue;  // exact; order undefined
    orders[i] = std::log(errors[i - 1] / errors[i]) / std::log(hs[i - 1] / hs[i]);
  }
  return orders;
}

std::vector<ConvergenceReport> run_case(const StudyConfig& cfg) {
  cfg.validate();
  ManufacturedCase mc;
  mc.dim = cfg.dim;
  mc.material = cfg.material;
  mc.ell = make_length_scale(cfg.ell);

  std::vector<Formulation> forms;
  if (cfg.run_mfe) forms.push_back(Formulation::Mfe);
  if (cfg.run_msmfe) forms.push_back(Formulation::Msmfe);

  std::vector<ConvergenceReport> reports;
  for (const Formulation f : forms)
    reports.push_back({cfg.scheme, f, cfg.dim, cfg.ell, {}, true});

  bool aborted = false;
  for (size_t level = 0; level < cfg.levels.size() && !aborted; ++level) {
    const int n = cfg.levels[level];
    Mesh mesh = !cfg.mesh_files.empty()
                    ? import_simplicial(cfg.mesh_files[level])
                    : (cfg.dim == 2 ? build_structured_square(n) : build_structured_cube(n));
    if (scheme_traits(cfg.scheme).requires_barycentric) mesh = barycentric_subdivide(mesh);

    const SchemeSpaces spaces = build_spaces(mesh, cfg.scheme);
    const SaddleSystem ms = build_msmfe_system(spaces, cfg.scheme, mc);
    const BlockDiagFactor factor(ms.A);

    for (size_t fi = 0; fi < forms.size(); ++fi) {
      LevelResult row;
      row.n = n;
      row.h = mesh.h();
      row.dof_full = ms.layout.nx() + ms.layout.ny();
      row.dof_schur = ms.layout.ny();

      SaddleSolution sol;
      std::optional<SaddleSystem> mfe;
      if (forms[fi] == Formulation::Msmfe) {
        sol = msmfe_solve(ms, factor, cfg.tol);
      } else {
        mfe.emplace(build_mfe_system(spaces, cfg.scheme, mc));
        sol = full_saddle_solve(*mfe, ms, factor, cfg.tol);
      }
      // Residuals are checked in the system that was actually solved.
      const SaddleSystem& solved = mfe ? *mfe : ms;
      row.err = compute_errors(spaces, sol.eta, sol.v, mc);
      row.iterations = sol.report.iterations;
      row.seconds = sol.report.seconds;
      row.momentum_rel_inf = momentum_residual_inf(solved, sol.eta);
      row.residual_rel_inf = saddle_residual_inf(solved, sol.eta, sol.v);
      row.solved = sol.report.converged;
      reports[fi].rows.push_back(row);
      if (!row.solved) {
        reports[fi].all_solved = false;
        aborted = true;
      }
    }
  }
  return reports;
}

const char* const kCsvHeader =
    "scheme,formulation,dim,ell,level,h,err_sigma,ord_sigma,err_omega,ord_omega,err_u,ord_u,"
    "err_r,ord_r,dof_full,dof_schur,iters,seconds";

namespace {

struct ReportOrders {
  std::vector<double> sigma, omega, u, r;
};

ReportOrders report_orders(const ConvergenceReport& rep) {
  std::vector<double> hs, es, eo, eu, er;
  for (const auto& row : rep.rows) {
    hs.push_back(row.h);
    es.push_back(row.err.sigma);
    eo.push_back(row.err.omega);
    eu.push_back(row.err.u);
    er.push_back(row.err.r);
  }
  return {compute_orders(es, hs), compute_orders(eo, hs), compute_orders(eu, hs),
          compute_orders(er, hs)};
}

void print_order(std::ostream& out, double v) {
  if (std::isnan(v))
    out << "nan";
  else
    out << std::fixed << std::setprecision(3) << v << std::defaultfloat;
}

}  // namespace

void emit_csv(const std::vector<ConvergenceReport>& reports, std::ostream& out) {
  out << kCsvHeader << "\n";
  for (const auto& rep : reports) {
    const ReportOrders ord = report_orders(rep);
    for (size_t i = 0; i < rep.rows.size(); ++i) {
      const LevelResult& row = rep.rows[i];
      out << scheme_traits(rep.scheme).name << ',' << formulation_name(rep.formulation) << ','
          << rep.dim << ',' << ell_case_name(rep.ell) << ',' << row.n << ',';
      out << std::scientific << std::setprecision(6) << row.h << ',' << row.err.sigma << ',';
      print_order(out, ord.sigma[i]);
      out << ',' << std::scientific << std::setprecision(6) << row.err.omega << ',';
      print_order(out, ord.omega[i]);
      out << ',' << std::scientific << std::setprecision(6) << row.err.u << ',';
      print_order(out, ord.u[i]);
      out << ',' << std::scientific << std::setprecision(6) << row.err.r << ',';
      print_order(out, ord.r[i]);
      out << ',' << row.dof_full << ',' << row.dof_schur << ',' << row.iterations << ','
          << std::fixed << std::setprecision(3) << row.seconds << std::defaultfloat << "\n";
    }
  }
}

void emit_markdown(const std::vector<ConvergenceReport>& reports, std::ostream& out) {
  for (const auto& rep : reports) {
    out << "## " << scheme_traits(rep.scheme).name << ", " << formulation_name(rep.formulation)
        << ", " << rep.dim << "D, ell = " << ell_case_name(rep.ell) << "\n\n";
    out << "| h | Error(sigma) | Order | Error(omega) | Order | Error(u) | Order | Error(r) | Order | DoF |\n";
    out << "|---|---|---|---|---|---|---|---|---|---|\n";
    const ReportOrders ord = report_orders(rep);
    for (size_t i = 0; i < rep.rows.size(); ++i) {
      const LevelResult& row = rep.rows[i];
      auto num = [&](double v) {
        std::ostringstream s;
        s << std::scientific << std::setprecision(2) << v;
        return s.str();
      };
      auto order = [&](double v) {
        if (std::isnan(v)) return std::string("-");
        std::ostringstream s;
        s << std::fixed << std::setprecision(2) << v;
        return s.str();
      };
      out << "| " << num(row.h) << " | " << num(row.err.sigma) << " | " << order(ord.sigma[i])
          << " | " << num(row.err.omega) << " | " << order(ord.omega[i]) << " | " << num(row.err.u)
          << " | " << order(ord.u[i]) << " | " << num(row.err.r) << " | " << order(ord.r[i])
          << " | " << row.dof_full << " |\n";
    }
    out << "\n";
  }
}

void write_reports(const std::vector<ConvergenceReport>& reports, const StudyConfig& cfg,
                   const std::string& out_dir) {
  const std::string stem = out_dir.empty() ? cfg.out : out_dir + "/" + cfg.out;
  if (cfg.format == "csv" || cfg.format == "both") {
    std::ofstream out(stem + ".csv");
    if (!out) throw std::runtime_error("cannot write " + stem + ".csv");
    emit_csv(reports, out);
  }
  if (cfg.format == "markdown" || cfg.format == "both") {
    std::ofstream out(stem + ".md");
    if (!out) throw std::runtime_error("cannot write " + stem + ".md");
    emit_markdown(reports, out);
  }
}

}  // namespace cosserat
