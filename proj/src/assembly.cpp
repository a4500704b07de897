#include "cosserat/assembly.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "cosserat/krylov.hpp"
#include "cosserat/quadrature.hpp"

namespace cosserat {

namespace {

const SchemeTraits kTraits[4] = {
    {"bdm1-p0", Family::BDM1, Family::P0, Family::P0, 1, false, false},
    {"bdm1-l1", Family::BDM1, Family::P0, Family::L1, 1, true, false},
    {"rt1-l1", Family::RT1, Family::P1dc, Family::L1, 2, false, false},
    {"rt1-p1", Family::RT1, Family::P1dc, Family::P1dc, 2, false, true},
};

double ref_measure(int dim) { return dim == 2 ? 0.5 : 1.0 / 6.0; }

// Component map of asym sigma: (rotation component, tensor row, vector
// component, sign) with asym(tau)_k = sum of sign * tau[row][comp].
struct AsymTerm {
  int k, row, comp;
  double sign;
};

std::vector<AsymTerm> asym_terms(int dim) {
  if (dim == 2) return {{0, 1, 0, 1.0}, {0, 0, 1, -1.0}};
  return {{0, 2, 1, 1.0}, {0, 1, 2, -1.0},
          {1, 0, 2, 1.0}, {1, 2, 0, -1.0},
          {2, 1, 0, 1.0}, {2, 0, 1, -1.0}};
}

// Stress-stress block of A over one field (sigma or omega) with an
// arbitrary rule; writes triplets at the given offset in x-indexing.
void add_stress_block(std::vector<Triplet>& trip, const FESpace& sp, const MaterialParams& mp,
                      bool omega_field, const QuadratureRule& rule, int offset) {
  const Mesh& mesh = sp.mesh();
  const int d = mesh.dim();
  const int nloc = sp.local_dofs();
  const int rep = sp.components();
  const int nl = nloc * rep;
  CellEval ev(sp, rule);
  std::vector<double> local(static_cast<size_t>(nl) * nl);
  for (int c = 0; c < mesh.num_cells(); ++c) {
    ev.bind(c);
    std::fill(local.begin(), local.end(), 0.0);
    const double scale = mesh.cell_measure(c) / ref_measure(d);
    for (int q = 0; q < rule.num_points(); ++q) {
      const double w = scale * rule.weights[static_cast<size_t>(q)];
      for (int i = 0; i < nloc; ++i) {
        const std::span<const double> vi(ev.vector(q, i), static_cast<size_t>(d));
        for (int j = 0; j < nloc; ++j) {
          const std::span<const double> vj(ev.vector(q, j), static_cast<size_t>(d));
          for (int a = 0; a < rep; ++a)
            for (int b = 0; b < rep; ++b) {
              const double pair = omega_field ? a_omega_pair(mp, d, a, vi, b, vj)
                                              : a_sigma_pair(mp, d, a, vi, b, vj);
              local[static_cast<size_t>(a * nloc + i) * nl + static_cast<size_t>(b * nloc + j)] += w * pair;
            }
        }
      }
    }
    const auto dofs = sp.cell_dofs(c);
    for (int a = 0; a < rep; ++a)
      for (int i = 0; i < nloc; ++i)
        for (int b = 0; b < rep; ++b)
          for (int j = 0; j < nloc; ++j)
            trip.push_back({offset + sp.global_dof(a, dofs[static_cast<size_t>(i)]),
                            offset + sp.global_dof(b, dofs[static_cast<size_t>(j)]),
                            local[static_cast<size_t>(a * nloc + i) * nl + static_cast<size_t>(b * nloc + j)]});
  }
}

Csr assemble_A_rule(const SchemeSpaces& spaces, const MaterialParams& mp,
                    const QuadratureRule& sigma_rule, const QuadratureRule& omega_rule,
                    double drop_rel) {
  const DofLayout layout = make_layout(spaces);
  std::vector<Triplet> trip;
  const size_t per_cell = static_cast<size_t>(spaces.sigma.local_dofs()) * spaces.sigma.components();
  trip.reserve(static_cast<size_t>(spaces.sigma.mesh().num_cells()) * per_cell * per_cell * 2);
  add_stress_block(trip, spaces.sigma, mp, false, sigma_rule, 0);
  add_stress_block(trip, spaces.omega, mp, true, omega_rule, layout.omega_offset());
  double drop = -1.0;
  if (drop_rel > 0.0) {
    double mx = 0.0;
    for (const Triplet& t : trip) mx = std::max(mx, std::abs(t.value));
    drop = drop_rel * mx;
  }
  return csr_from_triplets(layout.nx(), layout.nx(), trip, drop);
}

// Displacement rows -(div sigma, u'); shared verbatim by the exact and
// reduced forms of B.
void add_divergence_rows(std::vector<Triplet>& trip, const SchemeSpaces& spaces) {
  const Mesh& mesh = spaces.sigma.mesh();
  const int d = mesh.dim();
  const QuadratureRule rule = gauss_rule(d, spaces.sigma.degree() + 1);
  CellEval sev(spaces.sigma, rule);
  CellEval uev(spaces.u, rule);
  const int ns = spaces.sigma.local_dofs();
  const int nu = spaces.u.local_dofs();
  std::vector<double> local(static_cast<size_t>(ns) * nu);
  for (int c = 0; c < mesh.num_cells(); ++c) {
    sev.bind(c);
    uev.bind(c);
    std::fill(local.begin(), local.end(), 0.0);
    const double scale = mesh.cell_measure(c) / ref_measure(d);
    for (int q = 0; q < rule.num_points(); ++q) {
      const double w = scale * rule.weights[static_cast<size_t>(q)];
      for (int i = 0; i < ns; ++i)
        for (int a = 0; a < nu; ++a)
          local[static_cast<size_t>(i) * nu + static_cast<size_t>(a)] -= w * sev.div(q, i) * uev.scalar(q, a);
    }
    const auto sdofs = spaces.sigma.cell_dofs(c);
    const auto udofs = spaces.u.cell_dofs(c);
    for (int rho = 0; rho < d; ++rho)
      for (int i = 0; i < ns; ++i)
        for (int a = 0; a < nu; ++a)
          trip.push_back({spaces.u.global_dof(rho, udofs[static_cast<size_t>(a)]),
                          spaces.sigma.global_dof(rho, sdofs[static_cast<size_t>(i)]),
                          local[static_cast<size_t>(i) * nu + static_cast<size_t>(a)]});
  }
}

// Rotation rows (asym sigma, r') - (div(l omega), r') with either exact
// quadrature or the vertex rule.
void add_rotation_rows(std::vector<Triplet>& trip, const SchemeSpaces& spaces,
                       const DofLayout& layout, const LengthScale& ell, bool vertex_rule) {
  const Mesh& mesh = spaces.sigma.mesh();
  const int d = mesh.dim();
  const auto terms = asym_terms(d);
  const int kd = rotation_components(d);

  // asym coupling
  {
    const QuadratureRule rule = vertex_rule ? q1_rule(d) : gauss_rule(d, spaces.sigma.degree() + 1);
    CellEval sev(spaces.sigma, rule);
    CellEval rev(spaces.r, rule);
    const int ns = spaces.sigma.local_dofs();
    const int nr = spaces.r.local_dofs();
    std::vector<double> local(static_cast<size_t>(terms.size()) * ns * nr);
    for (int c = 0; c < mesh.num_cells(); ++c) {
      sev.bind(c);
      rev.bind(c);
      std::fill(local.begin(), local.end(), 0.0);
      const double scale = mesh.cell_measure(c) / ref_measure(d);
      for (int q = 0; q < rule.num_points(); ++q) {
        const double w = scale * rule.weights[static_cast<size_t>(q)];
        for (size_t t = 0; t < terms.size(); ++t)
          for (int i = 0; i < ns; ++i) {
            const double sv = sev.vector(q, i)[terms[t].comp];
            if (sv == 0.0) continue;
            for (int b = 0; b < nr; ++b)
              local[(t * ns + static_cast<size_t>(i)) * nr + static_cast<size_t>(b)] +=
                  w * terms[t].sign * sv * rev.scalar(q, b);
          }
      }
      const auto sdofs = spaces.sigma.cell_dofs(c);
      const auto rdofs = spaces.r.cell_dofs(c);
      for (size_t t = 0; t < terms.size(); ++t)
        for (int i = 0; i < ns; ++i)
          for (int b = 0; b < nr; ++b)
            trip.push_back({layout.r_offset() + spaces.r.global_dof(terms[t].k, rdofs[static_cast<size_t>(b)]),
                            spaces.sigma.global_dof(terms[t].row, sdofs[static_cast<size_t>(i)]),
                            local[(t * ns + static_cast<size_t>(i)) * nr + static_cast<size_t>(b)]});
    }
  }

  // -(div(l omega), r') = -((grad l) . omega + l div omega, r')
  if (!ell.is_zero()) {
    const QuadratureRule rule = vertex_rule ? q1_rule(d) : gauss_rule(d, 6);
    CellEval wev(spaces.omega, rule);
    CellEval rev(spaces.r, rule);
    const int nw = spaces.omega.local_dofs();
    const int nr = spaces.r.local_dofs();
    std::vector<double> local(static_cast<size_t>(nw) * nr);
    for (int c = 0; c < mesh.num_cells(); ++c) {
      wev.bind(c);
      rev.bind(c);
      std::fill(local.begin(), local.end(), 0.0);
      const double scale = mesh.cell_measure(c) / ref_measure(d);
      for (int q = 0; q < rule.num_points(); ++q) {
        const double w = scale * rule.weights[static_cast<size_t>(q)];
        const auto x = wev.point(q);
        const double lv = ell.value(x);
        const Vec3 lg = ell.gradient(x);
        for (int i = 0; i < nw; ++i) {
          const double* wi = wev.vector(q, i);
          double flux = lv * wev.div(q, i);
          for (int k = 0; k < d; ++k) flux += lg[static_cast<size_t>(k)] * wi[k];
          if (flux == 0.0) continue;
          for (int b = 0; b < nr; ++b)
            local[static_cast<size_t>(i) * nr + static_cast<size_t>(b)] -= w * flux * rev.scalar(q, b);
        }
      }
      const auto wdofs = spaces.omega.cell_dofs(c);
      const auto rdofs = spaces.r.cell_dofs(c);
      for (int k = 0; k < kd; ++k)
        for (int i = 0; i < nw; ++i)
          for (int b = 0; b < nr; ++b)
            trip.push_back({layout.r_offset() + spaces.r.global_dof(k, rdofs[static_cast<size_t>(b)]),
                            layout.omega_offset() + spaces.omega.global_dof(k, wdofs[static_cast<size_t>(i)]),
                            local[static_cast<size_t>(i) * nr + static_cast<size_t>(b)]});
    }
  }
}

Csr assemble_B_rule(const SchemeSpaces& spaces, const LengthScale& ell, bool vertex_rotation) {
  const DofLayout layout = make_layout(spaces);
  std::vector<Triplet> trip;
  add_divergence_rows(trip, spaces);
  add_rotation_rows(trip, spaces, layout, ell, vertex_rotation);
  return csr_from_triplets(layout.ny(), layout.nx(), trip);
}

// Integrals (f_sigma, u'-basis) and (f_omega, r'-basis); the rotation part
// is returned separately so the reduced form can replace it.
void forcing_moments(const SchemeSpaces& spaces, const ManufacturedCase& mc,
                     std::vector<double>& f_u, std::vector<double>& f_r) {
  const Mesh& mesh = spaces.sigma.mesh();
  const int d = mesh.dim();
  const int kd = rotation_components(d);
  const QuadratureRule rule = gauss_rule(d, 6, 1);
  CellEval uev(spaces.u, rule);
  CellEval rev(spaces.r, rule);
  f_u.assign(static_cast<size_t>(spaces.u.dofs()), 0.0);
  f_r.assign(static_cast<size_t>(spaces.r.dofs()), 0.0);
  Vec3 fs, fw;
  for (int c = 0; c < mesh.num_cells(); ++c) {
    uev.bind(c);
    rev.bind(c);
    const double scale = mesh.cell_measure(c) / ref_measure(d);
    const auto udofs = spaces.u.cell_dofs(c);
    const auto rdofs = spaces.r.cell_dofs(c);
    for (int q = 0; q < rule.num_points(); ++q) {
      const double w = scale * rule.weights[static_cast<size_t>(q)];
      mc.forcing(uev.point(q), fs, fw);
      for (int rho = 0; rho < d; ++rho)
        for (int a = 0; a < spaces.u.local_dofs(); ++a)
          f_u[static_cast<size_t>(spaces.u.global_dof(rho, udofs[static_cast<size_t>(a)]))] +=
              w * fs[static_cast<size_t>(rho)] * uev.scalar(q, a);
      for (int k = 0; k < kd; ++k)
        for (int b = 0; b < spaces.r.local_dofs(); ++b)
          f_r[static_cast<size_t>(spaces.r.global_dof(k, rdofs[static_cast<size_t>(b)]))] +=
              w * fw[static_cast<size_t>(k)] * rev.scalar(q, b);
    }
  }
}

std::vector<double> stack_rhs(const DofLayout& layout, const std::vector<double>& f_u,
                              const std::vector<double>& f_r) {
  std::vector<double> f(static_cast<size_t>(layout.ny()), 0.0);
  std::copy(f_u.begin(), f_u.end(), f.begin());
  std::copy(f_r.begin(), f_r.end(), f.begin() + layout.r_offset());
  return f;
}

}  // namespace

const SchemeTraits& scheme_traits(Scheme s) { return kTraits[static_cast<int>(s)]; }

Scheme scheme_from_name(const std::string& name) {
  for (int i = 0; i < 4; ++i)
    if (name == kTraits[i].name) return static_cast<Scheme>(i);
  throw std::invalid_argument("unknown scheme '" + name + "' (expected bdm1-p0, bdm1-l1, rt1-l1 or rt1-p1)");
}

SchemeSpaces build_spaces(const Mesh& mesh, Scheme scheme) {
  const SchemeTraits& tr = scheme_traits(scheme);
  const int d = mesh.dim();
  const int kd = rotation_components(d);
  return SchemeSpaces{
      FESpace(mesh, tr.stress, d),
      FESpace(mesh, tr.stress, kd),
      FESpace(mesh, tr.displacement, d),
      FESpace(mesh, tr.rotation, kd),
  };
}

DofLayout make_layout(const SchemeSpaces& spaces) {
  DofLayout l;
  l.n_sigma = spaces.sigma.dofs();
  l.n_omega = spaces.omega.dofs();
  l.n_u = spaces.u.dofs();
  l.n_r = spaces.r.dofs();
  return l;
}

Csr assemble_A(const SchemeSpaces& spaces, const MaterialParams& mp) {
  const int d = spaces.sigma.dim();
  const QuadratureRule rule = gauss_rule(d, 2 * spaces.sigma.degree());
  return assemble_A_rule(spaces, mp, rule, rule, -1.0);
}

Csr assemble_A_h(const SchemeSpaces& spaces, const MaterialParams& mp, Scheme scheme) {
  const int d = spaces.sigma.dim();
  const QuadratureRule rule = scheme_traits(scheme).stress_quadrature == 1 ? q1_rule(d) : q2_rule(d);
  return assemble_A_rule(spaces, mp, rule, rule, 1e-14);
}

Csr assemble_B(const SchemeSpaces& spaces, const LengthScale& ell) {
  return assemble_B_rule(spaces, ell, false);
}

Csr assemble_B_h(const SchemeSpaces& spaces, const LengthScale& ell) {
  if (spaces.r.family() != Family::L1)
    throw std::invalid_argument("assemble_B_h: reduced rotation rows require the nodal rotation space");
  return assemble_B_rule(spaces, ell, true);
}

std::vector<double> assemble_rhs(const SchemeSpaces& spaces, const ManufacturedCase& mc) {
  std::vector<double> f_u, f_r;
  forcing_moments(spaces, mc, f_u, f_r);
  return stack_rhs(make_layout(spaces), f_u, f_r);
}

std::vector<double> assemble_rhs_h(const SchemeSpaces& spaces, const ManufacturedCase& mc) {
  if (spaces.r.family() != Family::L1)
    throw std::invalid_argument("assemble_rhs_h: reduced right-hand side requires the nodal rotation space");
  std::vector<double> f_u, f_r;
  forcing_moments(spaces, mc, f_u, f_r);

  // Pi_R f_omega via the consistent rotation mass matrix, solved by
  // conjugate gradients; the lumped pairing is then a diagonal scaling.
  const Mesh& mesh = spaces.r.mesh();
  const int d = mesh.dim();
  const int kd = rotation_components(d);
  const Csr mass = mass_matrix(spaces.r);
  const auto diag = csr_diagonal(mass);
  LinOp op{mass.rows, [&](const double* x, double* y) { spmv(mass, x, y); }};
  LinOp jacobi{mass.rows, [&](const double* x, double* y) {
                 for (int i = 0; i < mass.rows; ++i) y[i] = x[i] / diag[static_cast<size_t>(i)];
               }};

  std::vector<double> lumped(static_cast<size_t>(spaces.r.scalar_dofs()), 0.0);
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const auto rdofs = spaces.r.cell_dofs(c);
    const double wv = mesh.cell_measure(c) / (d + 1);
    for (int b = 0; b < spaces.r.local_dofs(); ++b) lumped[static_cast<size_t>(rdofs[static_cast<size_t>(b)])] += wv;
  }

  std::vector<double> b(static_cast<size_t>(spaces.r.scalar_dofs()));
  std::vector<double> proj;
  for (int k = 0; k < kd; ++k) {
    std::copy_n(f_r.begin() + static_cast<size_t>(k) * spaces.r.scalar_dofs(), spaces.r.scalar_dofs(), b.begin());
    IterControl ctl;
    ctl.tol = 1e-12;
    ctl.max_iterations = 400 + 20 * static_cast<int>(std::sqrt(static_cast<double>(mass.rows)));
    const IterStats st = pcg(op, jacobi, b, proj, ctl);
    if (!st.converged) throw std::runtime_error("assemble_rhs_h: rotation mass solve did not converge");
    for (int i = 0; i < spaces.r.scalar_dofs(); ++i)
      f_r[static_cast<size_t>(k) * spaces.r.scalar_dofs() + static_cast<size_t>(i)] =
          lumped[static_cast<size_t>(i)] * proj[static_cast<size_t>(i)];
  }
  return stack_rhs(make_layout(spaces), f_u, f_r);
}

SaddleSystem build_mfe_system(const SchemeSpaces& spaces, Scheme scheme, const ManufacturedCase& mc) {
  SaddleSystem sys;
  sys.scheme = scheme;
  sys.reduced = false;
  sys.layout = make_layout(spaces);
  sys.A = assemble_A(spaces, mc.material);
  sys.B = assemble_B(spaces, mc.ell);
  sys.Bt = csr_transpose(sys.B);
  sys.g.assign(static_cast<size_t>(sys.layout.nx()), 0.0);
  sys.f = assemble_rhs(spaces, mc);
  return sys;
}

SaddleSystem build_msmfe_system(const SchemeSpaces& spaces, Scheme scheme, const ManufacturedCase& mc) {
  SaddleSystem sys;
  sys.scheme = scheme;
  sys.reduced = true;
  sys.layout = make_layout(spaces);
  sys.A = assemble_A_h(spaces, mc.material, scheme);
  const bool lump_rotation = scheme_traits(scheme).lumped_rotation_form;
  sys.B = lump_rotation ? assemble_B_h(spaces, mc.ell) : assemble_B(spaces, mc.ell);
  sys.Bt = csr_transpose(sys.B);
  sys.g.assign(static_cast<size_t>(sys.layout.nx()), 0.0);
  sys.f = lump_rotation ? assemble_rhs_h(spaces, mc) : assemble_rhs(spaces, mc);
  return sys;
}

}  // namespace cosserat
