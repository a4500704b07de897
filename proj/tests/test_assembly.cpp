#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "cosserat/assembly.hpp"
#include "cosserat/quadrature.hpp"

using namespace cosserat;

namespace {

std::mt19937& rng() {
  static std::mt19937 gen(555);
  return gen;
}

double unif(double lo = -1.0, double hi = 1.0) {
  return std::uniform_real_distribution<double>(lo, hi)(rng());
}

ManufacturedCase case_2d(LengthScale ell = LengthScale::make_constant(1.0)) {
  ManufacturedCase mc;
  mc.dim = 2;
  mc.ell = ell;
  return mc;
}

std::vector<double> random_vector(int n) {
  std::vector<double> v(static_cast<size_t>(n));
  for (double& x : v) x = unif();
  return v;
}

double quad_form(const Csr& a, const std::vector<double>& x) {
  std::vector<double> y(static_cast<size_t>(a.rows));
  spmv(a, x.data(), y.data());
  double s = 0.0;
  for (int i = 0; i < a.rows; ++i) s += x[static_cast<size_t>(i)] * y[static_cast<size_t>(i)];
  return s;
}

// Coefficients interpolating a constant stress tensor (rows of m).
std::vector<double> constant_tensor_coeffs(const FESpace& sp, const Mat3& m) {
  return l2_project(sp, [&](std::span<const double>, int comp, double* out) {
    for (int k = 0; k < sp.dim(); ++k) out[k] = m[static_cast<size_t>(comp)][static_cast<size_t>(k)];
  });
}

}  // namespace

TEST_CASE("scheme traits table") {
  CHECK(scheme_from_name("bdm1-p0") == Scheme::Bdm1P0);
  CHECK(scheme_from_name("rt1-p1") == Scheme::Rt1P1);
  CHECK_THROWS(scheme_from_name("rt0-p0"));
  CHECK(scheme_traits(Scheme::Bdm1L1).lumped_rotation_form);
  CHECK(scheme_traits(Scheme::Rt1P1).requires_barycentric);
  CHECK(scheme_traits(Scheme::Rt1L1).stress_quadrature == 2);
}

TEST_CASE("single-triangle quadratic form of the identity stress") {
  Mesh tri(2, {0, 0, 1, 0, 0, 1}, {0, 1, 2});
  SchemeSpaces spaces = build_spaces(tri, Scheme::Bdm1P0);
  MaterialParams mp;  // section-8 values: mu=1, lambda=1 -> A I = I/4, I:I = 2
  Mat3 eye{};
  eye[0][0] = eye[1][1] = 1.0;
  auto sigma_coeffs = constant_tensor_coeffs(spaces.sigma, eye);
  std::vector<double> eta(static_cast<size_t>(make_layout(spaces).nx()), 0.0);
  std::copy(sigma_coeffs.begin(), sigma_coeffs.end(), eta.begin());

  const double expected = tri.cell_measure(0) / 2.0;
  CHECK(quad_form(assemble_A(spaces, mp), eta) == doctest::Approx(expected).epsilon(1e-12));
  // The vertex rule is exact on piecewise constants, so A_h agrees.
  CHECK(quad_form(assemble_A_h(spaces, mp, Scheme::Bdm1P0), eta) ==
        doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("A assembled from the inverse law matches the variational split form") {
  Mesh mesh = build_structured_square(3);
  for (Scheme scheme : {Scheme::Bdm1P0, Scheme::Rt1L1}) {
    SchemeSpaces spaces = build_spaces(mesh, scheme);
    MaterialParams mp;
    mp.mu_sigma = 1.4;
    mp.mu_sigma_c = 0.3;
    mp.lambda_sigma = 0.8;
    mp.mu_omega = 0.9;
    mp.mu_omega_c = 1.2;
    mp.lambda_omega = 0.5;
    const Csr a = assemble_A(spaces, mp);

    // Independent route: numerically integrate the split form
    //   (tau,tau')/2mu - alpha (tr, tr)/2mu + beta/2 (asym, asym)
    // for the sigma block plus the omega quadratic form, on random fields.
    const int d = mesh.dim();
    const double alpha = mp.lambda_sigma / (2.0 * mp.mu_sigma + d * mp.lambda_sigma);
    const double beta = (mp.mu_sigma - mp.mu_sigma_c) / (2.0 * mp.mu_sigma * mp.mu_sigma_c);
    const QuadratureRule rule = gauss_rule(d, 2 * spaces.sigma.degree());
    CellEval sev(spaces.sigma, rule);
    CellEval wev(spaces.omega, rule);
    const DofLayout layout = make_layout(spaces);

    for (int trial = 0; trial < 5; ++trial) {
      const auto eta = random_vector(layout.nx());
      double split = 0.0;
      for (int c = 0; c < mesh.num_cells(); ++c) {
        sev.bind(c);
        wev.bind(c);
        const double scale = mesh.cell_measure(c) / 0.5;
        const auto sdofs = spaces.sigma.cell_dofs(c);
        const auto wdofs = spaces.omega.cell_dofs(c);
        for (int q = 0; q < rule.num_points(); ++q) {
          const double w = scale * rule.weights[static_cast<size_t>(q)];
          Mat3 tau{};
          for (int rho = 0; rho < d; ++rho)
            for (int i = 0; i < spaces.sigma.local_dofs(); ++i) {
              const double cc = eta[static_cast<size_t>(spaces.sigma.global_dof(rho, sdofs[static_cast<size_t>(i)]))];
              const double* v = sev.vector(q, i);
              for (int k = 0; k < d; ++k) tau[static_cast<size_t>(rho)][static_cast<size_t>(k)] += cc * v[k];
            }
          double dot = 0.0, tr = 0.0;
          for (int i = 0; i < d; ++i) {
            tr += tau[static_cast<size_t>(i)][static_cast<size_t>(i)];
            for (int j = 0; j < d; ++j) dot += tau[static_cast<size_t>(i)][static_cast<size_t>(j)] * tau[static_cast<size_t>(i)][static_cast<size_t>(j)];
          }
          const Vec3 as = asym(d, tau);
          double as2 = 0.0;
          for (int k = 0; k < rotation_components(d); ++k) as2 += as[static_cast<size_t>(k)] * as[static_cast<size_t>(k)];
          split += w * ((dot - alpha * tr * tr) / (2.0 * mp.mu_sigma) + 0.5 * beta * as2);

          Mat3 wm{};
          for (int k = 0; k < rotation_components(d); ++k)
            for (int i = 0; i < spaces.omega.local_dofs(); ++i) {
              const double cc = eta[static_cast<size_t>(layout.omega_offset() + spaces.omega.global_dof(k, wdofs[static_cast<size_t>(i)]))];
              const double* v = wev.vector(q, i);
              for (int j = 0; j < d; ++j) wm[static_cast<size_t>(j)][static_cast<size_t>(k)] += cc * v[j];
            }
          const Mat3 aw = apply_A_omega(mp, d, wm);
          double wdot = 0.0;
          for (int j = 0; j < d; ++j)
            for (int k = 0; k < rotation_components(d); ++k) wdot += aw[static_cast<size_t>(j)][static_cast<size_t>(k)] * wm[static_cast<size_t>(j)][static_cast<size_t>(k)];
          split += w * wdot;
        }
      }
      const double direct = quad_form(a, eta);
      CHECK(direct == doctest::Approx(split).epsilon(1e-12));
    }
  }
}

TEST_CASE("doubling the couple modulus halves the skew quadratic form") {
  Mesh mesh = build_structured_square(3);
  SchemeSpaces spaces = build_spaces(mesh, Scheme::Bdm1P0);
  Mat3 skew{};
  skew[0][1] = -1.0;
  skew[1][0] = 1.0;
  auto sigma_coeffs = constant_tensor_coeffs(spaces.sigma, skew);
  std::vector<double> eta(static_cast<size_t>(make_layout(spaces).nx()), 0.0);
  std::copy(sigma_coeffs.begin(), sigma_coeffs.end(), eta.begin());

  MaterialParams mp1, mp2;
  mp2.mu_sigma_c = 2.0 * mp1.mu_sigma_c;
  const double q1 = quad_form(assemble_A(spaces, mp1), eta);
  const double q2 = quad_form(assemble_A(spaces, mp2), eta);
  CHECK(q1 == doctest::Approx(2.0 * q2).epsilon(1e-12));
}

TEST_CASE("lumped stress matrix: symmetry, definiteness and vertex locality") {
  Mesh mesh = build_structured_square(6);
  for (Scheme scheme : {Scheme::Bdm1P0, Scheme::Rt1L1}) {
    SchemeSpaces spaces = build_spaces(mesh, scheme);
    MaterialParams mp;
    const Csr ah = assemble_A_h(spaces, mp, scheme);
    CHECK(max_asymmetry(ah) <= 1e-12 * max_abs(ah));

    for (int trial = 0; trial < 100; ++trial) {
      const auto x = random_vector(ah.rows);
      CHECK(quad_form(ah, x) > 0.0);
    }

    const auto comp = sparse_connected_components(ah);
    const DofLayout layout = make_layout(spaces);
    // Map each x-index to the vertex its DOF is attached to (or -1).
    auto attach = [&](int xi) {
      if (xi < layout.n_sigma) return spaces.sigma.attached_vertex(xi % spaces.sigma.scalar_dofs());
      return spaces.omega.attached_vertex((xi - layout.n_sigma) % spaces.omega.scalar_dofs());
    };
    int ncomp = 0;
    for (int l : comp) ncomp = std::max(ncomp, l + 1);
    std::vector<int> comp_vertex(static_cast<size_t>(ncomp), -2);
    bool vertex_local = true;
    for (int i = 0; i < ah.rows; ++i) {
      const int v = attach(i);
      auto& cv = comp_vertex[static_cast<size_t>(comp[static_cast<size_t>(i)])];
      if (cv == -2)
        cv = v;
      else if (cv != v)
        vertex_local = false;
    }
    if (scheme == Scheme::Bdm1P0) {
      // Every component of the vertex-rule pattern lives at one vertex.
      CHECK(vertex_local);
      for (int c = 0; c < ncomp; ++c) CHECK(comp_vertex[static_cast<size_t>(c)] >= 0);
      CHECK(ncomp >= mesh.num_vertices());
    } else {
      // Vertex-plus-center rule: vertex blocks plus per-cell center blocks;
      // record the structure rather than assuming it.
      CHECK(ncomp >= mesh.num_vertices() + 2 * mesh.num_cells() - 1);
      MESSAGE("rt1-l1 lumped pattern: ", ncomp, " components, mesh has ", mesh.num_vertices(),
              " vertices and ", mesh.num_cells(), " cells");
    }
  }
}

TEST_CASE("lumped and exact stress forms agree on piecewise constants") {
  for (int dim : {2, 3}) {
    Mesh mesh = dim == 2 ? build_structured_square(3) : build_structured_cube(3);
    for (Scheme scheme : {Scheme::Bdm1P0, Scheme::Rt1P1}) {
      SchemeSpaces spaces = build_spaces(mesh, scheme);
      MaterialParams mp;
      const DofLayout layout = make_layout(spaces);
      Mat3 m{};
      for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) m[static_cast<size_t>(i)][static_cast<size_t>(j)] = unif();
      auto sc = constant_tensor_coeffs(spaces.sigma, m);
      Mat3 wm{};
      for (int j = 0; j < dim; ++j)
        for (int k = 0; k < rotation_components(dim); ++k) wm[static_cast<size_t>(j)][static_cast<size_t>(k)] = unif();
      // omega components are columns: component k holds column k.
      auto wc = l2_project(spaces.omega, [&](std::span<const double>, int comp, double* out) {
        for (int j = 0; j < dim; ++j) out[j] = wm[static_cast<size_t>(j)][static_cast<size_t>(comp)];
      });
      std::vector<double> eta(static_cast<size_t>(layout.nx()), 0.0);
      std::copy(sc.begin(), sc.end(), eta.begin());
      std::copy(wc.begin(), wc.end(), eta.begin() + layout.omega_offset());

      const Csr a = assemble_A(spaces, mp);
      const Csr ah = assemble_A_h(spaces, mp, scheme);
      std::vector<double> ya(static_cast<size_t>(layout.nx())), yh(static_cast<size_t>(layout.nx()));
      spmv(a, eta.data(), ya.data());
      spmv(ah, eta.data(), yh.data());
      double scale = 0.0;
      for (double y : ya) scale = std::max(scale, std::abs(y));
      for (int i = 0; i < layout.nx(); ++i)
        CHECK(std::abs(ya[static_cast<size_t>(i)] - yh[static_cast<size_t>(i)]) <= 1e-12 * std::max(1.0, scale));
    }
  }
}

TEST_CASE("divergence rows annihilate solenoidal stress fields") {
  Mesh mesh = build_structured_square(3);
  SchemeSpaces spaces = build_spaces(mesh, Scheme::Bdm1P0);
  const DofLayout layout = make_layout(spaces);

  // Rotated gradients of continuous piecewise linears are divergence-free
  // members of the stress space.
  FESpace stream(mesh, Family::L1, 1);
  auto psi0 = random_vector(stream.scalar_dofs());
  auto psi1 = random_vector(stream.scalar_dofs());
  const QuadratureRule vrule = q1_rule(2);
  CellEval sev(stream, vrule);

  // Evaluate curl psi per cell (constant): [d2 psi, -d1 psi] from the
  // nodal gradient of the linear interpolant.
  auto curl_target = [&](int cell, const std::vector<double>& psi, double* out) {
    const auto cv = mesh.cell_vertices(cell);
    DenseMatrix a(2, 2);
    std::vector<double> b(2);
    const auto p0 = mesh.vertex(cv[0]);
    for (int k = 1; k <= 2; ++k) {
      const auto pk = mesh.vertex(cv[static_cast<size_t>(k)]);
      a(k - 1, 0) = pk[0] - p0[0];
      a(k - 1, 1) = pk[1] - p0[1];
      b[static_cast<size_t>(k - 1)] = psi[static_cast<size_t>(cv[static_cast<size_t>(k)])] - psi[static_cast<size_t>(cv[0])];
    }
    const auto grad = lu_solve(lu_factor(std::move(a)), b);
    out[0] = grad[1];
    out[1] = -grad[0];
  };

  // Interpolate (cell-wise constant, normal-continuous) into BDM1 by
  // matching facet-vertex normal values.
  std::vector<double> sigma_coeffs(static_cast<size_t>(spaces.sigma.dofs()), 0.0);
  for (int c = 0; c < mesh.num_cells(); ++c) {
    double curl0[2], curl1[2];
    curl_target(c, psi0, curl0);
    curl_target(c, psi1, curl1);
    const auto cf = mesh.cell_facets(c);
    for (int lf = 0; lf < 3; ++lf) {
      const int f = cf[static_cast<size_t>(lf)];
      const auto n = mesh.facet_normal(f);
      for (int s = 0; s < 2; ++s) {
        sigma_coeffs[static_cast<size_t>(spaces.sigma.global_dof(0, f * 2 + s))] = n[0] * curl0[0] + n[1] * curl0[1];
        sigma_coeffs[static_cast<size_t>(spaces.sigma.global_dof(1, f * 2 + s))] = n[0] * curl1[0] + n[1] * curl1[1];
      }
    }
  }
  std::vector<double> eta(static_cast<size_t>(layout.nx()), 0.0);
  std::copy(sigma_coeffs.begin(), sigma_coeffs.end(), eta.begin());

  const Csr b = assemble_B(spaces, LengthScale::make_constant(1.0));
  std::vector<double> y(static_cast<size_t>(layout.ny()));
  spmv(b, eta.data(), y.data());
  double norm = 0.0;
  for (double cc : eta) norm += cc * cc;
  norm = std::sqrt(norm);
  for (int i = 0; i < layout.n_u; ++i) CHECK(std::abs(y[static_cast<size_t>(i)]) <= 1e-11 * norm);
}

TEST_CASE("zero length scale leaves no omega coupling in B") {
  Mesh mesh = build_structured_square(3);
  SchemeSpaces spaces = build_spaces(mesh, Scheme::Bdm1P0);
  const DofLayout layout = make_layout(spaces);
  const Csr b = assemble_B(spaces, LengthScale::make_constant(0.0));
  for (int r = 0; r < b.rows; ++r)
    for (int k = b.row_ptr[static_cast<size_t>(r)]; k < b.row_ptr[static_cast<size_t>(r) + 1]; ++k)
      CHECK(b.col_idx[static_cast<size_t>(k)] < layout.omega_offset());
}

TEST_CASE("asym coupling row sums against exact integrals") {
  Mesh mesh = build_structured_square(3);
  SchemeSpaces spaces = build_spaces(mesh, Scheme::Bdm1L1);
  const DofLayout layout = make_layout(spaces);
  Mat3 star = asym_star(2, {1.0, 0.0, 0.0});
  auto sc = constant_tensor_coeffs(spaces.sigma, star);
  std::vector<double> eta(static_cast<size_t>(layout.nx()), 0.0);
  std::copy(sc.begin(), sc.end(), eta.begin());

  const Csr b = assemble_B(spaces, LengthScale::make_constant(0.0));
  std::vector<double> y(static_cast<size_t>(layout.ny()));
  spmv(b, eta.data(), y.data());
  // asym(asym_star(1)) = 2, so each rotation row integrates 2 r'_b.
  const QuadratureRule rule = gauss_rule(2, 2);
  CellEval rev(spaces.r, rule);
  std::vector<double> expected(static_cast<size_t>(spaces.r.dofs()), 0.0);
  for (int c = 0; c < mesh.num_cells(); ++c) {
    rev.bind(c);
    const auto rdofs = spaces.r.cell_dofs(c);
    const double scale = mesh.cell_measure(c) / 0.5;
    for (int q = 0; q < rule.num_points(); ++q)
      for (int bdof = 0; bdof < spaces.r.local_dofs(); ++bdof)
        expected[static_cast<size_t>(rdofs[static_cast<size_t>(bdof)])] +=
            2.0 * scale * rule.weights[static_cast<size_t>(q)] * rev.scalar(q, bdof);
  }
  for (int i = 0; i < spaces.r.dofs(); ++i)
    CHECK(y[static_cast<size_t>(layout.r_offset() + i)] ==
          doctest::Approx(expected[static_cast<size_t>(i)]).epsilon(1e-12));
}

TEST_CASE("reduced B: displacement rows identical, lumped rows exact on lumpable fields") {
  Mesh mesh = build_structured_square(3);
  SchemeSpaces spaces = build_spaces(mesh, Scheme::Bdm1L1);
  const DofLayout layout = make_layout(spaces);
  const LengthScale one = LengthScale::make_constant(1.0);
  const Csr b = assemble_B(spaces, one);
  const Csr bh = assemble_B_h(spaces, one);

  // Displacement rows agree bit for bit.
  for (int r = 0; r < layout.n_u; ++r) {
    REQUIRE(b.row_ptr[static_cast<size_t>(r)] == bh.row_ptr[static_cast<size_t>(r)]);
    for (int k = b.row_ptr[static_cast<size_t>(r)]; k < b.row_ptr[static_cast<size_t>(r) + 1]; ++k) {
      CHECK(b.col_idx[static_cast<size_t>(k)] == bh.col_idx[static_cast<size_t>(k)]);
      CHECK(b.val[static_cast<size_t>(k)] == bh.val[static_cast<size_t>(k)]);
    }
  }

  // On a constant-skew stress and any couple stress (constant ell), the
  // vertex rule integrates the rotation rows exactly.
  Mat3 star = asym_star(2, {0.7, 0.0, 0.0});
  auto sc = constant_tensor_coeffs(spaces.sigma, star);
  std::vector<double> eta(static_cast<size_t>(layout.nx()), 0.0);
  std::copy(sc.begin(), sc.end(), eta.begin());
  for (int i = layout.omega_offset(); i < layout.nx(); ++i) eta[static_cast<size_t>(i)] = unif();

  std::vector<double> yb(static_cast<size_t>(layout.ny())), yh(static_cast<size_t>(layout.ny()));
  spmv(b, eta.data(), yb.data());
  spmv(bh, eta.data(), yh.data());
  double scale = 0.0;
  for (double v : yb) scale = std::max(scale, std::abs(v));
  for (int i = 0; i < layout.ny(); ++i)
    CHECK(std::abs(yb[static_cast<size_t>(i)] - yh[static_cast<size_t>(i)]) <= 1e-12 * scale);

  // With ell = 0 the reduced rotation rows keep only the asym coupling.
  const Csr bh0 = assemble_B_h(spaces, LengthScale::make_constant(0.0));
  for (int r = layout.r_offset(); r < layout.ny(); ++r)
    for (int k = bh0.row_ptr[static_cast<size_t>(r)]; k < bh0.row_ptr[static_cast<size_t>(r) + 1]; ++k)
      CHECK(bh0.col_idx[static_cast<size_t>(k)] < layout.omega_offset());
}

TEST_CASE("numerical kernel of B carries divergence-free stresses") {
  for (Scheme scheme : {Scheme::Bdm1P0, Scheme::Rt1L1}) {
    Mesh mesh = build_structured_square(3);
    SchemeSpaces spaces = build_spaces(mesh, scheme);
    const DofLayout layout = make_layout(spaces);
    const Csr b = assemble_B(spaces, LengthScale::smooth_step());
    const Csr bt = csr_transpose(b);

    // Orthogonal projector onto ker B via the dense normal equations.
    DenseMatrix bbt(layout.ny(), layout.ny());
    {
      std::vector<double> col(static_cast<size_t>(layout.nx()));
      for (int i = 0; i < layout.ny(); ++i) {
        std::vector<double> ei(static_cast<size_t>(layout.ny()), 0.0);
        ei[static_cast<size_t>(i)] = 1.0;
        spmv(bt, ei.data(), col.data());
        std::vector<double> bcol(static_cast<size_t>(layout.ny()));
        spmv(b, col.data(), bcol.data());
        for (int j = 0; j < layout.ny(); ++j) bbt(j, i) = bcol[static_cast<size_t>(j)];
      }
    }
    const DenseLu lu = lu_factor(std::move(bbt));

    const QuadratureRule rule = gauss_rule(2, 2);
    CellEval sev(spaces.sigma, rule);
    for (int trial = 0; trial < 50; ++trial) {
      std::vector<double> x(static_cast<size_t>(layout.nx()));
      for (double& v : x) v = unif();
      std::vector<double> bx(static_cast<size_t>(layout.ny()));
      spmv(b, x.data(), bx.data());
      lu_solve(lu, bx.data());
      std::vector<double> corr(static_cast<size_t>(layout.nx()));
      spmv(bt, bx.data(), corr.data());
      for (int i = 0; i < layout.nx(); ++i) x[static_cast<size_t>(i)] -= corr[static_cast<size_t>(i)];

      double xn = 0.0;
      for (double v : x) xn += v * v;
      xn = std::sqrt(xn);
      spmv(b, x.data(), bx.data());
      for (double v : bx) CHECK(std::abs(v) <= 1e-10 * xn);

      // The sigma part of a kernel vector is elementwise divergence-free.
      for (int c = 0; c < mesh.num_cells(); ++c) {
        sev.bind(c);
        const auto dofs = spaces.sigma.cell_dofs(c);
        for (int q = 0; q < rule.num_points(); ++q)
          for (int rho = 0; rho < 2; ++rho) {
            double div = 0.0;
            for (int i = 0; i < spaces.sigma.local_dofs(); ++i)
              div += x[static_cast<size_t>(spaces.sigma.global_dof(rho, dofs[static_cast<size_t>(i)]))] *
                     sev.div(q, i);
            CHECK(std::abs(div) <= 1e-10 * std::max(1.0, xn));
          }
      }
    }
  }
}

TEST_CASE("saddle blocks: A symmetric, B and its transpose adjoint") {
  Mesh mesh = build_structured_square(3);
  SchemeSpaces spaces = build_spaces(mesh, Scheme::Rt1L1);
  const ManufacturedCase mc = case_2d(LengthScale::smooth_step());
  SaddleSystem sys = build_mfe_system(spaces, Scheme::Rt1L1, mc);
  CHECK(max_asymmetry(sys.A) <= 1e-12 * max_abs(sys.A));
  for (int trial = 0; trial < 10; ++trial) {
    const auto x = random_vector(sys.layout.nx());
    const auto y = random_vector(sys.layout.ny());
    std::vector<double> bx(static_cast<size_t>(sys.layout.ny())), bty(static_cast<size_t>(sys.layout.nx()));
    spmv(sys.B, x.data(), bx.data());
    spmv(sys.Bt, y.data(), bty.data());
    double s1 = 0.0, s2 = 0.0;
    for (int i = 0; i < sys.layout.ny(); ++i) s1 += y[static_cast<size_t>(i)] * bx[static_cast<size_t>(i)];
    for (int i = 0; i < sys.layout.nx(); ++i) s2 += x[static_cast<size_t>(i)] * bty[static_cast<size_t>(i)];
    CHECK(s1 == doctest::Approx(s2).epsilon(1e-13));
  }
  CHECK(sys.g == std::vector<double>(static_cast<size_t>(sys.layout.nx()), 0.0));
}

TEST_CASE("forcing moments against refined-quadrature oracles") {
  SUBCASE("2D entries, degree-6 versus composite rule") {
    Mesh mesh = build_structured_square(6);
    SchemeSpaces spaces = build_spaces(mesh, Scheme::Bdm1P0);
    const ManufacturedCase mc = case_2d();
    const auto f = assemble_rhs(spaces, mc);
    // Composite oracle: degree-6 on twice barycentrically refined cells.
    Mesh fine = barycentric_subdivide(barycentric_subdivide(mesh));
    const QuadratureRule rule = gauss_rule(2, 6);
    const int children = 9;
    Vec3 fs, fw;
    for (int c = 0; c < mesh.num_cells(); ++c) {
      double exact[2] = {0.0, 0.0};
      for (int ch = 0; ch < children; ++ch) {
        const int fc = c * 3 * 3 + ch;  // two refinements triple twice
        for (int rho = 0; rho < 2; ++rho)
          exact[rho] += integrate(rule, fine, fc, [&](std::span<const double> x) {
            mc.forcing(x, fs, fw);
            return fs[static_cast<size_t>(rho)];
          });
      }
      for (int rho = 0; rho < 2; ++rho)
        CHECK(std::abs(f[static_cast<size_t>(spaces.u.global_dof(rho, c))] - exact[rho]) <= 1e-9);
    }
  }
  SUBCASE("zero manufactured fields give a zero right-hand side") {
    Mesh mesh = build_structured_square(3);
    SchemeSpaces spaces = build_spaces(mesh, Scheme::Bdm1P0);
    ManufacturedCase mc = case_2d();
    mc.amplitude = 0.0;
    const auto f = assemble_rhs(spaces, mc);
    for (double v : f) CHECK(v == 0.0);
  }
  SUBCASE("3D entries are finite and match a composite refined oracle") {
    Mesh mesh = build_structured_cube(3);
    SchemeSpaces spaces = build_spaces(mesh, Scheme::Bdm1P0);
    ManufacturedCase mc;
    mc.dim = 3;
    mc.ell = LengthScale::smooth_step();
    const auto f1 = assemble_rhs(spaces, mc);
    for (double v : f1) CHECK(std::isfinite(v));
    // Norm against a composite refined oracle, relative 1e-8.
    Mesh fine = barycentric_subdivide(barycentric_subdivide(mesh));
    SchemeSpaces fine_spaces = build_spaces(fine, Scheme::Bdm1P0);
    const auto ff = assemble_rhs(fine_spaces, mc);
    // Compare P0 u-entries: coarse entry = sum of its 16 children.
    double num = 0.0, den = 0.0;
    for (int rho = 0; rho < 3; ++rho)
      for (int c = 0; c < mesh.num_cells(); ++c) {
        double sum = 0.0;
        for (int ch = 0; ch < 16; ++ch) sum += ff[static_cast<size_t>(fine_spaces.u.global_dof(rho, c * 16 + ch))];
        const double coarse = f1[static_cast<size_t>(spaces.u.global_dof(rho, c))];
        num += (coarse - sum) * (coarse - sum);
        den += coarse * coarse;
      }
    CHECK(std::sqrt(num / den) <= 1e-8);
  }
}
