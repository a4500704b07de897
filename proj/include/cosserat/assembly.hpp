#pragma once

#include <string>

#include "cosserat/csr.hpp"
#include "cosserat/fe.hpp"
#include "cosserat/mesh.hpp"
#include "cosserat/model.hpp"

namespace cosserat {

/// The four discretizations, named after the stress and rotation elements.
enum class Scheme { Bdm1P0, Bdm1L1, Rt1L1, Rt1P1 };

struct SchemeTraits {
  const char* name;
  Family stress;        // Cauchy and couple stress element
  Family displacement;  // P0 or P1dc
  Family rotation;      // P0, L1 or P1dc
  int stress_quadrature;       // 1: vertex rule, 2: vertex-plus-center rule
  bool lumped_rotation_form;   // reduced form also lumps the rotation rows
  bool requires_barycentric;   // stable only on barycentrically refined grids
};

const SchemeTraits& scheme_traits(Scheme s);
Scheme scheme_from_name(const std::string& name);

/// The four spaces of one scheme on one mesh (stress fields replicated
/// per tensor row, rotation-related fields per rotation component).
struct SchemeSpaces {
  FESpace sigma;
  FESpace omega;
  FESpace u;
  FESpace r;
};

SchemeSpaces build_spaces(const Mesh& mesh, Scheme scheme);

/// Offsets of the four fields inside the stress vector x = (sigma, omega)
/// and the displacement/rotation vector y = (u, r).
struct DofLayout {
  int n_sigma = 0;
  int n_omega = 0;
  int n_u = 0;
  int n_r = 0;
  int nx() const { return n_sigma + n_omega; }
  int ny() const { return n_u + n_r; }
  int omega_offset() const { return n_sigma; }
  int r_offset() const { return n_u; }
};

DofLayout make_layout(const SchemeSpaces& spaces);

/// Assembled saddle blocks: A (or its lumped variant) on the stress
/// pair, B mapping stresses to displacement/rotation test functions, and
/// the right-hand sides g (stress rows, zero here) and f.
struct SaddleSystem {
  Scheme scheme = Scheme::Bdm1P0;
  bool reduced = false;  // lumped stress form (and rotation rows where the scheme lumps them)
  DofLayout layout;
  Csr A;
  Csr B;
  Csr Bt;
  std::vector<double> g;
  std::vector<double> f;
};

/// Exact stress bilinear form.
Csr assemble_A(const SchemeSpaces& spaces, const MaterialParams& mp);

/// Vertex / vertex-plus-center quadrature variant of A. Entries below
/// 1e-14 of the largest magnitude are dropped, which leaves exactly the
/// quadrature-coupled pattern.
Csr assemble_A_h(const SchemeSpaces& spaces, const MaterialParams& mp, Scheme scheme);

/// Exact operator B: -(div sigma, u') + (asym sigma, r') - (div(l omega), r').
Csr assemble_B(const SchemeSpaces& spaces, const LengthScale& ell);

/// Rotation rows evaluated with the vertex rule (reduced BDM1-L1 form);
/// displacement rows are bit-identical to assemble_B.
Csr assemble_B_h(const SchemeSpaces& spaces, const LengthScale& ell);

/// Right-hand side f = ((f_sigma, u'), (f_omega, r')).
std::vector<double> assemble_rhs(const SchemeSpaces& spaces, const ManufacturedCase& mc);

/// Reduced right-hand side with the rotation part (Pi_R f_omega, r')_Q1,
/// where Pi_R is the consistent L2 projection onto the rotation space.
std::vector<double> assemble_rhs_h(const SchemeSpaces& spaces, const ManufacturedCase& mc);

SaddleSystem build_mfe_system(const SchemeSpaces& spaces, Scheme scheme, const ManufacturedCase& mc);
SaddleSystem build_msmfe_system(const SchemeSpaces& spaces, Scheme scheme, const ManufacturedCase& mc);

}  // namespace cosserat
