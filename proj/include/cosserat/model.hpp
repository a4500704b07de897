#pragma once

#include <array>
#include <span>

namespace cosserat {

using Vec3 = std::array<double, 3>;
using Mat3 = std::array<Vec3, 3>;

/// Number of rotation components: 1 in 2D, 3 in 3D.
constexpr int rotation_components(int dim) { return dim == 2 ? 1 : 3; }

/// Material parameters of the Cauchy and couple stress laws. All values
/// are dimensionless in the shipped experiments.
struct MaterialParams {
  double mu_sigma = 1.0;
  double mu_sigma_c = 0.1;
  double lambda_sigma = 1.0;
  double mu_omega = 1.0;
  double mu_omega_c = 0.1;
  double lambda_omega = 1.0;

  void validate() const;
};

/// Index conventions used throughout:
///   - Cauchy stress sigma[i][j]: row i is an H(div) vector field, the
///     divergence and normal trace contract the second index j.
///   - Couple stress omega[j][k]: column k is an H(div) vector field, the
///     divergence and normal trace contract the first index j. In 2D only
///     k = 0 exists and omega is a plain vector field.
///   - grad_u[i][j] = d_j u_i and grad_r[j][k] = d_j r_k.

Vec3 asym(int dim, const Mat3& tau);
Mat3 asym_star(int dim, const Vec3& r);

Mat3 apply_C_sigma(const MaterialParams& mp, int dim, const Mat3& tau);
Mat3 apply_A_sigma(const MaterialParams& mp, int dim, const Mat3& tau);
Mat3 apply_C_omega(const MaterialParams& mp, int dim, const Mat3& tau);
Mat3 apply_A_omega(const MaterialParams& mp, int dim, const Mat3& tau);

/// (A_sigma (e_rho x phi)) : (e_rho2 x phi2) for vector values phi, phi2
/// of length dim; the rank-one pairing used when assembling stress forms.
double a_sigma_pair(const MaterialParams& mp, int dim, int rho, std::span<const double> phi,
                    int rho2, std::span<const double> phi2);
/// Same pairing for the couple stress, whose rank-one fields are
/// (phi x e_k); in 2D this degenerates to a scaled dot product.
double a_omega_pair(const MaterialParams& mp, int dim, int k, std::span<const double> phi,
                    int k2, std::span<const double> phi2);

/// Smooth transition profile: 0 below 1/3, sin^2(pi/2 (3 x1 - 1)) in the
/// middle band, 1 above 2/3.
double varpi(double x1);
double varpi_grad(double x1);

/// Scalar length-scale field, either constant or the varpi profile.
struct LengthScale {
  enum class Kind { Constant, SmoothStep };
  Kind kind = Kind::Constant;
  double constant = 1.0;

  static LengthScale make_constant(double c);
  static LengthScale smooth_step();

  double value(std::span<const double> x) const;
  Vec3 gradient(std::span<const double> x) const;
  bool is_zero() const { return kind == Kind::Constant && constant == 0.0; }
};

/// Smooth displacement/rotation pair vanishing on the unit-box boundary,
/// with stresses derived from the constitutive laws and body forces from
/// the momentum balances. Derivatives are taken with forward-mode dual
/// numbers, so the forcing terms are exact to machine precision.
struct ManufacturedCase {
  int dim = 2;
  MaterialParams material;
  LengthScale ell;
  double amplitude = 1.0;  // scales u and r (all derived fields are linear in it)

  Vec3 displacement(std::span<const double> x) const;
  Vec3 rotation(std::span<const double> x) const;
  Mat3 stress(std::span<const double> x) const;        // sigma[i][j]
  Mat3 couple_stress(std::span<const double> x) const; // omega[j][k]

  /// f_sigma = -div sigma and f_omega = asym sigma - div(ell omega).
  void forcing(std::span<const double> x, Vec3& f_sigma, Vec3& f_omega) const;
};

}  // namespace cosserat
