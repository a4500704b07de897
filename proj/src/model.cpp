#include "cosserat/model.hpp"

#include <cmath>
#include <stdexcept>

#include "cosserat/dual.hpp"

namespace cosserat {

namespace {

constexpr double kPi = 3.14159265358979323846;

template <class T>
using TMat = std::array<std::array<T, 3>, 3>;

template <class T, int D>
using TVec = std::array<T, D>;

template <class T>
T varpi_t(const T& x1) {
  const double x = value_of(x1);
  if (x < 1.0 / 3.0) return T(0.0);
  if (x >= 2.0 / 3.0) return T(1.0);
  const T s = sin((kPi / 2.0) * (3.0 * x1 - 1.0));
  return s * s;
}

template <class T>
T ell_t(const LengthScale& ell, const T& x1) {
  if (ell.kind == LengthScale::Kind::Constant) return T(ell.constant);
  return varpi_t(x1);
}

// Manufactured displacement and rotation components; indices wrap module
// the dimension.
template <int D, class T>
T u_comp(int i, const TVec<T, D>& x) {
  const T s = sin(kPi * x[static_cast<size_t>(i)]);
  if constexpr (D == 2) {
    const int o = 1 - i;
    return x[static_cast<size_t>(o)] * (1.0 - x[static_cast<size_t>(o)]) * s;
  } else {
    const int ip = (i + 1) % 3;
    const int im = (i + 2) % 3;
    return x[static_cast<size_t>(ip)] * (1.0 - x[static_cast<size_t>(ip)]) *
           x[static_cast<size_t>(im)] * (1.0 - x[static_cast<size_t>(im)]) * s;
  }
}

template <int D, class T>
T r_comp(int k, const TVec<T, D>& x) {
  if constexpr (D == 2) {
    (void)k;
    return sin(kPi * x[0]) * sin(kPi * x[1]);
  } else {
    const int ip = (k + 1) % 3;
    const int im = (k + 2) % 3;
    return x[static_cast<size_t>(k)] * (1.0 - x[static_cast<size_t>(k)]) *
           sin(kPi * x[static_cast<size_t>(ip)]) * sin(kPi * x[static_cast<size_t>(im)]);
  }
}

template <int D, class T>
TMat<T> asym_star_t(const std::array<T, 3>& r) {
  TMat<T> m{};
  if constexpr (D == 2) {
    m[0][1] = -r[0];
    m[1][0] = r[0];
  } else {
    m[0][1] = -r[2];
    m[0][2] = r[1];
    m[1][0] = r[2];
    m[1][2] = -r[0];
    m[2][0] = -r[1];
    m[2][1] = r[0];
  }
  return m;
}

// 2 mu sym(tau) + 2 mu_c skw(tau) + lambda tr(tau) I on the leading d x d
// block (identity material for the 2D couple stress handled by callers).
template <class T>
TMat<T> hooke_t(double mu, double mu_c, double lambda, int d, const TMat<T>& tau) {
  TMat<T> out{};
  T tr(0.0);
  for (int i = 0; i < d; ++i) tr += tau[static_cast<size_t>(i)][static_cast<size_t>(i)];
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      const T sym = 0.5 * (tau[static_cast<size_t>(i)][static_cast<size_t>(j)] + tau[static_cast<size_t>(j)][static_cast<size_t>(i)]);
      const T skw = 0.5 * (tau[static_cast<size_t>(i)][static_cast<size_t>(j)] - tau[static_cast<size_t>(j)][static_cast<size_t>(i)]);
      out[static_cast<size_t>(i)][static_cast<size_t>(j)] = 2.0 * mu * sym + 2.0 * mu_c * skw;
      if (i == j) out[static_cast<size_t>(i)][static_cast<size_t>(j)] += lambda * tr;
    }
  return out;
}

template <class T>
TMat<T> hooke_inverse_t(double mu, double mu_c, double lambda, int d, const TMat<T>& tau) {
  TMat<T> out{};
  const double alpha = lambda / (2.0 * mu + d * lambda);
  T tr(0.0);
  for (int i = 0; i < d; ++i) tr += tau[static_cast<size_t>(i)][static_cast<size_t>(i)];
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      const T sym = 0.5 * (tau[static_cast<size_t>(i)][static_cast<size_t>(j)] + tau[static_cast<size_t>(j)][static_cast<size_t>(i)]);
      const T skw = 0.5 * (tau[static_cast<size_t>(i)][static_cast<size_t>(j)] - tau[static_cast<size_t>(j)][static_cast<size_t>(i)]);
      out[static_cast<size_t>(i)][static_cast<size_t>(j)] = (1.0 / (2.0 * mu)) * sym + (1.0 / (2.0 * mu_c)) * skw;
      if (i == j) out[static_cast<size_t>(i)][static_cast<size_t>(j)] += (-alpha / (2.0 * mu)) * tr;
    }
  return out;
}

template <int D, class T>
TMat<T> c_omega_t(const MaterialParams& mp, const TMat<T>& tau) {
  if constexpr (D == 2) {
    TMat<T> out{};
    out[0][0] = 2.0 * mp.mu_omega * tau[0][0];
    out[1][0] = 2.0 * mp.mu_omega * tau[1][0];
    return out;
  } else {
    return hooke_t(mp.mu_omega, mp.mu_omega_c, mp.lambda_omega, 3, tau);
  }
}

// grad_u[i][j] = d_j u_i via one dual layer over the scalar type T.
template <int D, class T>
TMat<T> grad_u_t(const TVec<T, D>& x) {
  using DT = Dual<T, D>;
  TVec<DT, D> xd;
  for (int j = 0; j < D; ++j) {
    xd[static_cast<size_t>(j)] = DT(x[static_cast<size_t>(j)]);
    xd[static_cast<size_t>(j)].d[static_cast<size_t>(j)] = T(1.0);
  }
  TMat<T> g{};
  for (int i = 0; i < D; ++i) {
    const DT ui = u_comp<D, DT>(i, xd);
    for (int j = 0; j < D; ++j) g[static_cast<size_t>(i)][static_cast<size_t>(j)] = ui.d[static_cast<size_t>(j)];
  }
  return g;
}

template <int D, class T>
TMat<T> grad_r_t(const TVec<T, D>& x) {
  using DT = Dual<T, D>;
  TVec<DT, D> xd;
  for (int j = 0; j < D; ++j) {
    xd[static_cast<size_t>(j)] = DT(x[static_cast<size_t>(j)]);
    xd[static_cast<size_t>(j)].d[static_cast<size_t>(j)] = T(1.0);
  }
  constexpr int K = D == 2 ? 1 : 3;
  TMat<T> g{};
  for (int k = 0; k < K; ++k) {
    const DT rk = r_comp<D, DT>(k, xd);
    for (int j = 0; j < D; ++j) g[static_cast<size_t>(j)][static_cast<size_t>(k)] = rk.d[static_cast<size_t>(j)];
  }
  return g;
}

template <int D, class T>
TMat<T> sigma_t(const MaterialParams& mp, const TVec<T, D>& x) {
  TMat<T> g = grad_u_t<D, T>(x);
  constexpr int K = D == 2 ? 1 : 3;
  std::array<T, 3> r{};
  for (int k = 0; k < K; ++k) r[static_cast<size_t>(k)] = r_comp<D, T>(k, x);
  const TMat<T> star = asym_star_t<D, T>(r);
  for (int i = 0; i < D; ++i)
    for (int j = 0; j < D; ++j) g[static_cast<size_t>(i)][static_cast<size_t>(j)] += star[static_cast<size_t>(i)][static_cast<size_t>(j)];
  return hooke_t(mp.mu_sigma, mp.mu_sigma_c, mp.lambda_sigma, D, g);
}

template <int D, class T>
TMat<T> omega_t(const MaterialParams& mp, const LengthScale& ell, const TVec<T, D>& x) {
  const TMat<T> g = grad_r_t<D, T>(x);
  TMat<T> cw = c_omega_t<D, T>(mp, g);
  const T l = ell_t(ell, x[0]);
  constexpr int K = D == 2 ? 1 : 3;
  for (int j = 0; j < D; ++j)
    for (int k = 0; k < K; ++k) cw[static_cast<size_t>(j)][static_cast<size_t>(k)] = l * cw[static_cast<size_t>(j)][static_cast<size_t>(k)];
  return cw;
}

// ell * omega, the flux entering the angular momentum balance.
template <int D, class T>
TMat<T> ell_omega_t(const MaterialParams& mp, const LengthScale& ell, const TVec<T, D>& x) {
  TMat<T> w = omega_t<D, T>(mp, ell, x);
  const T l = ell_t(ell, x[0]);
  constexpr int K = D == 2 ? 1 : 3;
  for (int j = 0; j < D; ++j)
    for (int k = 0; k < K; ++k) w[static_cast<size_t>(j)][static_cast<size_t>(k)] = l * w[static_cast<size_t>(j)][static_cast<size_t>(k)];
  return w;
}

template <int D>
void forcing_impl(const ManufacturedCase& mc, std::span<const double> x, Vec3& f_sigma, Vec3& f_omega) {
  using DT = Dual<double, D>;
  TVec<DT, D> xd;
  for (int j = 0; j < D; ++j) {
    xd[static_cast<size_t>(j)] = DT(x[static_cast<size_t>(j)]);
    xd[static_cast<size_t>(j)].d[static_cast<size_t>(j)] = 1.0;
  }
  const TMat<DT> s = sigma_t<D, DT>(mc.material, xd);
  const TMat<DT> lw = ell_omega_t<D, DT>(mc.material, mc.ell, xd);

  f_sigma = {0.0, 0.0, 0.0};
  for (int i = 0; i < D; ++i) {
    double div = 0.0;
    for (int j = 0; j < D; ++j) div += s[static_cast<size_t>(i)][static_cast<size_t>(j)].d[static_cast<size_t>(j)];
    f_sigma[static_cast<size_t>(i)] = -div;
  }

  Mat3 sval{};
  for (int i = 0; i < D; ++i)
    for (int j = 0; j < D; ++j) sval[static_cast<size_t>(i)][static_cast<size_t>(j)] = s[static_cast<size_t>(i)][static_cast<size_t>(j)].v;
  const Vec3 as = asym(D, sval);

  constexpr int K = D == 2 ? 1 : 3;
  f_omega = {0.0, 0.0, 0.0};
  for (int k = 0; k < K; ++k) {
    double div = 0.0;
    for (int j = 0; j < D; ++j) div += lw[static_cast<size_t>(j)][static_cast<size_t>(k)].d[static_cast<size_t>(j)];
    f_omega[static_cast<size_t>(k)] = as[static_cast<size_t>(k)] - div;
  }
}

template <class F>
auto dispatch_dim(int dim, F&& f) {
  if (dim == 2) return f(std::integral_constant<int, 2>{});
  if (dim == 3) return f(std::integral_constant<int, 3>{});
  throw std::invalid_argument("dimension must be 2 or 3");
}

template <int D>
TVec<double, D> to_vec(std::span<const double> x) {
  TVec<double, D> v;
  for (int i = 0; i < D; ++i) v[static_cast<size_t>(i)] = x[static_cast<size_t>(i)];
  return v;
}

Mat3 to_mat3(const TMat<double>& m) {
  Mat3 out{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) out[static_cast<size_t>(i)][static_cast<size_t>(j)] = m[static_cast<size_t>(i)][static_cast<size_t>(j)];
  return out;
}

}  // namespace

void MaterialParams::validate() const {
  if (!(mu_sigma > 0.0) || !(mu_sigma_c > 0.0) || !(mu_omega > 0.0) || !(mu_omega_c > 0.0))
    throw std::invalid_argument("MaterialParams: shear moduli must be positive");
  if (lambda_sigma < 0.0 || lambda_omega < 0.0)
    throw std::invalid_argument("MaterialParams: lambda must be non-negative");
}

Vec3 asym(int dim, const Mat3& tau) {
  Vec3 r = {0.0, 0.0, 0.0};
  if (dim == 2) {
    r[0] = tau[1][0] - tau[0][1];
  } else {
    r[0] = tau[2][1] - tau[1][2];
    r[1] = tau[0][2] - tau[2][0];
    r[2] = tau[1][0] - tau[0][1];
  }
  return r;
}

Mat3 asym_star(int dim, const Vec3& r) {
  if (dim == 2) return to_mat3(asym_star_t<2, double>({r[0], 0.0, 0.0}));
  return to_mat3(asym_star_t<3, double>({r[0], r[1], r[2]}));
}

Mat3 apply_C_sigma(const MaterialParams& mp, int dim, const Mat3& tau) {
  return to_mat3(hooke_t(mp.mu_sigma, mp.mu_sigma_c, mp.lambda_sigma, dim, tau));
}

Mat3 apply_A_sigma(const MaterialParams& mp, int dim, const Mat3& tau) {
  return to_mat3(hooke_inverse_t(mp.mu_sigma, mp.mu_sigma_c, mp.lambda_sigma, dim, tau));
}

Mat3 apply_C_omega(const MaterialParams& mp, int dim, const Mat3& tau) {
  if (dim == 2) return to_mat3(c_omega_t<2, double>(mp, tau));
  return to_mat3(c_omega_t<3, double>(mp, tau));
}

Mat3 apply_A_omega(const MaterialParams& mp, int dim, const Mat3& tau) {
  if (dim == 2) {
    Mat3 out{};
    out[0][0] = tau[0][0] / (2.0 * mp.mu_omega);
    out[1][0] = tau[1][0] / (2.0 * mp.mu_omega);
    return out;
  }
  return to_mat3(hooke_inverse_t(mp.mu_omega, mp.mu_omega_c, mp.lambda_omega, 3, tau));
}

namespace {

double rank_one_pair(double mu, double mu_c, double alpha, int d, int rho,
                     std::span<const double> phi, int rho2, std::span<const double> phi2) {
  double dot = 0.0;
  for (int j = 0; j < d; ++j) dot += phi[static_cast<size_t>(j)] * phi2[static_cast<size_t>(j)];
  const double cross = phi[static_cast<size_t>(rho2)] * phi2[static_cast<size_t>(rho)];
  const double diag = rho == rho2 ? dot : 0.0;
  const double sym = 0.5 * (diag + cross);
  const double skw = 0.5 * (diag - cross);
  const double tr = phi[static_cast<size_t>(rho)] * phi2[static_cast<size_t>(rho2)];
  return (sym - alpha * tr) / (2.0 * mu) + skw / (2.0 * mu_c);
}

}  // namespace

double a_sigma_pair(const MaterialParams& mp, int dim, int rho, std::span<const double> phi,
                    int rho2, std::span<const double> phi2) {
  const double alpha = mp.lambda_sigma / (2.0 * mp.mu_sigma + dim * mp.lambda_sigma);
  return rank_one_pair(mp.mu_sigma, mp.mu_sigma_c, alpha, dim, rho, phi, rho2, phi2);
}

double a_omega_pair(const MaterialParams& mp, int dim, int k, std::span<const double> phi,
                    int k2, std::span<const double> phi2) {
  if (dim == 2) {
    double dot = 0.0;
    for (int j = 0; j < 2; ++j) dot += phi[static_cast<size_t>(j)] * phi2[static_cast<size_t>(j)];
    return dot / (2.0 * mp.mu_omega);
  }
  const double alpha = mp.lambda_omega / (2.0 * mp.mu_omega + dim * mp.lambda_omega);
  return rank_one_pair(mp.mu_omega, mp.mu_omega_c, alpha, dim, k, phi, k2, phi2);
}

double varpi(double x1) { return varpi_t(x1); }

double varpi_grad(double x1) {
  if (x1 < 1.0 / 3.0 || x1 >= 2.0 / 3.0) return 0.0;
  return 1.5 * kPi * std::sin(kPi * (3.0 * x1 - 1.0));
}

LengthScale LengthScale::make_constant(double c) {
  if (c < 0.0) throw std::invalid_argument("LengthScale: constant must be non-negative");
  LengthScale l;
  l.kind = Kind::Constant;
  l.constant = c;
  return l;
}

LengthScale LengthScale::smooth_step() {
  LengthScale l;
  l.kind = Kind::SmoothStep;
  return l;
}

double LengthScale::value(std::span<const double> x) const {
  if (kind == Kind::Constant) return constant;
  return varpi(x[0]);
}

Vec3 LengthScale::gradient(std::span<const double> x) const {
  Vec3 g = {0.0, 0.0, 0.0};
  if (kind == Kind::SmoothStep) g[0] = varpi_grad(x[0]);
  return g;
}

Vec3 ManufacturedCase::displacement(std::span<const double> x) const {
  return dispatch_dim(dim, [&](auto dc) {
    constexpr int D = dc.value;
    const auto v = to_vec<D>(x);
    Vec3 u = {0.0, 0.0, 0.0};
    for (int i = 0; i < D; ++i) u[static_cast<size_t>(i)] = amplitude * u_comp<D, double>(i, v);
    return u;
  });
}

Vec3 ManufacturedCase::rotation(std::span<const double> x) const {
  return dispatch_dim(dim, [&](auto dc) {
    constexpr int D = dc.value;
    const auto v = to_vec<D>(x);
    Vec3 r = {0.0, 0.0, 0.0};
    for (int k = 0; k < rotation_components(D); ++k) r[static_cast<size_t>(k)] = amplitude * r_comp<D, double>(k, v);
    return r;
  });
}

Mat3 ManufacturedCase::stress(std::span<const double> x) const {
  return dispatch_dim(dim, [&](auto dc) {
    constexpr int D = dc.value;
    Mat3 s = to_mat3(sigma_t<D, double>(material, to_vec<D>(x)));
    for (auto& row : s)
      for (double& v : row) v *= amplitude;
    return s;
  });
}

Mat3 ManufacturedCase::couple_stress(std::span<const double> x) const {
  return dispatch_dim(dim, [&](auto dc) {
    constexpr int D = dc.value;
    Mat3 w = to_mat3(omega_t<D, double>(material, ell, to_vec<D>(x)));
    for (auto& row : w)
      for (double& v : row) v *= amplitude;
    return w;
  });
}

void ManufacturedCase::forcing(std::span<const double> x, Vec3& f_sigma, Vec3& f_omega) const {
  dispatch_dim(dim, [&](auto dc) {
    constexpr int D = dc.value;
    forcing_impl<D>(*this, x, f_sigma, f_omega);
    return 0;
  });
  for (double& v : f_sigma) v *= amplitude;
  for (double& v : f_omega) v *= amplitude;
}

}  // namespace cosserat
