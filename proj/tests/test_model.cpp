#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "cosserat/model.hpp"

using namespace cosserat;

namespace {

constexpr double kPi = 3.14159265358979323846;

std::mt19937& rng() {
  static std::mt19937 gen(4242);
  return gen;
}

double unif(double lo = -1.0, double hi = 1.0) {
  return std::uniform_real_distribution<double>(lo, hi)(rng());
}

Mat3 random_mat(int dim) {
  Mat3 m{};
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) m[i][j] = unif();
  return m;
}

Vec3 random_interior_point(int dim, double margin = 0.05) {
  Vec3 x = {0.0, 0.0, 0.0};
  for (int i = 0; i < dim; ++i) x[i] = unif(margin, 1.0 - margin);
  return x;
}

double frob_diff(int rows, int cols, const Mat3& a, const Mat3& b) {
  double s = 0.0;
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) s += (a[i][j] - b[i][j]) * (a[i][j] - b[i][j]);
  return std::sqrt(s);
}

}  // namespace

TEST_CASE("asym componentwise definitions") {
  Mat3 t{};
  t[0][0] = 1;
  t[0][1] = 2;
  t[1][0] = 3;
  t[1][1] = 4;
  CHECK(asym(2, t)[0] == doctest::Approx(1.0));

  Mat3 star = asym_star(3, {1, 0, 0});
  CHECK(star[1][2] == doctest::Approx(-1.0));
  CHECK(star[2][1] == doctest::Approx(1.0));
  for (int i = 0; i < 3; ++i) CHECK(star[i][i] == 0.0);
  CHECK(star[0][1] == 0.0);
  CHECK(star[0][2] == 0.0);
}

TEST_CASE("asym of asym_star doubles the input") {
  for (int dim : {2, 3}) {
    const int kd = rotation_components(dim);
    for (int trial = 0; trial < 100; ++trial) {
      Vec3 r = {0, 0, 0};
      for (int k = 0; k < kd; ++k) r[k] = unif();
      const Vec3 back = asym(dim, asym_star(dim, r));
      for (int k = 0; k < kd; ++k) CHECK(back[k] == doctest::Approx(2.0 * r[k]).epsilon(1e-15));
    }
  }
}

TEST_CASE("A_sigma on identity and on skew matrices") {
  MaterialParams mp;  // mu=1, lambda=1, mu_c=0.1
  Mat3 eye{};
  eye[0][0] = eye[1][1] = 1.0;
  const Mat3 a = apply_A_sigma(mp, 2, eye);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) CHECK(a[i][j] == doctest::Approx(i == j ? 0.25 : 0.0));

  Mat3 skew{};
  skew[0][1] = -1.0;
  skew[1][0] = 1.0;
  const Mat3 s = apply_A_sigma(mp, 2, skew);
  CHECK(s[0][1] == doctest::Approx(-5.0));
  CHECK(s[1][0] == doctest::Approx(5.0));

  Mat3 zero{};
  const Mat3 z = apply_A_sigma(mp, 2, zero);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) CHECK(z[i][j] == 0.0);
}

TEST_CASE("A and C are inverse pairs for sigma and omega") {
  MaterialParams mp;
  mp.mu_sigma = 1.7;
  mp.mu_sigma_c = 0.23;
  mp.lambda_sigma = 0.9;
  mp.mu_omega = 0.8;
  mp.mu_omega_c = 2.1;
  mp.lambda_omega = 0.0;
  for (int dim : {2, 3}) {
    for (int trial = 0; trial < 1000; ++trial) {
      const Mat3 t = random_mat(dim);
      const Mat3 round = apply_A_sigma(mp, dim, apply_C_sigma(mp, dim, t));
      CHECK(frob_diff(dim, dim, round, t) <= 1e-13);
    }
    const int kd = rotation_components(dim);
    for (int trial = 0; trial < 1000; ++trial) {
      Mat3 t{};
      for (int j = 0; j < dim; ++j)
        for (int k = 0; k < kd; ++k) t[j][k] = unif();
      const Mat3 round = apply_A_omega(mp, dim, apply_C_omega(mp, dim, t));
      CHECK(frob_diff(dim, kd, round, t) <= 1e-13);
    }
  }
}

TEST_CASE("A_sigma positive definite on random matrices") {
  MaterialParams mp;
  for (int dim : {2, 3}) {
    for (int trial = 0; trial < 200; ++trial) {
      const Mat3 t = random_mat(dim);
      const Mat3 at = apply_A_sigma(mp, dim, t);
      double q = 0.0, norm = 0.0;
      for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) {
          q += at[i][j] * t[i][j];
          norm += t[i][j] * t[i][j];
        }
      CHECK(q > 1e-12 * norm);
    }
  }
}

TEST_CASE("variational split of the A_sigma quadratic form") {
  MaterialParams mp;
  mp.mu_sigma = 1.3;
  mp.mu_sigma_c = 0.4;
  mp.lambda_sigma = 2.2;
  for (int dim : {2, 3}) {
    const double alpha = mp.lambda_sigma / (2.0 * mp.mu_sigma + dim * mp.lambda_sigma);
    const double beta = (mp.mu_sigma - mp.mu_sigma_c) / (2.0 * mp.mu_sigma * mp.mu_sigma_c);
    for (int trial = 0; trial < 100; ++trial) {
      const Mat3 s = random_mat(dim);
      const Mat3 t = random_mat(dim);
      const Mat3 as = apply_A_sigma(mp, dim, s);
      double lhs = 0.0, dot = 0.0, tr_s = 0.0, tr_t = 0.0;
      for (int i = 0; i < dim; ++i) {
        tr_s += s[i][i];
        tr_t += t[i][i];
        for (int j = 0; j < dim; ++j) {
          lhs += as[i][j] * t[i][j];
          dot += s[i][j] * t[i][j];
        }
      }
      const double asym_dot = asym(dim, s)[0] * asym(dim, t)[0] +
                              asym(dim, s)[1] * asym(dim, t)[1] +
                              asym(dim, s)[2] * asym(dim, t)[2];
      const double rhs = (dot - alpha * tr_s * tr_t) / (2.0 * mp.mu_sigma) + 0.5 * beta * asym_dot;
      CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
    }
  }
}

TEST_CASE("rank-one pairings match the full tensor contraction") {
  MaterialParams mp;
  mp.mu_sigma = 0.7;
  mp.mu_sigma_c = 1.9;
  mp.lambda_sigma = 1.1;
  mp.mu_omega = 2.3;
  mp.mu_omega_c = 0.15;
  mp.lambda_omega = 0.6;
  for (int dim : {2, 3}) {
    const int kd = rotation_components(dim);
    for (int trial = 0; trial < 50; ++trial) {
      std::array<double, 3> phi{}, psi{};
      for (int j = 0; j < dim; ++j) {
        phi[j] = unif();
        psi[j] = unif();
      }
      const int rho = trial % dim, rho2 = (trial / 2) % dim;
      Mat3 t1{}, t2{};
      for (int j = 0; j < dim; ++j) {
        t1[rho][j] = phi[j];
        t2[rho2][j] = psi[j];
      }
      const Mat3 at = apply_A_sigma(mp, dim, t1);
      double expected = 0.0;
      for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) expected += at[i][j] * t2[i][j];
      CHECK(a_sigma_pair(mp, dim, rho, {phi.data(), 3}, rho2, {psi.data(), 3}) ==
            doctest::Approx(expected).epsilon(1e-13));

      const int k = trial % kd, k2 = (trial / 3) % kd;
      Mat3 w1{}, w2{};
      for (int j = 0; j < dim; ++j) {
        w1[j][k] = phi[j];
        w2[j][k2] = psi[j];
      }
      const Mat3 aw = apply_A_omega(mp, dim, w1);
      double expected_w = 0.0;
      for (int j = 0; j < dim; ++j)
        for (int m = 0; m < kd; ++m) expected_w += aw[j][m] * w2[j][m];
      CHECK(a_omega_pair(mp, dim, k, {phi.data(), 3}, k2, {psi.data(), 3}) ==
            doctest::Approx(expected_w).epsilon(1e-13));
    }
  }
}

TEST_CASE("varpi profile values and gradient") {
  CHECK(varpi(0.2) == 0.0);
  CHECK(varpi(0.5) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(varpi(0.9) == 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const double x = unif(0.01, 0.99);
    if (std::abs(x - 1.0 / 3.0) < 1e-3 || std::abs(x - 2.0 / 3.0) < 1e-3) continue;
    const double h = 1e-6;
    const double fd = (varpi(x + h) - varpi(x - h)) / (2.0 * h);
    CHECK(std::abs(varpi_grad(x) - fd) <= 1e-8);
  }
}

TEST_CASE("varpi bounds: sup of value and slope") {
  double max_v = 0.0, max_g = 0.0;
  for (int i = 0; i <= 100000; ++i) {
    const double x = static_cast<double>(i) / 100000.0;
    max_v = std::max(max_v, std::abs(varpi(x)));
    max_g = std::max(max_g, std::abs(varpi_grad(x)));
  }
  CHECK(max_v == doctest::Approx(1.0));
  CHECK(max_g == doctest::Approx(1.5 * kPi).epsilon(1e-3));
}

TEST_CASE("manufactured fields vanish on the boundary") {
  for (int dim : {2, 3}) {
    ManufacturedCase mc;
    mc.dim = dim;
    mc.ell = LengthScale::make_constant(1.0);
    for (int trial = 0; trial < 50; ++trial) {
      Vec3 x = random_interior_point(dim);
      const int face_axis = trial % dim;
      x[face_axis] = trial % 2 == 0 ? 0.0 : 1.0;
      const Vec3 u = mc.displacement({x.data(), static_cast<size_t>(dim)});
      const Vec3 r = mc.rotation({x.data(), static_cast<size_t>(dim)});
      for (int i = 0; i < dim; ++i) CHECK(std::abs(u[i]) <= 1e-14);
      for (int k = 0; k < rotation_components(dim); ++k) CHECK(std::abs(r[k]) <= 1e-14);
    }
  }
}

TEST_CASE("manufactured values at the center point in 2D") {
  ManufacturedCase mc;
  mc.dim = 2;
  mc.ell = LengthScale::make_constant(1.0);
  const Vec3 x = {0.5, 0.5, 0.0};
  const Vec3 u = mc.displacement({x.data(), 2});
  CHECK(u[0] == doctest::Approx(0.25));
  CHECK(u[1] == doctest::Approx(0.25));
  CHECK(mc.rotation({x.data(), 2})[0] == doctest::Approx(1.0));
}

TEST_CASE("zero length scale kills the couple stress") {
  for (int dim : {2, 3}) {
    ManufacturedCase mc;
    mc.dim = dim;
    mc.ell = LengthScale::make_constant(0.0);
    for (int trial = 0; trial < 20; ++trial) {
      const Vec3 x = random_interior_point(dim);
      const Mat3 w = mc.couple_stress({x.data(), static_cast<size_t>(dim)});
      for (int j = 0; j < dim; ++j)
        for (int k = 0; k < rotation_components(dim); ++k) CHECK(w[j][k] == 0.0);
      Vec3 fs, fw;
      mc.forcing({x.data(), static_cast<size_t>(dim)}, fs, fw);
      const Vec3 as = asym(dim, mc.stress({x.data(), static_cast<size_t>(dim)}));
      for (int k = 0; k < rotation_components(dim); ++k)
        CHECK(fw[k] == doctest::Approx(as[k]).epsilon(1e-13));
    }
  }
}

TEST_CASE("constitutive residual vanishes at random points") {
  // A_sigma sigma - grad u - asym_star r = 0, checked with a small central
  // difference for grad u (the fields themselves are smooth).
  for (int dim : {2, 3}) {
    for (auto ell : {LengthScale::make_constant(1.0), LengthScale::smooth_step()}) {
      ManufacturedCase mc;
      mc.dim = dim;
      mc.ell = ell;
      for (int trial = 0; trial < 100; ++trial) {
        const Vec3 x = random_interior_point(dim);
        const Mat3 s = mc.stress({x.data(), static_cast<size_t>(dim)});
        const Mat3 as = apply_A_sigma(mc.material, dim, s);
        const Mat3 star = asym_star(dim, mc.rotation({x.data(), static_cast<size_t>(dim)}));
        const double h = 1e-6;
        for (int i = 0; i < dim; ++i)
          for (int j = 0; j < dim; ++j) {
            Vec3 xp = x, xm = x;
            xp[j] += h;
            xm[j] -= h;
            const double du = (mc.displacement({xp.data(), static_cast<size_t>(dim)})[i] -
                               mc.displacement({xm.data(), static_cast<size_t>(dim)})[i]) /
                              (2.0 * h);
            CHECK(std::abs(as[i][j] - du - star[i][j]) <= 1e-9);
          }
      }
    }
  }
}

TEST_CASE("forcing matches a Richardson-extrapolated finite difference oracle") {
  for (int dim : {2, 3}) {
    for (auto ell : {LengthScale::make_constant(1.0), LengthScale::smooth_step(),
                     LengthScale::make_constant(0.0)}) {
      ManufacturedCase mc;
      mc.dim = dim;
      mc.ell = ell;
      const int kd = rotation_components(dim);
      for (int trial = 0; trial < 100; ++trial) {
        Vec3 x = random_interior_point(dim);
        // Stay away from the transition planes where third derivatives jump.
        if (ell.kind == LengthScale::Kind::SmoothStep &&
            (std::abs(x[0] - 1.0 / 3.0) < 5e-3 || std::abs(x[0] - 2.0 / 3.0) < 5e-3))
          continue;
        Vec3 fs, fw;
        mc.forcing({x.data(), static_cast<size_t>(dim)}, fs, fw);

        auto div_fd = [&](auto field, int comp, double step) {
          double div = 0.0;
          for (int j = 0; j < dim; ++j) {
            Vec3 xp = x, xm = x;
            xp[j] += step;
            xm[j] -= step;
            div += (field(xp, comp, j) - field(xm, comp, j)) / (2.0 * step);
          }
          return div;
        };
        auto sigma_entry = [&](const Vec3& p, int i, int j) {
          return mc.stress({p.data(), static_cast<size_t>(dim)})[i][j];
        };
        auto ellw_entry = [&](const Vec3& p, int k, int j) {
          const double l = mc.ell.value({p.data(), static_cast<size_t>(dim)});
          return l * mc.couple_stress({p.data(), static_cast<size_t>(dim)})[j][k];
        };

        const double h = 1e-4;
        for (int i = 0; i < dim; ++i) {
          const double d1 = div_fd(sigma_entry, i, h);
          const double d2 = div_fd(sigma_entry, i, h / 2.0);
          const double rich = (4.0 * d2 - d1) / 3.0;
          CHECK(std::abs(fs[i] + rich) <= 1e-7);
        }
        const Vec3 as = asym(dim, mc.stress({x.data(), static_cast<size_t>(dim)}));
        for (int k = 0; k < kd; ++k) {
          const double d1 = div_fd(ellw_entry, k, h);
          const double d2 = div_fd(ellw_entry, k, h / 2.0);
          const double rich = (4.0 * d2 - d1) / 3.0;
          CHECK(std::abs(fw[k] - (as[k] - rich)) <= 1e-7);
        }
      }
    }
  }
}

TEST_CASE("forcing symmetry at the 2D center point") {
  ManufacturedCase mc;
  mc.dim = 2;
  mc.ell = LengthScale::make_constant(1.0);
  const Vec3 x = {0.5, 0.5, 0.0};
  Vec3 fs, fw;
  mc.forcing({x.data(), 2}, fs, fw);
  CHECK(fs[0] == doctest::Approx(fs[1]).epsilon(1e-13));
}

TEST_CASE("material parameter validation") {
  MaterialParams mp;
  mp.mu_sigma = -1.0;
  CHECK_THROWS_AS(mp.validate(), std::invalid_argument);
  MaterialParams ok;
  CHECK_NOTHROW(ok.validate());
  MaterialParams neg_lambda;
  neg_lambda.lambda_omega = -0.5;
  CHECK_THROWS_AS(neg_lambda.validate(), std::invalid_argument);
}
