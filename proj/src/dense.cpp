#include "cosserat/dense.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace cosserat {

namespace {

void cholesky_column(DenseMatrix& m, int k) {
  double d = m(k, k);
  for (int j = 0; j < k; ++j) d -= m(k, j) * m(k, j);
  if (!(d > 0.0)) throw std::runtime_error("cholesky: non-positive pivot");
  m(k, k) = std::sqrt(d);
}

}  // namespace

void cholesky_inplace_serial(DenseMatrix& m) {
  const int n = m.rows;
  for (int k = 0; k < n; ++k) {
    cholesky_column(m, k);
    const double inv = 1.0 / m(k, k);
    const double* lk = m.row(k);
    for (int i = k + 1; i < n; ++i) {
      double* li = m.row(i);
      double s = li[k];
      for (int j = 0; j < k; ++j) s -= li[j] * lk[j];
      li[k] = s * inv;
    }
  }
}

void cholesky_inplace(DenseMatrix& m) {
  const int n = m.rows;
  // Left-looking: each row below the pivot is updated by exactly one thread
  // with a fixed-order inner sum, so the factor is thread-count independent.
  for (int k = 0; k < n; ++k) {
    cholesky_column(m, k);
    const double inv = 1.0 / m(k, k);
    const double* lk = m.row(k);
#pragma omp parallel for schedule(static) if (n - k > 64)
    for (int i = k + 1; i < n; ++i) {
      double* li = m.row(i);
      double s = li[k];
      for (int j = 0; j < k; ++j) s -= li[j] * lk[j];
      li[k] = s * inv;
    }
  }
}

void cholesky_forward(const DenseMatrix& l, double* x) {
  const int n = l.rows;
  for (int i = 0; i < n; ++i) {
    double s = x[i];
    const double* li = l.row(i);
    for (int j = 0; j < i; ++j) s -= li[j] * x[j];
    x[i] = s / li[i];
  }
}

void cholesky_backward(const DenseMatrix& l, double* x) {
  const int n = l.rows;
  for (int i = n - 1; i >= 0; --i) {
    double s = x[i];
    for (int j = i + 1; j < n; ++j) s -= l(j, i) * x[j];
    x[i] = s / l(i, i);
  }
}

void cholesky_solve(const DenseMatrix& l, double* x) {
  cholesky_forward(l, x);
  cholesky_backward(l, x);
}

void forward_solve_rows(const DenseMatrix& l, DenseMatrix& b) {
  if (l.rows != b.cols) throw std::invalid_argument("forward_solve_rows: shape mismatch");
#pragma omp parallel for schedule(static)
  for (int r = 0; r < b.rows; ++r) cholesky_forward(l, b.row(r));
}

void gram_matrix_serial(const DenseMatrix& z, DenseMatrix& g) {
  const int n = z.rows;
  const int m = z.cols;
  g = DenseMatrix(n, n);
  for (int i = 0; i < n; ++i) {
    const double* zi = z.row(i);
    for (int j = 0; j <= i; ++j) {
      const double* zj = z.row(j);
      double s = 0.0;
      for (int k = 0; k < m; ++k) s += zi[k] * zj[k];
      g(i, j) = s;
      g(j, i) = s;
    }
  }
}

void gram_matrix(const DenseMatrix& z, DenseMatrix& g) {
  const int n = z.rows;
  const int m = z.cols;
  g = DenseMatrix(n, n);
#pragma omp parallel for schedule(dynamic, 16)
  for (int i = 0; i < n; ++i) {
    const double* zi = z.row(i);
    for (int j = 0; j <= i; ++j) {
      const double* zj = z.row(j);
      double s = 0.0;
      for (int k = 0; k < m; ++k) s += zi[k] * zj[k];
      g(i, j) = s;
    }
  }
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) g(i, j) = g(j, i);
}

void matmul_reference(const DenseMatrix& a, const DenseMatrix& b, DenseMatrix& c) {
  if (a.cols != b.rows) throw std::invalid_argument("matmul: shape mismatch");
  c = DenseMatrix(a.rows, b.cols);
  for (int i = 0; i < a.rows; ++i)
    for (int k = 0; k < a.cols; ++k) {
      const double aik = a(i, k);
      for (int j = 0; j < b.cols; ++j) c(i, j) += aik * b(k, j);
    }
}

DenseLu lu_factor(DenseMatrix m) {
  if (m.rows != m.cols) throw std::invalid_argument("lu_factor: matrix not square");
  const int n = m.rows;
  DenseLu f;
  f.piv.resize(static_cast<size_t>(n));
  for (int k = 0; k < n; ++k) {
    int p = k;
    for (int i = k + 1; i < n; ++i)
      if (std::abs(m(i, k)) > std::abs(m(p, k))) p = i;
    f.piv[static_cast<size_t>(k)] = p;
    if (p != k)
      for (int j = 0; j < n; ++j) std::swap(m(k, j), m(p, j));
    const double piv = m(k, k);
    if (piv == 0.0) throw std::runtime_error("lu_factor: singular matrix");
    for (int i = k + 1; i < n; ++i) {
      const double l = m(i, k) / piv;
      m(i, k) = l;
      for (int j = k + 1; j < n; ++j) m(i, j) -= l * m(k, j);
    }
  }
  f.lu = std::move(m);
  return f;
}

void lu_solve(const DenseLu& f, double* x) {
  const int n = f.lu.rows;
  // The factor swaps whole rows, so all interchanges apply before the
  // triangular solves.
  for (int k = 0; k < n; ++k) {
    const int p = f.piv[static_cast<size_t>(k)];
    if (p != k) std::swap(x[k], x[p]);
  }
  for (int k = 0; k < n; ++k)
    for (int i = k + 1; i < n; ++i) x[i] -= f.lu(i, k) * x[k];
  for (int i = n - 1; i >= 0; --i) {
    for (int j = i + 1; j < n; ++j) x[i] -= f.lu(i, j) * x[j];
    x[i] /= f.lu(i, i);
  }
}

std::vector<double> lu_solve(const DenseLu& f, std::vector<double> b) {
  lu_solve(f, b.data());
  return b;
}

DenseMatrix lu_invert(const DenseLu& f) {
  const int n = f.lu.rows;
  DenseMatrix inv(n, n);
  std::vector<double> e(static_cast<size_t>(n));
  for (int j = 0; j < n; ++j) {
    std::fill(e.begin(), e.end(), 0.0);
    e[static_cast<size_t>(j)] = 1.0;
    lu_solve(f, e.data());
    for (int i = 0; i < n; ++i) inv(i, j) = e[static_cast<size_t>(i)];
  }
  return inv;
}

std::vector<double> jacobi_singular_values(DenseMatrix m) {
  if (m.rows < m.cols) throw std::invalid_argument("jacobi_singular_values: needs rows >= cols");
  const int n = m.cols;
  const int rows = m.rows;
  // One-sided Jacobi: orthogonalize column pairs until all rotations are
  // below tolerance. Column access is strided but the matrices are small.
  auto col_dot = [&](int p, int q) {
    double s = 0.0;
    for (int i = 0; i < rows; ++i) s += m(i, p) * m(i, q);
    return s;
  };
  const double tol = 1e-14;
  for (int sweep = 0; sweep < 60; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const double app = col_dot(p, p);
        const double aqq = col_dot(q, q);
        const double apq = col_dot(p, q);
        if (std::abs(apq) <= tol * std::sqrt(app * aqq) + 1e-300) continue;
        off = std::max(off, std::abs(apq) / (std::sqrt(app * aqq) + 1e-300));
        const double tau = (aqq - app) / (2.0 * apq);
        const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (int i = 0; i < rows; ++i) {
          const double vp = m(i, p);
          const double vq = m(i, q);
          m(i, p) = c * vp - s * vq;
          m(i, q) = s * vp + c * vq;
        }
      }
    }
    if (off < tol) break;
  }
  std::vector<double> sv(static_cast<size_t>(n));
  for (int p = 0; p < n; ++p) sv[static_cast<size_t>(p)] = std::sqrt(std::max(0.0, col_dot(p, p)));
  std::sort(sv.begin(), sv.end(), std::greater<double>());
  return sv;
}

std::vector<double> jacobi_symmetric_eigenvalues(DenseMatrix m) {
  if (m.rows != m.cols) throw std::invalid_argument("jacobi_symmetric_eigenvalues: matrix not square");
  const int n = m.rows;
  for (int sweep = 0; sweep < 60; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < n - 1; ++p)
      for (int q = p + 1; q < n; ++q) off = std::max(off, std::abs(m(p, q)));
    if (off <= 1e-14 * std::max(1.0, std::abs(m(0, 0)))) break;
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const double apq = m(p, q);
        if (std::abs(apq) <= 1e-300) continue;
        const double tau = (m(q, q) - m(p, p)) / (2.0 * apq);
        const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (int i = 0; i < n; ++i) {
          const double vip = m(i, p);
          const double viq = m(i, q);
          m(i, p) = c * vip - s * viq;
          m(i, q) = s * vip + c * viq;
        }
        for (int i = 0; i < n; ++i) {
          const double vpi = m(p, i);
          const double vqi = m(q, i);
          m(p, i) = c * vpi - s * vqi;
          m(q, i) = s * vpi + c * vqi;
        }
      }
    }
  }
  std::vector<double> eig(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) eig[static_cast<size_t>(i)] = m(i, i);
  std::sort(eig.begin(), eig.end());
  return eig;
}

double smallest_eigenvalue_spd(const DenseMatrix& chol, double tol, int max_steps) {
  const int n = chol.rows;
  if (n == 1) {
    const double l = chol(0, 0);
    return l * l;
  }
  max_steps = std::min(max_steps, n);

  std::mt19937 rng(12345);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  std::vector<std::vector<double>> basis;

  std::vector<double> v(static_cast<size_t>(n));
  for (double& x : v) x = unif(rng);
  double nrm = 0.0;
  for (double x : v) nrm += x * x;
  nrm = std::sqrt(nrm);
  for (double& x : v) x /= nrm;
  basis.push_back(v);

  DenseMatrix h(max_steps, max_steps);
  std::vector<double> z(static_cast<size_t>(n)), w(static_cast<size_t>(n));
  double prev_ritz = 0.0;
  int plateau = 0;
  for (int k = 0; k < max_steps; ++k) {
    // z = inverse applied to the newest basis vector; the projected matrix
    // H = V^T A^{-1} V is kept in full rather than assumed tridiagonal.
    z = basis[static_cast<size_t>(k)];
    cholesky_solve(chol, z.data());
    for (int i = 0; i <= k; ++i) {
      double d = 0.0;
      const auto& u = basis[static_cast<size_t>(i)];
      for (int t = 0; t < n; ++t) d += z[static_cast<size_t>(t)] * u[static_cast<size_t>(t)];
      h(i, k) = d;
      h(k, i) = d;
    }

    // The projected eigensolve costs O(k^3); a small stride keeps the
    // cumulative cost negligible without delaying convergence much.
    const bool check = k < 8 || k % 4 == 3 || k + 1 == max_steps;
    if (check) {
      DenseMatrix hk(k + 1, k + 1);
      for (int i = 0; i <= k; ++i)
        for (int j = 0; j <= k; ++j) hk(i, j) = h(i, j);
      const double ritz = jacobi_symmetric_eigenvalues(std::move(hk)).back();
      if (k > 2 && std::abs(ritz - prev_ritz) <= tol * std::abs(ritz)) {
        if (++plateau >= 2) return 1.0 / ritz;
      } else {
        plateau = 0;
      }
      prev_ritz = ritz;
    }

    if (k + 1 == max_steps) break;
    // Next direction: two modified Gram-Schmidt passes.
    w = z;
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& u : basis) {
        double d = 0.0;
        for (int t = 0; t < n; ++t) d += w[static_cast<size_t>(t)] * u[static_cast<size_t>(t)];
        for (int t = 0; t < n; ++t) w[static_cast<size_t>(t)] -= d * u[static_cast<size_t>(t)];
      }
    double b = 0.0;
    for (double x : w) b += x * x;
    b = std::sqrt(b);
    double znorm = 0.0;
    for (double x : z) znorm += x * x;
    znorm = std::sqrt(znorm);
    if (b <= 1e-14 * znorm) break;  // Krylov space exhausted
    for (int t = 0; t < n; ++t) w[static_cast<size_t>(t)] /= b;
    basis.push_back(w);
  }
  return 1.0 / prev_ritz;
}

}  // namespace cosserat
