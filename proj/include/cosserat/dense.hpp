#pragma once

#include <vector>

namespace cosserat {

/// Row-major dense matrix.
struct DenseMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> a;

  DenseMatrix() = default;
  DenseMatrix(int r, int c) : rows(r), cols(c), a(static_cast<size_t>(r) * static_cast<size_t>(c), 0.0) {}

  double& operator()(int i, int j) { return a[static_cast<size_t>(i) * static_cast<size_t>(cols) + static_cast<size_t>(j)]; }
  double operator()(int i, int j) const { return a[static_cast<size_t>(i) * static_cast<size_t>(cols) + static_cast<size_t>(j)]; }
  double* row(int i) { return a.data() + static_cast<size_t>(i) * static_cast<size_t>(cols); }
  const double* row(int i) const { return a.data() + static_cast<size_t>(i) * static_cast<size_t>(cols); }
};

/// In-place lower Cholesky factor of a symmetric positive definite matrix
/// (upper triangle is left untouched). Throws on a non-positive pivot.
/// The trailing update is parallel over rows and bitwise deterministic.
void cholesky_inplace(DenseMatrix& a);
void cholesky_inplace_serial(DenseMatrix& a);

/// Solves L x = b / L^T x = b with the lower factor produced above.
void cholesky_forward(const DenseMatrix& l, double* x);
void cholesky_backward(const DenseMatrix& l, double* x);
void cholesky_solve(const DenseMatrix& l, double* x);

/// B := L^{-1} B for a block of right-hand sides stored as the rows of B
/// (i.e. solves along each row). Parallel over right-hand sides.
void forward_solve_rows(const DenseMatrix& l, DenseMatrix& b);

/// G = Z Z^T, filling the full symmetric result. Z rows are the vectors.
/// Parallel over output rows; deterministic.
void gram_matrix(const DenseMatrix& z, DenseMatrix& g);
void gram_matrix_serial(const DenseMatrix& z, DenseMatrix& g);

/// Naive reference product C = A B kept for testing.
void matmul_reference(const DenseMatrix& a, const DenseMatrix& b, DenseMatrix& c);

/// LU factorization with partial pivoting for small systems.
struct DenseLu {
  DenseMatrix lu;
  std::vector<int> piv;
};
DenseLu lu_factor(DenseMatrix a);
void lu_solve(const DenseLu& f, double* x);
std::vector<double> lu_solve(const DenseLu& f, std::vector<double> b);
DenseMatrix lu_invert(const DenseLu& f);

/// Singular values of a (rows >= cols required) by one-sided Jacobi,
/// descending order. Intended for small matrices.
std::vector<double> jacobi_singular_values(DenseMatrix a);

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations,
/// ascending order. Intended for small matrices.
std::vector<double> jacobi_symmetric_eigenvalues(DenseMatrix a);

/// Smallest eigenvalue of an SPD matrix given its lower Cholesky factor.
/// Krylov iteration on the inverse with full reorthogonalization and a
/// dense Rayleigh-Ritz projection, so saturation cannot produce spurious
/// values outside the spectrum.
double smallest_eigenvalue_spd(const DenseMatrix& chol, double tol = 1e-10,
                               int max_steps = 400);

}  // namespace cosserat
