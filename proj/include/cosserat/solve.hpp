#pragma once

#include <string>
#include <vector>

#include "cosserat/assembly.hpp"
#include "cosserat/csr.hpp"
#include "cosserat/dense.hpp"

namespace cosserat {

/// Block-diagonal Cholesky factor of a lumped stress matrix. Blocks are
/// the connected components of the sparsity pattern, so correctness never
/// depends on the basis producing any particular locality; a localized
/// basis just makes the blocks small.
class BlockDiagFactor {
 public:
  explicit BlockDiagFactor(const Csr& a);

  int dim() const { return dim_; }
  int num_blocks() const { return static_cast<int>(blocks_.size()); }
  int max_block_size() const;
  const std::vector<std::vector<int>>& blocks() const { return blocks_; }
  int block_of(int dof) const { return block_of_[static_cast<size_t>(dof)]; }
  int position_in_block(int dof) const { return pos_in_block_[static_cast<size_t>(dof)]; }

  /// y = A^{-1} x.
  void apply(const double* x, double* y) const;
  void apply(const std::vector<double>& x, std::vector<double>& y) const;

  /// Solves one block system in place (z has the block's size).
  void solve_block(int b, double* z) const;

 private:
  int dim_ = 0;
  std::vector<std::vector<int>> blocks_;
  std::vector<int> block_of_;
  std::vector<int> pos_in_block_;
  std::vector<DenseMatrix> chol_;
};

BlockDiagFactor factor_block_diagonal(const Csr& a);

struct SolverReport {
  std::string method;  // "reduced" or "full"
  int iterations = 0;
  double rel_residual = 0.0;
  double seconds = 0.0;
  int schur_dim = 0;
  int full_dim = 0;
  bool converged = false;
};

struct SchurResult {
  std::vector<double> v;  // (u, r)
  SolverReport report;
};

/// Conjugate-gradient solve of B A^{-1} B^T v = f - B A^{-1} g with Jacobi
/// preconditioning (the Schur diagonal is assembled exactly from the block
/// factors). Iteration cap: 20 sqrt(dim).
SchurResult schur_solve(const SaddleSystem& sys, const BlockDiagFactor& factor, double tol);

/// Stress recovery eta = A^{-1}(g + B^T v); exact up to the block solves.
std::vector<double> postprocess_stress(const SaddleSystem& sys, const BlockDiagFactor& factor,
                                       const std::vector<double>& v);

struct SaddleSolution {
  std::vector<double> eta;  // (sigma, omega)
  std::vector<double> v;    // (u, r)
  SolverReport report;
};

/// Reduced path: block factorization, Schur solve, stress post-processing.
SaddleSolution msmfe_solve(const SaddleSystem& ms, double tol);
SaddleSolution msmfe_solve(const SaddleSystem& ms, const BlockDiagFactor& factor, double tol);

/// Full saddle solve by flexible GMRES (restart 100), right-preconditioned
/// with one reduced solve of the matching lumped system.
SaddleSolution full_saddle_solve(const SaddleSystem& mfe, const SaddleSystem& ms,
                                 const BlockDiagFactor& factor, double tol);

/// Unpreconditioned MINRES on the symmetrized saddle form; diagnostic path.
SaddleSolution minres_saddle_solve(const SaddleSystem& sys, double tol, int max_iterations);

/// Residual of (eta, v) in the system's own saddle equations, infinity
/// norm relative to the right-hand side.
double saddle_residual_inf(const SaddleSystem& sys, const std::vector<double>& eta,
                           const std::vector<double>& v);

/// ||B eta - f||_inf / ||f||_inf, the momentum balance defect.
double momentum_residual_inf(const SaddleSystem& sys, const std::vector<double>& eta);

}  // namespace cosserat
