#pragma once

#include <span>
#include <vector>

namespace cosserat {

/// One matrix entry used while accumulating a sparse matrix.
struct Triplet {
  int row;
  int col;
  double value;
};

/// Compressed sparse row matrix. Column indices are sorted and unique per
/// row; explicitly stored zeros are permitted.
struct Csr {
  int rows = 0;
  int cols = 0;
  std::vector<int> row_ptr;  // size rows + 1
  std::vector<int> col_idx;  // size nnz
  std::vector<double> val;   // size nnz

  int nnz() const { return static_cast<int>(col_idx.size()); }
};

/// Builds a Csr from triplets. Duplicate (row, col) pairs are summed in
/// their order of appearance, so the result is deterministic for a fixed
/// triplet sequence. Entries with |value| <= drop_tol are discarded after
/// accumulation (drop_tol < 0 keeps everything).
Csr csr_from_triplets(int rows, int cols, std::span<const Triplet> triplets,
                      double drop_tol = -1.0);

Csr csr_transpose(const Csr& a);

std::vector<double> csr_diagonal(const Csr& a);

/// y = A x. Parallel over rows; bitwise identical to spmv_serial.
void spmv(const Csr& a, const double* x, double* y);
void spmv(const Csr& a, const std::vector<double>& x, std::vector<double>& y);

/// Serial reference implementation kept for testing and benchmarking.
void spmv_serial(const Csr& a, const double* x, double* y);

double max_abs(const Csr& a);

/// max |A - A^T| over all entries, treating missing entries as zero.
double max_asymmetry(const Csr& a);

/// Connected components of the stored (symmetric) sparsity pattern.
/// Component labels are assigned in order of first appearance by row, so
/// the labeling is deterministic.
std::vector<int> sparse_connected_components(const Csr& a);

}  // namespace cosserat
