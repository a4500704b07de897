#pragma once

#include "cosserat/assembly.hpp"
#include "cosserat/mesh.hpp"

namespace cosserat {

/// Smallest scaled singular value of the elasticity coupling rows of B
/// (divergence and asym terms, couple-stress columns excluded), the
/// discrete inf-sup probe. Rows are scaled by the displacement/rotation
/// mass norms and columns by the stress norm (L2 plus divergence).
///
/// The value is computed from the normal-equations form: a dense Cholesky
/// of the stress norm, a Gram matrix of the scaled rows, and an inverse
/// Lanczos iteration for the smallest eigenvalue.
double infsup_smallest_scaled_sv(const Mesh& mesh, Scheme scheme);

/// Reference route via one-sided Jacobi SVD of the fully scaled dense
/// matrix; O(n^4)-ish, intended for tiny meshes and cross-checking.
double infsup_smallest_scaled_sv_dense_svd(const Mesh& mesh, Scheme scheme);

}  // namespace cosserat
