#include "cosserat/stability.hpp"

#include <cmath>
#include <stdexcept>

#include "cosserat/dense.hpp"
#include "cosserat/quadrature.hpp"

namespace cosserat {

namespace {

double ref_measure(int dim) { return dim == 2 ? 0.5 : 1.0 / 6.0; }

// Dense scalar-field norm matrix of the stress element: mass plus
// divergence-divergence, shared by all tensor rows.
DenseMatrix stress_norm_matrix(const FESpace& sigma) {
  const Mesh& mesh = sigma.mesh();
  const int d = mesh.dim();
  const int n = sigma.scalar_dofs();
  const QuadratureRule rule = gauss_rule(d, 2 * sigma.degree());
  CellEval ev(sigma, rule);
  DenseMatrix m(n, n);
  for (int c = 0; c < mesh.num_cells(); ++c) {
    ev.bind(c);
    const double scale = mesh.cell_measure(c) / ref_measure(d);
    const auto dofs = sigma.cell_dofs(c);
    for (int q = 0; q < rule.num_points(); ++q) {
      const double w = scale * rule.weights[static_cast<size_t>(q)];
      for (int i = 0; i < sigma.local_dofs(); ++i) {
        const double* vi = ev.vector(q, i);
        const double di = ev.div(q, i);
        for (int j = 0; j < sigma.local_dofs(); ++j) {
          const double* vj = ev.vector(q, j);
          double dot = di * ev.div(q, j);
          for (int k = 0; k < d; ++k) dot += vi[k] * vj[k];
          m(dofs[static_cast<size_t>(i)], dofs[static_cast<size_t>(j)]) += w * dot;
        }
      }
    }
  }
  return m;
}

// Cholesky factors of the scalar mass of a displacement/rotation space.
// Discontinuous families factor cell by cell; the nodal family is small
// enough for a dense factor.
class MassForward {
 public:
  explicit MassForward(const FESpace& sp) : sp_(&sp) {
    const Mesh& mesh = sp.mesh();
    const int d = mesh.dim();
    if (sp.family() == Family::L1) {
      const Csr m = mass_matrix(sp);
      dense_ = DenseMatrix(m.rows, m.cols);
      for (int r = 0; r < m.rows; ++r)
        for (int k = m.row_ptr[static_cast<size_t>(r)]; k < m.row_ptr[static_cast<size_t>(r) + 1]; ++k)
          dense_(r, m.col_idx[static_cast<size_t>(k)]) = m.val[static_cast<size_t>(k)];
      cholesky_inplace(dense_);
      return;
    }
    const int nloc = sp.local_dofs();
    const QuadratureRule rule = gauss_rule(d, std::max(2 * sp.degree(), 0));
    CellEval ev(sp, rule);
    cell_chol_.reserve(static_cast<size_t>(mesh.num_cells()));
    for (int c = 0; c < mesh.num_cells(); ++c) {
      ev.bind(c);
      DenseMatrix m(nloc, nloc);
      const double scale = mesh.cell_measure(c) / ref_measure(d);
      for (int q = 0; q < rule.num_points(); ++q) {
        const double w = scale * rule.weights[static_cast<size_t>(q)];
        for (int i = 0; i < nloc; ++i)
          for (int j = 0; j < nloc; ++j) m(i, j) += w * ev.scalar(q, i) * ev.scalar(q, j);
      }
      cholesky_inplace_serial(m);
      cell_chol_.push_back(std::move(m));
    }
  }

  // x := L^{-1} x on one scalar-field segment.
  void forward(double* x) const {
    if (sp_->family() == Family::L1) {
      cholesky_forward(dense_, x);
      return;
    }
    const int nloc = sp_->local_dofs();
    for (size_t c = 0; c < cell_chol_.size(); ++c)
      cholesky_forward(cell_chol_[c], x + c * static_cast<size_t>(nloc));
  }

 private:
  const FESpace* sp_;
  DenseMatrix dense_;
  std::vector<DenseMatrix> cell_chol_;
};

struct ProbeData {
  SchemeSpaces spaces;
  Csr b;             // elasticity rows only (ell = 0 kills the omega block)
  DenseMatrix ln;    // cholesky of the scalar stress norm
};

ProbeData probe_data(const Mesh& mesh, Scheme scheme) {
  ProbeData p{build_spaces(mesh, scheme), {}, {}};
  p.b = assemble_B(p.spaces, LengthScale::make_constant(0.0));
  p.ln = stress_norm_matrix(p.spaces.sigma);
  cholesky_inplace(p.ln);
  return p;
}

// Scaled rows Z_rho[i] = L_s^{-1} (component-rho slice of row i of B).
// G accumulates  Z Z^T over components. Rows start sparse, so the forward
// solve and the dot products skip everything before the first nonzero.
DenseMatrix scaled_gram(const ProbeData& p) {
  const int ny = p.b.rows;
  const int d = p.spaces.sigma.dim();
  const int ns = p.spaces.sigma.scalar_dofs();
  DenseMatrix g(ny, ny);
  DenseMatrix z(ny, ns);
  std::vector<int> first(static_cast<size_t>(ny));
  for (int rho = 0; rho < d; ++rho) {
    std::fill(z.a.begin(), z.a.end(), 0.0);
#pragma omp parallel for schedule(static)
    for (int i = 0; i < ny; ++i) {
      double* zi = z.row(i);
      int f = ns;
      for (int k = p.b.row_ptr[static_cast<size_t>(i)]; k < p.b.row_ptr[static_cast<size_t>(i) + 1]; ++k) {
        const int col = p.b.col_idx[static_cast<size_t>(k)];
        if (col >= rho * ns && col < (rho + 1) * ns) {
          zi[col - rho * ns] = p.b.val[static_cast<size_t>(k)];
          f = std::min(f, col - rho * ns);
        }
      }
      first[static_cast<size_t>(i)] = f;
      for (int r = f; r < ns; ++r) {
        double s = zi[r];
        const double* lr = p.ln.row(r);
        for (int c = f; c < r; ++c) s -= lr[c] * zi[c];
        zi[r] = s / lr[r];
      }
    }
#pragma omp parallel for schedule(dynamic, 16)
    for (int i = 0; i < ny; ++i) {
      const double* zi = z.row(i);
      for (int j = 0; j <= i; ++j) {
        const double* zj = z.row(j);
        double s = 0.0;
        for (int k = std::max(first[static_cast<size_t>(i)], first[static_cast<size_t>(j)]); k < ns; ++k)
          s += zi[k] * zj[k];
        g(i, j) += s;
      }
    }
  }
  for (int i = 0; i < ny; ++i)
    for (int j = i + 1; j < ny; ++j) g(i, j) = g(j, i);
  return g;
}

// G~ = L_Y^{-1} G L_Y^{-T} with the block mass factors of u and r.
void scale_by_y_norm(const SchemeSpaces& spaces, DenseMatrix& g) {
  const MassForward mu(spaces.u);
  const MassForward mr(spaces.r);
  const int nu = spaces.u.dofs();
  const int nsu = spaces.u.scalar_dofs();
  const int nsr = spaces.r.scalar_dofs();
  auto forward_segment = [&](double* y) {
    for (int c = 0; c < spaces.u.components(); ++c) mu.forward(y + static_cast<size_t>(c) * nsu);
    for (int c = 0; c < spaces.r.components(); ++c) mr.forward(y + nu + static_cast<size_t>(c) * nsr);
  };
  const int ny = g.rows;
  // Rows, then columns via transpose.
#pragma omp parallel for schedule(static)
  for (int i = 0; i < ny; ++i) forward_segment(g.row(i));
  for (int i = 0; i < ny; ++i)
    for (int j = i + 1; j < ny; ++j) std::swap(g(i, j), g(j, i));
#pragma omp parallel for schedule(static)
  for (int i = 0; i < ny; ++i) forward_segment(g.row(i));
}

}  // namespace

double infsup_smallest_scaled_sv(const Mesh& mesh, Scheme scheme) {
  const ProbeData p = probe_data(mesh, scheme);
  DenseMatrix g = scaled_gram(p);
  scale_by_y_norm(p.spaces, g);
  cholesky_inplace(g);
  const double lam = smallest_eigenvalue_spd(g, 1e-10, 400);
  return std::sqrt(lam);
}

double infsup_smallest_scaled_sv_dense_svd(const Mesh& mesh, Scheme scheme) {
  const ProbeData p = probe_data(mesh, scheme);
  const int ny = p.b.rows;
  const int d = p.spaces.sigma.dim();
  const int ns = p.spaces.sigma.scalar_dofs();

  // C^T = L_X^{-1} (L_Y^{-1} B)^T, column-scaled rows stacked per component.
  DenseMatrix bd(ny, d * ns);
  for (int i = 0; i < ny; ++i)
    for (int k = p.b.row_ptr[static_cast<size_t>(i)]; k < p.b.row_ptr[static_cast<size_t>(i) + 1]; ++k)
      bd(i, p.b.col_idx[static_cast<size_t>(k)]) = p.b.val[static_cast<size_t>(k)];

  // Left scaling: rows of B by L_Y^{-1} acting on columns of B^T, i.e.
  // scale the row space. Work on the transpose for the row solves.
  DenseMatrix bt(d * ns, ny);
  for (int i = 0; i < ny; ++i)
    for (int j = 0; j < d * ns; ++j) bt(j, i) = bd(i, j);
  {
    const MassForward mu(p.spaces.u);
    const MassForward mr(p.spaces.r);
    const int nu = p.spaces.u.dofs();
    const int nsu = p.spaces.u.scalar_dofs();
    const int nsr = p.spaces.r.scalar_dofs();
    for (int j = 0; j < d * ns; ++j) {
      double* col = bt.row(j);
      for (int c = 0; c < p.spaces.u.components(); ++c) mu.forward(col + static_cast<size_t>(c) * nsu);
      for (int c = 0; c < p.spaces.r.components(); ++c) mr.forward(col + nu + static_cast<size_t>(c) * nsr);
    }
  }
  // Right scaling: per component, solve the stress norm factor.
  for (int i = 0; i < ny; ++i) {
    std::vector<double> seg(static_cast<size_t>(ns));
    for (int rho = 0; rho < d; ++rho) {
      for (int k = 0; k < ns; ++k) seg[static_cast<size_t>(k)] = bt(rho * ns + k, i);
      cholesky_forward(p.ln, seg.data());
      for (int k = 0; k < ns; ++k) bt(rho * ns + k, i) = seg[static_cast<size_t>(k)];
    }
  }
  const auto sv = jacobi_singular_values(std::move(bt));
  return sv.back();
}

}  // namespace cosserat
