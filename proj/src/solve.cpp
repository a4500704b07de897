#include "cosserat/solve.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

#include "cosserat/krylov.hpp"

namespace cosserat {

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

BlockDiagFactor::BlockDiagFactor(const Csr& a) : dim_(a.rows) {
  if (a.rows != a.cols) throw std::invalid_argument("BlockDiagFactor: matrix not square");
  block_of_ = sparse_connected_components(a);
  int nblocks = 0;
  for (int l : block_of_) nblocks = std::max(nblocks, l + 1);
  blocks_.resize(static_cast<size_t>(nblocks));
  pos_in_block_.resize(static_cast<size_t>(dim_));
  for (int i = 0; i < dim_; ++i) {
    auto& blk = blocks_[static_cast<size_t>(block_of_[static_cast<size_t>(i)])];
    pos_in_block_[static_cast<size_t>(i)] = static_cast<int>(blk.size());
    blk.push_back(i);
  }
  chol_.resize(blocks_.size());
  for (size_t b = 0; b < blocks_.size(); ++b) {
    const auto& blk = blocks_[b];
    const int n = static_cast<int>(blk.size());
    DenseMatrix m(n, n);
    for (int li = 0; li < n; ++li) {
      const int row = blk[static_cast<size_t>(li)];
      for (int k = a.row_ptr[static_cast<size_t>(row)]; k < a.row_ptr[static_cast<size_t>(row) + 1]; ++k) {
        const int col = a.col_idx[static_cast<size_t>(k)];
        m(li, pos_in_block_[static_cast<size_t>(col)]) = a.val[static_cast<size_t>(k)];
      }
    }
    try {
      cholesky_inplace(m);
    } catch (const std::runtime_error&) {
      throw std::runtime_error("factor_block_diagonal: non-positive pivot in block " + std::to_string(b) +
                               " (lumped stress matrix is not positive definite)");
    }
    chol_[b] = std::move(m);
  }
}

int BlockDiagFactor::max_block_size() const {
  size_t m = 0;
  for (const auto& b : blocks_) m = std::max(m, b.size());
  return static_cast<int>(m);
}

void BlockDiagFactor::apply(const double* x, double* y) const {
#pragma omp parallel for schedule(dynamic, 64)
  for (int b = 0; b < num_blocks(); ++b) {
    const auto& blk = blocks_[static_cast<size_t>(b)];
    const int n = static_cast<int>(blk.size());
    double stack[64];
    std::vector<double> heap;
    double* z = stack;
    if (n > 64) {
      heap.resize(static_cast<size_t>(n));
      z = heap.data();
    }
    for (int i = 0; i < n; ++i) z[i] = x[blk[static_cast<size_t>(i)]];
    cholesky_forward(chol_[static_cast<size_t>(b)], z);
    cholesky_backward(chol_[static_cast<size_t>(b)], z);
    for (int i = 0; i < n; ++i) y[blk[static_cast<size_t>(i)]] = z[i];
  }
}

void BlockDiagFactor::apply(const std::vector<double>& x, std::vector<double>& y) const {
  y.resize(x.size());
  apply(x.data(), y.data());
}

void BlockDiagFactor::solve_block(int b, double* z) const {
  cholesky_forward(chol_[static_cast<size_t>(b)], z);
  cholesky_backward(chol_[static_cast<size_t>(b)], z);
}

BlockDiagFactor factor_block_diagonal(const Csr& a) { return BlockDiagFactor(a); }

namespace {

// diag(B A^{-1} B^T) computed block-locally: each row of B touches a few
// blocks, and each touched block contributes s^T A_b^{-1} s.
std::vector<double> schur_diagonal(const SaddleSystem& sys, const BlockDiagFactor& factor) {
  const Csr& b = sys.B;
  std::vector<double> diag(static_cast<size_t>(b.rows), 0.0);
  std::vector<double> scratch, rhs;
  std::vector<int> touched;
  std::vector<int> mark(factor.blocks().size(), -1);
  for (int row = 0; row < b.rows; ++row) {
    touched.clear();
    for (int k = b.row_ptr[static_cast<size_t>(row)]; k < b.row_ptr[static_cast<size_t>(row) + 1]; ++k) {
      const int blk = factor.block_of(b.col_idx[static_cast<size_t>(k)]);
      if (mark[static_cast<size_t>(blk)] != row) {
        mark[static_cast<size_t>(blk)] = row;
        touched.push_back(blk);
      }
    }
    double sum = 0.0;
    for (int blk : touched) {
      const auto& dofs = factor.blocks()[static_cast<size_t>(blk)];
      scratch.assign(dofs.size(), 0.0);
      for (int k = b.row_ptr[static_cast<size_t>(row)]; k < b.row_ptr[static_cast<size_t>(row) + 1]; ++k) {
        const int col = b.col_idx[static_cast<size_t>(k)];
        if (factor.block_of(col) == blk)
          scratch[static_cast<size_t>(factor.position_in_block(col))] = b.val[static_cast<size_t>(k)];
      }
      rhs = scratch;
      factor.solve_block(blk, rhs.data());
      for (size_t i = 0; i < dofs.size(); ++i) sum += scratch[i] * rhs[i];
    }
    diag[static_cast<size_t>(row)] = sum;
  }
  return diag;
}

bool all_zero(std::span<const double> v) {
  for (double x : v)
    if (x != 0.0) return false;
  return true;
}

// Reusable Schur-complement solver bound to one assembled system.
class SchurOperator {
 public:
  SchurOperator(const SaddleSystem& sys, const BlockDiagFactor& factor)
      : sys_(&sys), factor_(&factor), diag_(schur_diagonal(sys, factor)) {}

  IterStats solve(std::span<const double> g, std::span<const double> f, double tol,
                  std::vector<double>& v) const {
    const int nx = sys_->layout.nx();
    const int ny = sys_->layout.ny();
    std::vector<double> rhs(f.begin(), f.end());
    if (!all_zero(g)) {
      std::vector<double> ag(static_cast<size_t>(nx)), bag(static_cast<size_t>(ny));
      factor_->apply(g.data(), ag.data());
      spmv(sys_->B, ag.data(), bag.data());
      for (int i = 0; i < ny; ++i) rhs[static_cast<size_t>(i)] -= bag[static_cast<size_t>(i)];
    }
    std::vector<double> tx(static_cast<size_t>(nx)), tx2(static_cast<size_t>(nx));
    LinOp schur{ny, [&](const double* x, double* y) {
                  spmv(sys_->Bt, x, tx.data());
                  factor_->apply(tx.data(), tx2.data());
                  spmv(sys_->B, tx2.data(), y);
                }};
    LinOp jacobi{ny, [&](const double* x, double* y) {
                   for (int i = 0; i < ny; ++i) y[i] = x[i] / diag_[static_cast<size_t>(i)];
                 }};
    IterControl ctl;
    ctl.tol = tol;
    ctl.max_iterations = 20 * static_cast<int>(std::ceil(std::sqrt(static_cast<double>(ny)))) + 20;
    return pcg(schur, jacobi, rhs, v, ctl);
  }

  std::vector<double> recover_stress(std::span<const double> g, const std::vector<double>& v) const {
    const int nx = sys_->layout.nx();
    std::vector<double> rhs(static_cast<size_t>(nx));
    spmv(sys_->Bt, v.data(), rhs.data());
    for (int i = 0; i < nx; ++i) rhs[static_cast<size_t>(i)] += g[static_cast<size_t>(i)];
    std::vector<double> eta(static_cast<size_t>(nx));
    factor_->apply(rhs.data(), eta.data());
    return eta;
  }

 private:
  const SaddleSystem* sys_;
  const BlockDiagFactor* factor_;
  std::vector<double> diag_;
};

}  // namespace

SchurResult schur_solve(const SaddleSystem& sys, const BlockDiagFactor& factor, double tol) {
  const auto t0 = std::chrono::steady_clock::now();
  const SchurOperator op(sys, factor);
  SchurResult out;
  const IterStats st = op.solve(sys.g, sys.f, tol, out.v);
  out.report.method = "reduced";
  out.report.iterations = st.iterations;
  out.report.rel_residual = st.rel_residual;
  out.report.converged = st.converged;
  out.report.schur_dim = sys.layout.ny();
  out.report.full_dim = sys.layout.nx() + sys.layout.ny();
  out.report.seconds = seconds_since(t0);
  return out;
}

std::vector<double> postprocess_stress(const SaddleSystem& sys, const BlockDiagFactor& factor,
                                       const std::vector<double>& v) {
  const int nx = sys.layout.nx();
  std::vector<double> rhs(static_cast<size_t>(nx));
  spmv(sys.Bt, v.data(), rhs.data());
  for (int i = 0; i < nx; ++i) rhs[static_cast<size_t>(i)] += sys.g[static_cast<size_t>(i)];
  std::vector<double> eta(static_cast<size_t>(nx));
  factor.apply(rhs.data(), eta.data());
  return eta;
}

SaddleSolution msmfe_solve(const SaddleSystem& ms, double tol) {
  const auto t0 = std::chrono::steady_clock::now();
  if (!ms.reduced) throw std::invalid_argument("msmfe_solve: system was not assembled in reduced form");
  const BlockDiagFactor factor(ms.A);
  SaddleSolution sol = msmfe_solve(ms, factor, tol);
  sol.report.seconds = seconds_since(t0);
  return sol;
}

SaddleSolution msmfe_solve(const SaddleSystem& ms, const BlockDiagFactor& factor, double tol) {
  const auto t0 = std::chrono::steady_clock::now();
  if (!ms.reduced) throw std::invalid_argument("msmfe_solve: system was not assembled in reduced form");
  SchurResult sr = schur_solve(ms, factor, tol);
  SaddleSolution sol;
  sol.eta = postprocess_stress(ms, factor, sr.v);
  sol.v = std::move(sr.v);
  sol.report = sr.report;
  sol.report.seconds = seconds_since(t0);
  return sol;
}

namespace {

void saddle_apply(const SaddleSystem& sys, const double* x, double* y) {
  const int nx = sys.layout.nx();
  // [A, -B^T; B, 0]
  spmv(sys.A, x, y);
  std::vector<double> btv(static_cast<size_t>(nx));
  spmv(sys.Bt, x + nx, btv.data());
  for (int i = 0; i < nx; ++i) y[i] -= btv[static_cast<size_t>(i)];
  spmv(sys.B, x, y + nx);
}

}  // namespace

SaddleSolution full_saddle_solve(const SaddleSystem& mfe, const SaddleSystem& ms,
                                 const BlockDiagFactor& factor, double tol) {
  const auto t0 = std::chrono::steady_clock::now();
  const int nx = mfe.layout.nx();
  const int ny = mfe.layout.ny();
  const int n = nx + ny;

  LinOp op{n, [&](const double* x, double* y) { saddle_apply(mfe, x, y); }};

  // One reduced solve of the lumped system inverts the preconditioner.
  const SchurOperator schur(ms, factor);
  const double inner_tol = std::min(1e-10, tol * 1e-2);
  std::vector<double> pv;
  LinOp precond{n, [&](const double* x, double* y) {
                  const std::span<const double> g(x, static_cast<size_t>(nx));
                  const std::span<const double> f(x + nx, static_cast<size_t>(ny));
                  schur.solve(g, f, inner_tol, pv);
                  const std::vector<double> eta = schur.recover_stress(g, pv);
                  std::copy(eta.begin(), eta.end(), y);
                  std::copy(pv.begin(), pv.end(), y + nx);
                }};

  std::vector<double> rhs(static_cast<size_t>(n));
  std::copy(mfe.g.begin(), mfe.g.end(), rhs.begin());
  std::copy(mfe.f.begin(), mfe.f.end(), rhs.begin() + nx);

  IterControl ctl;
  ctl.tol = tol;
  ctl.max_iterations = 400;
  std::vector<double> x;
  const IterStats st = fgmres(op, precond, rhs, x, ctl, 100);

  SaddleSolution sol;
  sol.eta.assign(x.begin(), x.begin() + nx);
  sol.v.assign(x.begin() + nx, x.end());
  sol.report.method = "full";
  sol.report.iterations = st.iterations;
  sol.report.rel_residual = st.rel_residual;
  sol.report.converged = st.converged;
  sol.report.schur_dim = ny;
  sol.report.full_dim = n;
  sol.report.seconds = seconds_since(t0);
  return sol;
}

SaddleSolution minres_saddle_solve(const SaddleSystem& sys, double tol, int max_iterations) {
  const auto t0 = std::chrono::steady_clock::now();
  const int nx = sys.layout.nx();
  const int ny = sys.layout.ny();
  const int n = nx + ny;
  // Symmetrized form [A, -B^T; -B, 0] with right-hand side (g, -f).
  LinOp op{n, [&](const double* x, double* y) {
             saddle_apply(sys, x, y);
             for (int i = nx; i < n; ++i) y[i] = -y[i];
           }};
  std::vector<double> rhs(static_cast<size_t>(n));
  std::copy(sys.g.begin(), sys.g.end(), rhs.begin());
  for (int i = 0; i < ny; ++i) rhs[static_cast<size_t>(nx + i)] = -sys.f[static_cast<size_t>(i)];
  IterControl ctl;
  ctl.tol = tol;
  ctl.max_iterations = max_iterations;
  std::vector<double> x;
  const IterStats st = minres(op, rhs, x, ctl);
  SaddleSolution sol;
  sol.eta.assign(x.begin(), x.begin() + nx);
  sol.v.assign(x.begin() + nx, x.end());
  sol.report.method = "minres";
  sol.report.iterations = st.iterations;
  sol.report.rel_residual = st.rel_residual;
  sol.report.converged = st.converged;
  sol.report.schur_dim = ny;
  sol.report.full_dim = n;
  sol.report.seconds = seconds_since(t0);
  return sol;
}

double saddle_residual_inf(const SaddleSystem& sys, const std::vector<double>& eta,
                           const std::vector<double>& v) {
  const int nx = sys.layout.nx();
  const int ny = sys.layout.ny();
  std::vector<double> x(static_cast<size_t>(nx + ny));
  std::copy(eta.begin(), eta.end(), x.begin());
  std::copy(v.begin(), v.end(), x.begin() + nx);
  std::vector<double> y(static_cast<size_t>(nx + ny));
  saddle_apply(sys, x.data(), y.data());
  double rmax = 0.0, bmax = 0.0;
  for (int i = 0; i < nx; ++i) {
    rmax = std::max(rmax, std::abs(y[static_cast<size_t>(i)] - sys.g[static_cast<size_t>(i)]));
    bmax = std::max(bmax, std::abs(sys.g[static_cast<size_t>(i)]));
  }
  for (int i = 0; i < ny; ++i) {
    rmax = std::max(rmax, std::abs(y[static_cast<size_t>(nx + i)] - sys.f[static_cast<size_t>(i)]));
    bmax = std::max(bmax, std::abs(sys.f[static_cast<size_t>(i)]));
  }
  return bmax > 0.0 ? rmax / bmax : rmax;
}

double momentum_residual_inf(const SaddleSystem& sys, const std::vector<double>& eta) {
  std::vector<double> be(static_cast<size_t>(sys.layout.ny()));
  spmv(sys.B, eta.data(), be.data());
  double rmax = 0.0, fmax = 0.0;
  for (int i = 0; i < sys.layout.ny(); ++i) {
    rmax = std::max(rmax, std::abs(be[static_cast<size_t>(i)] - sys.f[static_cast<size_t>(i)]));
    fmax = std::max(fmax, std::abs(sys.f[static_cast<size_t>(i)]));
  }
  return fmax > 0.0 ? rmax / fmax : rmax;
}

}  // namespace cosserat
