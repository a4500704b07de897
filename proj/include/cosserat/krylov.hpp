#pragma once

#include <functional>
#include <vector>

namespace cosserat {

/// Matrix-free linear operator y = A x on vectors of length dim.
struct LinOp {
  int dim = 0;
  std::function<void(const double* x, double* y)> apply;
};

struct IterStats {
  int iterations = 0;
  double rel_residual = 0.0;      // two-norm, relative to ||b||
  double rel_residual_inf = 0.0;  // infinity-norm, relative to ||b||_inf
  bool converged = false;
};

/// Convergence requires both ||r||_2 <= tol ||b||_2 and
/// ||r||_inf <= 5 tol ||b||_inf, so entrywise residuals track the requested
/// tolerance independently of the system size.
struct IterControl {
  double tol = 1e-10;
  int max_iterations = 1000;
};

/// Preconditioned conjugate gradients for SPD operators. precond may be
/// empty. x holds the initial guess on entry and the solution on exit.
IterStats pcg(const LinOp& a, const LinOp& precond, const std::vector<double>& b,
              std::vector<double>& x, const IterControl& ctl);

/// Right-preconditioned flexible GMRES with restarts.
IterStats fgmres(const LinOp& a, const LinOp& precond, const std::vector<double>& b,
                 std::vector<double>& x, const IterControl& ctl, int restart = 100);

/// Unpreconditioned MINRES for symmetric (possibly indefinite) operators.
IterStats minres(const LinOp& a, const std::vector<double>& b, std::vector<double>& x,
                 const IterControl& ctl);

double dot(const std::vector<double>& a, const std::vector<double>& b);
double norm2(const std::vector<double>& a);
double norm_inf(const std::vector<double>& a);

}  // namespace cosserat
