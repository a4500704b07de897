#include "cosserat/krylov.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cosserat {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

double norm_inf(const std::vector<double>& a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

namespace {

struct Targets {
  double two = 0.0;
  double inf = 0.0;
  bool met(double r2, double rinf) const { return r2 <= two && rinf <= inf; }
};

Targets make_targets(const IterControl& ctl, const std::vector<double>& b) {
  Targets t;
  t.two = ctl.tol * norm2(b);
  t.inf = 5.0 * ctl.tol * norm_inf(b);
  return t;
}

void residual(const LinOp& a, const std::vector<double>& b, const std::vector<double>& x,
              std::vector<double>& r) {
  r.resize(b.size());
  a.apply(x.data(), r.data());
  for (size_t i = 0; i < b.size(); ++i) r[i] = b[i] - r[i];
}

IterStats finish(const LinOp& a, const std::vector<double>& b, const std::vector<double>& x,
                 int iters, const Targets& tgt) {
  std::vector<double> r;
  residual(a, b, x, r);
  IterStats s;
  s.iterations = iters;
  const double nb2 = norm2(b);
  const double nbi = norm_inf(b);
  s.rel_residual = nb2 > 0.0 ? norm2(r) / nb2 : norm2(r);
  s.rel_residual_inf = nbi > 0.0 ? norm_inf(r) / nbi : norm_inf(r);
  s.converged = tgt.met(norm2(r), norm_inf(r));
  return s;
}

}  // namespace

IterStats pcg(const LinOp& a, const LinOp& precond, const std::vector<double>& b,
              std::vector<double>& x, const IterControl& ctl) {
  const size_t n = b.size();
  x.resize(n, 0.0);
  const Targets tgt = make_targets(ctl, b);

  std::vector<double> r;
  residual(a, b, x, r);
  if (tgt.met(norm2(r), norm_inf(r))) return finish(a, b, x, 0, tgt);

  std::vector<double> z(n), p(n), ap(n);
  auto apply_precond = [&](const std::vector<double>& in, std::vector<double>& out) {
    if (precond.apply)
      precond.apply(in.data(), out.data());
    else
      out = in;
  };
  apply_precond(r, z);
  p = z;
  double rz = dot(r, z);

  for (int it = 1; it <= ctl.max_iterations; ++it) {
    a.apply(p.data(), ap.data());
    const double pap = dot(p, ap);
    if (pap <= 0.0) throw std::runtime_error("pcg: operator not positive definite");
    const double alpha = rz / pap;
    for (size_t i = 0; i < n; ++i) x[i] += alpha * p[i];
    for (size_t i = 0; i < n; ++i) r[i] -= alpha * ap[i];
    if (tgt.met(norm2(r), norm_inf(r))) {
      IterStats s = finish(a, b, x, it, tgt);
      if (s.converged) return s;
      // True residual drifted from the recurrence; rebuild and continue.
      residual(a, b, x, r);
    }
    apply_precond(r, z);
    const double rz_new = dot(r, z);
    const double beta = rz_new / rz;
    rz = rz_new;
    for (size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
  }
  return finish(a, b, x, ctl.max_iterations, tgt);
}

IterStats fgmres(const LinOp& a, const LinOp& precond, const std::vector<double>& b,
                 std::vector<double>& x, const IterControl& ctl, int restart) {
  const size_t n = b.size();
  x.resize(n, 0.0);
  const Targets tgt = make_targets(ctl, b);

  std::vector<double> r;
  residual(a, b, x, r);
  int total_it = 0;

  while (total_it <= ctl.max_iterations) {
    double beta = norm2(r);
    if (tgt.met(beta, norm_inf(r))) return finish(a, b, x, total_it, tgt);

    const int m = restart;
    std::vector<std::vector<double>> v, z;
    v.emplace_back(n);
    for (size_t i = 0; i < n; ++i) v[0][i] = r[i] / beta;
    std::vector<double> h(static_cast<size_t>(m + 1) * static_cast<size_t>(m), 0.0);
    auto H = [&](int i, int j) -> double& { return h[static_cast<size_t>(i) * static_cast<size_t>(m) + static_cast<size_t>(j)]; };
    std::vector<double> cs(static_cast<size_t>(m)), sn(static_cast<size_t>(m));
    std::vector<double> g(static_cast<size_t>(m) + 1, 0.0);
    g[0] = beta;

    int k = 0;
    std::vector<double> w(n);
    for (; k < m && total_it < ctl.max_iterations; ++k, ++total_it) {
      z.emplace_back(n);
      if (precond.apply)
        precond.apply(v[static_cast<size_t>(k)].data(), z[static_cast<size_t>(k)].data());
      else
        z[static_cast<size_t>(k)] = v[static_cast<size_t>(k)];
      a.apply(z[static_cast<size_t>(k)].data(), w.data());
      for (int i = 0; i <= k; ++i) {
        double hik = 0.0;
        const auto& vi = v[static_cast<size_t>(i)];
        for (size_t t = 0; t < n; ++t) hik += w[t] * vi[t];
        H(i, k) = hik;
        for (size_t t = 0; t < n; ++t) w[t] -= hik * vi[t];
      }
      double hk1 = norm2(w);
      H(k + 1, k) = hk1;
      for (int i = 0; i < k; ++i) {
        const double t = cs[static_cast<size_t>(i)] * H(i, k) + sn[static_cast<size_t>(i)] * H(i + 1, k);
        H(i + 1, k) = -sn[static_cast<size_t>(i)] * H(i, k) + cs[static_cast<size_t>(i)] * H(i + 1, k);
        H(i, k) = t;
      }
      const double denom = std::hypot(H(k, k), H(k + 1, k));
      cs[static_cast<size_t>(k)] = denom > 0.0 ? H(k, k) / denom : 1.0;
      sn[static_cast<size_t>(k)] = denom > 0.0 ? H(k + 1, k) / denom : 0.0;
      H(k, k) = denom;
      H(k + 1, k) = 0.0;
      g[static_cast<size_t>(k) + 1] = -sn[static_cast<size_t>(k)] * g[static_cast<size_t>(k)];
      g[static_cast<size_t>(k)] = cs[static_cast<size_t>(k)] * g[static_cast<size_t>(k)];

      const bool breakdown = hk1 <= 1e-300;
      if (std::abs(g[static_cast<size_t>(k) + 1]) <= tgt.two || breakdown) {
        ++k;
        ++total_it;
        break;
      }
      if (!breakdown)
        for (size_t t = 0; t < n; ++t) w[t] /= hk1;
      v.emplace_back(w);
    }

    // x += Z y with H y = g solved by back substitution.
    std::vector<double> y(static_cast<size_t>(k));
    for (int i = k - 1; i >= 0; --i) {
      double s = g[static_cast<size_t>(i)];
      for (int j = i + 1; j < k; ++j) s -= H(i, j) * y[static_cast<size_t>(j)];
      y[static_cast<size_t>(i)] = s / H(i, i);
    }
    for (int j = 0; j < k; ++j) {
      const auto& zj = z[static_cast<size_t>(j)];
      const double yj = y[static_cast<size_t>(j)];
      for (size_t t = 0; t < n; ++t) x[t] += yj * zj[t];
    }
    residual(a, b, x, r);
    if (tgt.met(norm2(r), norm_inf(r))) return finish(a, b, x, total_it, tgt);
    if (total_it >= ctl.max_iterations) break;
  }
  return finish(a, b, x, total_it, tgt);
}

IterStats minres(const LinOp& a, const std::vector<double>& b, std::vector<double>& x,
                 const IterControl& ctl) {
  const size_t n = b.size();
  x.resize(n, 0.0);
  const Targets tgt = make_targets(ctl, b);

  std::vector<double> r;
  residual(a, b, x, r);
  double beta = norm2(r);
  if (tgt.met(beta, norm_inf(r))) return finish(a, b, x, 0, tgt);

  std::vector<double> v_prev(n, 0.0), v(n), v_next(n);
  for (size_t i = 0; i < n; ++i) v[i] = r[i] / beta;
  std::vector<double> w0(n, 0.0), w1(n, 0.0);
  double eta = beta;
  double c0 = 1.0, c1 = 1.0, s0 = 0.0, s1 = 0.0;
  double beta_prev = beta;

  int it = 0;
  for (it = 1; it <= ctl.max_iterations; ++it) {
    a.apply(v.data(), v_next.data());
    const double alpha = dot(v, v_next);
    for (size_t i = 0; i < n; ++i) v_next[i] -= alpha * v[i] + beta_prev * v_prev[i];
    const double beta_next = norm2(v_next);

    const double delta = c1 * alpha - c0 * s1 * beta_prev;
    const double rho1 = std::hypot(delta, beta_next);
    const double rho2 = s1 * alpha + c0 * c1 * beta_prev;
    const double rho3 = s0 * beta_prev;
    const double c = delta / rho1;
    const double s = beta_next / rho1;

    for (size_t i = 0; i < n; ++i) {
      const double wi = (v[i] - rho3 * w0[i] - rho2 * w1[i]) / rho1;
      w0[i] = w1[i];
      w1[i] = wi;
      x[i] += c * eta * wi;
    }
    eta = -s * eta;

    c0 = c1;
    c1 = c;
    s0 = s1;
    s1 = s;
    v_prev = v;
    if (beta_next <= 1e-300) break;
    for (size_t i = 0; i < n; ++i) v[i] = v_next[i] / beta_next;
    beta_prev = beta_next;

    if (std::abs(eta) <= tgt.two) {
      IterStats st = finish(a, b, x, it, tgt);
      if (st.converged) return st;
    }
  }
  return finish(a, b, x, std::min(it, ctl.max_iterations), tgt);
}

}  // namespace cosserat
