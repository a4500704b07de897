#include "cosserat/quadrature.hpp"

#include <cmath>
#include <stdexcept>

namespace cosserat {

void gauss_legendre_01(int m, std::vector<double>& nodes, std::vector<double>& weights) {
  if (m < 1) throw std::invalid_argument("gauss_legendre_01: need at least one point");
  nodes.resize(static_cast<size_t>(m));
  weights.resize(static_cast<size_t>(m));
  // Newton iteration on P_m over [-1, 1], then map to [0, 1].
  for (int i = 0; i < m; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (m + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      if (m == 1) p1 = x;
      for (int k = 2; k <= m; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      const double pm = m == 1 ? x : p1;
      const double pm1 = m == 1 ? 1.0 : p0;
      dp = m * (x * pm - pm1) / (x * x - 1.0);
      const double dx = pm / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    nodes[static_cast<size_t>(m - 1 - i)] = 0.5 * (1.0 + x);
    weights[static_cast<size_t>(m - 1 - i)] = 1.0 / ((1.0 - x * x) * dp * dp);
  }
}

namespace {

void push_point(QuadratureRule& rule, std::span<const double> lambda, double w) {
  rule.points.insert(rule.points.end(), lambda.begin(), lambda.end());
  rule.weights.push_back(w);
}

QuadratureRule centroid_rule(int dim) {
  QuadratureRule rule;
  rule.dim = dim;
  rule.degree = 1;
  const double ref = dim == 2 ? 0.5 : 1.0 / 6.0;
  std::vector<double> lambda(static_cast<size_t>(dim) + 1, 1.0 / (dim + 1));
  push_point(rule, lambda, ref);
  return rule;
}

}  // namespace

QuadratureRule gauss_rule(int dim, int degree, int extra_points) {
  if (dim != 2 && dim != 3) throw std::invalid_argument("gauss_rule: dimension must be 2 or 3");
  if (degree < 0 || degree > 6)
    throw std::invalid_argument("gauss_rule: unsupported degree " + std::to_string(degree));
  if (degree <= 1 && extra_points == 0) return centroid_rule(dim);

  QuadratureRule rule;
  rule.dim = dim;
  rule.degree = degree;

  // Collapsed-coordinate product: the simplex Jacobian raises the
  // polynomial degree in the early coordinates by dim-1, ..., 0.
  std::vector<std::vector<double>> x(static_cast<size_t>(dim)), w(static_cast<size_t>(dim));
  for (int axis = 0; axis < dim; ++axis) {
    const int needed = degree + (dim - 1 - axis);
    const int m = needed / 2 + 1 + extra_points;
    gauss_legendre_01(m, x[static_cast<size_t>(axis)], w[static_cast<size_t>(axis)]);
  }

  std::vector<double> lambda(static_cast<size_t>(dim) + 1);
  if (dim == 2) {
    for (size_t i = 0; i < x[0].size(); ++i)
      for (size_t j = 0; j < x[1].size(); ++j) {
        const double u = x[0][i];
        const double v = x[1][j] * (1.0 - u);
        lambda[1] = u;
        lambda[2] = v;
        lambda[0] = 1.0 - u - v;
        push_point(rule, lambda, w[0][i] * w[1][j] * (1.0 - u));
      }
  } else {
    for (size_t i = 0; i < x[0].size(); ++i)
      for (size_t j = 0; j < x[1].size(); ++j)
        for (size_t k = 0; k < x[2].size(); ++k) {
          const double u = x[0][i];
          const double v = x[1][j] * (1.0 - u);
          const double t = x[2][k] * (1.0 - u) * (1.0 - x[1][j]);
          lambda[1] = u;
          lambda[2] = v;
          lambda[3] = t;
          lambda[0] = 1.0 - u - v - t;
          push_point(rule, lambda, w[0][i] * w[1][j] * w[2][k] * (1.0 - u) * (1.0 - u) * (1.0 - x[1][j]));
        }
  }
  return rule;
}

QuadratureRule q1_rule(int dim) {
  if (dim != 2 && dim != 3) throw std::invalid_argument("q1_rule: dimension must be 2 or 3");
  QuadratureRule rule;
  rule.dim = dim;
  rule.degree = 1;
  const double ref = dim == 2 ? 0.5 : 1.0 / 6.0;
  std::vector<double> lambda(static_cast<size_t>(dim) + 1, 0.0);
  for (int v = 0; v <= dim; ++v) {
    std::fill(lambda.begin(), lambda.end(), 0.0);
    lambda[static_cast<size_t>(v)] = 1.0;
    push_point(rule, lambda, ref / (dim + 1));
  }
  return rule;
}

QuadratureRule q2_rule(int dim) {
  if (dim != 2 && dim != 3) throw std::invalid_argument("q2_rule: dimension must be 2 or 3");
  QuadratureRule rule;
  rule.dim = dim;
  rule.degree = 2;
  const double ref = dim == 2 ? 0.5 : 1.0 / 6.0;
  std::vector<double> lambda(static_cast<size_t>(dim) + 1, 0.0);
  for (int v = 0; v <= dim; ++v) {
    std::fill(lambda.begin(), lambda.end(), 0.0);
    lambda[static_cast<size_t>(v)] = 1.0;
    push_point(rule, lambda, ref / ((dim + 1) * (dim + 2)));
  }
  std::fill(lambda.begin(), lambda.end(), 1.0 / (dim + 1));
  push_point(rule, lambda, ref * (dim + 1) / (dim + 2));
  return rule;
}

double integrate(const QuadratureRule& rule, const Mesh& mesh, int cell,
                 const std::function<double(std::span<const double>)>& f) {
  if (rule.dim != mesh.dim()) throw std::invalid_argument("integrate: rule/mesh dimension mismatch");
  const double ref = rule.dim == 2 ? 0.5 : 1.0 / 6.0;
  const double scale = mesh.cell_measure(cell) / ref;
  double sum = 0.0;
  for (int q = 0; q < rule.num_points(); ++q) {
    const auto x = mesh.point_from_barycentric(cell, rule.point(q));
    sum += rule.weights[static_cast<size_t>(q)] * f(std::span<const double>(x.data(), static_cast<size_t>(rule.dim)));
  }
  return scale * sum;
}

}  // namespace cosserat
