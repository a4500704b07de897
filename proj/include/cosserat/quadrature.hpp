#pragma once

#include <functional>
#include <span>
#include <vector>

#include "cosserat/mesh.hpp"

namespace cosserat {

/// Quadrature rule on the reference simplex. Points are stored as
/// barycentric tuples (dim+1 entries each); weights are in reference
/// measure units, i.e. they sum to 1/2 in 2D and 1/6 in 3D. Rules are
/// immutable value objects.
struct QuadratureRule {
  int dim = 0;
  int degree = 0;  // declared polynomial exactness
  std::vector<double> points;   // num_points() x (dim+1)
  std::vector<double> weights;  // num_points()

  int num_points() const { return static_cast<int>(weights.size()); }
  std::span<const double> point(int q) const {
    return {points.data() + static_cast<size_t>(q) * (dim + 1), static_cast<size_t>(dim + 1)};
  }
};

/// Gauss rule exact for polynomials of the given degree (0..6). Built as a
/// conical product of Gauss-Legendre rules, so all weights are positive.
/// extra_points enlarges each axis rule beyond the minimum, which keeps
/// the declared degree but shrinks the error constant for transcendental
/// integrands (used for forcing and error integrals).
QuadratureRule gauss_rule(int dim, int degree, int extra_points = 0);

/// Vertex rule: the dim+1 vertices with equal weights. Integrates
/// piecewise linears exactly and lumps mass on nodal bases.
QuadratureRule q1_rule(int dim);

/// Vertex-plus-center rule, exact for piecewise quadratics.
QuadratureRule q2_rule(int dim);

/// Integral of f over one cell, with f evaluated at physical points.
double integrate(const QuadratureRule& rule, const Mesh& mesh, int cell,
                 const std::function<double(std::span<const double>)>& f);

/// Nodes and weights of the m-point Gauss-Legendre rule on [0, 1].
void gauss_legendre_01(int m, std::vector<double>& nodes, std::vector<double>& weights);

}  // namespace cosserat
