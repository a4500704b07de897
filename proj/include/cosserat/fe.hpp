#pragma once

#include <functional>
#include <span>
#include <vector>

#include "cosserat/csr.hpp"
#include "cosserat/dense.hpp"
#include "cosserat/mesh.hpp"
#include "cosserat/quadrature.hpp"

namespace cosserat {

enum class Family { P0, P1dc, L1, BDM1, RT1 };

const char* family_name(Family f);
bool family_is_hdiv(Family f);
int family_degree(Family f);
int family_local_dofs(Family f, int dim);

enum class DofKind { Vertex, Facet, Cell };

/// Placement of a local degree of freedom on the reference cell.
struct DofDesc {
  DofKind kind;
  int entity;    // local facet or local vertex index; cell-local slot otherwise
  int subindex;  // facet-local node or interior component
};

/// Reference element data: the nodal basis dual to the element's degrees
/// of freedom on the reference simplex. For the H(div) families the
/// facet degrees of freedom are vertex values of the normal trace and the
/// interior degrees of freedom (RT1) are vector values at the centroid,
/// so every basis function vanishes at all nodes except its own.
class ReferenceElement {
 public:
  ReferenceElement(Family family, int dim);

  Family family() const { return family_; }
  int dim() const { return dim_; }
  int ndof() const { return ndof_; }
  const std::vector<DofDesc>& dofs() const { return dofs_; }

  /// Basis values at a reference point: ndof rows of 1 (scalar families)
  /// or dim (H(div) families) entries; divs gets the per-basis divergence
  /// for H(div) families.
  void eval(std::span<const double> x, std::vector<double>& values,
            std::vector<double>& divs) const;

 private:
  Family family_;
  int dim_;
  int ndof_;
  std::vector<DofDesc> dofs_;
  DenseMatrix coeffs_;  // nodal basis in terms of the spanning set (H(div))
};

/// Global finite element space: one scalar/vector field replicated
/// `components` times (tensor fields are stacked component-major).
/// Immutable after construction; evaluation is pure.
class FESpace {
 public:
  FESpace(const Mesh& mesh, Family family, int components);

  const Mesh& mesh() const { return *mesh_; }
  Family family() const { return family_; }
  bool hdiv() const { return family_is_hdiv(family_); }
  int dim() const { return mesh_->dim(); }
  int components() const { return components_; }
  int scalar_dofs() const { return scalar_dofs_; }
  int dofs() const { return components_ * scalar_dofs_; }
  int local_dofs() const { return local_dofs_; }
  int degree() const { return family_degree(family_); }

  /// Scalar-field DOF ids of one cell, in local order.
  std::span<const int> cell_dofs(int c) const {
    return {dof_map_.data() + static_cast<size_t>(c) * local_dofs_, static_cast<size_t>(local_dofs_)};
  }
  int global_dof(int comp, int scalar_dof) const { return comp * scalar_dofs_ + scalar_dof; }

  /// Mesh vertex a DOF is attached to, or -1 for cell-attached DOFs.
  int attached_vertex(int scalar_dof) const { return attached_vertex_[static_cast<size_t>(scalar_dof)]; }

  /// Coefficients of the cell's nodal basis in the pushed spanning set
  /// (H(div) families only).
  const double* cell_coeffs(int c) const {
    return cell_coeffs_.data() + static_cast<size_t>(c) * local_dofs_ * local_dofs_;
  }

 private:
  const Mesh* mesh_;
  Family family_;
  int components_;
  int scalar_dofs_ = 0;
  int local_dofs_ = 0;
  std::vector<int> dof_map_;
  std::vector<int> attached_vertex_;
  std::vector<double> cell_coeffs_;
};

FESpace make_space(const Mesh& mesh, Family family, int components);

/// Evaluates the scalar-field basis of one space at a fixed set of
/// barycentric points, cell by cell. bind(c) loads cell data; accessors
/// then give values (and divergences for H(div) bases) at each point.
class CellEval {
 public:
  CellEval(const FESpace& space, std::span<const double> bary_points, int num_points);
  CellEval(const FESpace& space, const QuadratureRule& rule);

  void bind(int cell);

  int num_points() const { return npts_; }
  int nloc() const { return space_->local_dofs(); }

  double scalar(int q, int i) const { return values_[idx(q, i)]; }
  const double* vector(int q, int i) const { return vec_values_.data() + static_cast<size_t>(idx(q, i)) * space_->dim(); }
  double div(int q, int i) const { return divs_[idx(q, i)]; }

  /// Physical coordinates of point q on the bound cell.
  std::span<const double> point(int q) const {
    return {points_.data() + static_cast<size_t>(q) * space_->dim(), static_cast<size_t>(space_->dim())};
  }

 private:
  size_t idx(int q, int i) const { return static_cast<size_t>(q) * space_->local_dofs() + static_cast<size_t>(i); }
  void setup(std::span<const double> bary_points);

  const FESpace* space_;
  int npts_ = 0;
  std::vector<double> bary_;
  std::vector<double> ref_values_;  // spanning values at reference points
  std::vector<double> ref_divs_;
  std::vector<double> values_;      // scalar families: basis values
  std::vector<double> vec_values_;  // hdiv: basis vector values
  std::vector<double> divs_;
  std::vector<double> points_;      // physical points of the bound cell
  int bound_cell_ = -1;
};

/// Evaluates a coefficient field on one cell at barycentric points.
/// Output layout: per point, per component, 1 or dim values.
void eval_function(const FESpace& space, std::span<const double> coeffs, int cell,
                   std::span<const double> bary_points, int num_points, std::vector<double>& out);

/// Mass matrix of the scalar field (shared by all components).
Csr mass_matrix(const FESpace& space);

/// L2 projection onto the space. The target receives a physical point and
/// a component index and writes 1 (scalar families) or dim (H(div)) values.
/// The mass solve runs conjugate gradients to a 1e-13 relative residual.
std::vector<double> l2_project(
    const FESpace& space,
    const std::function<void(std::span<const double> x, int comp, double* out)>& target);

}  // namespace cosserat
