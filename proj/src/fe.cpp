#include "cosserat/fe.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "cosserat/krylov.hpp"

namespace cosserat {

const char* family_name(Family f) {
  switch (f) {
    case Family::P0: return "P0";
    case Family::P1dc: return "P1dc";
    case Family::L1: return "L1";
    case Family::BDM1: return "BDM1";
    case Family::RT1: return "RT1";
  }
  return "?";
}

bool family_is_hdiv(Family f) { return f == Family::BDM1 || f == Family::RT1; }

int family_degree(Family f) {
  switch (f) {
    case Family::P0: return 0;
    case Family::P1dc:
    case Family::L1:
    case Family::BDM1: return 1;
    case Family::RT1: return 2;
  }
  return 0;
}

int family_local_dofs(Family f, int dim) {
  switch (f) {
    case Family::P0: return 1;
    case Family::P1dc:
    case Family::L1: return dim + 1;
    case Family::BDM1: return dim * (dim + 1);
    case Family::RT1: return dim * (dim + 1) + dim;
  }
  return 0;
}

namespace {

// Monomial spanning set of the H(div) element on the reference simplex:
// constants, linears, and for RT1 the radial enrichments x * x_m.
void spanning_eval(Family f, int dim, int j, std::span<const double> x, double* val, double* div) {
  for (int k = 0; k < dim; ++k) val[k] = 0.0;
  *div = 0.0;
  if (j < dim) {
    val[j] = 1.0;
    return;
  }
  j -= dim;
  if (j < dim * dim) {
    const int i = j / dim;
    const int m = j % dim;
    val[i] = x[static_cast<size_t>(m)];
    *div = i == m ? 1.0 : 0.0;
    return;
  }
  if (f != Family::RT1) throw std::logic_error("spanning_eval: index out of range");
  const int m = j - dim * dim;
  for (int k = 0; k < dim; ++k) val[k] = x[static_cast<size_t>(m)] * x[static_cast<size_t>(k)];
  *div = (dim + 1) * x[static_cast<size_t>(m)];
}

void reference_vertex(int dim, int v, double* x) {
  for (int k = 0; k < dim; ++k) x[k] = 0.0;
  if (v > 0) x[v - 1] = 1.0;
}

// Outward unit normal of the reference facet opposite local vertex lf.
void reference_normal(int dim, int lf, double* n) {
  if (lf == 0) {
    const double s = 1.0 / std::sqrt(static_cast<double>(dim));
    for (int k = 0; k < dim; ++k) n[k] = s;
  } else {
    for (int k = 0; k < dim; ++k) n[k] = 0.0;
    n[lf - 1] = -1.0;
  }
}

std::vector<DofDesc> make_dof_descs(Family f, int dim) {
  std::vector<DofDesc> dofs;
  switch (f) {
    case Family::P0:
      dofs.push_back({DofKind::Cell, 0, 0});
      break;
    case Family::P1dc:
      for (int v = 0; v <= dim; ++v) dofs.push_back({DofKind::Cell, 0, v});
      break;
    case Family::L1:
      for (int v = 0; v <= dim; ++v) dofs.push_back({DofKind::Vertex, v, 0});
      break;
    case Family::BDM1:
    case Family::RT1:
      for (int lf = 0; lf <= dim; ++lf)
        for (int s = 0; s < dim; ++s) dofs.push_back({DofKind::Facet, lf, s});
      if (f == Family::RT1)
        for (int i = 0; i < dim; ++i) dofs.push_back({DofKind::Cell, 0, i});
      break;
  }
  return dofs;
}

// Local vertices of the reference facet opposite lf, ascending.
void facet_local_vertices(int dim, int lf, int* verts) {
  int k = 0;
  for (int v = 0; v <= dim; ++v)
    if (v != lf) verts[k++] = v;
}

}  // namespace

ReferenceElement::ReferenceElement(Family family, int dim) : family_(family), dim_(dim) {
  if (dim != 2 && dim != 3) throw std::invalid_argument("ReferenceElement: dimension must be 2 or 3");
  ndof_ = family_local_dofs(family, dim);
  dofs_ = make_dof_descs(family, dim);
  if (!family_is_hdiv(family)) return;

  // Vandermonde of the DOF functionals over the spanning set, inverted to
  // get the nodal basis.
  const int n = ndof_;
  DenseMatrix d(n, n);
  std::vector<double> val(static_cast<size_t>(dim));
  double dv = 0.0;
  std::vector<double> x(static_cast<size_t>(dim));
  int verts[4];
  for (int row = 0; row < n; ++row) {
    const DofDesc& dof = dofs_[static_cast<size_t>(row)];
    for (int j = 0; j < n; ++j) {
      if (dof.kind == DofKind::Facet) {
        facet_local_vertices(dim, dof.entity, verts);
        reference_vertex(dim, verts[dof.subindex], x.data());
        double nrm[3];
        reference_normal(dim, dof.entity, nrm);
        spanning_eval(family, dim, j, x, val.data(), &dv);
        double s = 0.0;
        for (int k = 0; k < dim; ++k) s += nrm[k] * val[static_cast<size_t>(k)];
        d(row, j) = s;
      } else {
        std::fill(x.begin(), x.end(), 1.0 / (dim + 1));
        spanning_eval(family, dim, j, x, val.data(), &dv);
        d(row, j) = val[static_cast<size_t>(dof.subindex)];
      }
    }
  }
  const DenseMatrix inv = lu_invert(lu_factor(std::move(d)));
  coeffs_ = DenseMatrix(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) coeffs_(i, j) = inv(j, i);
}

void ReferenceElement::eval(std::span<const double> x, std::vector<double>& values,
                            std::vector<double>& divs) const {
  if (!family_is_hdiv(family_)) {
    values.assign(static_cast<size_t>(ndof_), 0.0);
    divs.clear();
    if (family_ == Family::P0) {
      values[0] = 1.0;
    } else {
      double lam0 = 1.0;
      for (int k = 0; k < dim_; ++k) lam0 -= x[static_cast<size_t>(k)];
      values[0] = lam0;
      for (int k = 0; k < dim_; ++k) values[static_cast<size_t>(k) + 1] = x[static_cast<size_t>(k)];
    }
    return;
  }
  const int n = ndof_;
  values.assign(static_cast<size_t>(n) * dim_, 0.0);
  divs.assign(static_cast<size_t>(n), 0.0);
  std::vector<double> sval(static_cast<size_t>(dim_));
  double sdiv = 0.0;
  for (int j = 0; j < n; ++j) {
    spanning_eval(family_, dim_, j, x, sval.data(), &sdiv);
    for (int i = 0; i < n; ++i) {
      const double c = coeffs_(i, j);
      if (c == 0.0) continue;
      for (int k = 0; k < dim_; ++k) values[static_cast<size_t>(i) * dim_ + static_cast<size_t>(k)] += c * sval[static_cast<size_t>(k)];
      divs[static_cast<size_t>(i)] += c * sdiv;
    }
  }
}

FESpace::FESpace(const Mesh& mesh, Family family, int components)
    : mesh_(&mesh), family_(family), components_(components) {
  if (components < 1) throw std::invalid_argument("FESpace: components must be positive");
  const int d = mesh.dim();
  const int nc = mesh.num_cells();
  local_dofs_ = family_local_dofs(family, d);
  dof_map_.resize(static_cast<size_t>(nc) * local_dofs_);

  switch (family_) {
    case Family::P0:
      scalar_dofs_ = nc;
      for (int c = 0; c < nc; ++c) dof_map_[static_cast<size_t>(c)] = c;
      attached_vertex_.assign(static_cast<size_t>(scalar_dofs_), -1);
      break;
    case Family::P1dc:
      scalar_dofs_ = nc * (d + 1);
      for (int c = 0; c < nc; ++c)
        for (int v = 0; v <= d; ++v) dof_map_[static_cast<size_t>(c) * (d + 1) + static_cast<size_t>(v)] = c * (d + 1) + v;
      attached_vertex_.assign(static_cast<size_t>(scalar_dofs_), -1);
      break;
    case Family::L1:
      scalar_dofs_ = mesh.num_vertices();
      for (int c = 0; c < nc; ++c) {
        const auto cv = mesh.cell_vertices(c);
        for (int v = 0; v <= d; ++v) dof_map_[static_cast<size_t>(c) * (d + 1) + static_cast<size_t>(v)] = cv[static_cast<size_t>(v)];
      }
      attached_vertex_.resize(static_cast<size_t>(scalar_dofs_));
      for (int v = 0; v < scalar_dofs_; ++v) attached_vertex_[static_cast<size_t>(v)] = v;
      break;
    case Family::BDM1:
    case Family::RT1: {
      const int nf = mesh.num_facets();
      const int facet_dofs = nf * d;
      scalar_dofs_ = family_ == Family::RT1 ? facet_dofs + nc * d : facet_dofs;
      attached_vertex_.assign(static_cast<size_t>(scalar_dofs_), -1);
      for (int f = 0; f < nf; ++f) {
        const auto fv = mesh.facet_vertices(f);
        for (int s = 0; s < d; ++s) attached_vertex_[static_cast<size_t>(f) * d + static_cast<size_t>(s)] = fv[static_cast<size_t>(s)];
      }
      cell_coeffs_.resize(static_cast<size_t>(nc) * local_dofs_ * local_dofs_);

      std::vector<double> sval(static_cast<size_t>(d));
      double sdiv = 0.0;
      for (int c = 0; c < nc; ++c) {
        const auto cv = mesh.cell_vertices(c);
        const auto cf = mesh.cell_facets(c);
        // Jacobian of the affine reference map.
        double J[3][3];
        const auto p0 = mesh.vertex(cv[0]);
        for (int k = 1; k <= d; ++k) {
          const auto pk = mesh.vertex(cv[static_cast<size_t>(k)]);
          for (int r = 0; r < d; ++r) J[r][k - 1] = pk[static_cast<size_t>(r)] - p0[static_cast<size_t>(r)];
        }
        const double det = (d == 2 ? 2.0 : 6.0) * mesh.cell_measure(c);

        int row = 0;
        DenseMatrix dmat(local_dofs_, local_dofs_);
        std::vector<int> dofs(static_cast<size_t>(local_dofs_));
        double xref[3];
        for (int lf = 0; lf <= d; ++lf) {
          const int f = cf[static_cast<size_t>(lf)];
          const auto fverts = mesh.facet_vertices(f);
          const auto nrm = mesh.facet_normal(f);
          for (int s = 0; s < d; ++s, ++row) {
            dofs[static_cast<size_t>(row)] = f * d + s;
            // Local index of this facet vertex within the cell.
            int lv = -1;
            for (int v = 0; v <= d; ++v)
              if (cv[static_cast<size_t>(v)] == fverts[static_cast<size_t>(s)]) lv = v;
            reference_vertex(d, lv, xref);
            for (int j = 0; j < local_dofs_; ++j) {
              spanning_eval(family_, d, j, {xref, static_cast<size_t>(d)}, sval.data(), &sdiv);
              double entry = 0.0;
              for (int r = 0; r < d; ++r) {
                double push = 0.0;
                for (int k = 0; k < d; ++k) push += J[r][k] * sval[static_cast<size_t>(k)];
                entry += nrm[static_cast<size_t>(r)] * push;
              }
              dmat(row, j) = entry / det;
            }
          }
        }
        if (family_ == Family::RT1) {
          for (int k = 0; k < d; ++k) xref[k] = 1.0 / (d + 1);
          for (int i = 0; i < d; ++i, ++row) {
            dofs[static_cast<size_t>(row)] = facet_dofs + c * d + i;
            for (int j = 0; j < local_dofs_; ++j) {
              spanning_eval(family_, d, j, {xref, static_cast<size_t>(d)}, sval.data(), &sdiv);
              double push = 0.0;
              for (int k = 0; k < d; ++k) push += J[i][k] * sval[static_cast<size_t>(k)];
              dmat(row, j) = push / det;
            }
          }
        }

        DenseMatrix inv = lu_invert(lu_factor(std::move(dmat)));
        double* coef = cell_coeffs_.data() + static_cast<size_t>(c) * local_dofs_ * local_dofs_;
        for (int i = 0; i < local_dofs_; ++i)
          for (int j = 0; j < local_dofs_; ++j) coef[static_cast<size_t>(i) * local_dofs_ + static_cast<size_t>(j)] = inv(j, i);
        for (int i = 0; i < local_dofs_; ++i)
          dof_map_[static_cast<size_t>(c) * local_dofs_ + static_cast<size_t>(i)] = dofs[static_cast<size_t>(i)];
      }
      break;
    }
  }
}

FESpace make_space(const Mesh& mesh, Family family, int components) {
  return FESpace(mesh, family, components);
}

CellEval::CellEval(const FESpace& space, std::span<const double> bary_points, int num_points)
    : space_(&space), npts_(num_points) {
  bary_.assign(bary_points.begin(), bary_points.end());
  setup(bary_points);
}

CellEval::CellEval(const FESpace& space, const QuadratureRule& rule)
    : CellEval(space, rule.points, rule.num_points()) {}

void CellEval::setup(std::span<const double> bary_points) {
  const int d = space_->dim();
  const int nloc = space_->local_dofs();
  if (static_cast<int>(bary_points.size()) != npts_ * (d + 1))
    throw std::invalid_argument("CellEval: barycentric point array has wrong length");
  points_.assign(static_cast<size_t>(npts_) * d, 0.0);

  if (!space_->hdiv()) {
    values_.assign(static_cast<size_t>(npts_) * nloc, 0.0);
    for (int q = 0; q < npts_; ++q) {
      const double* lam = bary_.data() + static_cast<size_t>(q) * (d + 1);
      if (space_->family() == Family::P0) {
        values_[idx(q, 0)] = 1.0;
      } else {
        for (int v = 0; v <= d; ++v) values_[idx(q, v)] = lam[v];
      }
    }
    return;
  }
  // Reference spanning values at each point; reference coordinates are the
  // trailing barycentric entries.
  const int nspan = nloc;
  ref_values_.assign(static_cast<size_t>(npts_) * nspan * d, 0.0);
  ref_divs_.assign(static_cast<size_t>(npts_) * nspan, 0.0);
  double x[3];
  for (int q = 0; q < npts_; ++q) {
    const double* lam = bary_.data() + static_cast<size_t>(q) * (d + 1);
    for (int k = 0; k < d; ++k) x[k] = lam[k + 1];
    for (int j = 0; j < nspan; ++j)
      spanning_eval(space_->family(), d, j, {x, static_cast<size_t>(d)},
                    ref_values_.data() + (static_cast<size_t>(q) * nspan + static_cast<size_t>(j)) * d,
                    &ref_divs_[static_cast<size_t>(q) * nspan + static_cast<size_t>(j)]);
  }
  vec_values_.assign(static_cast<size_t>(npts_) * nloc * d, 0.0);
  divs_.assign(static_cast<size_t>(npts_) * nloc, 0.0);
}

void CellEval::bind(int cell) {
  bound_cell_ = cell;
  const Mesh& mesh = space_->mesh();
  const int d = space_->dim();
  for (int q = 0; q < npts_; ++q) {
    const double* lam = bary_.data() + static_cast<size_t>(q) * (d + 1);
    const auto x = mesh.point_from_barycentric(cell, {lam, static_cast<size_t>(d + 1)});
    for (int k = 0; k < d; ++k) points_[static_cast<size_t>(q) * d + static_cast<size_t>(k)] = x[static_cast<size_t>(k)];
  }
  if (!space_->hdiv()) return;

  const int nloc = space_->local_dofs();
  const auto cv = mesh.cell_vertices(cell);
  double J[3][3];
  const auto p0 = mesh.vertex(cv[0]);
  for (int k = 1; k <= d; ++k) {
    const auto pk = mesh.vertex(cv[static_cast<size_t>(k)]);
    for (int r = 0; r < d; ++r) J[r][k - 1] = pk[static_cast<size_t>(r)] - p0[static_cast<size_t>(r)];
  }
  const double det = (d == 2 ? 2.0 : 6.0) * mesh.cell_measure(cell);
  const double* coef = space_->cell_coeffs(cell);

  std::fill(vec_values_.begin(), vec_values_.end(), 0.0);
  std::fill(divs_.begin(), divs_.end(), 0.0);
  double pushed[3];
  for (int q = 0; q < npts_; ++q) {
    for (int j = 0; j < nloc; ++j) {
      const double* sval = ref_values_.data() + (static_cast<size_t>(q) * nloc + static_cast<size_t>(j)) * d;
      for (int r = 0; r < d; ++r) {
        double s = 0.0;
        for (int k = 0; k < d; ++k) s += J[r][k] * sval[k];
        pushed[r] = s / det;
      }
      const double pdiv = ref_divs_[static_cast<size_t>(q) * nloc + static_cast<size_t>(j)] / det;
      for (int i = 0; i < nloc; ++i) {
        const double c = coef[static_cast<size_t>(i) * nloc + static_cast<size_t>(j)];
        if (c == 0.0) continue;
        double* out = vec_values_.data() + idx(q, i) * d;
        for (int r = 0; r < d; ++r) out[r] += c * pushed[r];
        divs_[idx(q, i)] += c * pdiv;
      }
    }
  }
}

void eval_function(const FESpace& space, std::span<const double> coeffs, int cell,
                   std::span<const double> bary_points, int num_points, std::vector<double>& out) {
  if (static_cast<int>(coeffs.size()) != space.dofs())
    throw std::invalid_argument("eval_function: coefficient length mismatch");
  if (cell < 0 || cell >= space.mesh().num_cells())
    throw std::invalid_argument("eval_function: cell index out of range");
  CellEval ev(space, bary_points, num_points);
  ev.bind(cell);
  const int d = space.dim();
  const int width = space.hdiv() ? d : 1;
  out.assign(static_cast<size_t>(num_points) * space.components() * width, 0.0);
  const auto dofs = space.cell_dofs(cell);
  for (int q = 0; q < num_points; ++q)
    for (int m = 0; m < space.components(); ++m) {
      double* dst = out.data() + (static_cast<size_t>(q) * space.components() + static_cast<size_t>(m)) * width;
      for (int i = 0; i < space.local_dofs(); ++i) {
        const double c = coeffs[static_cast<size_t>(space.global_dof(m, dofs[static_cast<size_t>(i)]))];
        if (space.hdiv()) {
          const double* v = ev.vector(q, i);
          for (int k = 0; k < d; ++k) dst[k] += c * v[k];
        } else {
          dst[0] += c * ev.scalar(q, i);
        }
      }
    }
}

Csr mass_matrix(const FESpace& space) {
  const Mesh& mesh = space.mesh();
  const int d = mesh.dim();
  const QuadratureRule rule = gauss_rule(d, std::max(2 * space.degree(), 0));
  CellEval ev(space, rule);
  const double ref = d == 2 ? 0.5 : 1.0 / 6.0;
  const int nloc = space.local_dofs();
  std::vector<Triplet> trip;
  trip.reserve(static_cast<size_t>(mesh.num_cells()) * nloc * nloc);
  for (int c = 0; c < mesh.num_cells(); ++c) {
    ev.bind(c);
    const double scale = mesh.cell_measure(c) / ref;
    const auto dofs = space.cell_dofs(c);
    for (int i = 0; i < nloc; ++i)
      for (int j = 0; j < nloc; ++j) {
        double s = 0.0;
        for (int q = 0; q < rule.num_points(); ++q) {
          const double w = rule.weights[static_cast<size_t>(q)];
          if (space.hdiv()) {
            const double* vi = ev.vector(q, i);
            const double* vj = ev.vector(q, j);
            double dot = 0.0;
            for (int k = 0; k < d; ++k) dot += vi[k] * vj[k];
            s += w * dot;
          } else {
            s += w * ev.scalar(q, i) * ev.scalar(q, j);
          }
        }
        trip.push_back({dofs[static_cast<size_t>(i)], dofs[static_cast<size_t>(j)], scale * s});
      }
  }
  return csr_from_triplets(space.scalar_dofs(), space.scalar_dofs(), trip);
}

std::vector<double> l2_project(
    const FESpace& space,
    const std::function<void(std::span<const double> x, int comp, double* out)>& target) {
  const Mesh& mesh = space.mesh();
  const int d = mesh.dim();
  const int width = space.hdiv() ? d : 1;
  const Csr m = mass_matrix(space);
  const std::vector<double> diag = csr_diagonal(m);

  const QuadratureRule rule = gauss_rule(d, 6);
  CellEval ev(space, rule);
  const double ref = d == 2 ? 0.5 : 1.0 / 6.0;

  std::vector<double> rhs(static_cast<size_t>(space.dofs()), 0.0);
  std::vector<double> tval(static_cast<size_t>(width));
  for (int c = 0; c < mesh.num_cells(); ++c) {
    ev.bind(c);
    const double scale = mesh.cell_measure(c) / ref;
    const auto dofs = space.cell_dofs(c);
    for (int q = 0; q < rule.num_points(); ++q) {
      const double w = scale * rule.weights[static_cast<size_t>(q)];
      for (int comp = 0; comp < space.components(); ++comp) {
        target(ev.point(q), comp, tval.data());
        for (int i = 0; i < space.local_dofs(); ++i) {
          double dot = 0.0;
          if (space.hdiv()) {
            const double* v = ev.vector(q, i);
            for (int k = 0; k < d; ++k) dot += v[k] * tval[static_cast<size_t>(k)];
          } else {
            dot = ev.scalar(q, i) * tval[0];
          }
          rhs[static_cast<size_t>(space.global_dof(comp, dofs[static_cast<size_t>(i)]))] += w * dot;
        }
      }
    }
  }

  LinOp op{space.scalar_dofs(), [&](const double* x, double* y) { spmv(m, x, y); }};
  LinOp jacobi{space.scalar_dofs(), [&](const double* x, double* y) {
                 for (int i = 0; i < m.rows; ++i) y[i] = x[i] / diag[static_cast<size_t>(i)];
               }};
  std::vector<double> coeffs(static_cast<size_t>(space.dofs()), 0.0);
  std::vector<double> b(static_cast<size_t>(space.scalar_dofs()));
  std::vector<double> x;
  for (int comp = 0; comp < space.components(); ++comp) {
    std::copy_n(rhs.begin() + static_cast<size_t>(comp) * space.scalar_dofs(), space.scalar_dofs(), b.begin());
    IterControl ctl;
    ctl.tol = 1e-13;
    ctl.max_iterations = 400 + 20 * static_cast<int>(std::sqrt(static_cast<double>(space.scalar_dofs())));
    const IterStats st = pcg(op, jacobi, b, x, ctl);
    if (!st.converged) throw std::runtime_error("l2_project: mass solve did not converge");
    std::copy_n(x.begin(), space.scalar_dofs(), coeffs.begin() + static_cast<size_t>(comp) * space.scalar_dofs());
  }
  return coeffs;
}

}  // namespace cosserat
