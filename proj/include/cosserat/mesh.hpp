#pragma once

#include <array>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace cosserat {

/// Conforming simplicial mesh of a 2D or 3D domain with oriented facet
/// topology. Meshes are immutable after construction and safe to share
/// across threads.
///
/// Facet orientation convention: the stored unit normal of an interior
/// facet points from the lower-indexed incident cell to the higher-indexed
/// one; boundary normals point outward. The per-cell sign is +1 when the
/// stored normal is outward for that cell.
class Mesh {
 public:
  /// Builds the full topology (facets, incidence, signs, measures) from raw
  /// cells and coordinates. Cells are reordered to positive measure.
  Mesh(int dim, std::vector<double> coords, std::vector<int> cells);

  int dim() const { return dim_; }
  int num_vertices() const { return static_cast<int>(coords_.size()) / dim_; }
  int num_cells() const { return static_cast<int>(cells_.size()) / (dim_ + 1); }
  int num_facets() const { return static_cast<int>(facet_cells_.size()); }

  std::span<const int> cell_vertices(int c) const {
    return {cells_.data() + static_cast<size_t>(c) * (dim_ + 1), static_cast<size_t>(dim_ + 1)};
  }
  std::span<const double> vertex(int v) const {
    return {coords_.data() + static_cast<size_t>(v) * dim_, static_cast<size_t>(dim_)};
  }

  /// Facet vertices in canonical order (ascending global index).
  std::span<const int> facet_vertices(int f) const {
    return {facet_vertices_.data() + static_cast<size_t>(f) * dim_, static_cast<size_t>(dim_)};
  }
  /// Incident cells (lower, higher); the second is -1 on the boundary.
  const std::array<int, 2>& facet_cells(int f) const { return facet_cells_[static_cast<size_t>(f)]; }
  bool facet_on_boundary(int f) const { return facet_cells_[static_cast<size_t>(f)][1] < 0; }
  int num_boundary_facets() const { return num_boundary_facets_; }

  /// Global unit normal of facet f (see class comment for orientation).
  std::span<const double> facet_normal(int f) const {
    return {facet_normals_.data() + static_cast<size_t>(f) * dim_, static_cast<size_t>(dim_)};
  }
  double facet_measure(int f) const { return facet_measures_[static_cast<size_t>(f)]; }

  /// Facets of cell c; entry i is the facet opposite local vertex i.
  std::span<const int> cell_facets(int c) const {
    return {cell_facets_.data() + static_cast<size_t>(c) * (dim_ + 1), static_cast<size_t>(dim_ + 1)};
  }
  /// Orientation signs matching cell_facets.
  std::span<const int> cell_facet_signs(int c) const {
    return {cell_facet_signs_.data() + static_cast<size_t>(c) * (dim_ + 1), static_cast<size_t>(dim_ + 1)};
  }

  double cell_measure(int c) const { return cell_measures_[static_cast<size_t>(c)]; }
  double cell_diameter(int c) const { return cell_diameters_[static_cast<size_t>(c)]; }
  /// Mesh size h = max cell diameter.
  double h() const { return h_; }
  double total_measure() const { return total_measure_; }

  std::array<double, 3> cell_centroid(int c) const;

  /// Maps barycentric coordinates (dim+1 entries) to physical coordinates.
  std::array<double, 3> point_from_barycentric(int c, std::span<const double> lambda) const;

 private:
  int dim_;
  std::vector<double> coords_;
  std::vector<int> cells_;
  std::vector<int> facet_vertices_;
  std::vector<std::array<int, 2>> facet_cells_;
  std::vector<double> facet_normals_;
  std::vector<double> facet_measures_;
  std::vector<int> cell_facets_;
  std::vector<int> cell_facet_signs_;
  std::vector<double> cell_measures_;
  std::vector<double> cell_diameters_;
  double h_ = 0.0;
  double total_measure_ = 0.0;
  int num_boundary_facets_ = 0;
};

/// Triangulation of the unit square with 2 n^2 cells. The grid lines hit
/// x1 = 1/3 and 2/3, so n must be a positive multiple of 3; every subsquare
/// is split along its lower-left to upper-right diagonal.
Mesh build_structured_square(int n);

/// Tetrahedral mesh of the unit cube with 6 n^3 cells (Kuhn split of each
/// subcube). Same divisibility requirement as build_structured_square.
Mesh build_structured_cube(int n);

/// Splits every cell into dim+1 children through its barycenter. Parent
/// vertices keep their indices.
Mesh barycentric_subdivide(const Mesh& mesh);

/// Reads an ASCII msh v2.2 file restricted to simplex elements (types 2
/// and 4). Lower-dimensional elements are skipped, unreferenced vertices
/// are dropped, and physical tags are ignored.
Mesh import_simplicial(const std::string& path);
Mesh import_simplicial(std::istream& in);

}  // namespace cosserat
