#include "cosserat/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace cosserat {

namespace {

double det2(double a, double b, double c, double d) { return a * d - b * c; }

double signed_measure(int dim, const double* p0, const double* p1, const double* p2,
                      const double* p3) {
  if (dim == 2) {
    return 0.5 * det2(p1[0] - p0[0], p2[0] - p0[0], p1[1] - p0[1], p2[1] - p0[1]);
  }
  const double a[3] = {p1[0] - p0[0], p1[1] - p0[1], p1[2] - p0[2]};
  const double b[3] = {p2[0] - p0[0], p2[1] - p0[1], p2[2] - p0[2]};
  const double c[3] = {p3[0] - p0[0], p3[1] - p0[1], p3[2] - p0[2]};
  const double det = a[0] * det2(b[1], b[2], c[1], c[2]) - a[1] * det2(b[0], b[2], c[0], c[2]) +
                     a[2] * det2(b[0], b[1], c[0], c[1]);
  return det / 6.0;
}

void require_grid_parameter(int n) {
  if (n < 3 || n % 3 != 0)
    throw std::invalid_argument("structured grid parameter must be a positive multiple of 3, got " +
                                std::to_string(n));
}

// Grid lines of the unit interval. Points are 40-bit dyadic rationals
// refined by exact midpoints, so doubling n scales every spacing by
// exactly one half and the mesh size halves bitwise under refinement.
// The line nearest 1/3 is within 2^-40 of it, which keeps the mesh
// conforming to the transition planes up to a negligible offset.
std::vector<double> unit_interval_grid(int n) {
  require_grid_parameter(n);
  int q = n / 3, k = 0;
  while (q % 2 == 0) {
    q /= 2;
    ++k;
  }
  const int base = 3 * q;
  std::vector<double> g(static_cast<size_t>(base) + 1);
  for (int r = 0; r <= base; ++r)
    g[static_cast<size_t>(r)] =
        std::nearbyint(static_cast<double>(r) * 1099511627776.0 / static_cast<double>(base)) * 0x1p-40;
  for (int level = 0; level < k; ++level) {
    std::vector<double> fine(2 * g.size() - 1);
    for (size_t j = 0; j + 1 < g.size(); ++j) {
      fine[2 * j] = g[j];
      fine[2 * j + 1] = (g[j] + g[j + 1]) / 2.0;
    }
    fine.back() = g.back();
    g = std::move(fine);
  }
  return g;
}

}  // namespace

Mesh::Mesh(int dim, std::vector<double> coords, std::vector<int> cells)
    : dim_(dim), coords_(std::move(coords)), cells_(std::move(cells)) {
  if (dim_ != 2 && dim_ != 3) throw std::invalid_argument("Mesh: dimension must be 2 or 3");
  if (cells_.size() % static_cast<size_t>(dim_ + 1) != 0)
    throw std::invalid_argument("Mesh: cell array length not divisible by dim+1");
  if (coords_.size() % static_cast<size_t>(dim_) != 0)
    throw std::invalid_argument("Mesh: coordinate array length not divisible by dim");

  const int nv = num_vertices();
  const int nc = num_cells();
  const int nvc = dim_ + 1;

  for (int c = 0; c < nc; ++c) {
    int* v = cells_.data() + static_cast<size_t>(c) * nvc;
    for (int i = 0; i < nvc; ++i) {
      if (v[i] < 0 || v[i] >= nv) throw std::invalid_argument("Mesh: vertex index out of range");
      for (int j = i + 1; j < nvc; ++j)
        if (v[i] == v[j]) throw std::invalid_argument("Mesh: cell with repeated vertex index");
    }
    // Consistent (positive) orientation; swap the last two vertices if needed.
    const double m = signed_measure(dim_, vertex(v[0]).data(), vertex(v[1]).data(),
                                    vertex(v[2]).data(), dim_ == 3 ? vertex(v[3]).data() : nullptr);
    if (m == 0.0) throw std::invalid_argument("Mesh: degenerate cell");
    if (m < 0.0) std::swap(v[nvc - 2], v[nvc - 1]);
  }

  cell_measures_.resize(static_cast<size_t>(nc));
  cell_diameters_.resize(static_cast<size_t>(nc));
  for (int c = 0; c < nc; ++c) {
    const int* v = cells_.data() + static_cast<size_t>(c) * nvc;
    cell_measures_[static_cast<size_t>(c)] =
        signed_measure(dim_, vertex(v[0]).data(), vertex(v[1]).data(), vertex(v[2]).data(),
                       dim_ == 3 ? vertex(v[3]).data() : nullptr);
    double diam2 = 0.0;
    for (int i = 0; i < nvc; ++i)
      for (int j = i + 1; j < nvc; ++j) {
        double d2 = 0.0;
        for (int k = 0; k < dim_; ++k) {
          const double d = vertex(v[i])[static_cast<size_t>(k)] - vertex(v[j])[static_cast<size_t>(k)];
          d2 += d * d;
        }
        diam2 = std::max(diam2, d2);
      }
    cell_diameters_[static_cast<size_t>(c)] = std::sqrt(diam2);
    total_measure_ += cell_measures_[static_cast<size_t>(c)];
    h_ = std::max(h_, cell_diameters_[static_cast<size_t>(c)]);
  }

  // Facet discovery; first-encounter numbering over cells in order.
  std::map<std::array<int, 3>, int> facet_ids;
  cell_facets_.assign(static_cast<size_t>(nc) * nvc, -1);
  for (int c = 0; c < nc; ++c) {
    const int* v = cells_.data() + static_cast<size_t>(c) * nvc;
    for (int i = 0; i < nvc; ++i) {
      std::array<int, 3> key = {-1, -1, -1};
      int k = 0;
      for (int j = 0; j < nvc; ++j)
        if (j != i) key[static_cast<size_t>(k++)] = v[j];
      std::sort(key.begin(), key.begin() + dim_);
      auto [it, inserted] = facet_ids.try_emplace(key, static_cast<int>(facet_cells_.size()));
      if (inserted) {
        for (int j = 0; j < dim_; ++j) facet_vertices_.push_back(key[static_cast<size_t>(j)]);
        facet_cells_.push_back({c, -1});
      } else {
        auto& fc = facet_cells_[static_cast<size_t>(it->second)];
        if (fc[1] != -1) throw std::invalid_argument("Mesh: facet shared by more than two cells");
        fc[1] = c;
      }
      cell_facets_[static_cast<size_t>(c) * nvc + static_cast<size_t>(i)] = it->second;
    }
  }

  const int nf = num_facets();
  facet_normals_.assign(static_cast<size_t>(nf) * dim_, 0.0);
  facet_measures_.assign(static_cast<size_t>(nf), 0.0);
  for (int f = 0; f < nf; ++f) {
    const int* fv = facet_vertices_.data() + static_cast<size_t>(f) * dim_;
    double n[3] = {0.0, 0.0, 0.0};
    if (dim_ == 2) {
      const auto a = vertex(fv[0]);
      const auto b = vertex(fv[1]);
      n[0] = b[1] - a[1];
      n[1] = -(b[0] - a[0]);
      facet_measures_[static_cast<size_t>(f)] = std::hypot(n[0], n[1]);
    } else {
      const auto a = vertex(fv[0]);
      const auto b = vertex(fv[1]);
      const auto c = vertex(fv[2]);
      const double e1[3] = {b[0] - a[0], b[1] - a[1], b[2] - a[2]};
      const double e2[3] = {c[0] - a[0], c[1] - a[1], c[2] - a[2]};
      n[0] = e1[1] * e2[2] - e1[2] * e2[1];
      n[1] = e1[2] * e2[0] - e1[0] * e2[2];
      n[2] = e1[0] * e2[1] - e1[1] * e2[0];
      const double len = std::sqrt(n[0] * n[0] + n[1] * n[1] + n[2] * n[2]);
      facet_measures_[static_cast<size_t>(f)] = 0.5 * len;
    }
    double len = 0.0;
    for (int k = 0; k < dim_; ++k) len += n[k] * n[k];
    len = std::sqrt(len);
    // Orient away from the lower-indexed cell: against the direction from
    // the facet centroid to the opposite vertex of that cell.
    const int c_lo = facet_cells_[static_cast<size_t>(f)][0];
    const int* cv = cells_.data() + static_cast<size_t>(c_lo) * nvc;
    int opp = -1;
    for (int i = 0; i < nvc; ++i) {
      bool in_facet = false;
      for (int j = 0; j < dim_; ++j) in_facet |= cv[i] == fv[j];
      if (!in_facet) opp = cv[i];
    }
    double dir = 0.0;
    for (int k = 0; k < dim_; ++k) {
      double centroid_k = 0.0;
      for (int j = 0; j < dim_; ++j) centroid_k += vertex(fv[j])[static_cast<size_t>(k)];
      centroid_k /= dim_;
      dir += (centroid_k - vertex(opp)[static_cast<size_t>(k)]) * n[k];
    }
    const double s = dir >= 0.0 ? 1.0 : -1.0;
    for (int k = 0; k < dim_; ++k)
      facet_normals_[static_cast<size_t>(f) * dim_ + static_cast<size_t>(k)] = s * n[k] / len;
  }

  cell_facet_signs_.assign(static_cast<size_t>(nc) * nvc, 0);
  num_boundary_facets_ = 0;
  for (int f = 0; f < nf; ++f)
    if (facet_on_boundary(f)) ++num_boundary_facets_;
  for (int c = 0; c < nc; ++c)
    for (int i = 0; i < nvc; ++i) {
      const int f = cell_facets_[static_cast<size_t>(c) * nvc + static_cast<size_t>(i)];
      cell_facet_signs_[static_cast<size_t>(c) * nvc + static_cast<size_t>(i)] =
          facet_cells_[static_cast<size_t>(f)][0] == c ? 1 : -1;
    }
}

std::array<double, 3> Mesh::cell_centroid(int c) const {
  std::array<double, 3> x = {0.0, 0.0, 0.0};
  const auto v = cell_vertices(c);
  for (int i = 0; i <= dim_; ++i)
    for (int k = 0; k < dim_; ++k) x[static_cast<size_t>(k)] += vertex(v[static_cast<size_t>(i)])[static_cast<size_t>(k)];
  for (int k = 0; k < dim_; ++k) x[static_cast<size_t>(k)] /= dim_ + 1;
  return x;
}

std::array<double, 3> Mesh::point_from_barycentric(int c, std::span<const double> lambda) const {
  std::array<double, 3> x = {0.0, 0.0, 0.0};
  const auto v = cell_vertices(c);
  for (int i = 0; i <= dim_; ++i)
    for (int k = 0; k < dim_; ++k)
      x[static_cast<size_t>(k)] += lambda[static_cast<size_t>(i)] * vertex(v[static_cast<size_t>(i)])[static_cast<size_t>(k)];
  return x;
}

Mesh build_structured_square(int n) {
  const std::vector<double> line = unit_interval_grid(n);
  std::vector<double> coords;
  coords.reserve(static_cast<size_t>(n + 1) * (n + 1) * 2);
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i) {
      coords.push_back(line[static_cast<size_t>(i)]);
      coords.push_back(line[static_cast<size_t>(j)]);
    }
  auto vid = [n](int i, int j) { return j * (n + 1) + i; };
  std::vector<int> cells;
  cells.reserve(static_cast<size_t>(n) * n * 6);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const int v00 = vid(i, j), v10 = vid(i + 1, j), v01 = vid(i, j + 1), v11 = vid(i + 1, j + 1);
      cells.insert(cells.end(), {v00, v10, v11});
      cells.insert(cells.end(), {v00, v11, v01});
    }
  return Mesh(2, std::move(coords), std::move(cells));
}

Mesh build_structured_cube(int n) {
  const std::vector<double> line = unit_interval_grid(n);
  std::vector<double> coords;
  coords.reserve(static_cast<size_t>(n + 1) * (n + 1) * (n + 1) * 3);
  for (int k = 0; k <= n; ++k)
    for (int j = 0; j <= n; ++j)
      for (int i = 0; i <= n; ++i) {
        coords.push_back(line[static_cast<size_t>(i)]);
        coords.push_back(line[static_cast<size_t>(j)]);
        coords.push_back(line[static_cast<size_t>(k)]);
      }
  auto vid = [n](int i, int j, int k) { return (k * (n + 1) + j) * (n + 1) + i; };
  // Kuhn split: one tetrahedron per permutation of the unit steps.
  const int perms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
  std::vector<int> cells;
  cells.reserve(static_cast<size_t>(n) * n * n * 24);
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i)
        for (const auto& p : perms) {
          int idx[3] = {i, j, k};
          cells.push_back(vid(idx[0], idx[1], idx[2]));
          for (int s = 0; s < 3; ++s) {
            ++idx[p[s]];
            cells.push_back(vid(idx[0], idx[1], idx[2]));
          }
        }
  return Mesh(3, std::move(coords), std::move(cells));
}

Mesh barycentric_subdivide(const Mesh& mesh) {
  const int d = mesh.dim();
  const int nv = mesh.num_vertices();
  const int nc = mesh.num_cells();
  std::vector<double> coords;
  coords.reserve(static_cast<size_t>(nv + nc) * d);
  for (int v = 0; v < nv; ++v) {
    const auto p = mesh.vertex(v);
    coords.insert(coords.end(), p.begin(), p.end());
  }
  for (int c = 0; c < nc; ++c) {
    const auto z = mesh.cell_centroid(c);
    for (int k = 0; k < d; ++k) coords.push_back(z[static_cast<size_t>(k)]);
  }
  std::vector<int> cells;
  cells.reserve(static_cast<size_t>(nc) * (d + 1) * (d + 1));
  for (int c = 0; c < nc; ++c) {
    const auto v = mesh.cell_vertices(c);
    const int z = nv + c;
    // Child i replaces vertex i of the parent by the barycenter.
    for (int i = 0; i <= d; ++i) {
      for (int j = 0; j <= d; ++j) cells.push_back(j == i ? z : v[static_cast<size_t>(j)]);
    }
  }
  return Mesh(d, std::move(coords), std::move(cells));
}

Mesh import_simplicial(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("import_simplicial: cannot open " + path);
  return import_simplicial(in);
}

Mesh import_simplicial(std::istream& in) {
  std::string line;
  std::vector<double> xyz;         // 3 per node as stored in the file
  std::vector<long long> node_id;  // file ids, arbitrary and sparse
  std::vector<int> elem_type;
  std::vector<long long> elem_nodes;  // 3 or 4 per element by type

  auto read_line = [&](const char* what) {
    if (!std::getline(in, line)) throw std::runtime_error(std::string("import_simplicial: unexpected end of file in ") + what);
    return line;
  };

  bool saw_nodes = false, saw_elements = false;
  while (std::getline(in, line)) {
    // Strip trailing CR from files written on other platforms.
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (line.empty()) continue;
    if (line[0] != '$') continue;

    if (line == "$MeshFormat") {
      std::istringstream ls(read_line("$MeshFormat"));
      double version = 0.0;
      int file_type = -1;
      ls >> version >> file_type;
      if (!ls || version < 2.0 || version >= 3.0 || file_type != 0)
        throw std::runtime_error("import_simplicial: unsupported mesh format header");
      if (read_line("$MeshFormat") != "$EndMeshFormat")
        throw std::runtime_error("import_simplicial: malformed $MeshFormat section");
    } else if (line == "$Nodes") {
      saw_nodes = true;
      std::istringstream ls(read_line("$Nodes"));
      long long count = -1;
      ls >> count;
      if (!ls || count < 0) throw std::runtime_error("import_simplicial: malformed node count");
      for (long long i = 0; i < count; ++i) {
        std::istringstream ns(read_line("$Nodes"));
        long long id;
        double x, y, z;
        ns >> id >> x >> y >> z;
        if (!ns) throw std::runtime_error("import_simplicial: malformed node line");
        node_id.push_back(id);
        xyz.insert(xyz.end(), {x, y, z});
      }
      if (read_line("$Nodes") != "$EndNodes")
        throw std::runtime_error("import_simplicial: malformed $Nodes section");
    } else if (line == "$Elements") {
      saw_elements = true;
      std::istringstream ls(read_line("$Elements"));
      long long count = -1;
      ls >> count;
      if (!ls || count < 0) throw std::runtime_error("import_simplicial: malformed element count");
      for (long long i = 0; i < count; ++i) {
        std::istringstream es(read_line("$Elements"));
        long long id;
        int type, ntags;
        es >> id >> type >> ntags;
        if (!es) throw std::runtime_error("import_simplicial: malformed element line");
        for (int t = 0; t < ntags; ++t) {
          long long tag;
          es >> tag;
        }
        if (type == 1 || type == 15) continue;  // boundary edges / points
        int nn = 0;
        if (type == 2)
          nn = 3;
        else if (type == 4)
          nn = 4;
        else
          throw std::runtime_error("import_simplicial: non-simplex element of type " + std::to_string(type));
        elem_type.push_back(type);
        for (int k = 0; k < nn; ++k) {
          long long v;
          es >> v;
          if (!es) throw std::runtime_error("import_simplicial: malformed element line");
          elem_nodes.push_back(v);
        }
      }
      if (read_line("$Elements") != "$EndElements")
        throw std::runtime_error("import_simplicial: malformed $Elements section");
    }
    // Other sections (physical names, periodic data, ...) are skipped.
  }
  if (!saw_nodes || !saw_elements)
    throw std::runtime_error("import_simplicial: missing $Nodes or $Elements section");
  if (elem_type.empty()) throw std::runtime_error("import_simplicial: no simplex elements");

  const bool has_tri = std::find(elem_type.begin(), elem_type.end(), 2) != elem_type.end();
  const bool has_tet = std::find(elem_type.begin(), elem_type.end(), 4) != elem_type.end();
  if (has_tri && has_tet)
    throw std::runtime_error("import_simplicial: dimension mismatch (mixed triangles and tetrahedra)");
  const int dim = has_tet ? 3 : 2;

  std::map<long long, int> file_to_local;
  for (size_t i = 0; i < node_id.size(); ++i) {
    if (!file_to_local.emplace(node_id[i], static_cast<int>(i)).second)
      throw std::runtime_error("import_simplicial: duplicate node id");
  }

  // Keep only referenced vertices, preserving file order.
  std::vector<int> used(node_id.size(), -1);
  std::vector<int> cells;
  cells.reserve(elem_nodes.size());
  for (long long v : elem_nodes) {
    auto it = file_to_local.find(v);
    if (it == file_to_local.end()) throw std::runtime_error("import_simplicial: element references unknown node");
    used[static_cast<size_t>(it->second)] = 1;
  }
  int next = 0;
  for (size_t i = 0; i < used.size(); ++i)
    if (used[i] == 1) used[i] = next++;
  std::vector<double> coords;
  coords.reserve(static_cast<size_t>(next) * dim);
  for (size_t i = 0; i < node_id.size(); ++i) {
    if (used[i] < 0) continue;
    coords.push_back(xyz[3 * i]);
    coords.push_back(xyz[3 * i + 1]);
    if (dim == 3) coords.push_back(xyz[3 * i + 2]);
    if (dim == 2 && std::abs(xyz[3 * i + 2]) > 1e-12)
      throw std::runtime_error("import_simplicial: dimension mismatch (triangle mesh with nonzero z)");
  }
  for (long long v : elem_nodes) cells.push_back(used[static_cast<size_t>(file_to_local.at(v))]);

  return Mesh(dim, std::move(coords), std::move(cells));
}

}  // namespace cosserat
