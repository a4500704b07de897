#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "cosserat/mesh.hpp"

using namespace cosserat;

namespace {

Mesh unit_square_two_triangles() {
  return Mesh(2, {0, 0, 1, 0, 1, 1, 0, 1}, {0, 1, 2, 0, 2, 3});
}

}  // namespace

TEST_CASE("structured square counts") {
  Mesh m3 = build_structured_square(3);
  CHECK(m3.num_vertices() == 16);
  CHECK(m3.num_cells() == 18);
  Mesh m6 = build_structured_square(6);
  CHECK(m6.num_vertices() == 49);
  CHECK(m6.num_cells() == 72);
  CHECK_THROWS_AS(build_structured_square(4), std::invalid_argument);
}

TEST_CASE("structured cube counts") {
  Mesh m3 = build_structured_cube(3);
  CHECK(m3.num_vertices() == 64);
  CHECK(m3.num_cells() == 162);
  Mesh m6 = build_structured_cube(6);
  CHECK(m6.num_vertices() == 343);
  CHECK(m6.num_cells() == 1296);
  CHECK_THROWS_AS(build_structured_cube(5), std::invalid_argument);
}

TEST_CASE("grid lines include the transition planes") {
  Mesh m = build_structured_square(6);
  bool found_third = false, found_two_thirds = false;
  for (int v = 0; v < m.num_vertices(); ++v) {
    if (std::abs(m.vertex(v)[0] - 1.0 / 3.0) < 1e-12) found_third = true;
    if (std::abs(m.vertex(v)[0] - 2.0 / 3.0) < 1e-12) found_two_thirds = true;
  }
  CHECK(found_third);
  CHECK(found_two_thirds);
}

TEST_CASE("cell measures sum to the domain measure") {
  for (int n : {3, 6}) {
    CHECK(build_structured_square(n).total_measure() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(build_structured_cube(n).total_measure() == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("mesh size halves exactly under doubling") {
  CHECK(build_structured_square(6).h() == build_structured_square(3).h() / 2.0);
  CHECK(build_structured_cube(6).h() == build_structured_cube(3).h() / 2.0);
}

TEST_CASE("interior and boundary facet incidence") {
  Mesh m = unit_square_two_triangles();
  CHECK(m.num_facets() == 5);
  int interior = 0;
  for (int f = 0; f < m.num_facets(); ++f)
    if (!m.facet_on_boundary(f)) {
      ++interior;
      const auto& fc = m.facet_cells(f);
      CHECK(fc[0] == 0);
      CHECK(fc[1] == 1);
      // Opposite orientation signs on the shared facet.
      int s0 = 0, s1 = 0;
      for (int i = 0; i < 3; ++i) {
        if (m.cell_facets(0)[i] == f) s0 = m.cell_facet_signs(0)[i];
        if (m.cell_facets(1)[i] == f) s1 = m.cell_facet_signs(1)[i];
      }
      CHECK(s0 == 1);
      CHECK(s1 == -1);
    }
  CHECK(interior == 1);
  CHECK(m.num_boundary_facets() == 4);

  Mesh tet(3, {0, 0, 0, 1, 0, 0, 0, 1, 0, 0, 0, 1}, {0, 1, 2, 3});
  CHECK(tet.num_facets() == 4);
  CHECK(tet.num_boundary_facets() == 4);
}

TEST_CASE("boundary normals point outward") {
  Mesh m = unit_square_two_triangles();
  for (int f = 0; f < m.num_facets(); ++f) {
    if (m.facet_on_boundary(f)) continue;
    // Interior facet of this mesh is the diagonal from (0,0) to (1,1);
    // the normal must point from cell 0 (lower right) to cell 1 (upper left).
    CHECK(m.facet_normal(f)[0] < 0.0);
    CHECK(m.facet_normal(f)[1] > 0.0);
  }
  Mesh cube = build_structured_cube(3);
  for (int f = 0; f < cube.num_facets(); ++f) {
    if (!cube.facet_on_boundary(f)) continue;
    double centroid[3] = {0, 0, 0};
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) centroid[k] += cube.vertex(cube.facet_vertices(f)[j])[k] / 3.0;
    const auto n = cube.facet_normal(f);
    double outward = 0.0;
    for (int k = 0; k < 3; ++k) outward += (centroid[k] - 0.5) * n[k];
    CHECK(outward > 0.0);
  }
}

TEST_CASE("cells with repeated vertices are rejected") {
  CHECK_THROWS(Mesh(2, {0, 0, 1, 0, 1, 1}, {0, 1, 1}));
}

TEST_CASE("barycentric subdivision multiplies cells by dim+1") {
  Mesh m2 = barycentric_subdivide(build_structured_square(3));
  CHECK(m2.num_cells() == 54);
  CHECK(m2.total_measure() == doctest::Approx(1.0).epsilon(1e-14));
  Mesh m3 = barycentric_subdivide(build_structured_cube(3));
  CHECK(m3.num_cells() == 648);
  CHECK(m3.total_measure() == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("barycentric subdivision splits the reference triangle into equal areas") {
  Mesh ref(2, {0, 0, 1, 0, 0, 1}, {0, 1, 2});
  Mesh sub = barycentric_subdivide(ref);
  CHECK(sub.num_cells() == 3);
  for (int c = 0; c < 3; ++c) CHECK(sub.cell_measure(c) == doctest::Approx(1.0 / 6.0).epsilon(1e-14));
}

TEST_CASE("barycentric subdivision keeps parent vertices and mesh size") {
  Mesh parent = build_structured_square(3);
  Mesh child = barycentric_subdivide(parent);
  REQUIRE(child.num_vertices() == parent.num_vertices() + parent.num_cells());
  for (int v = 0; v < parent.num_vertices(); ++v)
    for (int k = 0; k < 2; ++k) CHECK(child.vertex(v)[k] == parent.vertex(v)[k]);
  CHECK(child.h() == doctest::Approx(parent.h()).epsilon(1e-15));
}

TEST_CASE("msh import of a single triangle") {
  std::istringstream in(
      "$MeshFormat\n2.2 0 8\n$EndMeshFormat\n"
      "$Nodes\n3\n1 0 0 0\n2 1 0 0\n3 0 1 0\n$EndNodes\n"
      "$Elements\n1\n1 2 2 0 1 1 2 3\n$EndElements\n");
  Mesh m = import_simplicial(in);
  CHECK(m.dim() == 2);
  CHECK(m.num_cells() == 1);
  CHECK(m.num_vertices() == 3);
  CHECK(m.num_boundary_facets() == 3);
}

TEST_CASE("msh import rejects non-simplex elements") {
  std::istringstream in(
      "$Nodes\n4\n1 0 0 0\n2 1 0 0\n3 1 1 0\n4 0 1 0\n$EndNodes\n"
      "$Elements\n1\n1 3 2 0 1 1 2 3 4\n$EndElements\n");
  CHECK_THROWS_WITH_AS(import_simplicial(in), doctest::Contains("non-simplex element"),
                       std::runtime_error);
}

TEST_CASE("msh import drops unreferenced nodes and skips boundary elements") {
  std::istringstream in(
      "$MeshFormat\n2.2 0 8\n$EndMeshFormat\n"
      "$Nodes\n5\n1 0 0 0\n7 1 0 0\n3 0 1 0\n4 5 5 0\n9 1 1 0\n$EndNodes\n"
      "$Elements\n4\n1 15 1 0 1\n2 1 2 0 1 1 7\n3 2 2 0 1 1 7 3\n4 2 2 0 1 7 9 3\n$EndElements\n");
  Mesh m = import_simplicial(in);
  CHECK(m.num_vertices() == 4);  // node 4 unreferenced
  CHECK(m.num_cells() == 2);
  CHECK(m.num_facets() == 5);
}

TEST_CASE("msh import rejects malformed sections and mixed dimensions") {
  std::istringstream bad_header("$Nodes\n1\n1 0 0 0\n$EndOops\n");
  CHECK_THROWS_AS(import_simplicial(bad_header), std::runtime_error);
  std::istringstream mixed(
      "$Nodes\n5\n1 0 0 0\n2 1 0 0\n3 0 1 0\n4 0 0 1\n5 1 1 0\n$EndNodes\n"
      "$Elements\n2\n1 2 2 0 1 1 2 3\n2 4 2 0 1 1 2 3 4\n$EndElements\n");
  CHECK_THROWS_WITH_AS(import_simplicial(mixed), doctest::Contains("dimension mismatch"),
                       std::runtime_error);
}
