#include "portalgon/diagnostics.hpp"

#include "portalgon/fixtures.hpp"
#include "test_util.hpp"

using namespace portalgon;
using pgt::near;

TEST_CASE("lattice reduction: square and sheared bases", "[diagnostics]") {
  TorusLattice sq = reduce_torus_lattice({1, 0}, {0, 1});
  CHECK(sq.rectangular);
  CHECK(near(norm(sq.b1), 1.0));
  CHECK(near(norm(sq.b2), 1.0));
  CHECK(near(cross(sq.b1, sq.b2), 1.0));
  CHECK(sq.delaunay.num_polygons() == 1);
  CHECK(sq.delaunay.portals.size() == 2);
  REQUIRE(validate(sq.delaunay).ok());
  CHECK(validate(sq.delaunay).report->genus == 1);

  // basis of the sheared torus with x = 3.25: reduces to {(0.25,2), (1,0)}
  TorusLattice tx = reduce_torus_lattice({1, 0}, {2.25, 2});
  CHECK(!tx.rectangular);
  CHECK(pgt::near(tx.b1, {0.25, 2}));
  CHECK(pgt::near(tx.b2, {-1, 0}));
  CHECK(tx.delaunay.num_polygons() == 2);
  REQUIRE(validate(tx.delaunay).ok());
  CHECK(validate(tx.delaunay).report->genus == 1);
  CHECK(near(validate(tx.delaunay).report->area, 2.0));

  CHECK_THROWS_AS(reduce_torus_lattice({1, 0}, {2, 1e-13}), Error);
}

TEST_CASE("lattice reduction properties on random bases", "[diagnostics]") {
  for (int it = 0; it < 200; ++it) {
    Point2 v1 = pgt::random_point(-5, 5), v2 = pgt::random_point(-5, 5);
    if (std::abs(cross(v1, v2)) < 1e-3) continue;
    TorusLattice L = reduce_torus_lattice(v1, v2);
    CHECK(cross(L.b1, L.b2) > 0);
    CHECK(dot(L.b1, L.b2) <= 1e-9 * norm(L.b1) * norm(L.b2));
    // same lattice: change of basis matrix is integer with determinant +-1
    double det = cross(v1, v2);
    double a = cross(L.b1, v2) / det, b = cross(v1, L.b1) / det;
    double c = cross(L.b2, v2) / det, d = cross(v1, L.b2) / det;
    for (double x : {a, b, c, d}) CHECK(near(x, std::round(x), 1e-6));
    CHECK(near(std::abs(a * d - b * c), 1.0, 1e-6));
    // the shorter reduced vector attains the lattice minimum over a window
    double m = std::min(norm(L.b1), norm(L.b2));
    for (int i = -4; i <= 4; ++i)
      for (int j = -4; j <= 4; ++j) {
        if (i == 0 && j == 0) continue;
        CHECK(norm(v1 * i + v2 * j) >= m - 1e-9);
      }
    // invariance under a unimodular change of the input basis
    TorusLattice L2 = reduce_torus_lattice(v1 + v2 * 3.0, v2);
    CHECK(pgt::near(L2.b1, L.b1, 1e-9));
    CHECK(pgt::near(L2.b2, L.b2, 1e-9));
  }
}

TEST_CASE("refined path in a single polygon is the straight segment",
          "[diagnostics]") {
  Portalgon P;
  P.polygons = {{{0, 0}, {1, 0}, {1, 1}, {0, 1}}};
  SurfacePath path =
      refined_shortest_path(P, {0, {0.25, 0.25}}, {0, {0.75, 0.75}}, 4);
  REQUIRE(path.found);
  CHECK(near(path.length, std::sqrt(0.5)));
  CHECK(path.segments.size() == 1);
  CHECK(path.junctions.empty());
}

TEST_CASE("refined path bends around a reflex corner", "[diagnostics]") {
  Portalgon P;
  P.polygons = {{{0, 0}, {2, 0}, {2, 1}, {1, 1}, {1, 2}, {0, 2}}};
  SurfacePath path =
      refined_shortest_path(P, {0, {0.25, 1.75}}, {0, {1.75, 0.75}}, 6);
  REQUIRE(path.found);
  double expect = dist({0.25, 1.75}, {1, 1}) + dist({1, 1}, {1.75, 0.75});
  CHECK(near(path.length, expect, 1e-9));
  REQUIRE(path.segments.size() == 2);
  REQUIRE(path.junctions.size() == 1);
  CHECK(path.junctions[0].vertex >= 0);
}

TEST_CASE("refined path wraps around the cylinder through the portal",
          "[diagnostics]") {
  Portalgon P = make_cylinder(1.0);
  // k = 9 puts a steiner point exactly at the middle of the glued side
  SurfacePath path =
      refined_shortest_path(P, {0, {0.9, 0.5}}, {1, {0.1, 0.5}}, 9);
  REQUIRE(path.found);
  CHECK(near(path.length, 0.2, 1e-12));
  REQUIRE(path.segments.size() == 2);
  REQUIRE(path.junctions.size() == 1);
  Skeleton S = build_skeleton(P);
  // the junction is a crossing of the left-right portal (portal 0)
  int seam_edge = S.edge_of[0][1];
  CHECK(path.junctions[0].edge == seam_edge);
  CHECK(crossing_count(path, seam_edge) == 1);
}

TEST_CASE("refined path approximates the flat torus metric", "[diagnostics]") {
  Portalgon P = make_square_torus();
  Point2 a{0.8, 0.2}, b{0.2, 0.8};
  SurfacePath path = refined_shortest_path(P, {0, a}, {1, b}, 24);
  REQUIRE(path.found);
  double truth = std::numeric_limits<double>::infinity();
  for (int i = -2; i <= 2; ++i)
    for (int j = -2; j <= 2; ++j)
      truth = std::min(truth, dist(a, b + Point2{double(i), double(j)}));
  CHECK(path.length >= truth - 1e-12);
  CHECK(path.length <= truth * 1.05);
}

TEST_CASE("empirical happiness of the square torus is small", "[diagnostics]") {
  Portalgon P = make_square_torus();
  HappinessSample h = empirical_happiness(P, 30, 12, 777);
  CHECK(h.paths == 30);
  CHECK(h.max_crossings >= 1);
  CHECK(h.max_crossings <= 2);
}
