#include "portalgon/surgery.hpp"

#include "portalgon/fixtures.hpp"
#include "test_util.hpp"

using namespace portalgon;
using pgt::near;

TEST_CASE("splitting a portal introduces one flat degree-2 vertex",
          "[surgery]") {
  Portalgon P = make_square_torus();
  SideMap map = split_portal_edges(P, {0});

  CHECK(P.degree(0) == 4);
  CHECK(P.degree(1) == 4);
  CHECK(P.portals.size() == 4);
  CHECK(map(SideRef{0, 0}) == SideRef{0, 0});
  CHECK(map(SideRef{0, 1}) == SideRef{0, 2});
  CHECK(map(SideRef{1, 1}) == SideRef{1, 1});
  CHECK(map(SideRef{1, 2}) == SideRef{1, 3});
  CHECK(pgt::near(P.polygons[0][1], {0.5, 0}));
  CHECK(pgt::near(P.polygons[1][2], {0.5, 1}));

  ValidationResult vr = validate(P);
  REQUIRE(vr.ok());
  CHECK(near(vr.report->area, 1.0));
  CHECK(vr.report->n_vertices == 2);
  CHECK(vr.report->genus == 1);
  CHECK(vr.report->flat);

  Skeleton S = build_skeleton(P);
  int mid = S.vertex_of[0][1];
  CHECK(near(S.vertex_angle[mid], 2 * kPi));
  CHECK(S.vertex_degree[mid] == 2);
}

TEST_CASE("splitting all portals of the torus at once", "[surgery]") {
  Portalgon P = make_square_torus();
  split_portal_edges(P, {0, 1, 2});
  CHECK(P.degree(0) == 6);
  CHECK(P.degree(1) == 6);
  CHECK(P.portals.size() == 6);
  ValidationResult vr = validate(P);
  REQUIRE(vr.ok());
  CHECK(vr.report->n_vertices == 4);
  CHECK(vr.report->genus == 1);
  CHECK(vr.report->flat);
  CHECK(near(vr.report->area, 1.0));
}

TEST_CASE("insert_diagonal splits one face and glues it back", "[surgery]") {
  Portalgon P;
  P.polygons = {{{0, 0}, {2, 0}, {2, 2}, {0, 2}}};
  SplitResult r = insert_diagonal(P, 0, 0, 2);
  CHECK(r.poly_a == 0);
  CHECK(r.poly_b == 1);
  CHECK(P.num_polygons() == 2);
  CHECK(P.degree(0) == 3);
  CHECK(P.degree(1) == 3);
  REQUIRE(P.portals.size() == 1);
  // the two sides of the new portal are the same segment, opposite directions
  auto [a, b] = side_points(P, P.portals[0].a);
  auto [c, d] = side_points(P, P.portals[0].b);
  CHECK(pgt::near(a, d));
  CHECK(pgt::near(b, c));
  CHECK(near(polygon_area(P.polygons[0]) + polygon_area(P.polygons[1]), 4.0));
  ValidationResult vr = validate(P);
  REQUIRE(vr.ok());
  CHECK(vr.report->euler == 1);
  CHECK(vr.report->boundary_component_count == 1);

  // side map: old sides 0,1 stay on poly_a, old 2,3 moved to poly_b
  CHECK(r.map(SideRef{0, 0}) == SideRef{0, 0});
  CHECK(r.map(SideRef{0, 1}) == SideRef{0, 1});
  CHECK(r.map(SideRef{0, 2}) == SideRef{1, 0});
  CHECK(r.map(SideRef{0, 3}) == SideRef{1, 1});
}

TEST_CASE("shortest_diagonal prefers short and lexicographic", "[surgery]") {
  Portalgon P;
  P.polygons = {{{0, 0}, {2, 0}, {2, 1}, {1, 1}, {1, 2}, {0, 2}}};
  auto [i, j] = shortest_diagonal(P, 0);
  CHECK(i == 0);
  CHECK(j == 3);
  Portalgon T;
  T.polygons = {{{0, 0}, {1, 0}, {0, 1}}};
  CHECK_THROWS_AS(shortest_diagonal(T, 0), Error);
}

TEST_CASE("triangulate_polygon keeps the surface intact", "[surgery]") {
  Portalgon P;
  P.polygons = {{{0, 0}, {2, 0}, {2, 1}, {1, 1}, {1, 2}, {0, 2}}};
  ensure_tags(P);
  P.side_tags[0] = {7, 8, 9, 10, 11, 12};  // tags must ride through
  SideMap map = triangulate_polygon(P, 0);
  CHECK(P.num_polygons() == 4);
  for (int p = 0; p < P.num_polygons(); ++p) CHECK(P.degree(p) == 3);
  double area = 0;
  for (const auto& poly : P.polygons) area += polygon_area(poly);
  CHECK(near(area, 3.0));
  ValidationResult vr = validate(P);
  REQUIRE(vr.ok());
  CHECK(vr.report->n_vertices == 6);  // no new vertices
  CHECK(vr.report->euler == 1);
  for (int s = 0; s < 6; ++s) {
    SideRef ns = map(SideRef{0, s});
    REQUIRE(ns.poly >= 0);
    CHECK(P.side_tags[ns.poly][ns.side] == 7 + s);
    // mapped sides carry the same geometry
    auto [a, b] = side_points(P, ns);
    std::vector<Point2> orig{{0, 0}, {2, 0}, {2, 1}, {1, 1}, {1, 2}, {0, 2}};
    CHECK(pgt::near(a, orig[s]));
    CHECK(pgt::near(b, orig[(s + 1) % 6]));
  }
}

TEST_CASE("triangulate_all on a mixed instance", "[surgery]") {
  Portalgon P = make_square_torus();
  split_portal_edges(P, {0, 1, 2});  // two hexagons
  triangulate_all(P);
  ValidationResult vr = validate(P);
  REQUIRE(vr.ok());
  CHECK(vr.report->all_triangles);
  CHECK(vr.report->genus == 1);
  CHECK(near(vr.report->area, 1.0));
  CHECK(vr.report->n_vertices == 4);
}

TEST_CASE("delete_flat_vertex undoes a split on the torus", "[surgery]") {
  Portalgon P = make_square_torus();
  split_portal_edges(P, {0});
  Skeleton S = build_skeleton(P);
  int mid = S.vertex_of[0][1];

  DeleteVertexResult r = delete_flat_vertex(P, mid);
  CHECK(r.poly_map == std::vector<int>{-1, -1});
  CHECK(r.merged_poly == 0);
  REQUIRE(P.num_polygons() == 1);
  CHECK(P.degree(0) == 4);
  CHECK(P.portals.size() == 2);

  ValidationResult vr = validate(P);
  REQUIRE(vr.ok());
  CHECK(vr.report->n_vertices == 1);
  CHECK(vr.report->genus == 1);
  CHECK(vr.report->closed);
  CHECK(vr.report->flat);
  CHECK(near(vr.report->area, 1.0));
}

TEST_CASE("delete_flat_vertex rejects unsuitable vertices", "[surgery]") {
  auto code_of = [](auto&& fn) -> std::string {
    try {
      fn();
    } catch (const Error& e) {
      return e.code();
    }
    return "";
  };

  Portalgon cyl = make_cylinder(1.0);
  Skeleton Sc = build_skeleton(cyl);
  CHECK(code_of([&] { delete_flat_vertex(cyl, Sc.vertex_of[0][0]); }) ==
        "vertex-not-interior");

  Portalgon tet = make_tetrahedron();
  CHECK(code_of([&] { delete_flat_vertex(tet, 0); }) == "vertex-singular");

  // the square torus vertex is flat and interior, but every incident edge
  // is a loop: the vertex is strong, its star is not an embedded disk
  Portalgon tor = make_square_torus();
  CHECK(code_of([&] { delete_flat_vertex(tor, 0); }) == "vertex-not-weak");
}

TEST_CASE("cut_along portals: annulus, disk, separate pieces", "[surgery]") {
  Portalgon P = make_square_torus();

  // cutting one essential loop leaves a connected annulus
  CutResult r1 = cut_along(P, {2});
  REQUIRE(r1.components.size() == 1);
  REQUIRE(r1.seams.size() == 1);
  CHECK(r1.seams[0].comp_a == 0);
  CHECK(r1.seams[0].comp_b == 0);
  {
    ValidationResult vr = validate(r1.components[0]);
    REQUIRE(vr.ok());
    CHECK(vr.report->euler == 0);
    CHECK(vr.report->boundary_component_count == 2);
    CHECK(vr.report->genus == 0);
  }

  // cutting two loops leaves a disk
  CutResult r2 = cut_along(P, {0, 2});
  REQUIRE(r2.components.size() == 1);
  {
    ValidationResult vr = validate(r2.components[0]);
    REQUIRE(vr.ok());
    CHECK(vr.report->euler == 1);
    CHECK(vr.report->boundary_component_count == 1);
  }

  // cutting everything separates the two triangles
  CutResult r3 = cut_along(P, {0, 1, 2});
  REQUIRE(r3.components.size() == 2);
  CHECK(r3.poly_loc[0] == std::pair<int, int>{0, 0});
  CHECK(r3.poly_loc[1] == std::pair<int, int>{1, 0});
  for (const auto& C : r3.components) {
    CHECK(C.num_polygons() == 1);
    CHECK(C.portals.empty());
  }
}

TEST_CASE("cut_along preserves side tags", "[surgery]") {
  Portalgon P = make_square_torus();
  ensure_tags(P);
  P.side_tags[0][1] = 42;
  CutResult r = cut_along(P, {1});
  REQUIRE(r.components.size() == 1);
  const Portalgon& C = r.components[0];
  CHECK(C.side_tags[0][1] == 42);
}
