#include "portalgon/delaunay.hpp"
#include "portalgon/fixtures.hpp"

#include <functional>

#include "test_util.hpp"

using namespace portalgon;
using pgt::near;

namespace {

std::string code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return "";
}

std::vector<double> sorted_side_lengths(const Portalgon& P) {
  std::vector<double> out;
  for (int p = 0; p < P.num_polygons(); ++p)
    for (int s = 0; s < P.degree(p); ++s) out.push_back(side_length(P, {p, s}));
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<double> sorted_radii(const DelaunayResult& r) {
  std::vector<double> out = r.face_radius;
  std::sort(out.begin(), out.end());
  return out;
}

void expect_close(const std::vector<double>& got,
                  const std::vector<double>& want, double eps) {
  REQUIRE(got.size() == want.size());
  for (size_t i = 0; i < got.size(); ++i) {
    INFO("entry " << i);
    CHECK(std::abs(got[i] - want[i]) <= eps);
  }
}

VoronoiOverlay overlay_of(const Portalgon& P, const std::vector<int>& sites) {
  WaveState st = wave_run(P, sites);
  return voronoi_overlay(st);
}

// Closed flat torus made of a single square face; deliberately untriangulated.
Portalgon square_face_torus() {
  Portalgon P;
  P.polygons = {{{0, 0}, {1, 0}, {1, 1}, {0, 1}}};
  P.portals = {{{0, 0}, {0, 2}}, {{0, 1}, {0, 3}}};
  ensure_tags(P);
  return P;
}

// Two skinny triangles glued along their long side: unfolds to a rhombus
// whose opposite angles sum to far more than pi.
Portalgon skinny_pair() {
  Portalgon P;
  P.polygons = {{{0, 0}, {1, 0}, {0.5, 0.05}},
                {{0, 0}, {1, 0}, {0.5, 0.05}}};
  P.portals = {{{0, 0}, {1, 0}}};
  ensure_tags(P);
  return P;
}

// Checks the result invariants every construction route must satisfy.
void check_result_shape(const DelaunayResult& r) {
  ValidationResult vr = validate(r.D);
  REQUIRE(vr.ok());
  CHECK(vr.report->closed);
  Skeleton S = build_skeleton(r.D);
  REQUIRE(static_cast<int>(r.site_of_vertex.size()) == S.n_vertices);
  REQUIRE(r.face_radius.size() == r.D.polygons.size());
  const double eps = 1e-9 * std::max(1.0, instance_scale(r.D));
  for (int f = 0; f < r.D.num_polygons(); ++f) {
    const auto& poly = r.D.polygons[f];
    int m = static_cast<int>(poly.size());
    Point2 cen = circumcenter(poly[0], poly[m / 3], poly[(2 * m) / 3]);
    for (const Point2& q : poly) {
      INFO("face " << f);
      CHECK(std::abs(dist(q, cen) - r.face_radius[f]) <= eps);
    }
  }
}

}  // namespace

TEST_CASE("dual route rebuilds the square torus as a single square",
          "[delaunay]") {
  DelaunayResult r = delaunay_from_voronoi(overlay_of(make_square_torus(), {0}));
  CHECK(r.provenance == "voronoi-dual");
  REQUIRE(r.D.num_polygons() == 1);
  REQUIRE(r.D.degree(0) == 4);
  REQUIRE(r.D.portals.size() == 2);
  expect_close(sorted_side_lengths(r.D), {1, 1, 1, 1}, 1e-9);
  CHECK(near(total_area(r.D), 1.0));
  CHECK(near(r.face_radius[0], std::sqrt(0.5)));
  CHECK(r.site_of_vertex == std::vector<int>{0});
  check_result_shape(r);
}

TEST_CASE("dual route recovers the tetrahedron faces", "[delaunay]") {
  Portalgon T = make_tetrahedron();
  std::vector<int> sites = validate(T).report->singular_vertices;
  REQUIRE(sites.size() == 4);
  DelaunayResult r = delaunay_from_voronoi(overlay_of(T, sites));
  REQUIRE(r.D.num_polygons() == 4);
  for (int f = 0; f < 4; ++f) CHECK(r.D.degree(f) == 3);
  expect_close(sorted_side_lengths(r.D), std::vector<double>(12, 1.0), 1e-9);
  expect_close(sorted_radii(r), std::vector<double>(4, 1 / std::sqrt(3.0)),
               1e-9);
  CHECK(near(total_area(r.D), std::sqrt(3.0)));
  std::vector<int> got = r.site_of_vertex;
  std::sort(got.begin(), got.end());
  CHECK(got == sites);
  check_result_shape(r);
}

TEST_CASE("dual route on a sheared torus matches the lattice Delaunay",
          "[delaunay]") {
  // lattice (1,0), (3.25,2); Delaunay edges 1, |(0.25,2)| and |(0.75,-2)|
  DelaunayResult r =
      delaunay_from_voronoi(overlay_of(make_sheared_torus(3.25), {0}));
  REQUIRE(r.D.num_polygons() == 2);
  double e1 = std::sqrt(4.0625), e2 = std::sqrt(4.5625);
  expect_close(sorted_side_lengths(r.D), {1, 1, e1, e1, e2, e2}, 1e-9);
  CHECK(near(total_area(r.D), 2.0));
  CHECK(build_skeleton(r.D).n_vertices == 1);
  check_result_shape(r);
}

TEST_CASE("pipeline reduces integer shears to the rectangle torus",
          "[delaunay]") {
  for (double x : {2.0, 3.0, 5.0}) {
    INFO("shear " << x);
    DelaunayResult r = compute_delaunay(make_sheared_torus(x));
    REQUIRE(r.D.num_polygons() == 1);
    REQUIRE(r.D.degree(0) == 4);
    expect_close(sorted_side_lengths(r.D), {1, 1, 2, 2}, 1e-6);
    CHECK(std::abs(total_area(r.D) - 2.0) <= 1e-8);
    CHECK(std::abs(r.face_radius[0] - std::sqrt(5.0) / 2) <= 1e-6);
    CHECK(build_skeleton(r.D).n_vertices == 1);
    check_result_shape(r);
  }
}

TEST_CASE("pipeline on the tetrahedron returns the tetrahedron", "[delaunay]") {
  DelaunayResult r = compute_delaunay(make_tetrahedron());
  REQUIRE(r.D.num_polygons() == 4);
  expect_close(sorted_side_lengths(r.D), std::vector<double>(12, 1.0), 1e-6);
  CHECK(std::abs(total_area(r.D) - std::sqrt(3.0)) <= 1e-8);
  Skeleton S = build_skeleton(r.D);
  REQUIRE(S.n_vertices == 4);
  for (int v = 0; v < 4; ++v) CHECK(near(S.vertex_angle[v], kPi));
  check_result_shape(r);
}

TEST_CASE("direct mode skips the representation improvement", "[delaunay]") {
  Portalgon T = make_sheared_torus(3.25);
  DelaunayOptions direct;
  direct.improve_first = false;
  DelaunayResult a = compute_delaunay(T, direct);
  DelaunayResult b = compute_delaunay(T);
  expect_close(sorted_side_lengths(a.D), sorted_side_lengths(b.D), 1e-6);
  expect_close(sorted_radii(a), sorted_radii(b), 1e-6);
  CHECK(a.D.num_polygons() == b.D.num_polygons());

  // custom sites are honoured in direct mode
  DelaunayOptions custom;
  custom.improve_first = false;
  custom.sites = std::vector<int>{0};
  DelaunayResult c = compute_delaunay(T, custom);
  expect_close(sorted_side_lengths(c.D), sorted_side_lengths(a.D), 1e-9);
}

TEST_CASE("local Delaunay test uses the opposite-angle form", "[delaunay]") {
  Portalgon tet = make_tetrahedron();
  Skeleton S = build_skeleton(tet);
  for (int e = 0; e < static_cast<int>(S.edges.size()); ++e)
    CHECK(is_locally_delaunay(tet, S, e));
  CHECK(first_non_delaunay_edge(tet, S) == -1);

  // the square torus diagonal is exactly co-circular and passes by equality
  Portalgon sq = make_square_torus();
  Skeleton Ss = build_skeleton(sq);
  for (int e = 0; e < static_cast<int>(Ss.edges.size()); ++e)
    CHECK(is_locally_delaunay(sq, Ss, e));

  // two 168-degree angles facing each other fail decisively
  Portalgon sk = skinny_pair();
  Skeleton Sk = build_skeleton(sk);
  int interior = -1;
  for (int e = 0; e < static_cast<int>(Sk.edges.size()); ++e)
    if (!Sk.edges[e].boundary) interior = e;
  REQUIRE(interior >= 0);
  CHECK_FALSE(is_locally_delaunay(sk, Sk, interior));
  CHECK(first_non_delaunay_edge(sk, Sk) == interior);

  int boundary = -1;
  for (int e = 0; e < static_cast<int>(Sk.edges.size()); ++e)
    if (Sk.edges[e].boundary) boundary = e;
  CHECK(code_of([&] { is_locally_delaunay(sk, Sk, boundary); }) ==
        "not-interior");
  Portalgon sf = square_face_torus();
  CHECK(code_of([&] { is_locally_delaunay(sf, 0); }) == "not-triangular");
}

TEST_CASE("flip route keeps Delaunay inputs and merges co-circular faces",
          "[delaunay]") {
  DelaunayResult tet = flip_delaunay(make_tetrahedron());
  CHECK(tet.provenance == "flip");
  REQUIRE(tet.D.num_polygons() == 4);
  expect_close(sorted_side_lengths(tet.D), std::vector<double>(12, 1.0), 1e-9);
  check_result_shape(tet);

  // no flips on the square torus, but the co-circular diagonal dissolves
  DelaunayResult sq = flip_delaunay(make_square_torus());
  REQUIRE(sq.D.num_polygons() == 1);
  REQUIRE(sq.D.degree(0) == 4);
  expect_close(sorted_side_lengths(sq.D), {1, 1, 1, 1}, 1e-9);
  CHECK(near(sq.face_radius[0], std::sqrt(0.5)));
  CHECK(build_skeleton(sq.D).n_vertices == 1);
  check_result_shape(sq);
}

TEST_CASE("flip route agrees with the dual route", "[delaunay]") {
  std::vector<Portalgon> cases = {make_square_torus(), make_tetrahedron(),
                                  make_sheared_torus(3.25),
                                  make_sheared_torus(5.0)};
  for (size_t i = 0; i < cases.size(); ++i) {
    INFO("case " << i);
    DelaunayResult via_wave = compute_delaunay(cases[i]);
    DelaunayResult via_flip = flip_delaunay(cases[i]);
    CHECK(via_wave.D.num_polygons() == via_flip.D.num_polygons());
    expect_close(sorted_side_lengths(via_wave.D),
                 sorted_side_lengths(via_flip.D), 1e-6);
    expect_close(sorted_radii(via_wave), sorted_radii(via_flip), 1e-6);
    CHECK(build_skeleton(via_wave.D).n_vertices ==
          build_skeleton(via_flip.D).n_vertices);
    CHECK(std::abs(total_area(via_wave.D) - total_area(via_flip.D)) <=
          1e-8 * total_area(via_wave.D));
  }
}

TEST_CASE("flips respect their budget", "[delaunay]") {
  CHECK(code_of([] { flip_delaunay(make_sheared_torus(40), 3); }) ==
        "flip-budget-exceeded");
  // with the default budget the integer shear flips all the way down to the
  // co-circular rectangle configuration
  DelaunayResult r = flip_delaunay(make_sheared_torus(40));
  REQUIRE(r.D.num_polygons() == 1);
  expect_close(sorted_side_lengths(r.D), {1, 1, 2, 2}, 1e-6);
  check_result_shape(r);
}

TEST_CASE("canonical happy portalgons are small Delaunay triangulations",
          "[delaunay]") {
  Portalgon sq = canonical_happy_portalgon(make_square_torus());
  ValidationResult vs = validate(sq);
  REQUIRE(vs.ok());
  CHECK(vs.report->all_triangles);
  CHECK(sq.num_polygons() == 2);
  CHECK(first_non_delaunay_edge(sq, build_skeleton(sq)) == -1);

  Portalgon tet = canonical_happy_portalgon(make_tetrahedron());
  CHECK(tet.num_polygons() == 4);
  CHECK(first_non_delaunay_edge(tet, build_skeleton(tet)) == -1);

  Portalgon tx = canonical_happy_portalgon(make_sheared_torus(1000.3));
  ValidationResult vt = validate(tx);
  REQUIRE(vt.ok());
  CHECK(vt.report->all_triangles);
  CHECK(tx.num_polygons() <= 2);
  CHECK(max_side_length(tx) <= std::sqrt(5.0) + 1);
  CHECK(first_non_delaunay_edge(tx, build_skeleton(tx)) == -1);
}

TEST_CASE("tessellation conserves area, topology and singularities",
          "[delaunay]") {
  std::vector<Portalgon> cases = {make_tetrahedron(), make_sheared_torus(3.25),
                                  make_sheared_torus(7.0)};
  for (size_t i = 0; i < cases.size(); ++i) {
    INFO("case " << i);
    ValidationResult before = validate(cases[i]);
    DelaunayResult r = compute_delaunay(cases[i]);
    ValidationResult after = validate(r.D);
    REQUIRE(after.ok());
    CHECK(after.report->closed);
    CHECK(after.report->genus == before.report->genus);
    CHECK(std::abs(after.report->area - before.report->area) <=
          1e-8 * before.report->area);
    // singular cone angles survive as a multiset
    Skeleton Sa = build_skeleton(cases[i]);
    Skeleton Sb = build_skeleton(r.D);
    std::vector<double> aa, bb;
    for (int v : before.report->singular_vertices)
      aa.push_back(Sa.vertex_angle[v]);
    for (int v : after.report->singular_vertices)
      bb.push_back(Sb.vertex_angle[v]);
    std::sort(aa.begin(), aa.end());
    std::sort(bb.begin(), bb.end());
    expect_close(bb, aa, 1e-9);
    // the vertex set is exactly the site set
    size_t n_sites = std::max<size_t>(
        before.report->singular_vertices.size(), 1);
    CHECK(static_cast<size_t>(Sb.n_vertices) == n_sites);
  }
}

TEST_CASE("tessellation rejects unusable inputs", "[delaunay]") {
  CHECK(code_of([] { compute_delaunay(make_cylinder(1.0)); }) == "not-closed");
  CHECK(code_of([] { flip_delaunay(make_cylinder(1.0)); }) == "not-closed");
  CHECK(code_of([] { compute_delaunay(square_face_torus()); }) ==
        "not-triangular");
  CHECK(code_of([] {
          DelaunayOptions opt;
          opt.sites = std::vector<int>{0};
          compute_delaunay(make_tetrahedron(), opt);
        }) == "schema-error");
  // invalid portalgons are reported with the validator's own code
  Portalgon broken = make_square_torus();
  broken.polygons[0][1] = {1.5, 0};
  std::string want = validate(broken).issues[0].code;
  CHECK(code_of([&] { compute_delaunay(broken); }) == want);
}

TEST_CASE("a corrupted overlay is reported as a non-disk face", "[delaunay]") {
  VoronoiOverlay ov = overlay_of(make_square_torus(), {0});
  std::vector<int> comp = voronoi_face_of(ov);
  int victim = -1;
  for (int f = 1; f < static_cast<int>(comp.size()); ++f)
    if (comp[f] == comp[0]) victim = f;
  REQUIRE(victim > 0);

  VoronoiOverlay bad_site = ov;
  bad_site.face_site[victim] += 1;
  CHECK(code_of([&] { delaunay_from_voronoi(bad_site); }) ==
        "voronoi-face-not-disk");

  VoronoiOverlay bad_owner = ov;
  bad_owner.face_owner[victim] = bad_owner.face_owner[victim] + Point2{7, 5};
  CHECK(code_of([&] { delaunay_from_voronoi(bad_owner); }) ==
        "voronoi-face-not-disk");
}

TEST_CASE("tessellation serialization carries the annotation", "[delaunay]") {
  DelaunayResult r = compute_delaunay(make_tetrahedron());
  nlohmann::json j = delaunay_to_json(r);
  REQUIRE(j.contains("delaunay"));
  CHECK(j["delaunay"]["provenance"] == "voronoi-dual");
  CHECK(j["delaunay"]["vertex_site"].size() == r.site_of_vertex.size());
  CHECK(j["delaunay"]["face_radius"].size() == r.face_radius.size());
  CHECK(j["polygons"].size() == 4);
}
