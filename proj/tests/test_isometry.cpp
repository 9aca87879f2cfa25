#include "portalgon/fixtures.hpp"
#include "portalgon/isometry.hpp"

#include "test_util.hpp"

using namespace portalgon;
using pgt::near;

namespace {

Portalgon translated(Portalgon P, Point2 v) {
  for (auto& poly : P.polygons)
    for (Point2& q : poly) q = q + v;
  return P;
}

// The witness must place every corner and carry portals onto portals.
void check_witness(const Portalgon& A, const Portalgon& B,
                   const Congruence& w) {
  REQUIRE(w.congruent);
  const double eps =
      1e-6 * std::max({instance_scale(A), instance_scale(B), 1.0});
  std::vector<char> hit(B.num_polygons(), 0);
  for (int p = 0; p < A.num_polygons(); ++p) {
    int q = w.poly_map[p];
    REQUIRE(q >= 0);
    REQUIRE(!hit[q]);
    hit[q] = 1;
    int deg = A.degree(p);
    REQUIRE(B.degree(q) == deg);
    for (int c = 0; c < deg; ++c) {
      INFO("polygon " << p << " corner " << c);
      CHECK(dist(w.motion[p](A.polygons[p][c]),
                 B.polygons[q][(c + w.shift[p]) % deg]) <= eps);
    }
  }
  SideIndex ib = build_side_index(B);
  auto mapped = [&](SideRef s) {
    int deg = A.degree(s.poly);
    return SideRef{w.poly_map[s.poly], (s.side + w.shift[s.poly]) % deg};
  };
  for (const Portal& pr : A.portals) {
    auto t = partner_side(B, ib, mapped(pr.a));
    REQUIRE(t.has_value());
    CHECK(*t == mapped(pr.b));
  }
}

}  // namespace

TEST_CASE("congruence accepts rigid copies and rejects perturbations",
          "[isometry]") {
  Portalgon A = make_square_torus();
  check_witness(A, translated(A, {17, -3}),
                portalgons_congruent(A, translated(A, {17, -3})));

  Portalgon bad = A;
  bad.polygons[0][1].x += 1e-3;
  CHECK_FALSE(portalgons_congruent(A, bad).congruent);

  // structural quick rejects
  CHECK_FALSE(portalgons_congruent(A, make_tetrahedron()).congruent);
  CHECK_FALSE(portalgons_congruent(A, make_cylinder(1.0)).congruent);
  CHECK_FALSE(portalgons_congruent(A, make_sheared_torus(0.5)).congruent);
}

TEST_CASE("congruence recovers scrambled presentations", "[isometry]") {
  std::vector<Portalgon> instances = {make_tetrahedron(), make_square_torus(),
                                      make_sheared_torus(3.25),
                                      make_stacked_cylinder(3, 0.8)};
  for (size_t i = 0; i < instances.size(); ++i) {
    for (unsigned seed : {1u, 2u, 3u, 4u}) {
      INFO("instance " << i << " seed " << seed);
      Portalgon B = scramble(instances[i], seed);
      check_witness(instances[i], B, portalgons_congruent(instances[i], B));
      // and the relation is symmetric
      CHECK(portalgons_congruent(B, instances[i]).congruent);
    }
  }
}

TEST_CASE("scrambling preserves validity and the surface metrics",
          "[isometry]") {
  Portalgon T = make_tetrahedron();
  Portalgon B = scramble(T, 7);
  ValidationResult vb = validate(B);
  REQUIRE(vb.ok());
  CHECK(vb.report->closed);
  CHECK(near(vb.report->area, validate(T).report->area));
  CHECK(vb.report->singular_vertices.size() == 4);
}

TEST_CASE("surface isometry recognizes equal flat tori", "[isometry]") {
  Portalgon t1 = make_sheared_torus(3.25);
  CHECK(surfaces_isometric(t1, t1));
  CHECK(surfaces_isometric(t1, scramble(t1, 11)));
  // shifting the shear by an integer leaves the lattice unchanged
  CHECK(surfaces_isometric(t1, make_sheared_torus(4.25)));
  // integer shears all reduce to the same 1x2 rectangle torus
  CHECK(surfaces_isometric(make_sheared_torus(2.0), make_sheared_torus(5.0)));
  // genuinely different lattices are told apart
  CHECK_FALSE(surfaces_isometric(t1, make_sheared_torus(3.4)));
  CHECK_FALSE(surfaces_isometric(t1, make_square_torus()));
  CHECK(surfaces_isometric(make_tetrahedron(), scramble(make_tetrahedron(), 5)));
  CHECK_FALSE(surfaces_isometric(make_tetrahedron(), t1));
}

TEST_CASE("flip and dual routes produce congruent tessellations",
          "[isometry]") {
  std::vector<Portalgon> cases = {make_square_torus(), make_tetrahedron(),
                                  make_sheared_torus(3.25),
                                  make_sheared_torus(5.0)};
  for (size_t i = 0; i < cases.size(); ++i) {
    INFO("case " << i);
    DelaunayResult via_wave = compute_delaunay(cases[i]);
    DelaunayResult via_flip = flip_delaunay(cases[i]);
    check_witness(via_wave.D, via_flip.D,
                  portalgons_congruent(via_wave.D, via_flip.D));
  }
}

TEST_CASE("raw and improved pipelines agree on the sheared torus",
          "[isometry]") {
  Portalgon T = make_sheared_torus(7.0);
  DelaunayOptions direct;
  direct.improve_first = false;
  DelaunayResult raw = compute_delaunay(T, direct);
  DelaunayResult improved = compute_delaunay(T);
  CHECK(portalgons_congruent(raw.D, improved.D).congruent);
}
