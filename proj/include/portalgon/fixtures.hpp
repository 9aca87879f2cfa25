// Hand-built instances used by tests, benchmarks and the `gen` CLI command.
#pragma once

#include <cmath>
#include <random>

#include "surgery.hpp"

namespace portalgon {

// Unit square torus: two triangles glued along all three side pairs.
inline Portalgon make_square_torus() {
  Portalgon P;
  P.polygons = {{{0, 0}, {1, 0}, {1, 1}}, {{0, 0}, {1, 1}, {0, 1}}};
  P.portals = {{{0, 0}, {1, 1}}, {{0, 1}, {1, 2}}, {{0, 2}, {1, 0}}};
  ensure_tags(P);
  return P;
}

// Flat torus for the lattice basis (v1, v2); cross(v1, v2) must be positive.
inline Portalgon make_flat_torus(Point2 v1, Point2 v2) {
  PGN_REQUIRE(cross(v1, v2) > 0, "degenerate-lattice",
              "torus basis must be positively oriented");
  Portalgon P;
  P.polygons = {{{0, 0}, v1, v1 + v2}, {{0, 0}, v1 + v2, v2}};
  P.portals = {{{0, 0}, {1, 1}}, {{0, 1}, {1, 2}}, {{0, 2}, {1, 0}}};
  ensure_tags(P);
  return P;
}

// Sheared torus with a parameter: two triangles over the basis
// (1,0), (x-1,2), with the second triangle translated so the layout matches
// a fundamental domain split along the diagonal.
inline Portalgon make_sheared_torus(double x) {
  Portalgon P;
  P.polygons = {{{0, 0}, {1, 0}, {x, 2}}, {{1, 0}, {x + 1, 2}, {x, 2}}};
  P.portals = {{{0, 0}, {1, 1}}, {{0, 1}, {1, 2}}, {{0, 2}, {1, 0}}};
  ensure_tags(P);
  return P;
}

// Regular tetrahedron, unfolded as the classic triangle-midpoint net:
// four unit-ish faces, six portals, four singular vertices of cone angle pi.
inline Portalgon make_tetrahedron() {
  const double s3 = std::sqrt(3.0);
  Point2 p0{0, 0}, p1{2, 0}, p2{1, s3};
  Point2 m01{1, 0}, m12{1.5, s3 / 2}, m02{0.5, s3 / 2};
  Portalgon P;
  P.polygons = {{m01, m12, m02},   // middle face
                {p0, m01, m02},
                {m01, p1, m12},
                {m02, m12, p2}};
  P.portals = {{{0, 0}, {2, 2}}, {{0, 1}, {3, 0}}, {{0, 2}, {1, 1}},
               {{1, 0}, {2, 0}}, {{2, 1}, {3, 1}}, {{3, 2}, {1, 2}}};
  ensure_tags(P);
  return P;
}

// Flat cylinder (annulus) of circumference 1 and height h: two triangles,
// left and right sides glued, bottom and top boundary.
inline Portalgon make_cylinder(double h) {
  PGN_REQUIRE(h > 0, "schema-error", "cylinder height must be positive");
  Portalgon P;
  P.polygons = {{{0, 0}, {1, 0}, {1, h}}, {{0, 0}, {1, h}, {0, h}}};
  P.portals = {{{0, 1}, {1, 2}}, {{0, 2}, {1, 0}}};
  ensure_tags(P);
  return P;
}

// Cylinder whose seam gluing shears by x: the top circle sits offset by x
// relative to the bottom one. x = 0 recovers make_cylinder.
inline Portalgon make_sheared_cylinder(double x, double h) {
  PGN_REQUIRE(h > 0, "schema-error", "cylinder height must be positive");
  Portalgon P;
  P.polygons = {{{0, 0}, {1, 0}, {1 + x, h}}, {{0, 0}, {1 + x, h}, {x, h}}};
  P.portals = {{{0, 1}, {1, 2}}, {{0, 2}, {1, 0}}};
  ensure_tags(P);
  return P;
}

// Annular sector between radii r0 < r1 spanning angle phi, with the two
// radial cuts glued: an annulus whose gluing is a genuine rotation. Split
// along one diagonal so the result is a biface.
inline Portalgon make_annulus_sector(double r0, double r1, double phi) {
  PGN_REQUIRE(0 < r0 && r0 < r1 && 0 < phi && phi < kPi, "schema-error",
              "need 0 < r0 < r1 and 0 < phi < pi");
  Point2 a{r0, 0}, b{r1, 0};
  Point2 c{r1 * std::cos(phi), r1 * std::sin(phi)};
  Point2 d{r0 * std::cos(phi), r0 * std::sin(phi)};
  Portalgon P;
  P.polygons = {{a, b, c, d}};
  P.portals = {{{0, 0}, {0, 2}}};
  ensure_tags(P);
  insert_diagonal(P, 0, 0, 2);
  return P;
}

// The same surface in a shuffled presentation: polygon ids permuted, corner
// labels rotated, and every polygon moved by a seeded rigid motion. Raw
// engine output is used for the draws so runs reproduce across platforms.
inline Portalgon scramble(const Portalgon& P, unsigned seed) {
  std::mt19937 rng(seed);
  auto unit = [&] { return rng() * (1.0 / 4294967296.0); };
  const int n = P.num_polygons();
  std::vector<int> perm(n);
  for (int i = 0; i < n; ++i) perm[i] = i;
  for (int i = n - 1; i > 0; --i)
    std::swap(perm[i], perm[rng() % (i + 1)]);

  Portalgon out;
  out.polygons.resize(n);
  if (!P.side_tags.empty()) out.side_tags.resize(n);
  std::vector<int> rot(n);
  for (int p = 0; p < n; ++p) {
    int deg = P.degree(p);
    rot[p] = static_cast<int>(rng() % deg);
    double th = 2 * kPi * unit();
    RigidMotion m;
    m.c = std::cos(th);
    m.s = std::sin(th);
    m.t = {10 * unit() - 5, 10 * unit() - 5};
    auto& poly = out.polygons[perm[p]];
    poly.resize(deg);
    for (int c = 0; c < deg; ++c)
      poly[c] = m(P.polygons[p][(c + rot[p]) % deg]);
    if (!P.side_tags.empty()) {
      auto& tags = out.side_tags[perm[p]];
      tags.resize(deg);
      for (int c = 0; c < deg; ++c)
        tags[c] = P.side_tags[p][(c + rot[p]) % deg];
    }
  }
  auto remap = [&](SideRef s) {
    int deg = P.degree(s.poly);
    return SideRef{perm[s.poly], (s.side - rot[s.poly] + deg) % deg};
  };
  for (const Portal& pr : P.portals)
    out.portals.push_back({remap(pr.a), remap(pr.b)});
  return out;
}

// n cylinder layers of circumference 1 and height h each, stacked top to
// bottom. Every junction circle is a single flat vertex with a loop edge.
inline Portalgon make_stacked_cylinder(int layers, double h) {
  PGN_REQUIRE(layers >= 1 && h > 0, "schema-error",
              "need at least one layer of positive height");
  Portalgon P;
  for (int i = 0; i < layers; ++i) {
    int t = 2 * i, u = 2 * i + 1;
    P.polygons.push_back({{0, 0}, {1, 0}, {1, h}});
    P.polygons.push_back({{0, 0}, {1, h}, {0, h}});
    P.portals.push_back({{t, 1}, {u, 2}});
    P.portals.push_back({{t, 2}, {u, 0}});
    if (i > 0) P.portals.push_back({{u - 2, 1}, {t, 0}});
  }
  ensure_tags(P);
  return P;
}

// Stacked cylinder closed into a torus by gluing the top circle back onto
// the bottom one. `layers` loop vertices, all flat.
inline Portalgon make_closed_stack(int layers, double h) {
  Portalgon P = make_stacked_cylinder(layers, h);
  P.portals.push_back({{2 * layers - 1, 1}, {0, 0}});
  ensure_tags(P);
  return P;
}

// Stacked cylinder whose two end circles are split in half, so they carry
// two boundary edges and two vertices each: the end layers are no longer
// tubes while the middle of the stack still is.
inline Portalgon make_split_end_stack(int layers, double h) {
  Portalgon P = make_stacked_cylinder(layers, h);
  auto split_boundary_side = [&P](int poly, int side) {
    auto& ring = P.polygons[poly];
    int n = static_cast<int>(ring.size());
    Point2 mid = (ring[side] + ring[(side + 1) % n]) / 2.0;
    ring.insert(ring.begin() + side + 1, mid);
    P.side_tags[poly].insert(P.side_tags[poly].begin() + side + 1,
                             P.side_tags[poly][side]);
    for (Portal& pr : P.portals) {
      if (pr.a.poly == poly && pr.a.side > side) pr.a.side++;
      if (pr.b.poly == poly && pr.b.side > side) pr.b.side++;
    }
  };
  split_boundary_side(0, 0);                  // bottom circle
  split_boundary_side(2 * layers - 1, 1);     // top circle
  triangulate_all(P);
  return P;
}

// A seeded flat torus with a moderately skewed lattice basis. Raw engine
// output keeps the draw reproducible across platforms.
inline Portalgon make_random_flat_torus(unsigned seed) {
  std::mt19937 rng(seed);
  auto unit = [&] { return rng() * (1.0 / 4294967296.0); };
  double a = 0.5 + 1.5 * unit();
  double b = 4.0 * unit() - 2.0;
  double c = 0.4 + 1.6 * unit();
  return make_flat_torus({a, 0}, {b * a, c});
}

namespace detail {

struct V3 {
  double x = 0, y = 0, z = 0;
};
inline V3 operator-(V3 a, V3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
inline double dot3(V3 a, V3 b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline V3 cross3(V3 a, V3 b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z,
          a.x * b.y - a.y * b.x};
}
inline double norm3(V3 a) { return std::sqrt(dot3(a, a)); }

// Incremental convex hull of points in general position. Returns faces as
// corner triples, consistently oriented with outward normals.
inline std::vector<std::array<int, 3>> convex_hull3(
    const std::vector<V3>& pts) {
  const int n = static_cast<int>(pts.size());
  PGN_REQUIRE(n >= 4, "schema-error", "hull needs at least four points");

  // A non-degenerate starting tetrahedron.
  int i0 = 0, i1 = -1, i2 = -1, i3 = -1;
  for (int i = 1; i < n && i1 < 0; ++i)
    if (norm3(pts[i] - pts[i0]) > 1e-9) i1 = i;
  for (int i = 1; i < n && i2 < 0; ++i)
    if (i != i1 && norm3(cross3(pts[i1] - pts[i0], pts[i] - pts[i0])) > 1e-9)
      i2 = i;
  PGN_REQUIRE(i1 >= 0 && i2 >= 0, "degenerate-lattice",
              "hull points are collinear");
  V3 nrm = cross3(pts[i1] - pts[i0], pts[i2] - pts[i0]);
  for (int i = 1; i < n && i3 < 0; ++i)
    if (i != i1 && i != i2 && std::abs(dot3(nrm, pts[i] - pts[i0])) > 1e-9)
      i3 = i;
  PGN_REQUIRE(i3 >= 0, "degenerate-lattice", "hull points are coplanar");
  if (dot3(nrm, pts[i3] - pts[i0]) > 0) std::swap(i1, i2);

  std::vector<std::array<int, 3>> faces = {{i0, i1, i2},
                                           {i0, i2, i3},
                                           {i2, i1, i3},
                                           {i1, i0, i3}};
  auto outward = [&](const std::array<int, 3>& f) {
    return cross3(pts[f[1]] - pts[f[0]], pts[f[2]] - pts[f[0]]);
  };

  std::vector<char> used(n, 0);
  used[i0] = used[i1] = used[i2] = used[i3] = 1;
  for (int p = 0; p < n; ++p) {
    if (used[p]) continue;
    used[p] = 1;
    std::vector<char> vis(faces.size(), 0);
    bool any = false;
    for (size_t f = 0; f < faces.size(); ++f) {
      double side = dot3(outward(faces[f]), pts[p] - pts[faces[f][0]]);
      if (side > 1e-12) vis[f] = 1, any = true;
    }
    if (!any) continue;  // inside the current hull
    // Horizon: directed edges of visible faces whose twin is kept.
    std::set<std::pair<int, int>> kept;
    for (size_t f = 0; f < faces.size(); ++f)
      if (!vis[f])
        for (int e = 0; e < 3; ++e)
          kept.insert({faces[f][e], faces[f][(e + 1) % 3]});
    std::vector<std::array<int, 3>> next;
    for (size_t f = 0; f < faces.size(); ++f)
      if (!vis[f]) next.push_back(faces[f]);
    for (size_t f = 0; f < faces.size(); ++f) {
      if (!vis[f]) continue;
      for (int e = 0; e < 3; ++e) {
        int u = faces[f][e], v = faces[f][(e + 1) % 3];
        if (kept.count({v, u})) next.push_back({u, v, p});
      }
    }
    faces = std::move(next);
  }
  return faces;
}

}  // namespace detail

// The boundary surface of a random convex polyhedron: well-separated
// directions on a sphere, their hull, each face laid out isometrically in
// the plane and shared mesh edges glued by portals. Closed, genus zero,
// and every vertex keeps a macroscopic angle deficit, so all are singular.
inline Portalgon make_random_polyhedron(unsigned seed, int target_faces = 40) {
  PGN_REQUIRE(target_faces >= 4 && target_faces <= 512, "schema-error",
              "face target out of range");
  std::mt19937 rng(seed);
  auto unit = [&] { return rng() * (1.0 / 4294967296.0); };
  auto gauss = [&] {
    double u = std::max(unit(), 1e-12), v = unit();
    return std::sqrt(-2.0 * std::log(u)) * std::cos(2 * kPi * v);
  };

  // n sphere points triangulate into 2n - 4 hull faces. Rejection keeps a
  // minimum pairwise angle so no vertex ends up close to flat.
  const int n = target_faces / 2 + 2;
  const double radius = 0.8 + 0.45 * unit();
  const double cos_min = 1.0 - 2.2 / n;
  std::vector<detail::V3> pts;
  int attempts = 0;
  while (static_cast<int>(pts.size()) < n) {
    PGN_REQUIRE(++attempts < 200000, "sampling-failed",
                "could not place separated sphere points");
    detail::V3 q{gauss(), gauss(), gauss()};
    double r = detail::norm3(q);
    if (r < 1e-6) continue;
    q = {q.x / r, q.y / r, q.z / r};
    bool ok = true;
    for (const detail::V3& o : pts)
      if (detail::dot3(q, o) > cos_min) ok = false;
    if (ok) pts.push_back(q);
  }
  for (detail::V3& q : pts) q = {q.x * radius, q.y * radius, q.z * radius};

  auto faces = detail::convex_hull3(pts);

  Portalgon P;
  std::map<std::pair<int, int>, SideRef> by_edge;
  for (size_t f = 0; f < faces.size(); ++f) {
    auto [a, b, c] = faces[f];
    detail::V3 ab = pts[b] - pts[a], ac = pts[c] - pts[a];
    double L = detail::norm3(ab);
    P.polygons.push_back({{0, 0},
                          {L, 0},
                          {detail::dot3(ab, ac) / L,
                           detail::norm3(detail::cross3(ab, ac)) / L}});
    int corners[3] = {a, b, c};
    for (int e = 0; e < 3; ++e)
      by_edge[{corners[e], corners[(e + 1) % 3]}] = {static_cast<int>(f), e};
  }
  for (const auto& [edge, s] : by_edge) {
    if (edge.first > edge.second) continue;
    auto twin = by_edge.find({edge.second, edge.first});
    PGN_REQUIRE(twin != by_edge.end(), "bad-topology",
                "hull surface is not closed");
    P.portals.push_back({s, twin->second});
  }
  return P;
}

}  // namespace portalgon
