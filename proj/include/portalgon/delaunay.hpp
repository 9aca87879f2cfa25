// Intrinsic Delaunay tessellations of closed portalgon surfaces.
//
// The product route dualizes the Voronoi overlay: every honest vertex of the
// cut-locus graph becomes one polygon whose corners are occurrences of the
// neighbouring sites, read off spanning-tree unfoldings of the Voronoi
// faces. Faces come out as convex polygons inscribed in circles; under
// co-circularity they are genuine non-triangles (the square torus yields a
// single square). A classical edge-flip pass over the input triangulation is
// provided as an independent oracle for differential testing.
#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "caps.hpp"
#include "wave.hpp"

namespace portalgon {

struct DelaunayResult {
  // The tessellation as a portalgon. Faces are convex cyclic polygons; the
  // skeleton vertex classes are exactly the sites.
  Portalgon D;
  std::vector<int> site_of_vertex;  // D vertex class → site vertex class
  std::vector<double> face_radius;  // circumradius per face
  std::string provenance;           // "voronoi-dual" or "flip"
};

// Opposite-angle form of the empty-circumdisk test for an interior edge of a
// triangulated portalgon: unfolding the two adjacent triangles along the
// edge, each opposite vertex lies outside or on the other triangle's
// circumcircle iff the two angles opposite the edge sum to at most π.
// Equality within tau_angle counts as passing (co-circular).
inline bool is_locally_delaunay(const Portalgon& P, const Skeleton& S, int e,
                                const Tolerances& tol = {}) {
  PGN_REQUIRE(e >= 0 && e < static_cast<int>(S.edges.size()), "schema-error",
              "edge id out of range");
  const SkelEdge& E = S.edges[e];
  PGN_REQUIRE(!E.boundary, "not-interior",
              "local Delaunay test on a boundary side");
  PGN_REQUIRE(P.degree(E.a.poly) == 3 && P.degree(E.b.poly) == 3,
              "not-triangular", "local Delaunay test needs triangular faces");
  auto opposite = [&](SideRef s) {
    const auto& t = P.polygons[s.poly];
    int k = (s.side + 2) % 3;
    return corner_angle(t[k], t[(k + 1) % 3], t[(k + 2) % 3]);
  };
  return opposite(E.a) + opposite(E.b) <= kPi + tol.tau_angle;
}

inline bool is_locally_delaunay(const Portalgon& P, int e,
                                const Tolerances& tol = {}) {
  return is_locally_delaunay(P, build_skeleton(P, tol), e, tol);
}

// Smallest interior edge failing the test, or -1 when the triangulation is
// locally Delaunay everywhere.
inline int first_non_delaunay_edge(const Portalgon& P, const Skeleton& S,
                                   const Tolerances& tol = {}) {
  for (int e = 0; e < static_cast<int>(S.edges.size()); ++e)
    if (!S.edges[e].boundary && !is_locally_delaunay(P, S, e, tol)) return e;
  return -1;
}

namespace detail {

// Shared tail of both construction routes: validate the assembled
// tessellation and derive the vertex→site map, requiring the skeleton
// classes to biject onto the expected site set.
inline void finish_delaunay(DelaunayResult& res,
                            const std::vector<std::vector<int>>& corner_site,
                            const std::set<int>& expected_sites,
                            const Tolerances& tol) {
  ensure_tags(res.D);
  ValidationResult vr = validate(res.D, tol);
  PGN_REQUIRE(vr.ok(), "invariant-breach",
              "tessellation failed validation: " +
                  (vr.issues.empty() ? std::string("?") : vr.issues[0].code));
  Skeleton SD = build_skeleton(res.D, tol);
  res.site_of_vertex.assign(SD.n_vertices, -1);
  for (int p = 0; p < res.D.num_polygons(); ++p)
    for (int c = 0; c < res.D.degree(p); ++c) {
      int cls = SD.vertex_of[p][c];
      int site = corner_site[p][c];
      if (res.site_of_vertex[cls] < 0)
        res.site_of_vertex[cls] = site;
      else
        PGN_REQUIRE(res.site_of_vertex[cls] == site, "invariant-breach",
                    "tessellation gluing mixes sites at a vertex");
    }
  PGN_REQUIRE(SD.n_vertices == static_cast<int>(expected_sites.size()),
              "invariant-breach",
              "tessellation vertex count differs from the site count");
  std::set<int> got(res.site_of_vertex.begin(), res.site_of_vertex.end());
  PGN_REQUIRE(got == expected_sites, "invariant-breach",
              "tessellation vertices do not biject onto the sites");
}

}  // namespace detail

// Dual of the Voronoi overlay with polygon shapes realized by unfolding.
//
// Each Voronoi face is unfolded along a spanning tree of its unmarked
// adjacencies; within one face every member triangle carries the same site
// occurrence, so the unfolding pins a single point per face (checked — a
// disagreement means the face is not a disk, i.e. an upstream tolerance
// failure). Around every honest cut-locus vertex the wedge fan is developed
// into the plane; the incidences between the vertex and the Voronoi faces
// around it, in ccw order, yield the corners of its dual polygon. Sides are
// matched across the cut-locus chains joining two honest vertices.
inline DelaunayResult delaunay_from_voronoi(const VoronoiOverlay& ov,
                                            const Tolerances& tol = {}) {
  const Portalgon& P = ov.P;
  const Skeleton& S = ov.skel;
  const double scale = std::max(instance_scale(P), 1e-300);
  const double snap = std::max(ov.merge_radius, tol.delta_merge * scale);
  const double eps_fold = 64 * tol.tau_rel * scale;
  PGN_REQUIRE(!ov.voronoi_edges.empty(), "voronoi-face-not-disk",
              "overlay carries no cut locus");

  // Spanning-tree unfolding per Voronoi face, with its site occurrence.
  std::vector<int> comp = voronoi_face_of(ov);
  int n_comp = 0;
  for (int c : comp) n_comp = std::max(n_comp, c + 1);
  std::vector<int> comp_size(n_comp, 0);
  for (int c : comp) comp_size[c]++;

  std::vector<RigidMotion> to_plane(P.num_polygons());
  std::vector<char> seen(P.num_polygons(), 0);
  std::vector<Point2> w_of(n_comp);
  std::vector<int> site_of(n_comp, -1);
  for (int root = 0; root < P.num_polygons(); ++root) {
    if (seen[root]) continue;
    const int c = comp[root];
    const double tol_w = snap * (2.0 * comp_size[c] + 8.0);
    site_of[c] = ov.face_site[root];
    w_of[c] = ov.face_owner[root];
    to_plane[root] = RigidMotion::identity();
    seen[root] = 1;
    std::vector<int> stack{root};
    while (!stack.empty()) {
      int f = stack.back();
      stack.pop_back();
      PGN_REQUIRE(ov.face_site[f] == site_of[c], "voronoi-face-not-disk",
                  "voronoi face spans two sites");
      PGN_REQUIRE(dist(to_plane[f](ov.face_owner[f]), w_of[c]) <= tol_w,
                  "voronoi-face-not-disk",
                  "site occurrences disagree across a voronoi face");
      for (int s = 0; s < P.degree(f); ++s) {
        int e = S.edge_of[f][s];
        if (S.edges[e].boundary || ov.edge_is_voronoi[e]) continue;
        SideRef here{f, s};
        SideRef twin = S.edges[e].a == here ? S.edges[e].b : S.edges[e].a;
        int g = twin.poly;
        RigidMotion m =
            to_plane[f].compose(transit_from_partner(P, S.sides, here, tol));
        if (!seen[g]) {
          to_plane[g] = m;
          seen[g] = 1;
          stack.push_back(g);
        } else {
          // Non-tree edge. The unfolding of a cell is path-dependent when
          // the site is a cone point (the holonomy rotates about it), so
          // placements of the side itself may differ; the site occurrence
          // is the path-independent quantity. A cell wrapping a handle
          // displaces the occurrence and is caught here.
          PGN_REQUIRE(dist(m(ov.face_owner[g]), w_of[c]) <= tol_w,
                      "voronoi-face-not-disk",
                      "voronoi face does not unfold to a single site "
                      "occurrence");
        }
      }
    }
  }

  // Honest vertices of the cut locus (degree ≠ 2 in the marked subgraph).
  std::vector<int> vdeg(S.n_vertices, 0);
  for (int e : ov.voronoi_edges) {
    vdeg[S.edges[e].v0]++;
    vdeg[S.edges[e].v1]++;
  }

  DelaunayResult res;
  res.provenance = "voronoi-dual";
  std::vector<std::vector<int>> corner_site;
  std::map<long long, std::pair<int, int>> side_of_slot;

  for (int v = 0; v < S.n_vertices; ++v) {
    if (vdeg[v] == 0 || vdeg[v] == 2) continue;
    PGN_REQUIRE(vdeg[v] >= 3, "invariant-breach", "dangling voronoi edge");
    VertexFan fan = vertex_fan(P, S, v);
    PGN_REQUIRE(fan.closed && fan.covers_all, "invariant-breach",
                "voronoi vertex fan does not close");
    const int m = static_cast<int>(fan.wedges.size());

    // Develop the fan; record which fan crossings are cut-locus edges.
    std::vector<RigidMotion> M(m);
    std::vector<int> cross_edge(m), cross_end(m);
    std::vector<int> slots;
    for (int k = 0; k < m; ++k) {
      const Wedge& w = fan.wedges[k];
      int n = P.degree(w.poly);
      SideRef sin{w.poly, (w.corner + n - 1) % n};
      int e = S.edge_of[sin.poly][sin.side];
      cross_edge[k] = e;
      cross_end[k] = S.edges[e].a == sin ? 1 : 0;
      if (ov.edge_is_voronoi[e]) slots.push_back(k);
      if (k + 1 < m)
        M[k + 1] = M[k].compose(transit_from_partner(P, S.sides, sin, tol));
    }
    Point2 vstar = P.polygons[fan.wedges[0].poly][fan.wedges[0].corner];
    for (int k = 0; k < m; ++k) {
      const Wedge& w = fan.wedges[k];
      PGN_REQUIRE(dist(M[k](P.polygons[w.poly][w.corner]), vstar) <= eps_fold,
                  "invariant-breach", "vertex fan does not develop rigidly");
    }
    const int d = static_cast<int>(slots.size());
    PGN_REQUIRE(d == vdeg[v], "invariant-breach",
                "fan crossings disagree with the marked degree");

    // One polygon corner per incidence: the site occurrence of the arc of
    // wedges between two consecutive cut-locus crossings.
    std::vector<Point2> poly(d);
    std::vector<int> sites(d);
    for (int i = 0; i < d; ++i) {
      int lo = (slots[(i + d - 1) % d] + 1) % m;
      int len = (slots[i] - lo + m) % m + 1;
      for (int t = 0; t < len; ++t) {
        int k = (lo + t) % m;
        const Wedge& w = fan.wedges[k];
        int c = comp[w.poly];
        Point2 occ = M[k](to_plane[w.poly].inverse()(w_of[c]));
        if (t == 0) {
          poly[i] = occ;
          sites[i] = site_of[c];
        } else {
          PGN_REQUIRE(site_of[c] == sites[i], "voronoi-face-not-disk",
                      "incidence arc spans two sites");
          PGN_REQUIRE(dist(occ, poly[i]) <= snap * (2.0 * comp_size[c] + 8.0),
                      "voronoi-face-not-disk",
                      "site occurrences disagree within an incidence");
        }
      }
    }
    PGN_REQUIRE(polygon_area(poly) > 0, "invariant-breach",
                "dual polygon is not ccw");
    // stored owner lifts drift by up to the snap radius per overlay face
    // they were carried across, so the equidistance guard scales with the
    // largest face component rather than with bare fp tolerance
    int maxsz = 0;
    for (int sz : comp_size) maxsz = std::max(maxsz, sz);
    const double eps_r = snap * (2.0 * maxsz + 8.0) + eps_fold;
    double r = 0;
    for (const Point2& q : poly) r += dist(q, vstar) / d;
    for (const Point2& q : poly)
      PGN_REQUIRE(std::abs(dist(q, vstar) - r) <= eps_r, "invariant-breach",
                  "dual polygon is not inscribed in a circle");

    int pid = res.D.num_polygons();
    for (int i = 0; i < d; ++i) {
      long long key = 2LL * cross_edge[slots[i]] + cross_end[slots[i]];
      side_of_slot[key] = {pid, i};
    }
    res.D.polygons.push_back(std::move(poly));
    corner_site.push_back(std::move(sites));
    res.face_radius.push_back(r);
  }
  PGN_REQUIRE(!res.D.polygons.empty(), "voronoi-face-not-disk",
              "cut locus has no honest vertex");

  // Chains of the cut locus between honest vertices become the portals
  // ("dual edge reversal"). Walk each chain once, from either end slot.
  std::vector<std::vector<std::pair<int, int>>> inc(S.n_vertices);
  for (int e : ov.voronoi_edges) {
    inc[S.edges[e].v0].push_back({e, 0});
    inc[S.edges[e].v1].push_back({e, 1});
  }
  auto vertex_at = [&](int e, int end) {
    return end == 0 ? S.edges[e].v0 : S.edges[e].v1;
  };
  std::vector<char> edge_claimed(S.edges.size(), 0);
  std::set<long long> used;
  for (const auto& [key0, home] : side_of_slot) {
    if (used.count(key0)) continue;
    int cure = static_cast<int>(key0 / 2);
    int curend = 1 - static_cast<int>(key0 % 2);
    edge_claimed[cure] = 1;
    double len = side_length(P, S.edges[cure].a);
    int u = vertex_at(cure, curend);
    int guard = 0;
    while (vdeg[u] == 2) {
      PGN_REQUIRE(++guard <= static_cast<int>(ov.voronoi_edges.size()),
                  "invariant-breach", "cut-locus chain does not terminate");
      std::pair<int, int> arrived{cure, curend};
      const auto& lst = inc[u];
      std::pair<int, int> dep = lst[0] == arrived ? lst[1] : lst[0];
      cure = dep.first;
      curend = 1 - dep.second;
      edge_claimed[cure] = 1;
      len += side_length(P, S.edges[cure].a);
      u = vertex_at(cure, curend);
    }
    long long key1 = 2LL * cure + curend;
    PGN_REQUIRE(key1 != key0 && !used.count(key1), "invariant-breach",
                "cut-locus chain ends mismatch");
    PGN_REQUIRE(len > snap, "invariant-breach",
                "cut-locus chain shorter than the merge radius survived "
                "overlay snapping");
    auto other = side_of_slot.find(key1);
    PGN_REQUIRE(other != side_of_slot.end(), "invariant-breach",
                "cut-locus chain ends away from an honest vertex");
    res.D.portals.push_back({{home.first, home.second},
                             {other->second.first, other->second.second}});
    used.insert(key0);
    used.insert(key1);
  }
  for (int e : ov.voronoi_edges)
    PGN_REQUIRE(edge_claimed[e], "invariant-breach",
                "cut locus has a vertex-free cycle");

  std::set<int> expected(ov.face_site.begin(), ov.face_site.end());
  detail::finish_delaunay(res, corner_site, expected, tol);
  return res;
}

struct DelaunayOptions {
  bool improve_first = true;  // run the happiness reduction before the wave
  // Direct mode only: wave sites as vertex classes of the input skeleton.
  // Default: the singular vertices, or vertex 0 when the surface is flat.
  std::optional<std::vector<int>> sites;
  WaveConfig wave;
};

// End-to-end tessellation of a closed triangular portalgon: improve the
// representation, take the singularities as sites (one arbitrary vertex on a
// flat torus), run the distance wave, overlay, and dualize.
inline DelaunayResult compute_delaunay(const Portalgon& T,
                                       const DelaunayOptions& opt = {},
                                       const Tolerances& tol = {}) {
  ValidationResult vr = validate(T, tol);
  if (!vr.ok()) throw Error(vr.issues[0].code, vr.issues[0].message);
  PGN_REQUIRE(vr.report->closed, "not-closed",
              "the tessellation pipeline expects a closed surface");
  PGN_REQUIRE(vr.report->all_triangles, "not-triangular",
              "the tessellation pipeline expects a triangular portalgon");
  PGN_REQUIRE(!opt.sites || !opt.improve_first, "schema-error",
              "custom sites name input vertex ids; use the direct mode");

  Portalgon W = opt.improve_first ? improve(T, tol) : T;
  std::vector<int> sites;
  if (opt.sites) {
    sites = *opt.sites;
  } else if (opt.improve_first) {
    ValidationResult vw = validate(W, tol);
    PGN_REQUIRE(vw.ok(), "invariant-breach",
                "improve produced an invalid portalgon: " +
                    (vw.issues.empty() ? std::string("?")
                                       : vw.issues[0].code));
    sites = vw.report->singular_vertices;
    if (sites.empty()) sites = {0};  // flat torus: one arbitrary vertex
  } else {
    sites = vr.report->singular_vertices;
    if (sites.empty()) sites = {0};
  }

  WaveState st = wave_run(W, sites, opt.wave, tol);
  VoronoiOverlay ov = voronoi_overlay(st);
  return delaunay_from_voronoi(ov, tol);
}

namespace detail {

// CCW triangle with the prescribed side lengths: corners (0,0), (l01,0) and
// the third solved from the two remaining distances.
inline std::vector<Point2> realize_triangle(double l01, double l12,
                                            double l20) {
  PGN_REQUIRE(l01 > 0 && l12 > 0 && l20 > 0, "degenerate-triangle",
              "triangle realization needs positive side lengths");
  double x = (l01 * l01 + l20 * l20 - l12 * l12) / (2 * l01);
  double y2 = l20 * l20 - x * x;
  PGN_REQUIRE(y2 > 0, "degenerate-triangle",
              "triangle realization is flat");
  return {{0, 0}, {l01, 0}, {x, std::sqrt(y2)}};
}

// Intrinsic flip of interior edge e: unfold the two adjacent triangles into
// a planar quad, replace the diagonal, and re-realize both triangles from
// their side lengths so repeated flips do not accumulate placement drift.
// `cv` carries the original vertex class of every corner through the flip.
inline void flip_edge(Portalgon& P, std::vector<std::vector<int>>& cv,
                      const Skeleton& S, int e, const Tolerances& tol = {}) {
  const SkelEdge& E = S.edges[e];
  int f = E.a.poly, i = E.a.side;
  int g = E.b.poly, j = E.b.side;
  PGN_REQUIRE(f != g, "invariant-breach",
              "flip of an edge glued to its own triangle");
  const auto& F = P.polygons[f];
  const auto& G = P.polygons[g];
  RigidMotion M = transit_from_partner(P, S.sides, E.a, tol);
  Point2 A = F[i], B = F[(i + 1) % 3], C = F[(i + 2) % 3];
  Point2 D = M(G[(j + 2) % 3]);
  // a non-Delaunay edge always spans a strictly convex quad A, D, B, C,
  // so both triangles of the new diagonal are ccw
  PGN_REQUIRE(cross(D - A, C - A) > 0 && cross(B - D, C - D) > 0,
              "invariant-breach", "flip quad is not convex");

  std::map<std::pair<int, int>, SideRef> moved;
  moved[{g, (j + 1) % 3}] = {f, 0};  // A → D
  moved[{f, (i + 2) % 3}] = {f, 2};  // C → A
  moved[{g, (j + 2) % 3}] = {g, 0};  // D → B
  moved[{f, (i + 1) % 3}] = {g, 1};  // B → C
  std::vector<Portal> portals;
  portals.reserve(P.portals.size());
  for (const Portal& pr : P.portals) {
    if ((pr.a == E.a && pr.b == E.b) || (pr.a == E.b && pr.b == E.a))
      continue;
    Portal q = pr;
    if (auto it = moved.find({q.a.poly, q.a.side}); it != moved.end())
      q.a = it->second;
    if (auto it = moved.find({q.b.poly, q.b.side}); it != moved.end())
      q.b = it->second;
    portals.push_back(q);
  }
  portals.push_back({{f, 1}, {g, 2}});  // the new diagonal

  int cA = cv[f][i], cB = cv[f][(i + 1) % 3], cC = cv[f][(i + 2) % 3];
  int cD = cv[g][(j + 2) % 3];
  P.polygons[f] = realize_triangle(dist(A, D), dist(D, C), dist(C, A));
  P.polygons[g] = realize_triangle(dist(D, B), dist(B, C), dist(C, D));
  P.portals = std::move(portals);
  if (!P.side_tags.empty()) {
    P.side_tags[f].assign(3, -1);
    P.side_tags[g].assign(3, -1);
  }
  cv[f] = {cA, cD, cC};
  cv[g] = {cD, cB, cC};
}

// Dissolve the given interior edges, unfolding each glued component into the
// plane and walking its boundary into a single polygon face. Outside portals
// are re-targeted onto the merged faces.
inline DelaunayResult dissolve_and_merge(const Portalgon& P,
                                         const std::vector<std::vector<int>>& cv,
                                         const Skeleton& S,
                                         const std::vector<char>& dissolve,
                                         const Tolerances& tol) {
  const double scale = std::max(instance_scale(P), 1e-300);
  const double eps = 64 * scale * std::max(tol.tau_rel, tol.tau_angle);

  // Unfold across dissolved edges (BFS); non-tree edges must agree.
  std::vector<RigidMotion> mo(P.num_polygons());
  std::vector<char> seen(P.num_polygons(), 0);
  for (int root = 0; root < P.num_polygons(); ++root) {
    if (seen[root]) continue;
    seen[root] = 1;
    std::vector<int> stack{root};
    while (!stack.empty()) {
      int f = stack.back();
      stack.pop_back();
      for (int s = 0; s < P.degree(f); ++s) {
        int e = S.edge_of[f][s];
        if (S.edges[e].boundary || !dissolve[e]) continue;
        SideRef here{f, s};
        SideRef twin = S.edges[e].a == here ? S.edges[e].b : S.edges[e].a;
        RigidMotion m =
            mo[f].compose(transit_from_partner(P, S.sides, here, tol));
        if (!seen[twin.poly]) {
          mo[twin.poly] = m;
          seen[twin.poly] = 1;
          stack.push_back(twin.poly);
        } else {
          auto [a0, a1] = side_points(P, here);
          auto [b0, b1] = side_points(P, twin);
          bool ok = dist(mo[twin.poly](b0), mo[f](a1)) <= eps &&
                    dist(mo[twin.poly](b1), mo[f](a0)) <= eps;
          PGN_REQUIRE(ok, "invariant-breach",
                      "co-circular component does not unfold to a disk");
        }
      }
    }
  }

  // Next surviving side around the merged face: step past the corner,
  // crossing dissolved edges clockwise until one survives.
  auto next_side = [&](SideRef s) {
    Wedge w{s.poly, (s.side + 1) % P.degree(s.poly)};
    int guard = 0;
    while (dissolve[S.edge_of[w.poly][w.corner]]) {
      auto q = partner_side(P, S.sides, {w.poly, w.corner});
      PGN_REQUIRE(q.has_value(), "invariant-breach",
                  "merged face walk crossed a boundary");
      w = {q->poly, (q->side + 1) % P.degree(q->poly)};
      PGN_REQUIRE(++guard <= 2 * static_cast<int>(S.edges.size()),
                  "invariant-breach", "merged face walk is stuck");
    }
    return SideRef{w.poly, w.corner};
  };

  DelaunayResult res;
  res.provenance = "flip";
  std::vector<std::vector<int>> corner_site;
  std::map<std::pair<int, int>, SideRef> new_ref;
  for (int p = 0; p < P.num_polygons(); ++p) {
    for (int s = 0; s < P.degree(p); ++s) {
      if (dissolve[S.edge_of[p][s]] || new_ref.count({p, s})) continue;
      std::vector<Point2> poly;
      std::vector<int> sites;
      SideRef start{p, s}, cur = start;
      int guard = 0;
      do {
        new_ref[{cur.poly, cur.side}] = {
            res.D.num_polygons(), static_cast<int>(poly.size())};
        poly.push_back(mo[cur.poly](P.polygons[cur.poly][cur.side]));
        sites.push_back(cv[cur.poly][cur.side]);
        cur = next_side(cur);
        PGN_REQUIRE(++guard <= 2 * static_cast<int>(S.edges.size()),
                    "invariant-breach", "merged face walk does not close");
      } while (!(cur == start));
      PGN_REQUIRE(poly.size() >= 3, "invariant-breach",
                  "merged face degenerated");
      int m = static_cast<int>(poly.size());
      Point2 cen = circumcenter(poly[0], poly[m / 3], poly[(2 * m) / 3], tol);
      double r = 0;
      for (const Point2& q : poly) r += dist(q, cen) / m;
      for (const Point2& q : poly)
        PGN_REQUIRE(std::abs(dist(q, cen) - r) <= eps, "invariant-breach",
                    "merged face is not cyclic");
      res.D.polygons.push_back(std::move(poly));
      corner_site.push_back(std::move(sites));
      res.face_radius.push_back(r);
    }
  }
  for (const Portal& pr : P.portals) {
    if (dissolve[S.edge_of[pr.a.poly][pr.a.side]]) continue;
    res.D.portals.push_back(
        {new_ref.at({pr.a.poly, pr.a.side}), new_ref.at({pr.b.poly, pr.b.side})});
  }

  std::set<int> expected;
  for (const auto& row : cv) expected.insert(row.begin(), row.end());
  finish_delaunay(res, corner_site, expected, tol);
  return res;
}

}  // namespace detail

// Classical intrinsic flip pass, kept as an oracle: repeatedly flip the
// first non-locally-Delaunay edge until none remains, then merge adjacent
// co-circular triangles into polygon faces. The vertex set of the input is
// the site set; it must contain every singularity or flipping may stall on
// an unflippable edge.
inline DelaunayResult flip_delaunay(const Portalgon& Pin,
                                    long long flip_budget = 1'000'000,
                                    const Tolerances& tol = {}) {
  ValidationResult vr = validate(Pin, tol);
  if (!vr.ok()) throw Error(vr.issues[0].code, vr.issues[0].message);
  PGN_REQUIRE(vr.report->closed, "not-closed",
              "flip tessellation expects a closed surface");
  PGN_REQUIRE(vr.report->all_triangles, "not-triangular",
              "flip tessellation expects a triangular portalgon");

  Portalgon P = Pin;
  ensure_tags(P);
  Skeleton S = build_skeleton(P, tol);
  std::vector<std::vector<int>> cv = S.vertex_of;
  long long flips = 0;
  for (;;) {
    int bad = first_non_delaunay_edge(P, S, tol);
    if (bad < 0) break;
    PGN_REQUIRE(flips < flip_budget, "flip-budget-exceeded",
                "edge flipping exceeded its budget");
    detail::flip_edge(P, cv, S, bad, tol);
    ++flips;
    S = build_skeleton(P, tol);
  }

  std::vector<char> dissolve(S.edges.size(), 0);
  for (int e = 0; e < static_cast<int>(S.edges.size()); ++e) {
    if (S.edges[e].boundary) continue;
    auto opposite = [&](SideRef s) {
      const auto& t = P.polygons[s.poly];
      int k = (s.side + 2) % 3;
      return corner_angle(t[k], t[(k + 1) % 3], t[(k + 2) % 3]);
    };
    double sum = opposite(S.edges[e].a) + opposite(S.edges[e].b);
    if (std::abs(sum - kPi) <= tol.tau_angle) dissolve[e] = 1;
  }
  return detail::dissolve_and_merge(P, cv, S, dissolve, tol);
}

// A triangular portalgon of bounded happiness representing the same
// surface: the tessellation with every non-triangle face cut by shortcuts.
inline Portalgon canonical_happy_portalgon(const Portalgon& T,
                                           const Tolerances& tol = {}) {
  DelaunayResult r = compute_delaunay(T, {}, tol);
  Portalgon D = std::move(r.D);
  triangulate_all(D, tol);
  return D;
}

// Portalgon JSON plus a "delaunay" annotation block.
inline nlohmann::json delaunay_to_json(const DelaunayResult& res) {
  nlohmann::json j = portalgon_to_json(res.D);
  j["delaunay"] = {{"vertex_site", res.site_of_vertex},
                   {"face_radius", res.face_radius},
                   {"provenance", res.provenance}};
  return j;
}

}  // namespace portalgon
