// Local rewrites of a portalgon that keep the underlying metric surface
// unchanged: splitting matched sides at their midpoints, inserting
// diagonals, triangulating faces, merging the star of a flat interior
// vertex into one polygon, and cutting along portals into components.
//
// Each surgery reports how (poly, side) references move, so callers can
// carry bookkeeping (tags ride along inside the Portalgon itself).
#pragma once

#include "skeleton.hpp"

namespace portalgon {

struct SideMap {
  std::vector<std::vector<SideRef>> to;  // [old poly][old side], {-1,-1} = gone

  SideRef operator()(SideRef s) const { return to[s.poly][s.side]; }

  static SideMap identity(const Portalgon& P) {
    SideMap m;
    m.to.resize(P.polygons.size());
    for (int p = 0; p < P.num_polygons(); ++p) {
      m.to[p].resize(P.degree(p));
      for (int s = 0; s < P.degree(p); ++s) m.to[p][s] = {p, s};
    }
    return m;
  }

  // Composition: first this map, then `next`.
  SideMap then(const SideMap& next) const {
    SideMap m = *this;
    for (auto& row : m.to)
      for (auto& s : row)
        if (s.poly >= 0) s = next(s);
    return m;
  }
};

// Split every listed portal at its midpoint, replacing each by the two
// half-side portals. The midpoint becomes a new (flat, degree-2) vertex.
// A split side's map entry points at its first half.
inline SideMap split_portal_edges(Portalgon& P,
                                  const std::vector<int>& portal_ids) {
  ensure_tags(P);
  std::vector<char> is_target(P.portals.size(), 0);
  std::vector<std::vector<std::pair<int, Point2>>> ins(P.num_polygons());
  for (int k : portal_ids) {
    PGN_REQUIRE(k >= 0 && k < static_cast<int>(P.portals.size()),
                "schema-error", "portal id out of range");
    PGN_REQUIRE(!is_target[k], "schema-error",
                "duplicate portal id in split batch");
    is_target[k] = 1;
    for (SideRef s : {P.portals[k].a, P.portals[k].b}) {
      auto [u, v] = side_points(P, s);
      ins[s.poly].push_back({s.side, (u + v) / 2.0});
    }
  }

  SideMap map = SideMap::identity(P);
  for (int p = 0; p < P.num_polygons(); ++p) {
    if (ins[p].empty()) continue;
    auto& list = ins[p];
    std::sort(list.begin(), list.end(),
              [](const auto& a, const auto& b) { return a.first > b.first; });
    for (const auto& [s, m] : list) {
      P.polygons[p].insert(P.polygons[p].begin() + s + 1, m);
      P.side_tags[p].insert(P.side_tags[p].begin() + s + 1,
                            P.side_tags[p][s]);
    }
    std::vector<int> split_sides;
    for (const auto& [s, m] : list) split_sides.push_back(s);
    std::sort(split_sides.begin(), split_sides.end());
    for (size_t s = 0; s < map.to[p].size(); ++s) {
      int shift = static_cast<int>(
          std::lower_bound(split_sides.begin(), split_sides.end(),
                           static_cast<int>(s)) -
          split_sides.begin());
      map.to[p][s] = {p, static_cast<int>(s) + shift};
    }
  }

  std::vector<Portal> next;
  for (size_t k = 0; k < P.portals.size(); ++k) {
    SideRef a = map(P.portals[k].a), b = map(P.portals[k].b);
    if (!is_target[k]) {
      next.push_back({a, b});
      continue;
    }
    // Forward half of a glues to backward half of b and vice versa.
    next.push_back({{a.poly, a.side}, {b.poly, b.side + 1}});
    next.push_back({{a.poly, a.side + 1}, {b.poly, b.side}});
  }
  P.portals = std::move(next);
  return map;
}

struct SplitResult {
  int poly_a = -1, poly_b = -1;  // piece keeping corner i..j / the rest
  int portal = -1;               // the new diagonal portal
  SideMap map;
};

// Cut polygon f along the interior diagonal between corners i and j. The
// piece with corners i..j replaces f, the other piece is appended, and they
// are glued back along the diagonal by a new portal.
inline SplitResult insert_diagonal(Portalgon& P, int f, int i, int j,
                                   const Tolerances& tol = {}) {
  ensure_tags(P);
  int n = P.degree(f);
  if (i > j) std::swap(i, j);
  PGN_REQUIRE(diagonal_inside(P.polygons[f], i, j, tol), "diagonal-outside",
              "diagonal does not lie inside the polygon");

  const std::vector<Point2> poly = P.polygons[f];
  const std::vector<int> tags = P.side_tags[f];

  std::vector<Point2> A, B;
  std::vector<int> tA, tB;
  for (int s = i; s <= j; ++s) A.push_back(poly[s]);
  for (int s = i; s < j; ++s) tA.push_back(tags[s]);
  tA.push_back(-1);  // the diagonal
  for (int s = j; s != i; s = (s + 1) % n) {
    B.push_back(poly[s]);
    tB.push_back(tags[s]);
  }
  B.push_back(poly[i]);
  tB.push_back(-1);  // the diagonal

  SplitResult r;
  r.poly_a = f;
  r.poly_b = P.num_polygons();
  P.polygons[f] = std::move(A);
  P.side_tags[f] = std::move(tA);
  P.polygons.push_back(std::move(B));
  P.side_tags.push_back(std::move(tB));

  r.map = SideMap::identity(P);
  r.map.to[f].assign(n, SideRef{});
  for (int s = 0; s < n; ++s) {
    if (s >= i && s < j)
      r.map.to[f][s] = {r.poly_a, s - i};
    else
      r.map.to[f][s] = {r.poly_b, s >= j ? s - j : s + n - j};
  }
  r.map.to[r.poly_b].resize(P.degree(r.poly_b), SideRef{-1, -1});

  for (Portal& pr : P.portals) {
    if (pr.a.poly == f) pr.a = r.map.to[f][pr.a.side];
    if (pr.b.poly == f) pr.b = r.map.to[f][pr.b.side];
  }
  r.portal = static_cast<int>(P.portals.size());
  P.portals.push_back(
      {{r.poly_a, j - i}, {r.poly_b, P.degree(r.poly_b) - 1}});
  return r;
}

// The shortest interior diagonal of polygon f (ties: lexicographically
// smallest corner pair).
inline std::pair<int, int> shortest_diagonal(const Portalgon& P, int f,
                                             const Tolerances& tol = {}) {
  int n = P.degree(f);
  PGN_REQUIRE(n >= 4, "not-a-polygon", "triangles have no diagonal");
  const auto& poly = P.polygons[f];
  double best = 0;
  std::pair<int, int> pick{-1, -1};
  for (int i = 0; i < n; ++i)
    for (int j = i + 2; j < n; ++j) {
      if (i == 0 && j == n - 1) continue;  // adjacent around the wrap
      if (!diagonal_inside(poly, i, j, tol)) continue;
      double len = dist(poly[i], poly[j]);
      if (pick.first < 0 || len < best) {
        best = len;
        pick = {i, j};
      }
    }
  PGN_REQUIRE(pick.first >= 0, "no-diagonal",
              "no interior diagonal found in polygon");
  return pick;
}

inline SplitResult shortcut_once(Portalgon& P, int f,
                                 const Tolerances& tol = {}) {
  auto [i, j] = shortest_diagonal(P, f, tol);
  return insert_diagonal(P, f, i, j, tol);
}

// Triangulate polygon f by repeated shortest diagonals. Returns the map
// from pre-call sides to final sides.
inline SideMap triangulate_polygon(Portalgon& P, int f,
                                   const Tolerances& tol = {}) {
  SideMap total = SideMap::identity(P);
  std::vector<int> queue{f};
  while (!queue.empty()) {
    int t = queue.back();
    queue.pop_back();
    if (P.degree(t) <= 3) continue;
    SplitResult r = shortcut_once(P, t, tol);
    total = total.then(r.map);
    queue.push_back(r.poly_a);
    queue.push_back(r.poly_b);
  }
  return total;
}

// Triangulate every face.
inline SideMap triangulate_all(Portalgon& P, const Tolerances& tol = {}) {
  SideMap total = SideMap::identity(P);
  int original = P.num_polygons();
  for (int f = 0; f < original; ++f)
    total = total.then(triangulate_polygon(P, f, tol));
  return total;
}

struct DeleteVertexResult {
  std::vector<int> poly_map;  // old poly -> new poly, -1 for removed
  int merged_poly = -1;
};

// Remove a flat interior vertex by developing its star into the plane and
// replacing the star's polygons with the single merged polygon. Requires:
// interior vertex, cone angle 2*pi within tolerance, each incident polygon
// meets the vertex in exactly one corner (no incident loop edge).
inline DeleteVertexResult delete_flat_vertex(Portalgon& P, int v,
                                             const Tolerances& tol = {}) {
  ensure_tags(P);
  Skeleton S = build_skeleton(P, tol);
  PGN_REQUIRE(v >= 0 && v < S.n_vertices, "schema-error",
              "vertex id out of range");
  PGN_REQUIRE(!S.vertex_boundary[v], "vertex-not-interior",
              "cannot delete a boundary vertex");
  for (const SkelEdge& e : S.edges)
    PGN_REQUIRE(!(e.loop() && e.v0 == v), "vertex-not-weak",
                "vertex is incident to a loop edge");
  PGN_REQUIRE(std::abs(S.vertex_angle[v] - 2 * kPi) <= 10 * tol.tau_angle,
              "vertex-singular", "vertex cone angle is not 2*pi");

  VertexFan fan = vertex_fan(P, S, v);
  PGN_REQUIRE(fan.closed && fan.covers_all, "pinched-vertex",
              "vertex star is not a single closed fan");
  std::set<int> fan_polys;
  for (const Wedge& w : fan.wedges) {
    PGN_REQUIRE(fan_polys.insert(w.poly).second, "loop-adjacent",
                "a polygon meets the vertex in more than one corner");
    PGN_REQUIRE(P.degree(w.poly) >= 3, "schema-error", "degenerate polygon");
  }
  for (int p : fan_polys) {
    int count = 0;
    for (int c = 0; c < P.degree(p); ++c)
      if (S.vertex_of[p][c] == v) count++;
    PGN_REQUIRE(count == 1, "loop-adjacent",
                "a polygon meets the vertex in more than one corner");
  }

  // Develop the star into the frame of the first wedge's polygon.
  int d = static_cast<int>(fan.wedges.size());
  std::vector<RigidMotion> M(d);
  M[0] = RigidMotion::identity();
  for (int k = 0; k + 1 < d; ++k) {
    const Wedge& w = fan.wedges[k];
    int n = P.degree(w.poly);
    SideRef incoming{w.poly, (w.corner + n - 1) % n};
    M[k + 1] = M[k].compose(transit_from_partner(P, S.sides, incoming, tol));
  }
  {
    const Wedge& w = fan.wedges[d - 1];
    int n = P.degree(w.poly);
    SideRef incoming{w.poly, (w.corner + n - 1) % n};
    RigidMotion closure =
        M[d - 1].compose(transit_from_partner(P, S.sides, incoming, tol));
    double scale = instance_scale(P);
    Point2 vpos = P.polygons[fan.wedges[0].poly][fan.wedges[0].corner];
    PGN_REQUIRE(std::abs(closure.angle()) <= 10 * tol.tau_angle &&
                    dist(closure(vpos), vpos) <= 1e3 * tol.tau_rel * scale,
                "vertex-fan-drift",
                "vertex star does not close up under development");
  }

  // Merged polygon: each wedge keeps its corners c+1 .. c+m-2 (the chain's
  // final corner coincides with the next wedge's first).
  std::vector<Point2> merged;
  std::vector<int> merged_tags;
  std::vector<std::pair<SideRef, int>> kept;  // old side -> merged side index
  for (int k = 0; k < d; ++k) {
    const Wedge& w = fan.wedges[k];
    int m = P.degree(w.poly);
    PGN_REQUIRE(m >= 3, "schema-error", "degenerate polygon in star");
    for (int t = 1; t <= m - 2; ++t) {
      int c = (w.corner + t) % m;
      kept.push_back({{w.poly, c}, static_cast<int>(merged.size())});
      merged.push_back(M[k](P.polygons[w.poly][c]));
      merged_tags.push_back(P.side_tags[w.poly][c]);
    }
  }
  PGN_REQUIRE(merged.size() >= 3 && polygon_area(merged) > 0 &&
                  polygon_simple(merged, tol),
              "vertex-fan-drift", "merged star polygon is not simple ccw");

  DeleteVertexResult res;
  res.poly_map.assign(P.num_polygons(), -1);
  std::vector<std::vector<Point2>> polys;
  std::vector<std::vector<int>> tags;
  for (int p = 0; p < P.num_polygons(); ++p) {
    if (fan_polys.count(p)) continue;
    res.poly_map[p] = static_cast<int>(polys.size());
    polys.push_back(std::move(P.polygons[p]));
    tags.push_back(std::move(P.side_tags[p]));
  }
  res.merged_poly = static_cast<int>(polys.size());
  polys.push_back(std::move(merged));
  tags.push_back(std::move(merged_tags));

  std::map<std::pair<int, int>, int> kept_side;
  for (const auto& [s, idx] : kept) kept_side[{s.poly, s.side}] = idx;
  auto remap = [&](SideRef s) -> std::optional<SideRef> {
    if (res.poly_map[s.poly] >= 0) return SideRef{res.poly_map[s.poly], s.side};
    auto it = kept_side.find({s.poly, s.side});
    if (it == kept_side.end()) return std::nullopt;  // spoke side, consumed
    return SideRef{res.merged_poly, it->second};
  };
  std::vector<Portal> portals;
  for (const Portal& pr : P.portals) {
    auto a = remap(pr.a), b = remap(pr.b);
    PGN_REQUIRE(a.has_value() == b.has_value(), "loop-adjacent",
                "portal pairs a star spoke with a kept side");
    if (a) portals.push_back({*a, *b});
  }

  P.polygons = std::move(polys);
  P.side_tags = std::move(tags);
  P.portals = std::move(portals);
  return res;
}

struct CutSeam {
  int portal = -1;     // index in the pre-cut portal list
  int comp_a = -1, comp_b = -1;
  SideRef a, b;        // local side refs of the two seam realizations
};

struct CutResult {
  std::vector<Portalgon> components;
  std::vector<std::pair<int, int>> poly_loc;  // old poly -> (comp, local)
  std::vector<CutSeam> seams;
};

// Remove the listed portals (their sides become boundary) and split the
// result into connected components. Components are ordered by their
// smallest original polygon index; polygons keep their relative order.
inline CutResult cut_along(const Portalgon& P,
                           const std::vector<int>& portal_ids) {
  std::set<int> cut(portal_ids.begin(), portal_ids.end());
  for (int k : portal_ids)
    PGN_REQUIRE(k >= 0 && k < static_cast<int>(P.portals.size()),
                "schema-error", "portal id out of range");

  detail::UnionFind uf(P.num_polygons());
  for (size_t k = 0; k < P.portals.size(); ++k)
    if (!cut.count(static_cast<int>(k)))
      uf.unite(P.portals[k].a.poly, P.portals[k].b.poly);

  CutResult res;
  std::map<int, int> comp_of_root;
  res.poly_loc.assign(P.num_polygons(), {-1, -1});
  for (int p = 0; p < P.num_polygons(); ++p) {
    int root = uf.find(p);
    auto it = comp_of_root.find(root);
    int comp;
    if (it == comp_of_root.end()) {
      comp = static_cast<int>(res.components.size());
      comp_of_root[root] = comp;
      res.components.emplace_back();
    } else {
      comp = it->second;
    }
    Portalgon& C = res.components[comp];
    res.poly_loc[p] = {comp, C.num_polygons()};
    C.polygons.push_back(P.polygons[p]);
    C.side_tags.push_back(p < static_cast<int>(P.side_tags.size())
                              ? P.side_tags[p]
                              : std::vector<int>(P.degree(p), -1));
    C.side_tags.back().resize(P.degree(p), -1);
  }

  for (size_t k = 0; k < P.portals.size(); ++k) {
    const Portal& pr = P.portals[k];
    auto [ca, la] = res.poly_loc[pr.a.poly];
    auto [cb, lb] = res.poly_loc[pr.b.poly];
    if (cut.count(static_cast<int>(k))) {
      res.seams.push_back({static_cast<int>(k), ca, cb,
                           {la, pr.a.side}, {lb, pr.b.side}});
      continue;
    }
    PGN_REQUIRE(ca == cb, "schema-error", "portal spans two components");
    res.components[ca].portals.push_back({{la, pr.a.side}, {lb, pr.b.side}});
  }
  return res;
}

inline CutResult extract_components(const Portalgon& P) {
  return cut_along(P, {});
}

}  // namespace portalgon
