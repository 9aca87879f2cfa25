// Vertex/edge identification skeleton of a portalgon, plus validation and
// the surface summary report (topology, angle sums, singular vertices,
// size measures).
#pragma once

#include <algorithm>
#include <numeric>
#include <set>
#include <string>

#include "portalgon.hpp"

namespace portalgon {

// A wedge is a polygon corner: the angular sector of polygon `poly` at
// corner `corner`, bounded by incoming side (poly, corner-1) and outgoing
// side (poly, corner).
struct Wedge {
  int poly = -1, corner = -1;
  bool operator==(const Wedge& o) const {
    return poly == o.poly && corner == o.corner;
  }
};

struct SkelEdge {
  SideRef a;                  // representative side
  SideRef b;                  // partner side (== a when boundary)
  bool boundary = false;
  int v0 = -1, v1 = -1;       // vertex classes at a's start / a's end
  bool loop() const { return v0 == v1; }
};

struct Skeleton {
  int n_vertices = 0;
  std::vector<std::vector<int>> vertex_of;     // [poly][corner] -> vertex id
  std::vector<std::vector<Wedge>> vertex_corners;
  std::vector<double> vertex_angle;            // total cone angle
  std::vector<bool> vertex_boundary;           // incident to unmatched side
  std::vector<int> vertex_degree;              // skeleton-edge degree
  std::vector<SkelEdge> edges;
  std::vector<std::vector<int>> edge_of;       // [poly][side] -> edge id
  SideIndex sides;

  int vertex(int poly, int corner) const { return vertex_of[poly][corner]; }
};

namespace detail {

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(n) {
    std::iota(parent.begin(), parent.end(), 0);
  }
  int find(int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

}  // namespace detail

// Corner identifications induced by portals: gluing side (p,i) forward to
// side (q,j) backward identifies corner (p,i) with (q,j+1) and corner
// (p,i+1) with (q,j).
inline Skeleton build_skeleton(const Portalgon& P, const Tolerances& tol = {}) {
  Skeleton S;
  S.sides = build_side_index(P);

  std::vector<int> offset(P.num_polygons() + 1, 0);
  for (int p = 0; p < P.num_polygons(); ++p)
    offset[p + 1] = offset[p] + P.degree(p);
  int total = offset.back();
  auto corner_id = [&](int p, int c) { return offset[p] + c; };

  detail::UnionFind uf(total);
  for (const Portal& pr : P.portals) {
    int np = P.degree(pr.a.poly), nq = P.degree(pr.b.poly);
    uf.unite(corner_id(pr.a.poly, pr.a.side),
             corner_id(pr.b.poly, (pr.b.side + 1) % nq));
    uf.unite(corner_id(pr.a.poly, (pr.a.side + 1) % np),
             corner_id(pr.b.poly, pr.b.side));
  }

  // Assign vertex ids in order of first appearance of each class.
  std::vector<int> id_of_root(total, -1);
  S.vertex_of.resize(P.num_polygons());
  for (int p = 0; p < P.num_polygons(); ++p) {
    S.vertex_of[p].resize(P.degree(p));
    for (int c = 0; c < P.degree(p); ++c) {
      int root = uf.find(corner_id(p, c));
      if (id_of_root[root] < 0) {
        id_of_root[root] = S.n_vertices++;
        S.vertex_corners.emplace_back();
      }
      int v = id_of_root[root];
      S.vertex_of[p][c] = v;
      S.vertex_corners[v].push_back({p, c});
    }
  }

  S.vertex_angle.assign(S.n_vertices, 0.0);
  S.vertex_boundary.assign(S.n_vertices, false);
  for (int p = 0; p < P.num_polygons(); ++p) {
    const auto& poly = P.polygons[p];
    int n = P.degree(p);
    for (int c = 0; c < n; ++c) {
      int v = S.vertex_of[p][c];
      S.vertex_angle[v] +=
          corner_angle(poly[c], poly[(c + 1) % n], poly[(c + n - 1) % n]);
      if (!S.sides.matched({p, c}) || !S.sides.matched({p, (c + n - 1) % n}))
        S.vertex_boundary[v] = true;
    }
  }

  // One skeleton edge per portal plus one per unmatched side, in the order
  // of each edge's lexicographically smallest side.
  S.edge_of.resize(P.num_polygons());
  for (int p = 0; p < P.num_polygons(); ++p)
    S.edge_of[p].assign(P.degree(p), -1);
  S.vertex_degree.assign(S.n_vertices, 0);
  for (int p = 0; p < P.num_polygons(); ++p) {
    int n = P.degree(p);
    for (int c = 0; c < n; ++c) {
      SideRef s{p, c};
      auto q = partner_side(P, S.sides, s);
      if (q && *q < s) continue;  // already emitted from the partner
      SkelEdge e;
      e.a = s;
      e.b = q ? *q : s;
      e.boundary = !q;
      e.v0 = S.vertex_of[p][c];
      e.v1 = S.vertex_of[p][(c + 1) % n];
      int id = static_cast<int>(S.edges.size());
      S.edge_of[p][c] = id;
      if (q) S.edge_of[q->poly][q->side] = id;
      S.vertex_degree[e.v0]++;
      S.vertex_degree[e.v1]++;
      S.edges.push_back(e);
    }
  }
  (void)tol;
  return S;
}

// Fan neighbours of a wedge. Going ccw around the vertex crosses the
// incoming side; going cw crosses the outgoing side. Returns nothing when
// the crossed side is unmatched.
inline std::optional<Wedge> ccw_next(const Portalgon& P, const SideIndex& idx,
                                     Wedge w) {
  int n = P.degree(w.poly);
  SideRef incoming{w.poly, (w.corner + n - 1) % n};
  auto q = partner_side(P, idx, incoming);
  if (!q) return std::nullopt;
  return Wedge{q->poly, q->side};
}

inline std::optional<Wedge> cw_next(const Portalgon& P, const SideIndex& idx,
                                    Wedge w) {
  SideRef outgoing{w.poly, w.corner};
  auto q = partner_side(P, idx, outgoing);
  if (!q) return std::nullopt;
  return Wedge{q->poly, (q->side + 1) % P.degree(q->poly)};
}

// The full fan of wedges around a vertex, in ccw order. For an interior
// vertex this is a closed cycle starting at vertex_corners[v][0]; for a
// boundary vertex it is the open chain from the wedge whose outgoing side
// is unmatched to the wedge whose incoming side is unmatched.
struct VertexFan {
  std::vector<Wedge> wedges;
  bool closed = false;   // interior vertex (fan wraps around)
  bool covers_all = false;  // fan visits every corner of the class (no pinch)
};

inline VertexFan vertex_fan(const Portalgon& P, const Skeleton& S, int v) {
  VertexFan fan;
  const auto& corners = S.vertex_corners[v];
  PGN_REQUIRE(!corners.empty(), "schema-error", "empty vertex class");
  Wedge start{corners[0].poly, corners[0].corner};

  // Rewind cw to the start of an open fan, if any side is unmatched.
  Wedge w = start;
  bool open = false;
  for (size_t steps = 0; steps <= corners.size(); ++steps) {
    SideRef outgoing{w.poly, w.corner};
    if (!S.sides.matched(outgoing)) {
      open = true;
      break;
    }
    auto prev = cw_next(P, S.sides, w);
    w = *prev;
    if (w == start) break;  // closed fan, no unmatched side reachable
  }
  Wedge first = open ? w : start;
  fan.closed = !open;

  w = first;
  for (size_t steps = 0; steps < corners.size(); ++steps) {
    fan.wedges.push_back(w);
    auto next = ccw_next(P, S.sides, w);
    if (!next) break;              // open fan ends at unmatched incoming side
    if (*next == first) break;     // closed fan wrapped around
    w = *next;
  }
  fan.covers_all = fan.wedges.size() == corners.size();
  return fan;
}

struct VertexInfo {
  double angle = 0;
  bool boundary = false;
  bool singular = false;
  bool loop_edge = false;  // incident to an edge with both endpoints here
  bool weak = false;       // interior and not incident to any loop edge
  int degree = 0;
};

// Singular = cone angle differs from 2*pi (interior) or pi (boundary).
// Weak = interior vertex without incident loop edge (the vertices the
// flattening loop is allowed to delete); everything else is strong.
inline std::vector<VertexInfo> classify_vertices(const Skeleton& S,
                                                 const Tolerances& tol = {}) {
  std::vector<VertexInfo> out(S.n_vertices);
  for (int v = 0; v < S.n_vertices; ++v) {
    out[v].angle = S.vertex_angle[v];
    out[v].boundary = S.vertex_boundary[v];
    out[v].degree = S.vertex_degree[v];
    double flat = out[v].boundary ? kPi : 2 * kPi;
    out[v].singular = std::abs(out[v].angle - flat) > tol.tau_angle;
  }
  for (const SkelEdge& e : S.edges)
    if (e.loop()) out[e.v0].loop_edge = true;
  for (int v = 0; v < S.n_vertices; ++v)
    out[v].weak = !out[v].boundary && !out[v].loop_edge;
  return out;
}

// Next boundary side after `s`, walking the boundary so the surface lies to
// the left: from the end corner of `s`, rewind the fan cw to its start
// wedge, whose outgoing side is the next unmatched side.
inline SideRef boundary_next(const Portalgon& P, const Skeleton& S, SideRef s) {
  int n = P.degree(s.poly);
  Wedge w{s.poly, (s.side + 1) % n};
  size_t guard = 0, limit = 1;
  for (const auto& vc : S.vertex_corners) limit += vc.size();
  while (S.sides.matched({w.poly, w.corner})) {
    auto prev = cw_next(P, S.sides, w);
    PGN_REQUIRE(prev.has_value(), "pinched-vertex",
                "boundary walk left the fan");
    w = *prev;
    PGN_REQUIRE(++guard < limit, "pinched-vertex",
                "boundary walk does not terminate");
  }
  return {w.poly, w.corner};
}

// All boundary cycles, each a list of unmatched sides in walk order.
inline std::vector<std::vector<SideRef>> boundary_components(
    const Portalgon& P, const Skeleton& S) {
  std::vector<std::vector<SideRef>> comps;
  std::set<std::pair<int, int>> seen;
  for (int p = 0; p < P.num_polygons(); ++p) {
    for (int c = 0; c < P.degree(p); ++c) {
      SideRef s{p, c};
      if (S.sides.matched(s) || seen.count({p, c})) continue;
      std::vector<SideRef> cycle;
      SideRef cur = s;
      do {
        cycle.push_back(cur);
        seen.insert({cur.poly, cur.side});
        cur = boundary_next(P, S, cur);
        PGN_REQUIRE(cycle.size() <= seen.max_size() &&
                        cycle.size() <= 1u + S.edges.size(),
                    "pinched-vertex", "boundary cycle does not close");
      } while (!(cur == s));
      comps.push_back(std::move(cycle));
    }
  }
  return comps;
}

// Connected components of the face-adjacency (portal) graph.
inline std::vector<std::vector<int>> face_components(const Portalgon& P) {
  detail::UnionFind uf(P.num_polygons());
  for (const Portal& pr : P.portals) uf.unite(pr.a.poly, pr.b.poly);
  std::map<int, std::vector<int>> groups;
  for (int p = 0; p < P.num_polygons(); ++p) groups[uf.find(p)].push_back(p);
  std::vector<std::vector<int>> out;
  for (auto& [root, polys] : groups) out.push_back(std::move(polys));
  return out;
}

struct SurfaceReport {
  int n_polygons = 0, n_vertices = 0, n_edges = 0;
  int euler = 0;
  int boundary_component_count = 0;
  int component_count = 0;
  int genus = 0;  // summed over connected components
  bool closed = false, connected = false, all_triangles = false, flat = false;
  double area = 0, scale = 0;
  double max_side = 0;              // L
  double min_triangle_height = 0;   // d  (0 when no triangular face)
  double aspect_ratio = 0;          // r = L / d
  std::vector<VertexInfo> vertices;
  std::vector<int> singular_vertices;
};

struct Issue {
  std::string code, message;
};

struct ValidationResult {
  std::vector<Issue> issues;
  std::optional<SurfaceReport> report;
  bool ok() const { return issues.empty(); }
};

inline SurfaceReport surface_report(const Portalgon& P, const Skeleton& S,
                                    const Tolerances& tol = {}) {
  SurfaceReport R;
  R.n_polygons = P.num_polygons();
  R.n_vertices = S.n_vertices;
  R.n_edges = static_cast<int>(S.edges.size());
  R.euler = R.n_vertices - R.n_edges + R.n_polygons;
  R.area = total_area(P);
  R.scale = instance_scale(P);
  R.max_side = max_side_length(P);
  R.min_triangle_height = min_triangle_height(P);
  R.aspect_ratio =
      R.min_triangle_height > 0 ? R.max_side / R.min_triangle_height : 0;
  R.all_triangles = true;
  for (const auto& poly : P.polygons)
    if (poly.size() != 3) R.all_triangles = false;

  auto comps = face_components(P);
  R.component_count = static_cast<int>(comps.size());
  R.connected = comps.size() == 1;
  auto bcomps = boundary_components(P, S);
  R.boundary_component_count = static_cast<int>(bcomps.size());
  R.closed = bcomps.empty();

  R.vertices = classify_vertices(S, tol);
  R.flat = true;
  for (int v = 0; v < S.n_vertices; ++v)
    if (R.vertices[v].singular) {
      R.singular_vertices.push_back(v);
      R.flat = false;
    }

  // Genus per component from Euler characteristic and boundary count.
  std::vector<int> comp_of(P.num_polygons(), -1);
  for (size_t k = 0; k < comps.size(); ++k)
    for (int p : comps[k]) comp_of[p] = static_cast<int>(k);
  std::vector<int> chi(comps.size(), 0), nb(comps.size(), 0);
  for (int p = 0; p < P.num_polygons(); ++p) chi[comp_of[p]]++;
  for (const SkelEdge& e : S.edges) chi[comp_of[e.a.poly]]--;
  std::vector<bool> vseen(S.n_vertices, false);
  for (int p = 0; p < P.num_polygons(); ++p)
    for (int c = 0; c < P.degree(p); ++c) {
      int v = S.vertex_of[p][c];
      if (!vseen[v]) {
        vseen[v] = true;
        chi[comp_of[p]]++;
      }
    }
  for (const auto& cycle : bcomps) nb[comp_of[cycle[0].poly]]++;
  R.genus = 0;
  for (size_t k = 0; k < comps.size(); ++k) {
    int twice = 2 - chi[k] - nb[k];
    PGN_REQUIRE(twice % 2 == 0 && twice >= 0, "bad-topology",
                "component has non-orientable or inconsistent gluing");
    R.genus += twice / 2;
  }
  return R;
}

inline ValidationResult validate(const Portalgon& P,
                                 const Tolerances& tol = {}) {
  ValidationResult res;
  auto issue = [&](const std::string& code, const std::string& msg) {
    res.issues.push_back({code, msg});
  };

  if (P.polygons.empty()) {
    issue("empty-portalgon", "no polygons");
    return res;
  }
  for (int p = 0; p < P.num_polygons(); ++p) {
    const auto& poly = P.polygons[p];
    std::string where = "polygon " + std::to_string(p);
    if (poly.size() < 3) {
      issue("degenerate-polygon", where + " has fewer than 3 corners");
      continue;
    }
    if (!polygon_simple(poly, tol)) {
      issue("non-simple-polygon", where + " self-intersects or degenerates");
      continue;
    }
    if (polygon_area(poly) <= 0) issue("not-ccw", where + " is not ccw");
  }
  if (!res.issues.empty()) return res;

  // Structural portal checks; build_side_index throws on the hard ones.
  try {
    SideIndex idx = build_side_index(P);
    for (size_t k = 0; k < P.portals.size(); ++k) {
      const Portal& pr = P.portals[k];
      double la = side_length(P, pr.a), lb = side_length(P, pr.b);
      if (std::abs(la - lb) > tol.tau_rel * std::max(la, lb))
        issue("portal-length-mismatch",
              "portal " + std::to_string(k) + " sides differ in length");
    }
    (void)idx;
  } catch (const Error& e) {
    issue(e.code(), e.what());
  }
  if (!res.issues.empty()) return res;

  Skeleton S = build_skeleton(P, tol);
  for (int v = 0; v < S.n_vertices; ++v) {
    VertexFan fan = vertex_fan(P, S, v);
    if (!fan.covers_all)
      issue("pinched-vertex",
            "vertex " + std::to_string(v) + " is a pinch point (its corners "
            "do not form a single fan)");
  }
  if (!res.issues.empty()) return res;

  try {
    res.report = surface_report(P, S, tol);
  } catch (const Error& e) {
    issue(e.code(), e.what());
  }
  return res;
}

}  // namespace portalgon
