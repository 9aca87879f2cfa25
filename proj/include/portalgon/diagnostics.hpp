// Measurement and oracle tools that are deliberately independent of the
// main algorithms: lattice reduction for flat tori, a refined-graph
// shortest-path approximation, and empirical edge-crossing statistics for
// geodesics. Tests use these as ground truth; nothing in the production
// pipeline depends on them.
#pragma once

#include <limits>
#include <queue>
#include <random>

#include "fixtures.hpp"
#include "skeleton.hpp"

namespace portalgon {

// --- flat torus lattice oracle ---------------------------------------------

struct TorusLattice {
  Point2 b1, b2;            // reduced basis: cross > 0, dot <= 0
  bool rectangular = false; // dot within tolerance of 0
  Portalgon delaunay;       // canonical Delaunay portalgon of the torus
};

// Lagrange-Gauss reduction of a 2d lattice basis, then a canonical choice
// among signed/swapped variants: cross(b1,b2) > 0, b1.b2 <= 0, b1 in the
// upper half-plane; ties by |b1| <= |b2|, then lexicographically.
inline TorusLattice reduce_torus_lattice(Point2 v1, Point2 v2,
                                         const Tolerances& tol = {}) {
  double scale2 = std::max(norm2(v1), norm2(v2));
  PGN_REQUIRE(scale2 > 0 && std::abs(cross(v1, v2)) > tol.tau_rel * scale2,
              "degenerate-lattice", "basis is (near-)collinear");
  Point2 u = v1, w = v2;
  if (norm2(u) > norm2(w)) std::swap(u, w);
  while (true) {
    double mu = std::round(dot(u, w) / norm2(u));
    w = w - u * mu;
    if (norm2(w) >= norm2(u)) break;
    std::swap(u, w);
  }

  double band = tol.tau_rel * norm(u) * norm(w);
  auto upper = [](Point2 p) { return p.y > 0 || (p.y == 0 && p.x > 0); };
  TorusLattice best;
  bool have = false;
  for (int swap = 0; swap < 2; ++swap) {
    Point2 a = swap ? w : u, b = swap ? u : w;
    for (int sa = -1; sa <= 1; sa += 2)
      for (int sb = -1; sb <= 1; sb += 2) {
        Point2 c1 = a * static_cast<double>(sa);
        Point2 c2 = b * static_cast<double>(sb);
        if (cross(c1, c2) <= 0) continue;
        if (dot(c1, c2) > band) continue;
        if (!upper(c1)) continue;
        bool better;
        if (!have) {
          better = true;
        } else {
          double d1 = norm2(c1) - norm2(best.b1);
          if (std::abs(d1) > band) {
            better = d1 < 0;
          } else {
            better = lex_less(c1, best.b1) ||
                     (c1 == best.b1 && lex_less(c2, best.b2));
          }
        }
        if (better) {
          best.b1 = c1;
          best.b2 = c2;
          have = true;
        }
      }
  }
  PGN_REQUIRE(have, "degenerate-lattice", "no canonical reduced basis");
  best.rectangular = std::abs(dot(best.b1, best.b2)) <= band;

  if (best.rectangular) {
    Portalgon& D = best.delaunay;
    D.polygons = {{{0, 0}, best.b1, best.b1 + best.b2, best.b2}};
    D.portals = {{{0, 0}, {0, 2}}, {{0, 1}, {0, 3}}};
    ensure_tags(D);
  } else {
    best.delaunay = make_flat_torus(best.b1, best.b2);
  }
  return best;
}

// --- refined-graph shortest paths ------------------------------------------

struct PointOnSurface {
  int poly = -1;
  Point2 pos;
};

struct PathSegment {
  int poly = -1;
  Point2 a, b;
};

struct PathJunction {
  int edge = -1;    // skeleton edge crossed at this junction (-1: none)
  int vertex = -1;  // vertex class passed through (-1: none)
  bool along = false;  // an adjacent segment runs along the edge itself
};

struct SurfacePath {
  bool found = false;
  double length = std::numeric_limits<double>::infinity();
  std::vector<PathSegment> segments;
  std::vector<PathJunction> junctions;  // size = segments.size() - 1
};

// Shortest path between two surface points in the graph whose nodes are the
// vertex classes, `steiner` evenly spaced extra points per skeleton edge
// (shared between the edge's two side realizations) and the two query
// points, with straight visibility segments inside each polygon as edges.
// As `steiner` grows this converges to the true geodesic distance from
// above; it is an oracle, not a production routine.
inline SurfacePath refined_shortest_path(const Portalgon& P,
                                         PointOnSurface src,
                                         PointOnSurface dst, int steiner = 8,
                                         const Tolerances& tol = {}) {
  Skeleton S = build_skeleton(P, tol);
  int V = S.n_vertices, E = static_cast<int>(S.edges.size());
  int n_nodes = V + E * steiner + 2;
  int src_node = n_nodes - 2, dst_node = n_nodes - 1;

  // realizations of each node, grouped by polygon
  std::vector<std::vector<std::pair<int, Point2>>> in_poly(P.num_polygons());
  for (int p = 0; p < P.num_polygons(); ++p)
    for (int c = 0; c < P.degree(p); ++c)
      in_poly[p].push_back({S.vertex_of[p][c], P.polygons[p][c]});
  for (int e = 0; e < E; ++e) {
    for (int j = 1; j <= steiner; ++j) {
      int node = V + e * steiner + (j - 1);
      double t = static_cast<double>(j) / (steiner + 1);
      auto [a0, a1] = side_points(P, S.edges[e].a);
      in_poly[S.edges[e].a.poly].push_back({node, a0 + (a1 - a0) * t});
      if (!S.edges[e].boundary) {
        auto [b0, b1] = side_points(P, S.edges[e].b);
        in_poly[S.edges[e].b.poly].push_back(
            {node, b0 + (b1 - b0) * (1.0 - t)});
      }
    }
  }
  PGN_REQUIRE(src.poly >= 0 && src.poly < P.num_polygons() && dst.poly >= 0 &&
                  dst.poly < P.num_polygons(),
              "schema-error", "query point polygon out of range");
  in_poly[src.poly].push_back({src_node, src.pos});
  in_poly[dst.poly].push_back({dst_node, dst.pos});

  struct Arc {
    int to;
    double w;
    int poly;
    Point2 a, b;
  };
  std::vector<std::vector<Arc>> adj(n_nodes);
  for (int p = 0; p < P.num_polygons(); ++p) {
    const auto& nodes = in_poly[p];
    for (size_t i = 0; i < nodes.size(); ++i)
      for (size_t j = i + 1; j < nodes.size(); ++j) {
        if (nodes[i].first == nodes[j].first) continue;
        if (!segment_inside_polygon(P.polygons[p], nodes[i].second,
                                    nodes[j].second, tol))
          continue;
        double w = dist(nodes[i].second, nodes[j].second);
        adj[nodes[i].first].push_back(
            {nodes[j].first, w, p, nodes[i].second, nodes[j].second});
        adj[nodes[j].first].push_back(
            {nodes[i].first, w, p, nodes[j].second, nodes[i].second});
      }
  }

  std::vector<double> dist_to(n_nodes,
                              std::numeric_limits<double>::infinity());
  std::vector<int> prev(n_nodes, -1);
  std::vector<Arc> prev_arc(n_nodes);
  using QE = std::pair<double, int>;
  std::priority_queue<QE, std::vector<QE>, std::greater<>> pq;
  dist_to[src_node] = 0;
  pq.push({0, src_node});
  while (!pq.empty()) {
    auto [d, n] = pq.top();
    pq.pop();
    if (d > dist_to[n]) continue;
    if (n == dst_node) break;
    for (const Arc& arc : adj[n]) {
      double nd = d + arc.w;
      if (nd < dist_to[arc.to]) {
        dist_to[arc.to] = nd;
        prev[arc.to] = n;
        prev_arc[arc.to] = arc;
        pq.push({nd, arc.to});
      }
    }
  }

  SurfacePath path;
  if (!std::isfinite(dist_to[dst_node])) return path;
  path.found = true;
  path.length = dist_to[dst_node];
  std::vector<int> order;
  for (int n = dst_node; n != src_node; n = prev[n]) order.push_back(n);
  std::reverse(order.begin(), order.end());
  for (int n : order) {
    const Arc& arc = prev_arc[n];
    path.segments.push_back({arc.poly, arc.a, arc.b});
  }
  for (size_t i = 0; i + 1 < order.size(); ++i) {
    int n = order[i];
    PathJunction j;
    if (n < V) {
      j.vertex = n;
    } else {
      j.edge = (n - V) / steiner;
      // sliding along the edge: a neighbouring path node is a steiner point
      // or endpoint vertex of the same edge connected by a collinear segment
      const SkelEdge& e = S.edges[j.edge];
      auto on_edge = [&](const PathSegment& seg, Point2 endpoint) {
        auto [a0, a1] = side_points(P, e.a);
        if (seg.poly == e.a.poly &&
            point_segment_dist(endpoint, a0, a1) <=
                tol.tau_rel * std::max(1.0, dist(a0, a1)))
          return true;
        if (e.boundary) return false;
        auto [b0, b1] = side_points(P, e.b);
        return seg.poly == e.b.poly &&
               point_segment_dist(endpoint, b0, b1) <=
                   tol.tau_rel * std::max(1.0, dist(b0, b1));
      };
      const PathSegment& before = path.segments[i];
      const PathSegment& after = path.segments[i + 1];
      j.along = on_edge(before, before.a) || on_edge(after, after.b);
    }
    path.junctions.push_back(j);
  }
  return path;
}

// How often the path crosses skeleton edge e (junctions that slide along
// the edge are not crossings).
inline int crossing_count(const SurfacePath& path, int edge) {
  int n = 0;
  for (const PathJunction& j : path.junctions)
    if (j.edge == edge && !j.along) n++;
  return n;
}

struct HappinessSample {
  int max_crossings = 0;        // max over sampled geodesics and edges
  double mean_crossings = 0;    // mean of per-path max
  int vertex_passes = 0;        // paths routed through a vertex class
  int paths = 0;
};

// Empirical "happiness" of a triangulation: sample random point pairs,
// approximate their geodesics in the refined graph and report how often a
// single edge gets crossed. Area-weighted polygon choice, rejection
// sampling inside each polygon.
inline HappinessSample empirical_happiness(const Portalgon& P, int samples,
                                           int steiner = 8,
                                           unsigned seed = 12345,
                                           const Tolerances& tol = {}) {
  std::mt19937 gen(seed);
  std::vector<double> weights;
  for (const auto& poly : P.polygons) weights.push_back(polygon_area(poly));
  std::discrete_distribution<int> pick_poly(weights.begin(), weights.end());

  auto sample_point = [&](int p) -> Point2 {
    const auto& poly = P.polygons[p];
    double x0 = poly[0].x, x1 = poly[0].x, y0 = poly[0].y, y1 = poly[0].y;
    for (const Point2& c : poly) {
      x0 = std::min(x0, c.x);
      x1 = std::max(x1, c.x);
      y0 = std::min(y0, c.y);
      y1 = std::max(y1, c.y);
    }
    std::uniform_real_distribution<double> ux(x0, x1), uy(y0, y1);
    for (int tries = 0; tries < 10000; ++tries) {
      Point2 q{ux(gen), uy(gen)};
      if (point_strictly_inside(poly, q, tol)) return q;
    }
    throw Error("sampling-failed", "rejection sampling found no interior point");
  };

  Skeleton S = build_skeleton(P, tol);
  int E = static_cast<int>(S.edges.size());
  HappinessSample out;
  double sum = 0;
  for (int it = 0; it < samples; ++it) {
    int pa = pick_poly(gen), pb = pick_poly(gen);
    PointOnSurface a{pa, sample_point(pa)}, b{pb, sample_point(pb)};
    SurfacePath path = refined_shortest_path(P, a, b, steiner, tol);
    if (!path.found) continue;
    out.paths++;
    int worst = 0;
    for (int e = 0; e < E; ++e) worst = std::max(worst, crossing_count(path, e));
    bool through_vertex = false;
    for (const PathJunction& j : path.junctions)
      if (j.vertex >= 0) through_vertex = true;
    if (through_vertex) out.vertex_passes++;
    out.max_crossings = std::max(out.max_crossings, worst);
    sum += worst;
  }
  if (out.paths > 0) out.mean_crossings = sum / out.paths;
  return out;
}

}  // namespace portalgon
