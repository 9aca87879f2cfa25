// Tubes and bifaces.
//
// A tube is a triangular portalgon whose surface is a flat annulus with no
// interior singularity and exactly one vertex on each boundary circle. A
// biface is the 2-triangle case. Tubes can hide arbitrarily long winding
// geodesics; replacing a tube by a *good* biface (one whose interior edge
// realizes the shortest boundary-to-boundary path, with the companion edge
// a shortest diagonal of the cut quadrilateral) caps the damage.
//
// The rebuild works by developing the annulus's universal cover: the deck
// transformation is read off the wedge fan around one boundary vertex, a
// lift of the other boundary vertex comes from a dual-graph BFS, and the
// shortest chord is located in closed form -- by integer minimization along
// the deck direction when the deck is a translation, or by a small window
// of winding candidates around the angular optimum when it is a rotation.
// In the rotation case the BFS tracks the real (unwrapped) winding angle of
// each face copy, so the optimal winding number is known exactly and chord
// validity only needs crossing tests against the few boundary-edge copies
// whose angular interval overlaps the chord.
#pragma once

#include "surgery.hpp"

namespace portalgon {

// Annulus, no interior singularity, one vertex per boundary circle.
inline bool is_tube(const Portalgon& X, const Tolerances& tol = {}) {
  if (X.polygons.empty()) return false;
  for (const auto& poly : X.polygons)
    if (poly.size() != 3) return false;
  Skeleton S = build_skeleton(X, tol);
  if (face_components(X).size() != 1) return false;
  int chi = S.n_vertices - static_cast<int>(S.edges.size()) + X.num_polygons();
  if (chi != 0) return false;
  auto bc = boundary_components(X, S);
  if (bc.size() != 2) return false;
  for (const auto& cycle : bc) {
    std::set<int> classes;
    for (const SideRef& s : cycle) {
      classes.insert(S.vertex_of[s.poly][s.side]);
      classes.insert(S.vertex_of[s.poly][(s.side + 1) % 3]);
    }
    if (classes.size() != 1) return false;
  }
  for (int v = 0; v < S.n_vertices; ++v)
    if (!S.vertex_boundary[v] &&
        std::abs(S.vertex_angle[v] - 2 * kPi) > tol.tau_angle)
      return false;
  return true;
}

struct Biface {
  Portalgon P;            // 2 ccw triangles, 2 portals
  SideRef boundary[2];    // the two boundary loop sides (index 0: lex-min
                          // for parsed bifaces; outer/b0 for rebuilt ones)
  double blen[2] = {0, 0};
  int btag[2] = {-1, -1};
  int bvertex[2] = {-1, -1};

  double interior_length(int i) const {
    return side_length(P, P.portals[i].a);
  }
};

struct BifaceClass {
  bool good = false;
  bool thin = false;
};

// Parse and verify the biface structure of a 2-triangle portalgon.
inline Biface as_biface(const Portalgon& P, const Tolerances& tol = {}) {
  PGN_REQUIRE(P.num_polygons() == 2 && P.degree(0) == 3 && P.degree(1) == 3,
              "not-a-biface", "a biface has exactly two triangles");
  PGN_REQUIRE(P.portals.size() == 2, "not-a-biface",
              "a biface has exactly two portals");
  for (const Portal& pr : P.portals)
    PGN_REQUIRE(pr.a.poly != pr.b.poly, "not-a-biface",
                "biface portals join the two triangles");
  PGN_REQUIRE(is_tube(P, tol), "not-a-biface",
              "biface surface must be a tube");

  Biface B;
  B.P = P;
  ensure_tags(B.P);
  Skeleton S = build_skeleton(P, tol);
  std::vector<SideRef> bnd;
  for (int p = 0; p < 2; ++p)
    for (int s = 0; s < 3; ++s)
      if (!S.sides.matched({p, s})) bnd.push_back({p, s});
  PGN_REQUIRE(bnd.size() == 2, "not-a-biface", "expected two boundary sides");
  for (int i = 0; i < 2; ++i) {
    B.boundary[i] = bnd[i];
    B.blen[i] = side_length(P, bnd[i]);
    B.btag[i] = side_tag(B.P, bnd[i]);
    B.bvertex[i] = S.vertex_of[bnd[i].poly][bnd[i].side];
  }
  PGN_REQUIRE(B.bvertex[0] != B.bvertex[1], "not-a-biface",
              "boundary circles must carry distinct vertices");
  return B;
}

namespace detail {

struct TubeDevelopment {
  SideRef b0, b1;      // boundary loop sides, b0 lex-min
  int v0 = -1, v1 = -1;
  RigidMotion deck;    // advances the development one turn ccw around v0
  bool rotational = false;
  Point2 center;       // rotation fixed point (rotational case)
  double theta = 0;    // deck rotation angle, signed
  Point2 x0;           // lift of v0 in the reference sheet
  Point2 y0;           // some lift of v1
  double beta_y = 0;   // real (unwrapped) angle of y0 about center, relative
                       // to x0's angle (rotational case only)
  double len_b0 = 0, len_b1 = 0;
  int tag0 = -1, tag1 = -1;
  double area = 0, scale = 0;
};

inline RigidMotion deck_pow(const TubeDevelopment& D, long long k) {
  if (!D.rotational)
    return RigidMotion::translation(D.deck.t * static_cast<double>(k));
  return RigidMotion::rotation_about(D.center, D.theta * static_cast<double>(k));
}

inline double wrap_pi(double a) {
  while (a > kPi) a -= 2 * kPi;
  while (a < -kPi) a += 2 * kPi;
  return a;
}

inline TubeDevelopment develop_tube(const Portalgon& X,
                                    const Tolerances& tol) {
  TubeDevelopment D;
  D.area = total_area(X);
  D.scale = instance_scale(X);
  Skeleton S = build_skeleton(X, tol);

  std::vector<SideRef> bnd;
  for (int p = 0; p < X.num_polygons(); ++p)
    for (int s = 0; s < X.degree(p); ++s)
      if (!S.sides.matched({p, s})) bnd.push_back({p, s});
  PGN_REQUIRE(bnd.size() == 2, "not-a-tube",
              "expected exactly two boundary sides (one per circle)");
  D.b0 = bnd[0];
  D.b1 = bnd[1];
  D.v0 = S.vertex_of[D.b0.poly][D.b0.side];
  D.v1 = S.vertex_of[D.b1.poly][D.b1.side];
  PGN_REQUIRE(D.v0 != D.v1 &&
                  D.v0 == S.vertex_of[D.b0.poly][(D.b0.side + 1) % 3] &&
                  D.v1 == S.vertex_of[D.b1.poly][(D.b1.side + 1) % 3],
              "not-a-tube", "boundary sides must be loops at two vertices");
  D.len_b0 = side_length(X, D.b0);
  D.len_b1 = side_length(X, D.b1);
  D.tag0 = side_tag(X, D.b0);
  D.tag1 = side_tag(X, D.b1);

  // Deck transformation from the open wedge fan at v0. The fan starts at
  // wedge (p, s) whose outgoing side is b0 and ends at wedge (p, s+1) whose
  // incoming side is b0; the final motion Z re-places polygon p one full
  // turn ccw around v0.
  VertexFan fan = vertex_fan(X, S, D.v0);
  PGN_REQUIRE(!fan.closed && fan.covers_all, "not-a-tube",
              "boundary vertex fan must be a single open chain");
  PGN_REQUIRE((fan.wedges.front() == Wedge{D.b0.poly, D.b0.side} &&
               fan.wedges.back() == Wedge{D.b0.poly, (D.b0.side + 1) % 3}),
              "not-a-tube", "fan does not start and end at the loop side");
  int m = static_cast<int>(fan.wedges.size());
  std::vector<RigidMotion> M(m);
  M[0] = RigidMotion::identity();
  for (int k = 0; k + 1 < m; ++k) {
    const Wedge& w = fan.wedges[k];
    int n = X.degree(w.poly);
    SideRef incoming{w.poly, (w.corner + n - 1) % n};
    M[k + 1] = M[k].compose(transit_from_partner(X, S.sides, incoming, tol));
  }
  D.deck = M[m - 1];
  D.x0 = X.polygons[D.b0.poly][D.b0.side];
  Point2 x0_end = X.polygons[D.b0.poly][(D.b0.side + 1) % 3];
  PGN_REQUIRE(dist(D.deck(x0_end), D.x0) <= 1e-6 * D.scale,
              "not-a-tube", "vertex fan development drifted");

  D.theta = D.deck.angle();
  D.rotational = std::abs(D.theta) > tol.tau_angle;
  if (D.rotational) {
    // fixed point of z -> R z + t, i.e. (I - R) C = t
    double c = D.deck.c, s = D.deck.s;
    double det = (1 - c) * (1 - c) + s * s;
    D.center = {((1 - c) * D.deck.t.x - s * D.deck.t.y) / det,
                (s * D.deck.t.x + (1 - c) * D.deck.t.y) / det};
  } else {
    PGN_REQUIRE(norm(D.deck.t) > tol.delta_merge * D.scale,
                "degenerate-annulus", "deck transformation is the identity");
  }

  // A lift of v1 via BFS over the dual graph, starting from b0's polygon in
  // the reference sheet. In the rotational case, track each face copy's
  // real winding angle about the center so the lift's sheet is known.
  auto centroid = [&](int p) {
    Point2 c{0, 0};
    for (const Point2& q : X.polygons[p]) c = c + q;
    return c / static_cast<double>(X.polygons[p].size());
  };
  std::vector<char> seen(X.num_polygons(), 0);
  struct Entry {
    int poly;
    RigidMotion M;
    double beta;  // real angle of the developed centroid (rotational case)
  };
  std::vector<Entry> queue;
  auto angle_about = [&](Point2 q) { return std::atan2(q.y - D.center.y,
                                                       q.x - D.center.x); };
  {
    Entry e0{D.b0.poly, RigidMotion::identity(), 0.0};
    if (D.rotational) e0.beta = angle_about(centroid(D.b0.poly));
    seen[D.b0.poly] = 1;
    queue.push_back(e0);
  }
  bool found = false;
  for (size_t head = 0; head < queue.size() && !found; ++head) {
    Entry cur = queue[head];
    for (int c = 0; c < X.degree(cur.poly) && !found; ++c) {
      if (S.vertex_of[cur.poly][c] == D.v1) {
        D.y0 = cur.M(X.polygons[cur.poly][c]);
        if (D.rotational) {
          // real angle of y0 relative to the real angle of x0; both are
          // unwrapped against their face copy's tracked centroid angle
          double by = cur.beta + wrap_pi(angle_about(D.y0) - cur.beta);
          double bx = angle_about(D.x0);
          double bx_real = queue[0].beta + wrap_pi(bx - queue[0].beta);
          D.beta_y = by - bx_real;
        }
        found = true;
        break;
      }
    }
    if (found) break;
    for (int s = 0; s < X.degree(cur.poly); ++s) {
      auto q = partner_side(X, S.sides, {cur.poly, s});
      if (!q || seen[q->poly]) continue;
      seen[q->poly] = 1;
      Entry nxt;
      nxt.poly = q->poly;
      nxt.M = cur.M.compose(
          transit_from_partner(X, S.sides, {cur.poly, s}, tol));
      if (D.rotational) {
        Point2 cc = nxt.M(centroid(q->poly));
        nxt.beta = cur.beta + wrap_pi(angle_about(cc) - cur.beta);
      }
      queue.push_back(nxt);
    }
  }
  PGN_REQUIRE(found, "not-a-tube", "second boundary vertex unreachable");
  return D;
}

struct ChordPick {
  long long k = 0;
  double len = 0;
};

// Shortest valid chord from x0 to a lift deck^k(y0).
inline ChordPick chord_search(const TubeDevelopment& D,
                              const Tolerances& tol) {
  ChordPick pick;
  if (!D.rotational) {
    // Boundary developments are two parallel straight lines; every chord
    // between them stays in the strip, so the integer minimizer is valid.
    Point2 v = D.deck.t;
    double width = std::abs(cross(v, D.y0 - D.x0)) / norm(v);
    PGN_REQUIRE(width > tol.delta_merge * D.scale, "degenerate-annulus",
                "annulus has (near-)zero width");
    pick.k = best_integer_shift(D.x0, D.y0, v);
    pick.len = dist(D.x0, D.y0 + v * static_cast<double>(pick.k));
    return pick;
  }

  double rx = dist(D.x0, D.center), ry = dist(D.y0, D.center);
  PGN_REQUIRE(rx > tol.delta_merge * D.scale &&
                  ry > tol.delta_merge * D.scale,
              "degenerate-annulus", "boundary vertex at the cone center");

  auto proper_cross = [&](Point2 a, Point2 b, Point2 c, Point2 d) {
    int o1 = orient2d(a, b, c, tol), o2 = orient2d(a, b, d, tol);
    int o3 = orient2d(c, d, a, tol), o4 = orient2d(c, d, b, tol);
    return o1 * o2 < 0 && o3 * o4 < 0;
  };

  const int W = 12;
  long long kc = std::llround(-D.beta_y / D.theta);
  struct Cand {
    long long k;
    double len;
  };
  std::vector<Cand> cands;
  for (int j = -W; j <= W; ++j) {
    long long k = kc + j;
    double beta2 = D.beta_y + D.theta * static_cast<double>(k);
    if (std::abs(beta2) >= kPi) continue;  // a straight chord spans < pi
    Point2 yk = deck_pow(D, k)(D.y0);
    cands.push_back({k, dist(D.x0, yk)});
  }
  std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
    if (a.len != b.len) return a.len < b.len;
    if (std::llabs(a.k) != std::llabs(b.k))
      return std::llabs(a.k) < std::llabs(b.k);
    return a.k < b.k;
  });

  for (const Cand& cand : cands) {
    Point2 yk = deck_pow(D, cand.k)(D.y0);
    double beta2 = D.beta_y + D.theta * static_cast<double>(cand.k);
    // boundary-edge copies whose angular interval can overlap the chord's
    double lo = std::min(0.0, beta2), hi = std::max(0.0, beta2);
    bool ok = true;
    auto check_polyline = [&](Point2 base, double beta_base) {
      long long m_lo = static_cast<long long>(
          std::floor((lo - beta_base) / D.theta));
      long long m_hi = static_cast<long long>(
          std::ceil((hi - beta_base) / D.theta));
      if (m_lo > m_hi) std::swap(m_lo, m_hi);
      for (long long m = m_lo - 2; m <= m_hi + 2 && ok; ++m) {
        Point2 a = deck_pow(D, m)(base);
        Point2 b = deck_pow(D, m + 1)(base);
        if (proper_cross(D.x0, yk, a, b)) ok = false;
      }
    };
    check_polyline(D.x0, 0.0);
    check_polyline(D.y0, D.beta_y);
    if (ok) {
      pick = {cand.k, cand.len};
      return pick;
    }
  }
  throw Error("degenerate-annulus",
              "no valid shortest chord among winding candidates");
}

// Cut the tube along the chord, develop the resulting disk to a planar
// quadrilateral, split it along its shorter diagonal, and glue the chord
// copies back by a portal. Boundary tags ride onto the new boundary sides.
inline Biface rebuild_good_biface(const TubeDevelopment& D,
                                  const Tolerances& tol) {
  ChordPick chord = chord_search(D, tol);
  PGN_REQUIRE(chord.len > tol.delta_merge * D.scale, "degenerate-annulus",
              "boundary vertices coincide");

  Point2 yk = deck_pow(D, chord.k)(D.y0);
  Portalgon Q;
  double area_tol =
      std::max(tol.delta_merge * D.scale * D.scale, 1e-12 * D.area);
  bool built = false;
  for (int s : {+1, -1}) {
    Point2 q2 = deck_pow(D, chord.k + s)(D.y0);
    Point2 q3 = deck_pow(D, s)(D.x0);
    std::vector<Point2> quad{D.x0, yk, q2, q3};
    if (polygon_area(quad) <= 0) continue;
    if (std::abs(polygon_area(quad) - D.area) > area_tol) continue;
    if (!polygon_simple(quad, tol)) continue;
    Q.polygons = {quad};
    Q.side_tags = {{-1, D.tag1, -1, D.tag0}};
    built = true;
    break;
  }
  PGN_REQUIRE(built, "degenerate-annulus",
              "cut disk does not develop to a simple quadrilateral");
  PGN_REQUIRE(std::abs(dist(Q.polygons[0][1], Q.polygons[0][2]) - D.len_b1) <=
                      1e-6 * D.scale &&
                  std::abs(dist(Q.polygons[0][3], Q.polygons[0][0]) -
                           D.len_b0) <= 1e-6 * D.scale,
              "degenerate-annulus", "boundary lengths not preserved");

  // split along the shorter diagonal (ties: corner pair (0,2))
  const auto& quad = Q.polygons[0];
  double d02 = dist(quad[0], quad[2]), d13 = dist(quad[1], quad[3]);
  bool in02 = diagonal_inside(quad, 0, 2, tol);
  bool in13 = diagonal_inside(quad, 1, 3, tol);
  PGN_REQUIRE(in02 || in13, "degenerate-annulus",
              "cut quadrilateral has no interior diagonal");
  int di, dj;
  if (in02 && (!in13 || d02 <= d13 + tol.tau_rel * D.scale)) {
    di = 0;
    dj = 2;
  } else {
    di = 1;
    dj = 3;
  }
  SplitResult split = insert_diagonal(Q, 0, di, dj, tol);
  SideRef chord_a = split.map(SideRef{0, 0});
  SideRef chord_b = split.map(SideRef{0, 2});
  Q.portals.push_back({chord_a, chord_b});

  Biface B = as_biface(Q, tol);
  // report the boundary in (b0, b1) order regardless of lex order
  SideRef side3 = split.map(SideRef{0, 3});
  if (!(B.boundary[0] == side3)) {
    std::swap(B.boundary[0], B.boundary[1]);
    std::swap(B.blen[0], B.blen[1]);
    std::swap(B.btag[0], B.btag[1]);
    std::swap(B.bvertex[0], B.bvertex[1]);
  }
  PGN_REQUIRE(B.boundary[0] == side3, "degenerate-annulus",
              "rebuilt biface boundary mismatch");
  return B;
}

}  // namespace detail

inline Biface make_biface_good(const Biface& B, const Tolerances& tol = {}) {
  detail::TubeDevelopment D = detail::develop_tube(B.P, tol);
  return detail::rebuild_good_biface(D, tol);
}

// Glue boundary side s1 of B1 to boundary side s2 of B2 and rebuild the
// resulting 4-triangle tube as a single good biface. The glued vertex must
// be flat, otherwise the concatenation is not a tube.
inline Biface merge_good_bifaces(const Biface& B1, int s1, const Biface& B2,
                                 int s2, const Tolerances& tol = {}) {
  PGN_REQUIRE(s1 >= 0 && s1 < 2 && s2 >= 0 && s2 < 2, "schema-error",
              "boundary side index out of range");
  PGN_REQUIRE(std::abs(B1.blen[s1] - B2.blen[s2]) <=
                  tol.tau_rel * std::max(B1.blen[s1], B2.blen[s2]),
              "not-a-tube", "glued boundary loops differ in length");

  Portalgon T = B1.P;
  ensure_tags(T);
  int off = T.num_polygons();
  for (int p = 0; p < B2.P.num_polygons(); ++p) {
    T.polygons.push_back(B2.P.polygons[p]);
    T.side_tags.push_back(p < static_cast<int>(B2.P.side_tags.size())
                              ? B2.P.side_tags[p]
                              : std::vector<int>(3, -1));
  }
  for (Portal pr : B2.P.portals) {
    pr.a.poly += off;
    pr.b.poly += off;
    T.portals.push_back(pr);
  }
  SideRef ga = B1.boundary[s1];
  SideRef gb{B2.boundary[s2].poly + off, B2.boundary[s2].side};
  T.portals.push_back({ga, gb});

  Skeleton S = build_skeleton(T, tol);
  int vmid = S.vertex_of[ga.poly][ga.side];
  PGN_REQUIRE(std::abs(S.vertex_angle[vmid] - 2 * kPi) <= tol.tau_angle,
              "not-a-tube", "glued vertex is a singularity");
  PGN_REQUIRE(is_tube(T, tol), "not-a-tube",
              "concatenation is not a tube");

  detail::TubeDevelopment D = detail::develop_tube(T, tol);
  return detail::rebuild_good_biface(D, tol);
}

struct BifaceChain {
  std::vector<Biface> pieces;  // ordered from the b0 end of the tube
  std::vector<int> seam_tags;  // tag gluing pieces[i] to pieces[i+1]
  int iterations = 0;          // vertex-deletion rounds that were needed
};

// Reduce a tube to a chain of bifaces: repeatedly delete a maximal
// independent set of interior non-loop vertices of degree <= 10 and
// re-triangulate, until every interior vertex carries a loop edge; then cut
// along all interior loop edges. Per round, at least half the interior
// non-loop vertices have degree <= 10 (annulus Euler count) and no edge
// grows by more than a factor 3 -- both asserted.
inline BifaceChain tube_to_biface_chain(const Portalgon& X,
                                        const Tolerances& tol = {}) {
  PGN_REQUIRE(is_tube(X, tol), "not-a-tube",
              "input surface is not a tube");
  Portalgon T = X;
  ensure_tags(T);
  BifaceChain chain;

  for (int round = 0; round < 64; ++round) {
    Skeleton S = build_skeleton(T, tol);
    std::vector<char> has_loop(S.n_vertices, 0);
    for (const SkelEdge& e : S.edges)
      if (e.loop()) has_loop[e.v0] = 1;
    std::vector<int> cand;
    for (int v = 0; v < S.n_vertices; ++v)
      if (!S.vertex_boundary[v] && !has_loop[v]) cand.push_back(v);
    if (cand.empty()) break;

    int low = 0;
    for (int v : cand)
      if (S.vertex_degree[v] <= 10) low++;
    PGN_REQUIRE(2 * low >= static_cast<int>(cand.size()), "not-a-tube",
                "annulus degree count violated");

    // greedy maximal independent set among the low-degree candidates
    std::vector<char> blocked(S.n_vertices, 0);
    std::vector<std::pair<int, int>> handles;  // representative corner
    for (int v : cand) {
      if (S.vertex_degree[v] > 10 || blocked[v]) continue;
      handles.push_back({S.vertex_corners[v][0].poly,
                         S.vertex_corners[v][0].corner});
      blocked[v] = 1;
      for (const SkelEdge& e : S.edges) {
        if (e.v0 == v) blocked[e.v1] = 1;
        if (e.v1 == v) blocked[e.v0] = 1;
      }
    }
    PGN_REQUIRE(!handles.empty(), "not-a-tube", "empty independent set");

    double max_before = max_side_length(T);
    for (size_t h = 0; h < handles.size(); ++h) {
      Skeleton Scur = build_skeleton(T, tol);
      int vid = Scur.vertex_of[handles[h].first][handles[h].second];
      DeleteVertexResult r = delete_flat_vertex(T, vid, tol);
      for (size_t h2 = h + 1; h2 < handles.size(); ++h2) {
        int np = r.poly_map[handles[h2].first];
        PGN_REQUIRE(np >= 0, "not-a-tube", "independent set vertices overlap");
        handles[h2].first = np;
      }
    }
    triangulate_all(T, tol);
    double max_after = max_side_length(T);
    PGN_REQUIRE(max_after <= 3.0 * max_before * (1 + 1e-9), "not-a-tube",
                "edge growth bound violated in reduction round");
    chain.iterations++;
  }

  // cut along every interior loop edge
  Skeleton S = build_skeleton(T, tol);
  std::vector<int> loops;
  for (size_t k = 0; k < T.portals.size(); ++k) {
    const Portal& pr = T.portals[k];
    int u = S.vertex_of[pr.a.poly][pr.a.side];
    int w = S.vertex_of[pr.a.poly][(pr.a.side + 1) % 3];
    if (u == w && !S.vertex_boundary[u]) loops.push_back(static_cast<int>(k));
  }

  int tag_base = 0;
  for (const auto& row : T.side_tags)
    for (int t : row) tag_base = std::max(tag_base, t + 1);

  SideRef b0_global;
  {
    bool have = false;
    for (int p = 0; p < T.num_polygons() && !have; ++p)
      for (int s = 0; s < 3 && !have; ++s)
        if (!S.sides.matched({p, s})) {
          b0_global = {p, s};
          have = true;
        }
    PGN_REQUIRE(have, "not-a-tube", "tube without boundary");
  }

  CutResult cut = cut_along(T, loops);
  for (size_t i = 0; i < cut.seams.size(); ++i) {
    const CutSeam& seam = cut.seams[i];
    cut.components[seam.comp_a].side_tags[seam.a.poly][seam.a.side] =
        tag_base + static_cast<int>(i);
    cut.components[seam.comp_b].side_tags[seam.b.poly][seam.b.side] =
        tag_base + static_cast<int>(i);
  }

  // order the pieces along the tube starting at b0's component
  int ncomp = static_cast<int>(cut.components.size());
  std::vector<Biface> parsed(ncomp);
  for (int c = 0; c < ncomp; ++c) {
    try {
      parsed[c] = as_biface(cut.components[c], tol);
    } catch (const Error& e) {
      throw Error("not-a-tube",
                  std::string("chain piece is not a biface: ") + e.what());
    }
  }
  int cur = cut.poly_loc[b0_global.poly].first;
  int prev_tag = -1;
  std::vector<char> used(ncomp, 0);
  for (int step = 0; step < ncomp; ++step) {
    PGN_REQUIRE(!used[cur], "not-a-tube", "chain is not a path");
    used[cur] = 1;
    chain.pieces.push_back(parsed[cur]);
    // find the outgoing seam tag (the boundary tag that is not prev_tag,
    // among freshly assigned seam tags)
    int out_tag = -1;
    for (int i = 0; i < 2; ++i) {
      int t = parsed[cur].btag[i];
      if (t >= tag_base && t != prev_tag) out_tag = t;
    }
    if (out_tag < 0) break;  // reached the far end
    chain.seam_tags.push_back(out_tag);
    int nxt = -1;
    for (int c = 0; c < ncomp; ++c) {
      if (c == cur || used[c]) continue;
      for (int i = 0; i < 2; ++i)
        if (parsed[c].btag[i] == out_tag) nxt = c;
    }
    PGN_REQUIRE(nxt >= 0, "not-a-tube", "broken seam in chain");
    prev_tag = out_tag;
    cur = nxt;
  }
  PGN_REQUIRE(chain.pieces.size() == static_cast<size_t>(ncomp),
              "not-a-tube", "chain does not cover all pieces");
  return chain;
}

// Replace a whole tube by one good biface: reduce to a chain, make each
// piece good, then left-fold merges along the seams. The systole lower
// bound `s` is an accounting parameter (it bounds the winding of any
// chord); the construction itself does not consume it.
inline Biface compute_good_biface(const Portalgon& X, double s,
                                  const Tolerances& tol = {}) {
  PGN_REQUIRE(s > 0, "schema-error", "systole bound must be positive");
  BifaceChain chain = tube_to_biface_chain(X, tol);
  Biface A = make_biface_good(chain.pieces[0], tol);
  for (size_t i = 1; i < chain.pieces.size(); ++i) {
    Biface B = make_biface_good(chain.pieces[i], tol);
    int tag = chain.seam_tags[i - 1];
    int sa = A.btag[0] == tag ? 0 : 1;
    int sb = B.btag[0] == tag ? 0 : 1;
    PGN_REQUIRE(A.btag[sa] == tag && B.btag[sb] == tag, "not-a-tube",
                "seam tag lost during merge fold");
    A = merge_good_bifaces(A, sa, B, sb, tol);
  }
  return A;
}

// Verify goodness and classify thin/thick. Throws "not-good" when the
// biface's interior edges do not realize the shortest chord / shortest
// diagonal structure.
inline BifaceClass classify_biface(const Biface& B,
                                   const Tolerances& tol = {}) {
  detail::TubeDevelopment D = detail::develop_tube(B.P, tol);
  double dstar = detail::chord_search(D, tol).len;
  double band = std::max(tol.delta_merge * D.scale, 1e-12);

  bool good = false;
  for (int ei = 0; ei < 2 && !good; ++ei) {
    if (std::abs(B.interior_length(ei) - dstar) > band) continue;
    // cut along e: the disk is the two triangles glued along f; unfold
    // across f and compare f with the quadrilateral's other diagonal
    int fi = 1 - ei;
    const Portal& f = B.P.portals[fi];
    SideIndex idx = build_side_index(B.P);
    RigidMotion tmov = transit_from_partner(B.P, idx, f.a, tol);
    int p = f.a.poly, i = f.a.side;
    int q = f.b.poly, j = f.b.side;
    const auto& tp = B.P.polygons[p];
    Point2 far = tmov(B.P.polygons[q][(j + 2) % 3]);
    std::vector<Point2> quad{tp[(i + 1) % 3], tp[(i + 2) % 3], tp[i], far};
    double lf = dist(quad[0], quad[2]);
    double lother = dist(quad[1], quad[3]);
    bool two_diagonals = polygon_simple(quad, tol) &&
                         diagonal_inside(quad, 1, 3, tol);
    if (!two_diagonals || lf <= lother + band) good = true;
  }
  PGN_REQUIRE(good, "not-good",
              "interior edges do not certify a good biface");

  BifaceClass cls;
  cls.good = true;
  double min_int =
      std::min(B.interior_length(0), B.interior_length(1));
  double max_bnd = std::max(B.blen[0], B.blen[1]);
  cls.thin = (min_int - max_bnd) > band;
  return cls;
}

}  // namespace portalgon
