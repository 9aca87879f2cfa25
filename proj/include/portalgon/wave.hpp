// Multi-source distance waves over a triangulated portalgon.
//
// Given a set V of source vertices ("sites"), every triangle eventually sees
// a finite set of planar lifts of V whose Voronoi diagram, restricted to the
// triangle, is the pre-image of the distance field of V on the surface. The
// wave computes these sets without ever leaving the plane: each triangle
// keeps a growing point set X, and whenever some x in X owns a piece of a
// side, the portal glued to that side proposes the transported copy of x to
// the neighbouring triangle. The proposal is dated by the distance from x to
// its piece of the side -- the moment the front of x first touches the
// portal. Processing proposals in date order makes every insertion final:
// the X sets only grow, so nothing ever has to be retracted.
//
// The per-side bookkeeping deserves care. For each directed side we maintain
// the ordered list of cells
//
//     Vor(x, X) ∩ side,   x in X,
//
// as closed parameter intervals. A new point's winning set on a line is an
// interval, so an insertion touches a contiguous run of the list; we locate
// the run by dichotomy and pay only for the entries that change (their
// cumulative number over k insertions is at most 5k). A from-scratch rebuild
// hides behind WaveConfig::naive_cells as a differential twin for testing
// the incremental path, never as a silent fallback.
//
// Degenerate single-point cells are deliberately kept: an exact multi-way
// tie pins a cell [u, u], and the proposals sourced from such cells are what
// carries the wave across symmetric instances (the unit square torus is the
// canonical example -- drop them and the wave stalls there).

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <tuple>
#include <vector>

#include "io.hpp"
#include "portalgon.hpp"
#include "skeleton.hpp"
#include "surgery.hpp"

namespace portalgon {

// One lift of a site in the frame of a particular triangle.
struct WavePoint {
  Point2 pos;
  int site = -1;  // vertex class of the source site
};

// Vor(owner, X) ∩ side as a closed interval in side parameters (0 at the
// side's start corner, 1 at its end). lo == hi is a real cell: an exact
// multi-way tie. Lists are kept sorted by (lo, hi).
struct SideCell {
  int owner = -1;  // index into the triangle's point set
  double lo = 0.0, hi = 0.0;
};

// One cell-list edit caused by an insertion.
struct CellChange {
  int owner = -1;
  bool removed = false;
  double lo = 0.0, hi = 0.0;  // the cell after the edit; meaningless if removed
};

// Rebuild the cell list of the side A→B from scratch: every point of X gets
// the sub-interval where it is weakly nearest. Quadratic in |X|; this is the
// reference the incremental path is diffed against. The gap
// d²(P(u), x_o) − d²(P(u), x_j) is affine in u, so each constraint clips the
// running interval at one root.
inline void rebuild_side_cells(std::vector<SideCell>& cells, Point2 A,
                               Point2 B, const std::vector<WavePoint>& X) {
  cells.clear();
  Point2 dir = B - A;
  auto at = [&](double u) { return A + dir * u; };
  for (int o = 0; o < static_cast<int>(X.size()); ++o) {
    double lo = 0.0, hi = 1.0;
    bool dead = false;
    for (int j = 0; j < static_cast<int>(X.size()) && !dead; ++j) {
      if (j == o) continue;
      double ga = norm2(at(lo) - X[o].pos) - norm2(at(lo) - X[j].pos);
      double gb = norm2(at(hi) - X[o].pos) - norm2(at(hi) - X[j].pos);
      if (ga <= 0 && gb <= 0) continue;   // constraint not binding
      if (ga > 0 && gb > 0) {             // o loses everywhere
        dead = true;
        continue;
      }
      double r = lo + (hi - lo) * (ga / (ga - gb));
      if (ga > 0) lo = r; else hi = r;
    }
    if (!dead && hi >= lo) cells.push_back({o, lo, hi});
  }
  std::sort(cells.begin(), cells.end(),
            [](const SideCell& a, const SideCell& b) {
              if (a.lo != b.lo) return a.lo < b.lo;
              if (a.hi != b.hi) return a.hi < b.hi;
              return a.owner < b.owner;
            });
}

// Incremental counterpart: X.back() (index zi) was just inserted; restore
// the list and report every entry that changed. Where the new point wins is
// where the convex function u ↦ d²(P(u), z) − min_o d²(P(u), x_o) is
// negative -- an interval -- so the affected cells form a contiguous run.
// An unaffected cell tells us, through the slope of its own affine gap, on
// which side of it that interval can hide; that is the dichotomy. Affected
// cells keep their {gap ≥ 0} part, which may be empty or a single point.
//
// A new point that never strictly wins may still tie the reigning owner
// where the convex function bottoms out at exactly zero; closed cells give
// it the point cell [u, u] then, and since an affine piece that touches
// zero from above does so at a cell endpoint, the dichotomy passes such
// ties on its way to the minimum and can record them.
inline std::vector<CellChange> insert_side_cell(std::vector<SideCell>& cells,
                                                Point2 A, Point2 B,
                                                const std::vector<WavePoint>& X,
                                                int zi) {
  std::vector<CellChange> out;
  const Point2 z = X[zi].pos;
  const Point2 dir = B - A;
  if (cells.empty()) {  // first point: it owns everything
    cells.push_back({zi, 0.0, 1.0});
    out.push_back({zi, false, 0.0, 1.0});
    return out;
  }
  auto at = [&](double u) { return A + dir * u; };
  auto gap = [&](int o, double u) {
    Point2 p = at(u);
    return norm2(p - z) - norm2(p - X[o].pos);
  };
  auto affected = [&](int j) {
    return gap(cells[j].owner, cells[j].lo) < 0 ||
           gap(cells[j].owner, cells[j].hi) < 0;
  };
  const int m = static_cast<int>(cells.size());
  int found = -1;
  int tie_cell = -1;
  double tie_u = 0.0;
  bool tie_full = false;
  for (int lo = 0, hi = m - 1; lo <= hi;) {
    int mid = (lo + hi) / 2;
    double gl = gap(cells[mid].owner, cells[mid].lo);
    double gh = gap(cells[mid].owner, cells[mid].hi);
    if (gl < 0 || gh < 0) {
      found = mid;
      break;
    }
    if (gl == 0) {
      tie_cell = mid;
      tie_u = cells[mid].lo;
    } else if (gh == 0) {
      tie_cell = mid;
      tie_u = cells[mid].hi;
    }
    double slope = -2.0 * dot(dir, z - X[cells[mid].owner].pos);
    if (slope > 0) {
      hi = mid - 1;  // gap grows rightward: look left
    } else if (slope < 0) {
      lo = mid + 1;  // gap grows leftward: look right
    } else {  // flat here: this is the global minimum
      if (gl == 0) {
        tie_cell = mid;
        tie_full = true;  // z ties the owner along the whole cell
      }
      break;
    }
  }
  if (found < 0) {
    if (tie_cell < 0) return out;  // z wins nothing on this side
    SideCell zc{zi, tie_full ? cells[tie_cell].lo : tie_u,
                tie_full ? cells[tie_cell].hi : tie_u};
    int pos = tie_cell;
    if (tie_full ? zi > cells[tie_cell].owner : tie_u == cells[tie_cell].hi)
      pos++;
    cells.insert(cells.begin() + pos, zc);
    out.push_back({zi, false, zc.lo, zc.hi});
    return out;
  }
  int i0 = found, i1 = found;
  while (i0 > 0 && affected(i0 - 1)) --i0;
  while (i1 + 1 < m && affected(i1 + 1)) ++i1;
  auto root_in = [&](int j) {
    double a = gap(cells[j].owner, cells[j].lo);
    double b = gap(cells[j].owner, cells[j].hi);
    return cells[j].lo + (cells[j].hi - cells[j].lo) * (a / (a - b));
  };
  double ga0 = gap(cells[i0].owner, cells[i0].lo);
  double gb1 = gap(cells[i1].owner, cells[i1].hi);
  double zl = ga0 < 0 ? cells[i0].lo : root_in(i0);
  double zr = gb1 < 0 ? cells[i1].hi : root_in(i1);
  std::vector<SideCell> repl;
  if (ga0 >= 0) {  // i0 keeps its left part (a point if the tie is exact)
    repl.push_back({cells[i0].owner, cells[i0].lo, zl});
    out.push_back({cells[i0].owner, false, cells[i0].lo, zl});
  }
  repl.push_back({zi, zl, zr});
  out.push_back({zi, false, zl, zr});
  if (gb1 >= 0) {
    repl.push_back({cells[i1].owner, zr, cells[i1].hi});
    out.push_back({cells[i1].owner, false, zr, cells[i1].hi});
  }
  for (int j = i0; j <= i1; ++j) {
    bool kept = (j == i0 && ga0 >= 0) || (j == i1 && gb1 >= 0);
    if (!kept) out.push_back({cells[j].owner, true, 0.0, 0.0});
  }
  cells.erase(cells.begin() + i0, cells.begin() + i1 + 1);
  cells.insert(cells.begin() + i0, repl.begin(), repl.end());
  return out;
}

// Diff two cell lists around the insertion of point zi. Exact comparison is
// legitimate: a rebuild clips constraints in index order and the new point
// sits at the end, so intervals it does not bind are reproduced bit for bit.
inline std::vector<CellChange> diff_side_cells(
    const std::vector<SideCell>& before, const std::vector<SideCell>& after,
    int zi) {
  std::vector<CellChange> out;
  std::map<int, std::pair<double, double>> prev;
  for (const SideCell& c : before) prev[c.owner] = {c.lo, c.hi};
  std::set<int> seen;
  for (const SideCell& c : after) {
    seen.insert(c.owner);
    auto it = prev.find(c.owner);
    if (it == prev.end()) {
      if (c.owner == zi) out.push_back({c.owner, false, c.lo, c.hi});
      continue;
    }
    if (it->second.first != c.lo || it->second.second != c.hi)
      out.push_back({c.owner, false, c.lo, c.hi});
  }
  for (const SideCell& c : before)
    if (!seen.count(c.owner)) out.push_back({c.owner, true, 0.0, 0.0});
  return out;
}

struct WaveConfig {
  long long max_events = 10'000'000;  // proposals popped before giving up
  bool naive_cells = false;  // rebuild cell lists from scratch on insertion
  bool check = false;        // verify side-cell invariants after each step
};

struct WaveStats {
  long long popped = 0;            // proposals taken off the queue
  long long inserted = 0;          // proposals that grew a point set
  long long dedup_dropped = 0;     // proposals killed by the merge radius
  double last_date = 0.0;          // largest date processed so far
  long long date_regressions = 0;  // pops dated < last_date − merge radius
};

// A proposal: insert lift x into the point set of `tri`, delivered through
// `side`. Sourced by one cell of the glued side; dated by the distance from
// that cell's owner to the cell.
struct CandidateEvent {
  double date = 0.0;
  int tri = -1, side = -1;
  Point2 x;              // proposed lift, in the target triangle's frame
  int src_dirside = -1;  // directed side (3·poly + side) that proposed it
  int src_owner = -1;    // owning point index on that side
};

struct CandidateEventOrder {
  bool operator()(const CandidateEvent& a, const CandidateEvent& b) const {
    if (a.date != b.date) return a.date < b.date;
    if (a.tri != b.tri) return a.tri < b.tri;
    if (a.side != b.side) return a.side < b.side;
    if (a.x.x != b.x.x) return a.x.x < b.x.x;
    return a.x.y < b.x.y;
  }
};

struct WaveState {
  Portalgon T;
  Skeleton skel;
  Tolerances tol;
  WaveConfig cfg;
  double merge_radius = 0.0;  // δ_merge scaled by the instance
  std::vector<int> sites;     // site vertex classes, ascending
  std::vector<char> is_site;  // indexed by vertex class

  std::vector<std::vector<WavePoint>> X;     // per triangle
  std::vector<int> twin;                     // dirside → glued dirside
  std::vector<RigidMotion> push;             // dirside → frame of its twin
  std::vector<std::vector<SideCell>> cells;  // per dirside
  std::vector<long long> cell_moves;  // per dirside: Σ (1 + changed entries)
  std::vector<long long> insertions;  // per triangle, seeds included

  std::set<CandidateEvent, CandidateEventOrder> queue;
  std::map<std::pair<int, int>, CandidateEvent> event_of;  // (dirside, owner)
  WaveStats stats;

  int dirside(int tri, int side) const { return 3 * tri + side; }
  std::pair<Point2, Point2> side_seg(int d) const {
    return side_points(T, {d / 3, d % 3});
  }
};

namespace detail {

inline int find_near(const std::vector<WavePoint>& X, Point2 p, double r) {
  for (int i = 0; i < static_cast<int>(X.size()); ++i)
    if (dist(X[i].pos, p) <= r) return i;
  return -1;
}

inline void drop_event(WaveState& st, int d, int owner) {
  auto it = st.event_of.find({d, owner});
  if (it == st.event_of.end()) return;
  st.queue.erase(it->second);
  st.event_of.erase(it);
}

// (Re)derive the proposal sourced by one cell: the transported owner, dated
// by the owner's distance to its piece of the side. No proposal if the
// transported copy already lives in the target set.
inline void make_event(WaveState& st, int d, const SideCell& cell) {
  drop_event(st, d, cell.owner);
  int target = st.twin[d];
  Point2 opos = st.X[d / 3][cell.owner].pos;
  Point2 x = st.push[d](opos);
  if (find_near(st.X[target / 3], x, st.merge_radius) >= 0) return;
  auto [A, B] = st.side_seg(d);
  Point2 a = A + (B - A) * cell.lo;
  Point2 b = A + (B - A) * cell.hi;
  CandidateEvent ev{point_segment_dist(opos, a, b), target / 3, target % 3,
                    x, d, cell.owner};
  st.queue.insert(ev);
  st.event_of[{d, cell.owner}] = ev;
}

inline void check_cells(const WaveState& st, int tri) {
  for (int s = 0; s < 3; ++s) {
    const auto& cs = st.cells[st.dirside(tri, s)];
    PGN_REQUIRE(!cs.empty(), "invariant-breach", "side with no cells");
    double eps = 1e-9;
    PGN_REQUIRE(std::abs(cs.front().lo) <= eps, "invariant-breach",
                "side cells do not start at the side's start");
    PGN_REQUIRE(std::abs(cs.back().hi - 1.0) <= eps, "invariant-breach",
                "side cells do not reach the side's end");
    for (size_t i = 0; i + 1 < cs.size(); ++i) {
      bool same =  // duplicate interval: a whole-cell tie
          cs[i].lo == cs[i + 1].lo && cs[i].hi == cs[i + 1].hi;
      PGN_REQUIRE(same || std::abs(cs[i].hi - cs[i + 1].lo) <= eps,
                  "invariant-breach",
                  "gap or overlap between adjacent side cells");
    }
    for (const SideCell& c : cs)
      PGN_REQUIRE(c.hi >= c.lo, "invariant-breach", "inverted side cell");
  }
}

}  // namespace detail

// Insert one lift into a triangle's set and restore its three cell lists,
// reporting every entry that changed. Seeding and event processing both go
// through here, so the accounting treats them alike.
inline std::array<std::vector<CellChange>, 3> update_side_cells(WaveState& st,
                                                                int tri,
                                                                WavePoint z) {
  PGN_REQUIRE(detail::find_near(st.X[tri], z.pos, st.merge_radius) < 0,
              "invariant-breach", "inserted lift duplicates an existing one");
  st.X[tri].push_back(z);
  st.insertions[tri]++;
  int zi = static_cast<int>(st.X[tri].size()) - 1;
  std::array<std::vector<CellChange>, 3> changes;
  for (int s = 0; s < 3; ++s) {
    int d = st.dirside(tri, s);
    auto [A, B] = st.side_seg(d);
    if (st.cfg.naive_cells) {
      std::vector<SideCell> before = st.cells[d];
      rebuild_side_cells(st.cells[d], A, B, st.X[tri]);
      changes[s] = diff_side_cells(before, st.cells[d], zi);
    } else {
      changes[s] = insert_side_cell(st.cells[d], A, B, st.X[tri], zi);
    }
    long long extra =
        changes[s].empty() ? 0 : static_cast<long long>(changes[s].size()) - 1;
    st.cell_moves[d] += 1 + extra;
  }
  return changes;
}

inline WaveState wave_init(const Portalgon& P,
                           const std::vector<int>& site_vertices,
                           const WaveConfig& cfg = {},
                           const Tolerances& tol = {}) {
  ValidationResult vr = validate(P, tol);
  if (!vr.ok()) throw Error(vr.issues[0].code, vr.issues[0].message);
  const SurfaceReport& rep = *vr.report;
  PGN_REQUIRE(rep.all_triangles, "not-triangular",
              "the wave walks triangles; triangulate first");
  PGN_REQUIRE(rep.closed, "not-closed",
              "the wave needs a surface without boundary");

  WaveState st;
  st.T = P;
  ensure_tags(st.T);
  st.skel = build_skeleton(st.T, tol);
  st.tol = tol;
  st.cfg = cfg;
  st.merge_radius = tol.delta_merge * instance_scale(st.T);

  PGN_REQUIRE(!site_vertices.empty(), "no-sites", "need at least one site");
  st.is_site.assign(st.skel.n_vertices, 0);
  for (int v : site_vertices) {
    PGN_REQUIRE(v >= 0 && v < st.skel.n_vertices, "schema-error",
                "site vertex id out of range");
    st.is_site[v] = 1;
  }
  for (int v = 0; v < st.skel.n_vertices; ++v)
    if (st.is_site[v]) st.sites.push_back(v);
  for (int v : rep.singular_vertices)
    PGN_REQUIRE(st.is_site[v], "sites-missing-singularity",
                "every singular vertex must be a site");
  for (const auto& comp : face_components(st.T)) {
    bool hit = false;
    for (int f : comp)
      for (int c = 0; c < 3 && !hit; ++c)
        hit = st.is_site[st.skel.vertex(f, c)] != 0;
    PGN_REQUIRE(hit, "no-sites", "a connected component has no site");
  }

  const int F = st.T.num_polygons();
  st.X.assign(F, {});
  st.cells.assign(3 * F, {});
  st.cell_moves.assign(3 * F, 0);
  st.insertions.assign(F, 0);
  st.twin.assign(3 * F, -1);
  st.push.assign(3 * F, RigidMotion::identity());
  for (const Portal& pr : st.T.portals) {
    int da = st.dirside(pr.a.poly, pr.a.side);
    int db = st.dirside(pr.b.poly, pr.b.side);
    st.twin[da] = db;
    st.twin[db] = da;
    st.push[da] = transit_from_partner(st.T, st.skel.sides, pr.b, tol);
    st.push[db] = transit_from_partner(st.T, st.skel.sides, pr.a, tol);
  }

  // Seed: corners whose vertex class is a site enter at date zero through
  // the same insertion path later proposals take. Distinct corners of one
  // triangle may carry the same site (a torus does); they are distinct
  // lifts and all of them seed.
  for (int f = 0; f < F; ++f)
    for (int c = 0; c < 3; ++c) {
      int v = st.skel.vertex(f, c);
      if (!st.is_site[v]) continue;
      Point2 p = st.T.polygons[f][c];
      if (detail::find_near(st.X[f], p, st.merge_radius) >= 0) continue;
      update_side_cells(st, f, {p, v});
    }
  for (int d = 0; d < 3 * F; ++d)
    for (const SideCell& cell : st.cells[d]) detail::make_event(st, d, cell);
  return st;
}

// Process the earliest proposal; false once the queue is empty. Dates are
// expected to come out non-decreasing, but that is a consequence of exact
// arithmetic we do not have -- regressions beyond the merge radius are
// counted in the stats rather than assumed away.
inline bool wave_step(WaveState& st) {
  if (st.queue.empty()) return false;
  CandidateEvent ev = *st.queue.begin();
  st.queue.erase(st.queue.begin());
  st.event_of.erase({ev.src_dirside, ev.src_owner});
  st.stats.popped++;
  if (ev.date < st.stats.last_date - st.merge_radius)
    st.stats.date_regressions++;
  st.stats.last_date = std::max(st.stats.last_date, ev.date);

  if (detail::find_near(st.X[ev.tri], ev.x, st.merge_radius) >= 0) {
    st.stats.dedup_dropped++;  // a sibling proposal landed first
    return true;
  }
  int site = st.X[ev.src_dirside / 3][ev.src_owner].site;

  // Queued proposals that would re-deliver this same lift through another
  // side of the triangle are obsolete; hunt them down now. (The pop-time
  // dedup above would catch them anyway -- this keeps the queue honest.)
  for (int s = 0; s < 3; ++s) {
    int dout = st.dirside(ev.tri, s);
    int din = st.twin[dout];
    Point2 y = st.push[dout](ev.x);
    for (const SideCell& cell : st.cells[din])
      if (dist(st.X[din / 3][cell.owner].pos, y) <= st.merge_radius)
        detail::drop_event(st, din, cell.owner);
  }

  auto changes = update_side_cells(st, ev.tri, {ev.x, site});
  st.stats.inserted++;
  for (int s = 0; s < 3; ++s) {
    int d = st.dirside(ev.tri, s);
    for (const CellChange& ch : changes[s]) {
      if (ch.removed) {
        detail::drop_event(st, d, ch.owner);
      } else {
        detail::make_event(st, d, {ch.owner, ch.lo, ch.hi});
      }
    }
  }
  if (st.cfg.check) detail::check_cells(st, ev.tri);
  return true;
}

// Run to quiescence. The terminal X sets contain, per triangle, every lift
// of V whose Voronoi cell meets the triangle; their in-triangle Voronoi
// diagrams are the pre-image of the surface Voronoi diagram of V.
inline WaveState wave_run(const Portalgon& P,
                          const std::vector<int>& site_vertices,
                          const WaveConfig& cfg = {},
                          const Tolerances& tol = {}) {
  WaveState st = wave_init(P, site_vertices, cfg, tol);
  while (!st.queue.empty()) {
    PGN_REQUIRE(st.stats.popped < st.cfg.max_events, "event-budget-exceeded",
                "the wave exceeded its event budget");
    wave_step(st);
  }
  return st;
}

// Distance to the site set as the terminal wave sees it from one triangle.
inline double wave_distance(const WaveState& st, int tri, Point2 p) {
  PGN_REQUIRE(!st.X[tri].empty(), "no-sites", "triangle was never reached");
  double best = std::numeric_limits<double>::infinity();
  for (const WavePoint& w : st.X[tri]) best = std::min(best, dist(p, w.pos));
  return best;
}

// ---------------------------------------------------------------------------
// Voronoi overlay
//
// The terminal state induces, inside each triangle, the planar Voronoi
// diagram of its point set. Clipping each planar cell to the triangle and
// re-gluing along the portals yields a refinement T' of T in which the
// surface Voronoi diagram of the sites is a marked subgraph: bisector pieces
// interior to a triangle always belong to it, and pieces lying on a portal
// are marked exactly when the two sides disagree about the nearest lift. The
// test is "owners differ under the transit", not "site labels differ": a
// square torus with one site has a nonempty cut locus even though every face
// is owned by that site, while the diagonal of its fundamental square is
// owned by the same lift on both sides and must stay invisible.
//
// Coordinates get snapped to the merge radius: cell corners collapse onto
// triangle corners and sides, side subdivision points are unified across
// each portal (so the two sides of a portal are cut identically), and cells
// thinner than the radius disappear -- their neighbours inherit identical
// snapped geometry, so the seams still close up. Faces remember which input
// triangle and which lift they came from; marking rides on side_tags
// (tag 1 = Voronoi) and survives triangulation, whose diagonals get tag −1.
// ---------------------------------------------------------------------------

struct VoronoiOverlay {
  Portalgon P;   // triangulated refinement of the input
  Skeleton skel;
  double merge_radius = 0.0;       // snap radius the overlay was built with
  std::vector<int> face_source;    // face → input triangle
  std::vector<int> face_site;      // face → owning site (vertex class)
  std::vector<Point2> face_owner;  // face → owning lift, in face coordinates
  std::vector<int> voronoi_edges;  // marked skeleton edges, ascending
  std::vector<char> edge_is_voronoi;  // indexed by skeleton edge id
};

inline VoronoiOverlay voronoi_overlay(const WaveState& st) {
  const Portalgon& T = st.T;
  const double snap = st.merge_radius;
  const int F = T.num_polygons();

  // Planar Voronoi cells, clipped to their triangle. The halfplane gap
  // d²(p, x_o) − d²(p, x_j) is affine in p, so plain polygon clipping with
  // interpolated crossings is exact in spirit and stable in practice.
  struct Cell {
    int tri, owner;
    std::vector<Point2> pts;
  };
  std::vector<Cell> cells;
  for (int f = 0; f < F; ++f) {
    PGN_REQUIRE(!st.X[f].empty(), "no-sites", "triangle was never reached");
    const auto& Xf = st.X[f];
    for (int o = 0; o < static_cast<int>(Xf.size()); ++o) {
      std::vector<Point2> poly = T.polygons[f];
      for (int j = 0; j < static_cast<int>(Xf.size()) && poly.size() >= 3;
           ++j) {
        if (j == o) continue;
        std::vector<Point2> next;
        int m = static_cast<int>(poly.size());
        for (int i = 0; i < m; ++i) {
          Point2 a = poly[i], b = poly[(i + 1) % m];
          double ga = norm2(a - Xf[o].pos) - norm2(a - Xf[j].pos);
          double gb = norm2(b - Xf[o].pos) - norm2(b - Xf[j].pos);
          if (ga <= 0) next.push_back(a);
          if ((ga < 0 && gb > 0) || (ga > 0 && gb < 0))
            next.push_back(a + (b - a) * (ga / (ga - gb)));
        }
        poly = std::move(next);
      }
      if (poly.size() >= 3 && polygon_area(poly) > 0)
        cells.push_back({f, o, std::move(poly)});
    }
  }

  // Classify every cell corner against its triangle: triangle corner, point
  // on a side (with parameter), or interior.
  struct Cls {
    int corner = -1;   // triangle corner id, or
    int side = -1;     // local side id with raw parameter u, or interior
    double u = 0.0;
    Point2 p;
  };
  std::vector<std::vector<Cls>> cls(cells.size());
  std::vector<std::vector<double>> raw_params(3 * F);
  std::vector<std::vector<Point2>> raw_interior(F);
  for (size_t ci = 0; ci < cells.size(); ++ci) {
    const Cell& cell = cells[ci];
    const auto& tri = T.polygons[cell.tri];
    for (Point2 p : cell.pts) {
      Cls c;
      c.p = p;
      for (int k = 0; k < 3 && c.corner < 0; ++k)
        if (dist(p, tri[k]) <= snap) c.corner = k;
      if (c.corner < 0) {
        double best = snap;
        for (int s = 0; s < 3; ++s) {
          Point2 a = tri[s], b = tri[(s + 1) % 3];
          double d = point_segment_dist(p, a, b);
          if (d <= best) {
            best = d;
            c.side = s;
            c.u = std::clamp(dot(p - a, b - a) / norm2(b - a), 0.0, 1.0);
          }
        }
        if (c.side >= 0)
          raw_params[3 * cell.tri + c.side].push_back(c.u);
        else
          raw_interior[cell.tri].push_back(p);
      }
      cls[ci].push_back(c);
    }
  }

  // Canonical subdivision of each portal: cluster the raw parameters of both
  // sides jointly (one side mirrored), so the two sides are cut at exactly
  // mirrored parameters. Clusters falling onto a corner dissolve into it.
  std::vector<std::vector<double>> ladder(3 * F);  // includes the 0/1 rails
  for (const Portal& pr : T.portals) {
    int da = 3 * pr.a.poly + pr.a.side;
    int db = 3 * pr.b.poly + pr.b.side;
    double len = std::max(side_length(T, pr.a), 1e-300);
    double gap = snap / len;
    std::vector<double> merged = raw_params[da];
    for (double u : raw_params[db]) merged.push_back(1.0 - u);
    std::sort(merged.begin(), merged.end());
    std::vector<double> canon;
    for (size_t i = 0; i < merged.size();) {
      size_t j = i + 1;
      double sum = merged[i];
      while (j < merged.size() && merged[j] - merged[j - 1] <= gap)
        sum += merged[j++];
      double mean = sum / static_cast<double>(j - i);
      if (mean > gap && mean < 1.0 - gap) canon.push_back(mean);
      i = j;
    }
    ladder[da].push_back(0.0);
    for (double u : canon) ladder[da].push_back(u);
    ladder[da].push_back(1.0);
    ladder[db].push_back(0.0);
    for (size_t i = canon.size(); i-- > 0;)
      ladder[db].push_back(1.0 - canon[i]);
    ladder[db].push_back(1.0);
  }

  // Interior snap targets, per triangle: greedy clusters of the raw points,
  // represented by their means. Shared Voronoi vertices land on the same
  // representative bit for bit.
  std::vector<std::vector<Point2>> interior_reps(F);
  for (int f = 0; f < F; ++f) {
    const auto& pts = raw_interior[f];
    if (pts.empty()) continue;
    detail::UnionFind uf(static_cast<int>(pts.size()));
    for (size_t i = 0; i < pts.size(); ++i)
      for (size_t j = i + 1; j < pts.size(); ++j)
        if (dist(pts[i], pts[j]) <= snap)
          uf.unite(static_cast<int>(i), static_cast<int>(j));
    std::map<int, std::pair<Point2, int>> acc;
    for (size_t i = 0; i < pts.size(); ++i) {
      auto& a = acc[uf.find(static_cast<int>(i))];
      a.first = a.first + pts[i];
      a.second++;
    }
    for (auto& [root, a] : acc)
      interior_reps[f].push_back(a.first * (1.0 / a.second));
  }

  // Rebuild each cell with snapped coordinates, inserting the canonical
  // subdivision points along side-lying edges so that every polygon edge on
  // a side spans exactly one ladder step.
  struct Node {
    Point2 p;
    int corner = -1;
    int side = -1;
    double u = 0.0;
  };
  auto resolve = [&](int tri, const Cls& c) -> Node {
    const auto& tpoly = T.polygons[tri];
    Node n;
    if (c.corner >= 0) {
      n.corner = c.corner;
      n.p = tpoly[c.corner];
      return n;
    }
    if (c.side >= 0) {
      const auto& lad = ladder[3 * tri + c.side];
      PGN_REQUIRE(!lad.empty(), "invariant-breach",
                  "side parameter on an unglued side");
      double bu = lad[0];
      for (double v : lad)
        if (std::abs(v - c.u) < std::abs(bu - c.u)) bu = v;
      if (bu == 0.0 || bu == 1.0) {
        n.corner = bu == 0.0 ? c.side : (c.side + 1) % 3;
        n.p = tpoly[n.corner];
        return n;
      }
      n.side = c.side;
      n.u = bu;
      Point2 a = tpoly[c.side], b = tpoly[(c.side + 1) % 3];
      n.p = a + (b - a) * bu;
      return n;
    }
    PGN_REQUIRE(!interior_reps[tri].empty(), "invariant-breach",
                "interior point with no snap target");
    Point2 bp = interior_reps[tri][0];
    for (Point2 q : interior_reps[tri])
      if (dist(q, c.p) < dist(bp, c.p)) bp = q;
    n.p = bp;
    return n;
  };
  // Parameter of a node on a given local side, if it lies there.
  auto param_on = [](const Node& n, int s) -> double {
    if (n.side == s) return n.u;
    if (n.corner == s) return 0.0;
    if (n.corner == (s + 1) % 3) return 1.0;
    return -1.0;
  };

  Portalgon out;
  std::vector<int> face_source, face_site;
  std::vector<Point2> face_owner;
  std::vector<std::vector<Node>> face_nodes;
  for (size_t ci = 0; ci < cells.size(); ++ci) {
    const Cell& cell = cells[ci];
    std::vector<Node> nodes;
    for (const Cls& c : cls[ci]) {
      Node n = resolve(cell.tri, c);
      if (!nodes.empty() && nodes.back().p.x == n.p.x &&
          nodes.back().p.y == n.p.y)
        continue;
      nodes.push_back(n);
    }
    while (nodes.size() > 1 && nodes.front().p.x == nodes.back().p.x &&
           nodes.front().p.y == nodes.back().p.y)
      nodes.pop_back();
    std::vector<Node> full;
    for (size_t i = 0; i < nodes.size(); ++i) {
      const Node& n1 = nodes[i];
      const Node& n2 = nodes[(i + 1) % nodes.size()];
      full.push_back(n1);
      for (int s = 0; s < 3; ++s) {
        double ua = param_on(n1, s), ub = param_on(n2, s);
        if (ua < 0 || ub < 0 || ua >= ub) continue;
        const auto& lad = ladder[3 * cell.tri + s];
        Point2 a = T.polygons[cell.tri][s];
        Point2 b = T.polygons[cell.tri][(s + 1) % 3];
        for (double v : lad)
          if (v > ua && v < ub)
            full.push_back({a + (b - a) * v, -1, s, v});
        break;
      }
    }
    std::vector<Point2> pts;
    for (const Node& n : full) pts.push_back(n.p);
    if (pts.size() < 3 || polygon_area(pts) <= 0) continue;  // collapsed
    out.polygons.push_back(pts);
    face_nodes.push_back(full);
    face_source.push_back(cell.tri);
    face_site.push_back(st.X[cell.tri][cell.owner].site);
    face_owner.push_back(st.X[cell.tri][cell.owner].pos);
  }
  ensure_tags(out);

  // Register every polygon edge: side-lying edges claim their ladder step,
  // the rest pair up inside their triangle by snapped endpoints.
  std::map<std::pair<int, int>, SideRef> claim;  // (dirside, step) → side
  std::map<std::tuple<int, double, double, double, double>,
           std::vector<SideRef>>
      inner;
  for (size_t f = 0; f < face_nodes.size(); ++f) {
    const auto& nodes = face_nodes[f];
    int tri = face_source[f];
    int n = static_cast<int>(nodes.size());
    for (int i = 0; i < n; ++i) {
      const Node& n1 = nodes[i];
      const Node& n2 = nodes[(i + 1) % n];
      SideRef ref{static_cast<int>(f), i};
      int on = -1;
      double ua = 0, ub = 0;
      for (int s = 0; s < 3 && on < 0; ++s) {
        double a = param_on(n1, s), b = param_on(n2, s);
        if (a >= 0 && b >= 0) {
          on = s;
          ua = a;
          ub = b;
        }
      }
      if (on < 0) {
        Point2 p = n1.p, q = n2.p;
        if (!lex_less(p, q)) std::swap(p, q);
        inner[{tri, p.x, p.y, q.x, q.y}].push_back(ref);
        continue;
      }
      PGN_REQUIRE(ua < ub, "invariant-breach",
                  "cell walks a triangle side backwards");
      const auto& lad = ladder[3 * tri + on];
      int step = -1;
      for (size_t k = 0; k + 1 < lad.size(); ++k)
        if (lad[k] == ua) step = static_cast<int>(k);
      PGN_REQUIRE(step >= 0 && lad[step + 1] == ub, "invariant-breach",
                  "side piece does not span one ladder step");
      auto ins = claim.insert({{3 * tri + on, step}, ref});
      PGN_REQUIRE(ins.second, "invariant-breach",
                  "two cells claim the same side piece");
    }
  }
  for (const auto& [key, refs] : inner) {
    PGN_REQUIRE(refs.size() == 2, "invariant-breach",
                "interior bisector piece is not shared by two cells");
    out.portals.push_back({refs[0], refs[1]});
    out.side_tags[refs[0].poly][refs[0].side] = 1;  // always a Voronoi edge
    out.side_tags[refs[1].poly][refs[1].side] = 1;
  }
  for (const Portal& pr : T.portals) {
    int da = 3 * pr.a.poly + pr.a.side;
    int db = 3 * pr.b.poly + pr.b.side;
    int steps = static_cast<int>(ladder[da].size()) - 1;
    for (int i = 0; i < steps; ++i) {
      auto ia = claim.find({da, i});
      auto ib = claim.find({db, steps - 1 - i});
      PGN_REQUIRE(ia != claim.end() && ib != claim.end(), "invariant-breach",
                  "portal piece not covered by a cell");
      out.portals.push_back({ia->second, ib->second});
      // Marked iff the two sides disagree about the nearest lift.
      Point2 qa = st.push[da](face_owner[ia->second.poly]);
      if (dist(qa, face_owner[ib->second.poly]) > snap) {
        out.side_tags[ia->second.poly][ia->second.side] = 1;
        out.side_tags[ib->second.poly][ib->second.side] = 1;
      }
    }
  }

  // Triangulate each cell in place; pieces inherit their cell's attribution
  // and the marking rides along on the tags.
  const int base = out.num_polygons();
  for (int f = 0; f < base; ++f) {
    int before = out.num_polygons();
    triangulate_polygon(out, f);
    for (int g = before; g < out.num_polygons(); ++g) {
      face_source.push_back(face_source[f]);
      face_site.push_back(face_site[f]);
      face_owner.push_back(face_owner[f]);
    }
  }

  ValidationResult vr = validate(out, st.tol);
  PGN_REQUIRE(vr.ok(), "invariant-breach",
              "overlay failed validation: " +
                  (vr.issues.empty() ? std::string("?") : vr.issues[0].code));

  VoronoiOverlay ov;
  ov.P = std::move(out);
  ov.skel = build_skeleton(ov.P, st.tol);
  ov.merge_radius = st.merge_radius;
  ov.face_source = std::move(face_source);
  ov.face_site = std::move(face_site);
  ov.face_owner = std::move(face_owner);
  ov.edge_is_voronoi.assign(ov.skel.edges.size(), 0);
  for (int e = 0; e < static_cast<int>(ov.skel.edges.size()); ++e)
    if (side_tag(ov.P, ov.skel.edges[e].a) == 1) {
      ov.edge_is_voronoi[e] = 1;
      ov.voronoi_edges.push_back(e);
    }
  return ov;
}

// Degrees of the marked subgraph per vertex class; loops count twice.
inline std::vector<int> voronoi_vertex_degrees(const VoronoiOverlay& ov) {
  std::vector<int> deg(ov.skel.n_vertices, 0);
  for (int e : ov.voronoi_edges) {
    deg[ov.skel.edges[e].v0]++;
    deg[ov.skel.edges[e].v1]++;
  }
  return deg;
}

// Degrees after dissolving the degree-2 chain vertices (side crossings);
// what survives are the honest Voronoi vertices.
inline std::vector<int> contracted_voronoi_degrees(const VoronoiOverlay& ov) {
  std::vector<int> out;
  for (int d : voronoi_vertex_degrees(ov))
    if (d != 0 && d != 2) out.push_back(d);
  std::sort(out.begin(), out.end());
  return out;
}

// Voronoi faces: components of overlay faces glued across unmarked edges.
// Returns per-face component ids, numbered 0..count−1 by first appearance.
inline std::vector<int> voronoi_face_of(const VoronoiOverlay& ov) {
  detail::UnionFind uf(ov.P.num_polygons());
  for (int e = 0; e < static_cast<int>(ov.skel.edges.size()); ++e) {
    const SkelEdge& se = ov.skel.edges[e];
    if (ov.edge_is_voronoi[e] || se.boundary) continue;
    uf.unite(se.a.poly, se.b.poly);
  }
  std::vector<int> id(ov.P.num_polygons(), -1);
  int next = 0;
  for (int f = 0; f < ov.P.num_polygons(); ++f) {
    int r = uf.find(f);
    if (id[r] < 0) id[r] = next++;
    id[f] = id[r];
  }
  return id;
}

inline int voronoi_face_count(const VoronoiOverlay& ov) {
  std::vector<int> id = voronoi_face_of(ov);
  int m = -1;
  for (int v : id) m = std::max(m, v);
  return m + 1;
}

inline double voronoi_total_length(const VoronoiOverlay& ov) {
  double sum = 0;
  for (int e : ov.voronoi_edges) sum += side_length(ov.P, ov.skel.edges[e].a);
  return sum;
}

// Portalgon JSON for the refinement plus a "voronoi" annotation block:
// marked skeleton edge ids and the per-face site / source-triangle maps.
inline nlohmann::json overlay_to_json(const VoronoiOverlay& ov) {
  nlohmann::json j = portalgon_to_json(ov.P);
  j["voronoi"] = {{"edges", ov.voronoi_edges},
                  {"face_site", ov.face_site},
                  {"face_source", ov.face_source}};
  return j;
}

}  // namespace portalgon
