// The happiness-reduction loop: an active/inactive region partition over one
// portalgon, five routines that rewrite the active part (midpoint refinement,
// shortcut triangulation, flat-vertex deletion, tube collapse, gardening of
// whole tube components), and the driver that iterates them.
//
// Inactive regions are good bifaces frozen by tube collapse; they are never
// rewritten again, only re-glued. The active region may be disconnected.
#pragma once

#include <cstdio>
#include <ostream>

#include "tube.hpp"

namespace portalgon {

struct FlattenCounters {
  long long vertices_inserted = 0;
  long long edges_inserted = 0;
  long long vertices_deleted = 0;
  long long tubes_simplified = 0;     // tube components replaced by bifaces
  long long bifaces_inactivated = 0;  // tube components frozen as inactive
  int outer_iterations = 0;
  int inner_iterations = 0;
  int max_active_polygons = 0;
  std::vector<double> max_edge_per_outer;  // active max side, per outer pass
};

// One portalgon whose polygons are partitioned into regions: region 0 is
// active, every other region is an inactive good biface. `s` is the
// caller-supplied lower bound on the systole, passed through to the tube
// collapse (the caps pipeline supplies d/(6r); flatten never estimates it).
struct RegionState {
  Portalgon R;
  std::vector<int> region_of;  // per polygon; 0 = active
  int next_region = 1;
  double s = 1.0;
  FlattenCounters counters;
};

inline RegionState make_region_state(Portalgon T, double s) {
  PGN_REQUIRE(s > 0, "schema-error", "systole bound must be positive");
  ensure_tags(T);
  RegionState st;
  st.R = std::move(T);
  st.region_of.assign(st.R.num_polygons(), 0);
  st.s = s;
  return st;
}

inline int active_polygon_count(const RegionState& st) {
  int n = 0;
  for (int r : st.region_of) n += r == 0;
  return n;
}

inline double max_active_side(const RegionState& st) {
  double m = 0;
  for (int p = 0; p < st.R.num_polygons(); ++p) {
    if (st.region_of[p] != 0) continue;
    for (int c = 0; c < st.R.degree(p); ++c)
      m = std::max(m, side_length(st.R, {p, c}));
  }
  return m;
}

// The sub-portalgon induced by one region: its polygons plus every portal
// with both sides inside, reindexed locally.
struct RegionView {
  Portalgon A;
  std::vector<int> to_global;  // local poly -> poly of R
  std::vector<int> to_local;   // poly of R -> local poly, -1 outside
};

inline RegionView extract_region(const RegionState& st, int region) {
  RegionView V;
  V.to_local.assign(st.R.num_polygons(), -1);
  for (int p = 0; p < st.R.num_polygons(); ++p) {
    if (st.region_of[p] != region) continue;
    V.to_local[p] = V.A.num_polygons();
    V.to_global.push_back(p);
    V.A.polygons.push_back(st.R.polygons[p]);
    V.A.side_tags.push_back(st.R.side_tags[p]);
  }
  for (const Portal& pr : st.R.portals) {
    int la = V.to_local[pr.a.poly], lb = V.to_local[pr.b.poly];
    if (la >= 0 && lb >= 0)
      V.A.portals.push_back({{la, pr.a.side}, {lb, pr.b.side}});
  }
  return V;
}

// Split every interior edge of the active skeleton at its midpoint. Edges on
// the active boundary (separating loops, genuine surface boundary) are left
// alone, so inactive bifaces and cap loops never change shape.
inline void insert_vertices(RegionState& st) {
  std::vector<int> ids;
  for (size_t k = 0; k < st.R.portals.size(); ++k) {
    const Portal& pr = st.R.portals[k];
    if (st.region_of[pr.a.poly] == 0 && st.region_of[pr.b.poly] == 0)
      ids.push_back(static_cast<int>(k));
  }
  if (ids.empty()) return;
  split_portal_edges(st.R, ids);
  st.counters.vertices_inserted += static_cast<long long>(ids.size());
}

// Triangulate every active face by repeatedly cutting along its shortest
// interior diagonal (its shortcut). A face of degree d gets d-3 diagonals.
inline void insert_edges(RegionState& st, const Tolerances& tol = {}) {
  int n0 = st.R.num_polygons();
  for (int f = 0; f < n0; ++f) {
    if (st.region_of[f] != 0 || st.R.degree(f) <= 3) continue;
    st.counters.edges_inserted += st.R.degree(f) - 3;
    triangulate_polygon(st.R, f, tol);
    st.region_of.resize(st.R.num_polygons(), 0);
  }
}

// Delete a greedy maximal independent set (ascending vertex id) of weak
// degree-at-most-six vertices of the active skeleton. The merged faces this
// leaves behind are re-triangulated by the insert_edges that follows in the
// main loop.
inline void delete_vertices(RegionState& st, const Tolerances& tol = {}) {
  RegionView V = extract_region(st, 0);
  if (V.A.polygons.empty()) return;
  Skeleton SA = build_skeleton(V.A, tol);
  std::vector<VertexInfo> info = classify_vertices(SA, tol);

  std::vector<std::vector<int>> nb(SA.n_vertices);
  for (const SkelEdge& e : SA.edges) {
    nb[e.v0].push_back(e.v1);
    nb[e.v1].push_back(e.v0);
  }
  std::vector<char> blocked(SA.n_vertices, 0);
  std::vector<std::pair<int, int>> handles;  // (global poly, corner)
  for (int v = 0; v < SA.n_vertices; ++v) {
    if (!info[v].weak || info[v].degree > 6 || blocked[v]) continue;
    blocked[v] = 1;
    for (int u : nb[v]) blocked[u] = 1;
    const Wedge& w = SA.vertex_corners[v][0];
    handles.push_back({V.to_global[w.poly], w.corner});
  }

  for (size_t h = 0; h < handles.size(); ++h) {
    Skeleton SR = build_skeleton(st.R, tol);
    int vid = SR.vertex_of[handles[h].first][handles[h].second];
    DeleteVertexResult r = delete_flat_vertex(st.R, vid, tol);
    std::vector<int> nreg(st.R.num_polygons(), 0);
    for (size_t p = 0; p < r.poly_map.size(); ++p)
      if (r.poly_map[p] >= 0) nreg[r.poly_map[p]] = st.region_of[p];
    st.region_of = std::move(nreg);
    for (size_t h2 = h + 1; h2 < handles.size(); ++h2) {
      int np = r.poly_map[handles[h2].first];
      PGN_REQUIRE(np >= 0, "invariant-breach",
                  "independent set vertices share a polygon");
      handles[h2].first = np;
    }
    st.counters.vertices_deleted++;
  }
}

namespace detail {

struct SideAnchor {
  int original_tag = -1;
  int cross_portal = -1;  // portal of the pre-op R, -1 for genuine boundary
};

// Shared core of simplify_tubes and gardening. Cut the active region along
// the loop portals in J (ids of V.A), replace every tube component whose two
// boundary circles are single sides by a good biface, re-glue the seams, and
// reassemble R. Side tags thread identities through the rebuild: every
// boundary side and seam side gets a fresh unique tag first, and the tube
// collapse preserves boundary tags. A component that already is a good
// biface is kept verbatim (replacing it would only swap one good biface for
// another), and when no component is rebuilt or frozen, R is left untouched.
// Returns the number of components replaced.
inline int retile_active(RegionState& st, RegionView V, std::vector<int> J,
                         bool inactive_always, bool inactive_thin,
                         const Tolerances& tol) {
  Portalgon& A = V.A;

  // A component is replaceable when it is a tube and both its boundary
  // circles consist of a single side, so the biface's two boundary sides can
  // stand in for them.
  auto replaceable = [&](const Portalgon& X) {
    if (!is_tube(X, tol)) return false;
    Skeleton SX = build_skeleton(X, tol);
    auto bc = boundary_components(X, SX);
    return bc.size() == 2 && bc[0].size() == 1 && bc[1].size() == 1;
  };

  int fresh = 0;
  for (const auto& row : st.R.side_tags)
    for (int t : row) fresh = std::max(fresh, t + 1);
  const int first_fresh = fresh;

  // Anchor every boundary side of A so crossing portals can be re-attached
  // and original tags restored afterwards.
  SideIndex idxA = build_side_index(A);
  std::map<int, SideAnchor> anchors;                // fresh tag -> anchor
  std::map<std::pair<int, int>, int> cross_at;      // local side -> R portal
  std::map<int, int> cross_tag;                     // R portal -> fresh tag
  for (size_t k = 0; k < st.R.portals.size(); ++k) {
    const Portal& pr = st.R.portals[k];
    bool aa = st.region_of[pr.a.poly] == 0, ab = st.region_of[pr.b.poly] == 0;
    if (aa == ab) continue;
    SideRef s = aa ? pr.a : pr.b;
    cross_at[{V.to_local[s.poly], s.side}] = static_cast<int>(k);
  }
  for (int p = 0; p < A.num_polygons(); ++p)
    for (int c = 0; c < A.degree(p); ++c) {
      if (idxA.matched({p, c})) continue;
      SideAnchor an;
      an.original_tag = A.side_tags[p][c];
      auto it = cross_at.find({p, c});
      if (it != cross_at.end()) {
        an.cross_portal = it->second;
        cross_tag[it->second] = fresh;
      }
      A.side_tags[p][c] = fresh;
      anchors[fresh++] = an;
    }

  struct SeamTag {
    int ta, tb, orig_a, orig_b;
  };
  std::vector<SeamTag> seams;
  for (int k : J) {
    const Portal& pr = A.portals[k];
    SeamTag sg;
    sg.orig_a = A.side_tags[pr.a.poly][pr.a.side];
    sg.orig_b = A.side_tags[pr.b.poly][pr.b.side];
    A.side_tags[pr.a.poly][pr.a.side] = sg.ta = fresh++;
    A.side_tags[pr.b.poly][pr.b.side] = sg.tb = fresh++;
    seams.push_back(sg);
  }

  CutResult cut = cut_along(A, J);
  int n_comp = static_cast<int>(cut.components.size());
  int replaced = 0;
  bool any_change = false;
  std::vector<char> make_inactive(n_comp, 0);
  for (int c = 0; c < n_comp; ++c) {
    Portalgon& X = cut.components[c];
    if (!replaceable(X)) continue;
    bool thin = false;
    bool rebuilt = true;
    if (X.num_polygons() == 2) {
      try {
        BifaceClass cls = classify_biface(as_biface(X, tol), tol);
        if (cls.good) {
          thin = cls.thin;
          rebuilt = false;
        }
      } catch (const Error&) {
      }
    }
    if (rebuilt) {
      Biface B = compute_good_biface(X, st.s, tol);
      thin = classify_biface(B, tol).thin;
      X = std::move(B.P);
      replaced++;
      st.counters.tubes_simplified++;
    }
    make_inactive[c] = inactive_always || (inactive_thin && thin);
    if (make_inactive[c]) st.counters.bifaces_inactivated++;
    any_change = any_change || rebuilt || make_inactive[c];
  }
  // Nothing rebuilt, nothing frozen: cutting and re-gluing would reproduce R
  // exactly, so skip the reassembly.
  if (!any_change) return 0;

  // Reassemble the active block, component by component.
  Portalgon A2;
  std::vector<int> reg2;  // region id per A2 polygon
  for (int c = 0; c < n_comp; ++c) {
    Portalgon& X = cut.components[c];
    int off = A2.num_polygons();
    int rid = make_inactive[c] ? st.next_region++ : 0;
    for (int p = 0; p < X.num_polygons(); ++p) {
      A2.polygons.push_back(std::move(X.polygons[p]));
      A2.side_tags.push_back(std::move(X.side_tags[p]));
      reg2.push_back(rid);
    }
    for (const Portal& pr : X.portals)
      A2.portals.push_back(
          {{pr.a.poly + off, pr.a.side}, {pr.b.poly + off, pr.b.side}});
  }

  std::map<int, SideRef> tag_at;
  for (int p = 0; p < A2.num_polygons(); ++p)
    for (int c = 0; c < A2.degree(p); ++c) {
      int t = A2.side_tags[p][c];
      if (t < first_fresh) continue;
      PGN_REQUIRE(!tag_at.count(t), "invariant-breach",
                  "tracking tag duplicated in rebuild");
      tag_at[t] = {p, c};
    }
  auto locate = [&](int t) {
    auto it = tag_at.find(t);
    PGN_REQUIRE(it != tag_at.end(), "invariant-breach",
                "tracking tag lost in rebuild");
    return it->second;
  };

  for (const SeamTag& sg : seams) {
    SideRef a = locate(sg.ta), b = locate(sg.tb);
    A2.portals.push_back({a, b});
    A2.side_tags[a.poly][a.side] = sg.orig_a;
    A2.side_tags[b.poly][b.side] = sg.orig_b;
  }

  // Rebuild R: inactive polygons first (original relative order), then the
  // rebuilt active block.
  Portalgon R2;
  std::vector<int> regR;
  std::vector<int> old_to_new(st.R.num_polygons(), -1);
  for (int p = 0; p < st.R.num_polygons(); ++p) {
    if (st.region_of[p] == 0) continue;
    old_to_new[p] = R2.num_polygons();
    R2.polygons.push_back(std::move(st.R.polygons[p]));
    R2.side_tags.push_back(std::move(st.R.side_tags[p]));
    regR.push_back(st.region_of[p]);
  }
  const int off = R2.num_polygons();
  for (int p = 0; p < A2.num_polygons(); ++p) {
    R2.polygons.push_back(std::move(A2.polygons[p]));
    R2.side_tags.push_back(std::move(A2.side_tags[p]));
    regR.push_back(reg2[p]);
  }
  for (const Portal& pr : A2.portals)
    R2.portals.push_back(
        {{pr.a.poly + off, pr.a.side}, {pr.b.poly + off, pr.b.side}});
  for (size_t k = 0; k < st.R.portals.size(); ++k) {
    const Portal& pr = st.R.portals[k];
    bool aa = st.region_of[pr.a.poly] == 0, ab = st.region_of[pr.b.poly] == 0;
    if (aa && ab) continue;  // superseded by the rebuilt active block
    if (!aa && !ab) {
      R2.portals.push_back({{old_to_new[pr.a.poly], pr.a.side},
                            {old_to_new[pr.b.poly], pr.b.side}});
      continue;
    }
    SideRef act = locate(cross_tag.at(static_cast<int>(k)));
    SideRef act2{act.poly + off, act.side};
    SideRef ina = aa ? pr.b : pr.a;
    SideRef ina2{old_to_new[ina.poly], ina.side};
    R2.portals.push_back(aa ? Portal{act2, ina2} : Portal{ina2, act2});
  }
  for (const auto& [t, an] : anchors) {
    SideRef s = locate(t);
    R2.side_tags[s.poly + off][s.side] = an.original_tag;
  }

  st.R = std::move(R2);
  st.region_of = std::move(regR);
  return replaced;
}

}  // namespace detail

// One round of tube collapse on the active region. The loop set J: on a
// torus, the first pair of interior loop edges at distinct vertices (or
// nothing); otherwise one loop per interior loop vertex, pruned so that a
// loop strictly between two tube components is dropped and the whole chain
// collapses into a single biface. Thin bifaces are frozen when requested.
inline void simplify_tubes(RegionState& st, bool mark_thin_inactive,
                           const Tolerances& tol = {}) {
  RegionView V = extract_region(st, 0);
  if (V.A.polygons.empty()) return;
  Skeleton SA = build_skeleton(V.A, tol);

  std::vector<int> portal_of_edge(SA.edges.size(), -1);
  for (size_t k = 0; k < V.A.portals.size(); ++k) {
    const Portal& pr = V.A.portals[k];
    portal_of_edge[SA.edge_of[pr.a.poly][pr.a.side]] = static_cast<int>(k);
  }
  std::vector<int> loop_edges;  // interior loop edges, ascending edge id
  for (size_t e = 0; e < SA.edges.size(); ++e)
    if (!SA.edges[e].boundary && SA.edges[e].loop() &&
        !SA.vertex_boundary[SA.edges[e].v0])
      loop_edges.push_back(static_cast<int>(e));

  std::vector<int> J;
  SurfaceReport rep = surface_report(V.A, SA, tol);
  if (rep.connected && rep.closed && rep.genus == 1) {
    for (size_t i = 0; i < loop_edges.size() && J.empty(); ++i)
      for (size_t j = i + 1; j < loop_edges.size() && J.empty(); ++j)
        if (SA.edges[loop_edges[i]].v0 != SA.edges[loop_edges[j]].v0)
          J = {portal_of_edge[loop_edges[i]], portal_of_edge[loop_edges[j]]};
  } else {
    std::map<int, int> pick;  // base vertex -> smallest incident loop edge
    for (int e : loop_edges)
      pick.try_emplace(SA.edges[e].v0, e);
    std::vector<int> Jp;
    for (const auto& [v, e] : pick) Jp.push_back(portal_of_edge[e]);
    std::sort(Jp.begin(), Jp.end());
    if (!Jp.empty()) {
      CutResult probe = cut_along(V.A, Jp);
      std::vector<char> comp_tube(probe.components.size(), 0);
      for (size_t c = 0; c < probe.components.size(); ++c)
        comp_tube[c] = is_tube(probe.components[c], tol);
      for (size_t i = 0; i < Jp.size(); ++i) {
        const CutSeam& sm = probe.seams[i];
        bool drop = sm.comp_a != sm.comp_b && comp_tube[sm.comp_a] &&
                    comp_tube[sm.comp_b];
        if (!drop) J.push_back(Jp[i]);
      }
    }
  }
  detail::retile_active(st, std::move(V), std::move(J),
                        /*inactive_always=*/false,
                        /*inactive_thin=*/mark_thin_inactive, tol);
}

// Freeze every active connected component that is a whole tube as an
// inactive good biface, keeping the number of active boundary components
// under control.
inline void gardening(RegionState& st, const Tolerances& tol = {}) {
  RegionView V = extract_region(st, 0);
  if (V.A.polygons.empty()) return;
  detail::retile_active(st, std::move(V), {}, /*inactive_always=*/true,
                        /*inactive_thin=*/true, tol);
}

// The three structural invariants of the region partition: active polygons
// have degree at most six, every inactive region is a good biface (its two
// polygons and the two non-loop portals between them), and separating loops
// are pairwise disjoint loops. Throws "invariant-breach".
inline void check_region_invariants(const RegionState& st,
                                    const Tolerances& tol = {}) {
  PGN_REQUIRE(st.region_of.size() ==
                  static_cast<size_t>(st.R.num_polygons()),
              "invariant-breach", "region table out of sync");
  std::map<int, std::vector<int>> members;
  for (int p = 0; p < st.R.num_polygons(); ++p) {
    PGN_REQUIRE(st.region_of[p] != 0 || st.R.degree(p) <= 6,
                "invariant-breach", "active polygon of degree above six");
    if (st.region_of[p] != 0) members[st.region_of[p]].push_back(p);
  }

  Skeleton S = build_skeleton(st.R, tol);
  for (const auto& [rid, polys] : members) {
    PGN_REQUIRE(polys.size() == 2, "invariant-breach",
                "inactive region is not two polygons");
    std::map<int, int> local;
    for (int p : polys) local[p] = static_cast<int>(local.size());
    std::vector<Portal> intra;
    for (const Portal& pr : st.R.portals)
      if (local.count(pr.a.poly) && local.count(pr.b.poly))
        intra.push_back(
            {{local[pr.a.poly], pr.a.side}, {local[pr.b.poly], pr.b.side}});

    // A frozen region is a good biface, possibly glued to itself along its
    // two boundary sides (that is how a stray torus component collapses), in
    // which case the seam shows up as a third intra-region portal. Accept if
    // dropping at most one portal leaves a good biface.
    auto good_without = [&](int skip) {
      Portalgon B;
      for (int p : polys) {
        B.polygons.push_back(st.R.polygons[p]);
        B.side_tags.push_back(st.R.side_tags[p]);
      }
      for (size_t k = 0; k < intra.size(); ++k)
        if (static_cast<int>(k) != skip) B.portals.push_back(intra[k]);
      try {
        return classify_biface(as_biface(B, tol), tol).good;
      } catch (const Error&) {
        return false;
      }
    };
    bool good = false;
    if (intra.size() == 2) good = good_without(-1);
    if (intra.size() == 3)
      for (int k = 0; k < 3 && !good; ++k) good = good_without(k);
    PGN_REQUIRE(good, "invariant-breach",
                "inactive region is not a good biface");
  }

  std::set<int> seam_vertices;
  for (const Portal& pr : st.R.portals) {
    if (st.region_of[pr.a.poly] == st.region_of[pr.b.poly]) continue;
    int e = S.edge_of[pr.a.poly][pr.a.side];
    PGN_REQUIRE(S.edges[e].loop(), "invariant-breach",
                "separating edge is not a loop");
    PGN_REQUIRE(seam_vertices.insert(S.edges[e].v0).second,
                "invariant-breach", "separating loops share a base vertex");
  }
}

// Size measures of the active region used by the counting checks and the
// run log.
struct ActiveStats {
  int polys = 0, V = 0, E_total = 0, E_interior = 0;
  int strong = 0, loop_interior_vertices = 0;
  int genus = 0, boundary_comps = 0;
  double max_edge = 0;
};

inline ActiveStats active_stats(const RegionState& st,
                                const Tolerances& tol = {}) {
  ActiveStats a;
  RegionView V = extract_region(st, 0);
  a.polys = V.A.num_polygons();
  if (a.polys == 0) return a;
  Skeleton SA = build_skeleton(V.A, tol);
  std::vector<VertexInfo> info = classify_vertices(SA, tol);
  a.V = SA.n_vertices;
  a.E_total = static_cast<int>(SA.edges.size());
  std::set<int> loopverts;
  for (const SkelEdge& e : SA.edges) {
    if (!e.boundary) a.E_interior++;
    if (e.loop() && !e.boundary && !SA.vertex_boundary[e.v0])
      loopverts.insert(e.v0);
  }
  a.loop_interior_vertices = static_cast<int>(loopverts.size());
  for (int v = 0; v < SA.n_vertices; ++v) a.strong += !info[v].weak;
  SurfaceReport rep = surface_report(V.A, SA, tol);
  a.genus = rep.genus;
  a.boundary_comps = rep.boundary_component_count;
  a.max_edge = rep.max_side;
  return a;
}

struct FlattenConfig {
  int N = 0;          // outer iterations; 0 = ceil(log2(2 + L/s))
  int inner_reps = 350;
  bool early_exit = true;  // stop an inner loop once a full pass changes nothing
  double s = 0;            // systole lower bound, required
  bool check = false;      // verify invariants + counting bounds per routine
  std::ostream* log = nullptr;  // JSON-lines run log
};

struct FlattenResult {
  Portalgon R;
  FlattenCounters counters;
};

// The full loop: N times {refine midpoints; triangulate; inner_reps times
// {garden; collapse tubes (freezing thin bifaces); garden; delete weak
// vertices; triangulate}}. Output is the whole portalgon, inactive bifaces
// included, with a surface isometric to the input's.
inline FlattenResult flatten_run(const Portalgon& T, const FlattenConfig& cfg,
                                 const Tolerances& tol = {}) {
  PGN_REQUIRE(cfg.s > 0, "schema-error",
              "flatten requires a positive systole bound");
  PGN_REQUIRE(cfg.inner_reps >= 1, "schema-error",
              "inner repetition count must be at least one");
  ValidationResult vr = validate(T, tol);
  if (!vr.ok()) throw Error(vr.issues[0].code, vr.issues[0].message);
  const SurfaceReport& rep = *vr.report;
  PGN_REQUIRE(rep.all_triangles, "not-triangular",
              "flatten expects a triangular portalgon");
  for (int v = 0; v < static_cast<int>(rep.vertices.size()); ++v)
    PGN_REQUIRE(rep.vertices[v].boundary || !rep.vertices[v].singular,
                "not-flat", "surface has an interior singularity");

  int N = cfg.N;
  if (N <= 0)
    N = static_cast<int>(std::ceil(std::log2(2.0 + rep.max_side / cfg.s)));
  N = std::max(N, 1);

  RegionState st = make_region_state(T, cfg.s);
  int outer = 0, inner = 0;
  auto checkpoint = [&](const char* routine) {
    st.counters.max_active_polygons =
        std::max(st.counters.max_active_polygons, active_polygon_count(st));
    if (cfg.check) check_region_invariants(st, tol);
    if (cfg.log) {
      ActiveStats a = active_stats(st, tol);
      char line[256];
      std::snprintf(line, sizeof line,
                    "{\"routine\":\"%s\",\"outer\":%d,\"rep\":%d,"
                    "\"vertices\":%d,\"edges\":%d,\"faces\":%d,"
                    "\"active_polygons\":%d,\"max_edge\":%.17g,"
                    "\"inactive_bifaces\":%d}",
                    routine, outer, inner, a.V, a.E_total, a.polys, a.polys,
                    a.max_edge, st.next_region - 1);
      *cfg.log << line << "\n";
    }
  };

  for (outer = 1; outer <= N; ++outer) {
    st.counters.outer_iterations++;
    inner = 0;
    ActiveStats pre = cfg.check ? active_stats(st, tol) : ActiveStats{};
    insert_vertices(st);
    checkpoint("insert_vertices");
    if (cfg.check && pre.polys > 0) {
      ActiveStats post = active_stats(st, tol);
      PGN_REQUIRE(post.V == pre.V + pre.E_interior, "invariant-breach",
                  "midpoint refinement must add one vertex per interior edge");
      PGN_REQUIRE(post.V < 7 * (pre.genus + pre.V), "invariant-breach",
                  "midpoint refinement exceeded the 7(g+m) vertex bound");
    }
    insert_edges(st, tol);
    checkpoint("insert_edges");

    for (int rp = 0; rp < cfg.inner_reps; ++rp) {
      st.counters.inner_iterations++;
      inner = rp + 1;
      FlattenCounters before = st.counters;

      gardening(st, tol);
      checkpoint("gardening");
      if (cfg.check) {
        SurfaceReport full = *validate(st.R, tol).report;
        ActiveStats a = active_stats(st, tol);
        PGN_REQUIRE(a.boundary_comps <=
                        10 * (full.genus + full.boundary_component_count),
                    "invariant-breach",
                    "gardened active region has too many boundary circles");
      }

      ActiveStats pre_tube = cfg.check ? active_stats(st, tol) : ActiveStats{};
      simplify_tubes(st, /*mark_thin_inactive=*/true, tol);
      checkpoint("simplify_tubes");
      if (cfg.check && pre_tube.polys > 0) {
        ActiveStats a = active_stats(st, tol);
        PGN_REQUIRE(a.loop_interior_vertices <=
                        9 * (pre_tube.genus + pre_tube.boundary_comps),
                    "invariant-breach",
                    "tube collapse left too many interior loop vertices");
      }

      gardening(st, tol);
      checkpoint("gardening");

      ActiveStats pre_del = cfg.check ? active_stats(st, tol) : ActiveStats{};
      delete_vertices(st, tol);
      checkpoint("delete_vertices");
      if (cfg.check && pre_del.polys > 0 &&
          pre_del.V > 24 * (pre_del.genus + pre_del.strong)) {
        ActiveStats a = active_stats(st, tol);
        PGN_REQUIRE(168LL * a.V < 167LL * pre_del.V, "invariant-breach",
                    "vertex deletion removed less than a 1/168 fraction");
      }

      insert_edges(st, tol);
      checkpoint("insert_edges");

      if (cfg.early_exit &&
          st.counters.vertices_inserted == before.vertices_inserted &&
          st.counters.edges_inserted == before.edges_inserted &&
          st.counters.vertices_deleted == before.vertices_deleted &&
          st.counters.tubes_simplified == before.tubes_simplified)
        break;
    }
    st.counters.max_edge_per_outer.push_back(max_active_side(st));
  }

  FlattenResult out;
  out.R = std::move(st.R);
  out.counters = std::move(st.counters);
  return out;
}

}  // namespace portalgon
