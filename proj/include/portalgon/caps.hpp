// Cap surgery around interior cone points: cut a small triangle fan out of
// the surface at every interior singularity, hand the flat remainder to the
// flattening loop, and glue the fans back afterwards. The cap radius d/6
// (d = minimum triangle height) makes the truncated surface's systole at
// least d/(6r), which is the bound the flattening loop needs.
#pragma once

#include "flatten.hpp"

namespace portalgon {

// One cut-out singularity: the fan of corner triangles around the cone
// point, the trace points that bound it, and the tags by which the fan's
// outer sides find their partners on the truncated surface's boundary.
struct CapRecord {
  int vertex = -1;   // vertex id in the input skeleton
  double angle = 0;  // cone angle at the center
  Portalgon fan;     // one triangle per wedge; corner 0 is the cone point,
                     // side 1 the outer trace side
  std::vector<Point2> trace;   // the d/6 points, one per wedge, fan order
  std::vector<int> seam_tags;  // per triangle: tag of the matching T1 side
};

struct CutCapsResult {
  Portalgon T1;  // the truncated surface, re-triangulated, flat
  std::vector<CapRecord> caps;
  double s = 0;  // systole lower bound d/(6r) of T1
};

inline CutCapsResult cut_caps(const Portalgon& T, const Tolerances& tol = {}) {
  ValidationResult vr = validate(T, tol);
  if (!vr.ok()) throw Error(vr.issues[0].code, vr.issues[0].message);
  const SurfaceReport& rep = *vr.report;
  PGN_REQUIRE(rep.all_triangles, "not-triangular",
              "cap cutting expects a triangular portalgon");
  PGN_REQUIRE(rep.closed, "not-closed", "cap cutting expects a closed surface");

  CutCapsResult out;
  const double d = rep.min_triangle_height;
  out.s = d / (6 * rep.aspect_ratio);

  Portalgon P = T;
  ensure_tags(P);
  Skeleton S = build_skeleton(P, tol);

  std::vector<int> cap_of(S.n_vertices, -1);
  for (int v : rep.singular_vertices) {
    cap_of[v] = static_cast<int>(out.caps.size());
    CapRecord c;
    c.vertex = v;
    c.angle = S.vertex_angle[v];
    out.caps.push_back(std::move(c));
  }
  if (out.caps.empty()) {
    out.T1 = std::move(P);
    return out;
  }

  // Fan slots: each cap triangle sits at its wedge's position in the cyclic
  // vertex fan, so the record reads in rotational order.
  std::map<std::pair<int, int>, std::pair<int, int>> slot;  // (f,c)->(cap,pos)
  for (size_t k = 0; k < out.caps.size(); ++k) {
    VertexFan fan = vertex_fan(P, S, out.caps[k].vertex);
    PGN_REQUIRE(fan.closed && fan.covers_all, "invariant-breach",
                "interior vertex without a closed wedge fan");
    int m = static_cast<int>(fan.wedges.size());
    for (int t = 0; t < m; ++t)
      slot[{fan.wedges[t].poly, fan.wedges[t].corner}] = {static_cast<int>(k),
                                                          t};
    out.caps[k].fan.polygons.resize(m);
    out.caps[k].fan.side_tags.resize(m);
    out.caps[k].trace.resize(m);
    out.caps[k].seam_tags.assign(m, -1);
  }

  int fresh = 0;
  for (const auto& row : P.side_tags)
    for (int t : row) fresh = std::max(fresh, t + 1);

  // Every side piece created by the cut gets a logical tag; portals are then
  // re-derived by pairing the piece lists of the two sides of each old
  // portal (in reversed order). cap == -1 locates a piece on the remainder.
  struct Loc {
    int cap = -1, poly = 0, side = 0;
  };
  std::map<int, Loc> loc;
  std::vector<std::array<std::vector<int>, 3>> pieces(P.num_polygons());
  std::vector<std::pair<int, int>> seams;  // (cap trace tag, T1 trace tag)

  Portalgon T1;
  for (int f = 0; f < P.num_polygons(); ++f) {
    const auto& tri = P.polygons[f];
    bool cut[3];
    int at[3];  // corner -> cap id
    for (int c = 0; c < 3; ++c) {
      at[c] = cap_of[S.vertex_of[f][c]];
      cut[c] = at[c] >= 0;
    }
    int rem = T1.num_polygons();
    if (!cut[0] && !cut[1] && !cut[2]) {
      T1.polygons.push_back(tri);
      T1.side_tags.push_back(P.side_tags[f]);
      for (int i = 0; i < 3; ++i) {
        int t = fresh++;
        pieces[f][i] = {t};
        loc[t] = {-1, rem, i};
      }
      continue;
    }

    Point2 A[3], B[3];
    for (int c = 0; c < 3; ++c) {
      if (!cut[c]) continue;
      Point2 p = tri[c];
      Point2 u = tri[(c + 1) % 3] - p, w = tri[(c + 2) % 3] - p;
      A[c] = p + u * (d / 6 / norm(u));
      B[c] = p + w * (d / 6 / norm(w));
    }
    for (int i = 0; i < 3; ++i)
      for (int j = i + 1; j < 3; ++j)
        PGN_REQUIRE((!cut[i] || !cut[j] ||
                     norm(tri[i] - tri[j]) > d / 3),
                    "cap-overlap", "caps of nearby singularities overlap");

    // Remainder polygon: walking the triangle, a cut corner contributes its
    // two trace endpoints (B then A) instead of the corner itself.
    std::vector<Point2> rp;
    std::vector<int> rt;
    std::array<int, 3> mid_tag, cap_a, cap_b, trace_cap, trace_rem;
    for (int c = 0; c < 3; ++c) {
      mid_tag[c] = fresh++;
      if (cut[c]) {
        cap_a[c] = fresh++;
        cap_b[c] = fresh++;
        trace_cap[c] = fresh++;
        trace_rem[c] = fresh++;
      }
    }
    for (int c = 0; c < 3; ++c) {
      if (cut[c]) {
        loc[trace_rem[c]] = {-1, rem, static_cast<int>(rp.size())};
        rp.push_back(B[c]);
        rt.push_back(trace_rem[c]);
        loc[mid_tag[c]] = {-1, rem, static_cast<int>(rp.size())};
        rp.push_back(A[c]);
        rt.push_back(mid_tag[c]);
      } else {
        loc[mid_tag[c]] = {-1, rem, static_cast<int>(rp.size())};
        rp.push_back(tri[c]);
        rt.push_back(mid_tag[c]);
      }
    }
    T1.polygons.push_back(std::move(rp));
    T1.side_tags.push_back(std::move(rt));

    for (int c = 0; c < 3; ++c) {
      pieces[f][c].clear();
      if (cut[c]) pieces[f][c].push_back(cap_a[c]);
      pieces[f][c].push_back(mid_tag[c]);
      if (cut[(c + 1) % 3]) pieces[f][c].push_back(cap_b[(c + 1) % 3]);
    }

    for (int c = 0; c < 3; ++c) {
      if (!cut[c]) continue;
      auto [k, t] = slot.at({f, c});
      CapRecord& cap = out.caps[k];
      cap.fan.polygons[t] = {tri[c], A[c], B[c]};
      cap.fan.side_tags[t] = {cap_a[c], trace_cap[c], cap_b[c]};
      cap.trace[t] = A[c];
      loc[cap_a[c]] = {k, t, 0};
      loc[trace_cap[c]] = {k, t, 1};
      loc[cap_b[c]] = {k, t, 2};
      seams.push_back({trace_cap[c], trace_rem[c]});
    }
  }

  for (const Portal& pr : P.portals) {
    const auto& pa = pieces[pr.a.poly][pr.a.side];
    const auto& pb = pieces[pr.b.poly][pr.b.side];
    PGN_REQUIRE(pa.size() == pb.size(), "invariant-breach",
                "cap cut pieces disagree across a portal");
    for (size_t i = 0; i < pa.size(); ++i) {
      Loc la = loc.at(pa[i]), lb = loc.at(pb[pb.size() - 1 - i]);
      PGN_REQUIRE(la.cap == lb.cap, "invariant-breach",
                  "cap piece glued outside its fan");
      Portal np{{la.poly, la.side}, {lb.poly, lb.side}};
      if (la.cap < 0)
        T1.portals.push_back(np);
      else
        out.caps[la.cap].fan.portals.push_back(np);
    }
  }
  for (auto [tc, tr] : seams) {
    Loc lc = loc.at(tc);
    out.caps[lc.cap].seam_tags[lc.poly] = tr;
  }

  triangulate_all(T1, tol);
  out.T1 = std::move(T1);
  return out;
}

// Glue the cap fans back onto the truncated surface's boundary. The
// flattening loop never rewrites boundary sides, so the seams are found by
// tag and must still have their original lengths.
inline Portalgon reattach_caps(const Portalgon& T1p,
                               const std::vector<CapRecord>& caps,
                               const Tolerances& tol = {}) {
  Portalgon P = T1p;
  ensure_tags(P);
  SideIndex idx = build_side_index(P);
  std::map<int, SideRef> boundary_by_tag;
  for (int p = 0; p < P.num_polygons(); ++p)
    for (int c = 0; c < P.degree(p); ++c)
      if (!idx.matched({p, c}) && P.side_tags[p][c] >= 0)
        boundary_by_tag[P.side_tags[p][c]] = {p, c};

  for (const CapRecord& cap : caps) {
    int off = P.num_polygons();
    int m = cap.fan.num_polygons();
    for (int t = 0; t < m; ++t) {
      P.polygons.push_back(cap.fan.polygons[t]);
      P.side_tags.push_back(cap.fan.side_tags[t]);
    }
    for (const Portal& pr : cap.fan.portals)
      P.portals.push_back(
          {{pr.a.poly + off, pr.a.side}, {pr.b.poly + off, pr.b.side}});
    for (int t = 0; t < m; ++t) {
      auto it = boundary_by_tag.find(cap.seam_tags[t]);
      PGN_REQUIRE(it != boundary_by_tag.end(), "cap-seam-mismatch",
                  "cap seam not found on the boundary");
      SideRef u = it->second;
      double lu = side_length(P, u);
      double lc = side_length(P, {t + off, 1});
      PGN_REQUIRE(std::abs(lu - lc) <= tol.tau_rel * std::max({1.0, lu, lc}),
                  "cap-seam-mismatch", "cap seam length changed");
      P.portals.push_back({u, {t + off, 1}});
    }
  }
  return P;
}

struct ImproveResult {
  Portalgon P;
  double s = 0;
  int caps_cut = 0;
  FlattenCounters counters;
};

// The end-to-end improvement of a closed triangular portalgon: cut the caps,
// flatten the truncated surface with the systole bound the caps certify,
// re-attach. The surface is unchanged up to isometry; the happiness drops to
// polylogarithmic per triangle. cfg.s is overridden; cfg.N = 0 picks
// ceil(log2(2 + L/s)) from the truncated surface.
inline ImproveResult improve_run(const Portalgon& T, FlattenConfig cfg = {},
                                 const Tolerances& tol = {}) {
  CutCapsResult cc = cut_caps(T, tol);
  cfg.s = cc.s;
  FlattenResult fr = flatten_run(cc.T1, cfg, tol);
  ImproveResult out;
  out.P = reattach_caps(fr.R, cc.caps, tol);
  out.s = cc.s;
  out.caps_cut = static_cast<int>(cc.caps.size());
  out.counters = std::move(fr.counters);
  return out;
}

inline Portalgon improve(const Portalgon& T, const Tolerances& tol = {}) {
  return improve_run(T, {}, tol).P;
}

}  // namespace portalgon
