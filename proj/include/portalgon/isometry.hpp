// Congruence of portalgons, and the surface-isometry decision built on the
// canonical Delaunay tessellation: two closed surfaces are isometric iff
// their Delaunay portalgons agree up to relabeling and per-polygon rigid
// motions, since the tessellation is determined by the metric alone.
#pragma once

#include "delaunay.hpp"

namespace portalgon {

struct Congruence {
  bool congruent = false;
  // Witness, valid when congruent: polygon p of A matches polygon
  // poly_map[p] of B, corner c matching corner (c + shift[p]) % deg, and
  // motion[p] carries A's realization of p onto B's.
  std::vector<int> poly_map;
  std::vector<int> shift;
  std::vector<RigidMotion> motion;
};

namespace detail {

// Orientation-preserving motion taking the direction and start of segment
// (a0, a1) onto (b0, b1); lengths are checked by the caller via corners.
inline std::optional<RigidMotion> seg_motion(Point2 a0, Point2 a1, Point2 b0,
                                             Point2 b1) {
  Point2 da = a1 - a0, db = b1 - b0;
  double la = norm(da), lb = norm(db);
  if (la <= 0 || lb <= 0) return std::nullopt;
  RigidMotion m;
  m.c = dot(da, db) / (la * lb);
  m.s = cross(da, db) / (la * lb);
  m.renormalize();
  m.t = {0, 0};
  m.t = b0 - m(a0);
  return m;
}

// Extends the seed "polygon pa of A matches polygon qb of B with corner
// offset k" over everything reachable through portals, filling the witness.
// Returns false (leaving garbage in the touched entries) when the extension
// hits a contradiction; `used_b` marks B polygons consumed so far.
inline bool grow_match(const Portalgon& A, const SideIndex& ia,
                       const Portalgon& B, const SideIndex& ib, int pa,
                       int qb, int k, double eps, Congruence& w,
                       std::vector<char>& used_b) {
  std::vector<int> stack;
  auto assign = [&](int p, int q, int shift) {
    int n = A.degree(p);
    if (B.degree(q) != n || used_b[q]) return false;
    auto m = seg_motion(A.polygons[p][0], A.polygons[p][1], B.polygons[q][shift],
                        B.polygons[q][(shift + 1) % n]);
    if (!m) return false;
    for (int c = 0; c < n; ++c)
      if (dist((*m)(A.polygons[p][c]), B.polygons[q][(c + shift) % n]) > eps)
        return false;
    w.poly_map[p] = q;
    w.shift[p] = shift;
    w.motion[p] = *m;
    used_b[q] = 1;
    stack.push_back(p);
    return true;
  };
  if (!assign(pa, qb, k)) return false;
  while (!stack.empty()) {
    int p = stack.back();
    stack.pop_back();
    int n = A.degree(p);
    int q = w.poly_map[p];
    for (int s = 0; s < n; ++s) {
      auto ta = partner_side(A, ia, {p, s});
      auto tb = partner_side(B, ib, {q, (s + w.shift[p]) % n});
      if (ta.has_value() != tb.has_value()) return false;
      if (!ta) continue;
      int degp = A.degree(ta->poly);
      int sh = (tb->side - ta->side + 2 * degp) % degp;
      if (w.poly_map[ta->poly] >= 0) {
        if (w.poly_map[ta->poly] != tb->poly || w.shift[ta->poly] != sh)
          return false;
      } else if (!assign(ta->poly, tb->poly, sh)) {
        return false;
      }
    }
  }
  return true;
}

// Matches the connected components of A (given by their polygon lists, from
// position `at` on) against unused components of B, trying every side of B
// as the seed for the component's first polygon and backtracking across
// components. Component counts are tiny in practice; the recursion is for
// correctness when several components are mutually congruent.
inline bool match_components(const Portalgon& A, const SideIndex& ia,
                             const Portalgon& B, const SideIndex& ib,
                             const std::vector<std::vector<int>>& comps,
                             size_t at, double eps, Congruence& w,
                             std::vector<char>& used_b) {
  if (at == comps.size()) return true;
  int pa = comps[at][0];
  for (int qb = 0; qb < B.num_polygons(); ++qb) {
    if (used_b[qb]) continue;
    for (int k = 0; k < B.degree(qb); ++k) {
      Congruence trial = w;
      std::vector<char> trial_used = used_b;
      if (!grow_match(A, ia, B, ib, pa, qb, k, eps, trial, trial_used))
        continue;
      if (match_components(A, ia, B, ib, comps, at + 1, eps, trial,
                           trial_used)) {
        w = std::move(trial);
        used_b = std::move(trial_used);
        return true;
      }
    }
  }
  return false;
}

}  // namespace detail

// Decides whether B is a relabeling of A with every polygon rigidly moved
// (orientation preserved) and the portal structure carried along, seeding a
// side correspondence and propagating it through the gluing.
inline Congruence portalgons_congruent(const Portalgon& A, const Portalgon& B,
                                       const Tolerances& tol = {}) {
  Congruence w;
  if (A.num_polygons() != B.num_polygons() ||
      A.portals.size() != B.portals.size())
    return w;
  const double eps =
      tol.tau_iso * std::max({instance_scale(A), instance_scale(B), 1e-30});
  SideIndex ia = build_side_index(A);
  SideIndex ib = build_side_index(B);
  w.poly_map.assign(A.num_polygons(), -1);
  w.shift.assign(A.num_polygons(), 0);
  w.motion.assign(A.num_polygons(), RigidMotion::identity());
  std::vector<char> used_b(B.num_polygons(), 0);
  auto comps = face_components(A);
  w.congruent =
      detail::match_components(A, ia, B, ib, comps, 0, eps, w, used_b);
  if (!w.congruent) {
    w.poly_map.clear();
    w.shift.clear();
    w.motion.clear();
  }
  return w;
}

// Appendix-style isometry test for closed surfaces: canonicalize both via
// the Delaunay tessellation and compare the results combinatorially.
inline bool surfaces_isometric(const Portalgon& T1, const Portalgon& T2,
                               const Tolerances& tol = {}) {
  DelaunayResult a = compute_delaunay(T1, {}, tol);
  DelaunayResult b = compute_delaunay(T2, {}, tol);
  return portalgons_congruent(a.D, b.D, tol).congruent;
}

inline nlohmann::json congruence_to_json(const Congruence& w) {
  nlohmann::json j;
  j["congruent"] = w.congruent;
  if (w.congruent) {
    j["poly_map"] = w.poly_map;
    j["corner_shift"] = w.shift;
    auto& ms = j["motions"] = nlohmann::json::array();
    for (const RigidMotion& m : w.motion)
      ms.push_back({{"cos", m.c}, {"sin", m.s}, {"t", {m.t.x, m.t.y}}});
  }
  return j;
}

}  // namespace portalgon
