// Portalgon data model: disjoint ccw polygons plus a partial matching of
// equal-length sides ("portals"). Side i of a polygon runs from corner i to
// corner i+1 (mod degree). A portal identifies side (p,i) traversed forward
// with side (q,j) traversed backward, which is the orientable gluing when
// all polygons are ccw.
#pragma once

#include <map>
#include <optional>

#include "geom.hpp"

namespace portalgon {

struct SideRef {
  int poly = -1, side = -1;
  bool operator==(const SideRef& o) const {
    return poly == o.poly && side == o.side;
  }
  bool operator!=(const SideRef& o) const { return !(*this == o); }
  bool operator<(const SideRef& o) const {
    return poly < o.poly || (poly == o.poly && side < o.side);
  }
};

struct Portal {
  SideRef a, b;
};

struct Portalgon {
  std::vector<std::vector<Point2>> polygons;
  std::vector<Portal> portals;
  // Optional per-side integer tags (-1 = none). Tags survive surgeries and
  // are used to keep track of seam identities (cap boundaries, tube cuts).
  std::vector<std::vector<int>> side_tags;

  int num_polygons() const { return static_cast<int>(polygons.size()); }
  int degree(int p) const { return static_cast<int>(polygons[p].size()); }
};

inline void ensure_tags(Portalgon& P) {
  P.side_tags.resize(P.polygons.size());
  for (size_t p = 0; p < P.polygons.size(); ++p)
    P.side_tags[p].resize(P.polygons[p].size(), -1);
}

inline int side_tag(const Portalgon& P, SideRef s) {
  if (s.poly >= static_cast<int>(P.side_tags.size())) return -1;
  if (s.side >= static_cast<int>(P.side_tags[s.poly].size())) return -1;
  return P.side_tags[s.poly][s.side];
}

inline std::pair<Point2, Point2> side_points(const Portalgon& P, SideRef s) {
  const auto& poly = P.polygons[s.poly];
  int n = static_cast<int>(poly.size());
  return {poly[s.side], poly[(s.side + 1) % n]};
}

inline std::pair<Point2, Point2> reversed(std::pair<Point2, Point2> seg) {
  return {seg.second, seg.first};
}

inline double side_length(const Portalgon& P, SideRef s) {
  auto [a, b] = side_points(P, s);
  return dist(a, b);
}

// Lookup table from (poly, side) to portal index, -1 for unmatched sides.
struct SideIndex {
  std::vector<std::vector<int>> portal_of;

  int operator()(SideRef s) const { return portal_of[s.poly][s.side]; }
  bool matched(SideRef s) const { return (*this)(s) >= 0; }
};

inline SideIndex build_side_index(const Portalgon& P) {
  SideIndex idx;
  idx.portal_of.resize(P.polygons.size());
  for (int p = 0; p < P.num_polygons(); ++p)
    idx.portal_of[p].assign(P.degree(p), -1);
  for (size_t k = 0; k < P.portals.size(); ++k) {
    const Portal& pr = P.portals[k];
    PGN_REQUIRE(!(pr.a == pr.b), "self-portal",
                "portal matches a side with itself");
    for (SideRef s : {pr.a, pr.b}) {
      PGN_REQUIRE(s.poly >= 0 && s.poly < P.num_polygons() && s.side >= 0 &&
                      s.side < P.degree(s.poly),
                  "schema-error", "portal side out of range");
      PGN_REQUIRE(idx.portal_of[s.poly][s.side] < 0, "side-reused",
                  "side appears in more than one portal");
      idx.portal_of[s.poly][s.side] = static_cast<int>(k);
    }
  }
  return idx;
}

inline std::optional<SideRef> partner_side(const Portalgon& P,
                                           const SideIndex& idx, SideRef s) {
  int k = idx(s);
  if (k < 0) return std::nullopt;
  const Portal& pr = P.portals[k];
  return pr.a == s ? pr.b : pr.a;
}

// Motion mapping the partner polygon's coordinates into the frame of
// `s`'s polygon, for the portal crossing through side `s`.
inline RigidMotion transit_from_partner(const Portalgon& P,
                                        const SideIndex& idx, SideRef s,
                                        const Tolerances& tol = {}) {
  auto q = partner_side(P, idx, s);
  PGN_REQUIRE(q.has_value(), "not-interior", "transit across an unmatched side");
  return transit_motion(side_points(P, *q), reversed(side_points(P, s)), tol);
}

// Largest polygon diameter; the reference length scale of an instance
// (placement-invariant, unlike a global bounding box).
inline double instance_scale(const Portalgon& P) {
  double s = 0;
  for (const auto& poly : P.polygons) s = std::max(s, polygon_diameter(poly));
  return s;
}

inline double total_area(const Portalgon& P) {
  double a = 0;
  for (const auto& poly : P.polygons) a += polygon_area(poly);
  return a;
}

inline double max_side_length(const Portalgon& P) {
  double m = 0;
  for (int p = 0; p < P.num_polygons(); ++p)
    for (int s = 0; s < P.degree(p); ++s)
      m = std::max(m, side_length(P, {p, s}));
  return m;
}

// Minimum triangle height over triangular faces (0 when there are none).
inline double min_triangle_height(const Portalgon& P) {
  double h = 0;
  bool any = false;
  for (const auto& poly : P.polygons) {
    if (poly.size() != 3) continue;
    double area2 = std::abs(cross(poly[1] - poly[0], poly[2] - poly[0]));
    double longest = std::max({dist(poly[0], poly[1]), dist(poly[1], poly[2]),
                               dist(poly[2], poly[0])});
    if (longest == 0) continue;
    double hh = area2 / longest;
    h = any ? std::min(h, hh) : hh;
    any = true;
  }
  return h;
}

}  // namespace portalgon
