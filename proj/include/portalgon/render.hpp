#pragma once

#include <algorithm>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "skeleton.hpp"

namespace portalgon {

struct RenderOptions {
  double width = 940;     // pixel width of the drawing area
  bool side_labels = true;  // portal ids at matched side midpoints
  bool corner_ids = false;  // vertex class at every corner
  bool face_ids = true;     // polygon index at the centroid
  // Per skeleton edge; marked edges are drawn with a thick red overlay
  // (used for the Voronoi subgraph of an overlay portalgon).
  const std::vector<bool>* highlight = nullptr;
};

namespace detail {

inline std::string svg_num(double v) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(2) << v;
  return os.str();
}

inline std::string portal_color(int i) {
  int hue = (47 + 137 * i) % 360;
  return "hsl(" + std::to_string(hue) + ",65%,42%)";
}

}  // namespace detail

// The polygons of P drawn side by side in their own plane coordinates,
// shelf-packed left to right. Matched sides share a color and a label, so
// the gluing can be read off the figure; boundary sides stay gray.
inline std::string render_svg(const Portalgon& P,
                              const RenderOptions& opt = {},
                              const Tolerances& tol = {}) {
  PGN_REQUIRE(P.num_polygons() > 0, "schema-error", "nothing to draw");
  Skeleton S = build_skeleton(P, tol);
  if (opt.highlight)
    PGN_REQUIRE(opt.highlight->size() == S.edges.size(), "schema-error",
                "highlight mask does not match the skeleton");

  const int n = P.num_polygons();
  struct Box {
    double x0, y0, w, h;
  };
  std::vector<Box> bb(n);
  double maxdim = 0;
  for (int p = 0; p < n; ++p) {
    double x0 = P.polygons[p][0].x, x1 = x0;
    double y0 = P.polygons[p][0].y, y1 = y0;
    for (const Point2& c : P.polygons[p]) {
      x0 = std::min(x0, c.x), x1 = std::max(x1, c.x);
      y0 = std::min(y0, c.y), y1 = std::max(y1, c.y);
    }
    bb[p] = {x0, y0, x1 - x0, y1 - y0};
    maxdim = std::max({maxdim, bb[p].w, bb[p].h});
  }
  PGN_REQUIRE(maxdim > 0, "schema-error", "all polygons are degenerate");

  // Shelf packing in world coordinates.
  double pad = 0.08 * maxdim;
  double area = 0;
  for (const Box& b : bb) area += (b.w + pad) * (b.h + pad);
  double target_row = std::max(1.2 * std::sqrt(area), maxdim + pad);
  std::vector<Point2> shift(n);  // polygon p drawn at corner + shift[p]
  double cx = 0, cy = 0, row_h = 0, world_w = 0;
  for (int p = 0; p < n; ++p) {
    if (cx > 0 && cx + bb[p].w > target_row) {
      cx = 0;
      cy += row_h + pad;
      row_h = 0;
    }
    shift[p] = {cx - bb[p].x0, cy - bb[p].y0};
    cx += bb[p].w + pad;
    row_h = std::max(row_h, bb[p].h);
    world_w = std::max(world_w, cx - pad);
  }
  double world_h = cy + row_h;

  const double margin = 10;
  double s = (opt.width - 2 * margin) / world_w;
  double H = world_h * s + 2 * margin;
  auto px = [&](int p, Point2 q) -> Point2 {
    Point2 w = q + shift[p];
    return {margin + w.x * s, H - margin - w.y * s};
  };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\""
     << detail::svg_num(opt.width) << "\" height=\"" << detail::svg_num(H)
     << "\" viewBox=\"0 0 " << detail::svg_num(opt.width) << " "
     << detail::svg_num(H) << "\">\n";
  os << "<g font-family=\"sans-serif\">\n";

  for (int p = 0; p < n; ++p) {
    os << "<polygon fill=\"#f3f4f6\" stroke=\"none\" points=\"";
    for (const Point2& c : P.polygons[p]) {
      Point2 q = px(p, c);
      os << detail::svg_num(q.x) << "," << detail::svg_num(q.y) << " ";
    }
    os << "\"/>\n";
  }

  // Which portal, if any, owns each side.
  SideIndex idx = build_side_index(P);
  auto side_portal = [&](int p, int e) { return idx.portal_of(SideRef{p, e}); };

  for (int p = 0; p < n; ++p) {
    int deg = P.degree(p);
    for (int e = 0; e < deg; ++e) {
      auto [a, b] = side_points(P, {p, e});
      Point2 qa = px(p, a), qb = px(p, b);
      int pr = side_portal(p, e);
      std::string col = pr >= 0 ? detail::portal_color(pr) : "#64748b";
      double w = pr >= 0 ? 2.0 : 1.0;
      if (opt.highlight && (*opt.highlight)[S.edge_of[p][e]])
        os << "<line x1=\"" << detail::svg_num(qa.x) << "\" y1=\""
           << detail::svg_num(qa.y) << "\" x2=\"" << detail::svg_num(qb.x)
           << "\" y2=\"" << detail::svg_num(qb.y)
           << "\" stroke=\"#dc2626\" stroke-width=\"4.5\" "
              "stroke-opacity=\"0.55\" stroke-linecap=\"round\"/>\n";
      os << "<line x1=\"" << detail::svg_num(qa.x) << "\" y1=\""
         << detail::svg_num(qa.y) << "\" x2=\"" << detail::svg_num(qb.x)
         << "\" y2=\"" << detail::svg_num(qb.y) << "\" stroke=\"" << col
         << "\" stroke-width=\"" << detail::svg_num(w) << "\"/>\n";
      if (opt.side_labels && pr >= 0) {
        Point2 m = px(p, (a + b) * 0.5);
        os << "<text x=\"" << detail::svg_num(m.x) << "\" y=\""
           << detail::svg_num(m.y - 3) << "\" font-size=\"11\" fill=\"" << col
           << "\" text-anchor=\"middle\">" << pr << "</text>\n";
      }
    }
  }

  for (int p = 0; p < n; ++p) {
    int deg = P.degree(p);
    Point2 cen{0, 0};
    for (const Point2& c : P.polygons[p]) cen = cen + c;
    cen = cen * (1.0 / deg);
    if (opt.face_ids) {
      Point2 q = px(p, cen);
      os << "<text x=\"" << detail::svg_num(q.x) << "\" y=\""
         << detail::svg_num(q.y) << "\" font-size=\"10\" fill=\"#9ca3af\" "
            "text-anchor=\"middle\">"
         << p << "</text>\n";
    }
    if (opt.corner_ids)
      for (int c = 0; c < deg; ++c) {
        Point2 q = px(p, P.polygons[p][c] + (cen - P.polygons[p][c]) * 0.14);
        os << "<text x=\"" << detail::svg_num(q.x) << "\" y=\""
           << detail::svg_num(q.y) << "\" font-size=\"9\" fill=\"#374151\" "
              "text-anchor=\"middle\">v"
           << S.vertex(p, c) << "</text>\n";
      }
  }

  os << "</g>\n</svg>\n";
  return os.str();
}

}  // namespace portalgon
