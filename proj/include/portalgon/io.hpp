// JSON serialization of portalgons.
//
// Format:
//   {
//     "polygons": [ [ [x, y], ... ], ... ],
//     "portals":  [ [ [p, i], [q, j] ], ... ],
//     "meta":     { ... }            (optional, ignored)
//   }
#pragma once

#include <fstream>
#include <json.hpp>

#include "portalgon.hpp"

namespace portalgon {

inline Portalgon portalgon_from_json(const nlohmann::json& j) {
  PGN_REQUIRE(j.is_object(), "schema-error", "top level must be an object");
  PGN_REQUIRE(j.contains("polygons") && j["polygons"].is_array(),
              "schema-error", "missing \"polygons\" array");
  Portalgon P;
  for (const auto& jp : j["polygons"]) {
    PGN_REQUIRE(jp.is_array() && jp.size() >= 3, "schema-error",
                "each polygon needs at least 3 corners");
    std::vector<Point2> poly;
    for (const auto& jc : jp) {
      PGN_REQUIRE(jc.is_array() && jc.size() == 2 && jc[0].is_number() &&
                      jc[1].is_number(),
                  "schema-error", "corner must be a [x, y] number pair");
      Point2 p{jc[0].get<double>(), jc[1].get<double>()};
      PGN_REQUIRE(std::isfinite(p.x) && std::isfinite(p.y), "schema-error",
                  "corner coordinates must be finite");
      poly.push_back(p);
    }
    P.polygons.push_back(std::move(poly));
  }
  if (j.contains("portals")) {
    PGN_REQUIRE(j["portals"].is_array(), "schema-error",
                "\"portals\" must be an array");
    for (const auto& jr : j["portals"]) {
      PGN_REQUIRE(jr.is_array() && jr.size() == 2, "schema-error",
                  "portal must be a pair of sides");
      Portal pr;
      SideRef* out[2] = {&pr.a, &pr.b};
      for (int k = 0; k < 2; ++k) {
        const auto& js = jr[k];
        PGN_REQUIRE(js.is_array() && js.size() == 2 &&
                        js[0].is_number_integer() && js[1].is_number_integer(),
                    "schema-error", "portal side must be [poly, side]");
        out[k]->poly = js[0].get<int>();
        out[k]->side = js[1].get<int>();
        PGN_REQUIRE(out[k]->poly >= 0 && out[k]->poly < P.num_polygons(),
                    "schema-error", "portal polygon index out of range");
        PGN_REQUIRE(out[k]->side >= 0 && out[k]->side < P.degree(out[k]->poly),
                    "schema-error", "portal side index out of range");
      }
      P.portals.push_back(pr);
    }
  }
  ensure_tags(P);
  return P;
}

inline nlohmann::json portalgon_to_json(const Portalgon& P) {
  nlohmann::json j;
  j["polygons"] = nlohmann::json::array();
  for (const auto& poly : P.polygons) {
    nlohmann::json jp = nlohmann::json::array();
    for (const Point2& c : poly) jp.push_back({c.x, c.y});
    j["polygons"].push_back(std::move(jp));
  }
  j["portals"] = nlohmann::json::array();
  for (const Portal& pr : P.portals)
    j["portals"].push_back({{pr.a.poly, pr.a.side}, {pr.b.poly, pr.b.side}});
  return j;
}

inline Portalgon load_portalgon(const std::string& path) {
  std::ifstream in(path);
  PGN_REQUIRE(in.good(), "io-error", "cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error("schema-error", std::string("invalid JSON: ") + e.what());
  }
  return portalgon_from_json(j);
}

inline void save_portalgon(const std::string& path, const Portalgon& P) {
  std::ofstream out(path);
  PGN_REQUIRE(out.good(), "io-error", "cannot write " + path);
  out << portalgon_to_json(P).dump(2) << "\n";
}

}  // namespace portalgon
