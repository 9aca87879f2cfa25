#include "portalgon/diagnostics.hpp"
#include "portalgon/fixtures.hpp"
#include "portalgon/wave.hpp"

#include "test_util.hpp"

using namespace portalgon;
using pgt::near;

namespace {

std::string code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return "";
}

// Lattice of the flat torus behind make_sheared_torus(x): spans (1,0), (x,2).
double lattice_distance(Point2 p, double x) {
  double best = std::numeric_limits<double>::infinity();
  for (int j = -3; j <= 4; ++j)
    for (int i = -30; i <= 30; ++i)
      best = std::min(best, dist(p, {i + j * x, 2.0 * j}));
  return best;
}

bool on_lattice(Point2 p, double x, double eps = 1e-9) {
  double j = p.y / 2.0;
  if (std::abs(j - std::round(j)) > eps) return false;
  double i = p.x - std::round(j) * x;
  return std::abs(i - std::round(i)) <= eps;
}

// Evenly spread barycentric samples of a triangle, corners included.
std::vector<Point2> triangle_grid(const std::vector<Point2>& tri, int N) {
  std::vector<Point2> out;
  for (int i = 0; i <= N; ++i)
    for (int j = 0; i + j <= N; ++j)
      out.push_back(tri[0] + (tri[1] - tri[0]) * (double(i) / N) +
                    (tri[2] - tri[0]) * (double(j) / N));
  return out;
}

Point2 random_in_triangle(const std::vector<Point2>& tri) {
  double u = pgt::uniform(0, 1), v = pgt::uniform(0, 1);
  if (u + v > 1) {
    u = 1 - u;
    v = 1 - v;
  }
  return tri[0] + (tri[1] - tri[0]) * u + (tri[2] - tri[0]) * v;
}

// One corner realization of each site vertex class, for path queries.
std::vector<PointOnSurface> site_spots(const Portalgon& P, const Skeleton& S,
                                       const std::vector<int>& sites) {
  std::vector<PointOnSurface> out;
  for (int v : sites) {
    bool found = false;
    for (int p = 0; p < P.num_polygons() && !found; ++p)
      for (int c = 0; c < P.degree(p) && !found; ++c)
        if (S.vertex(p, c) == v) {
          out.push_back({p, P.polygons[p][c]});
          found = true;
        }
    REQUIRE(found);
  }
  return out;
}

void check_move_budget(const WaveState& st) {
  for (int d = 0; d < 3 * st.T.num_polygons(); ++d)
    CHECK(st.cell_moves[d] <= 5 * st.insertions[d / 3]);
}

// Terminal cell lists must mirror across every portal: same subdivision,
// and on pieces of positive length the owners must be the same lift (tie
// cells may legitimately resolve to different but equidistant owners).
void check_mirror_cells(const WaveState& st) {
  for (int d = 0; d < 3 * st.T.num_polygons(); ++d) {
    int e = st.twin[d];
    const auto& a = st.cells[d];
    const auto& b = st.cells[e];
    REQUIRE(a.size() == b.size());
    for (size_t i = 0; i < a.size(); ++i) {
      const SideCell& ca = a[i];
      const SideCell& cb = b[b.size() - 1 - i];
      CHECK(near(ca.lo, 1.0 - cb.hi, 1e-9));
      CHECK(near(ca.hi, 1.0 - cb.lo, 1e-9));
      if (ca.hi - ca.lo > 1e-9) {
        Point2 pushed = st.push[d](st.X[d / 3][ca.owner].pos);
        CHECK(near(pushed, st.X[e / 3][cb.owner].pos,
                   st.merge_radius + 1e-9));
      }
    }
  }
}

// Every overlay face corner keeps the distance the wave claims for it.
void check_face_owners(const WaveState& st, const VoronoiOverlay& ov) {
  for (int f = 0; f < ov.P.num_polygons(); ++f)
    for (Point2 q : ov.P.polygons[f]) {
      double via_owner = dist(q, ov.face_owner[f]);
      double field = wave_distance(st, ov.face_source[f], q);
      CHECK(near(via_owner, field, 2 * st.merge_radius + 1e-9));
    }
}

int euler_characteristic(const VoronoiOverlay& ov) {
  return ov.skel.n_vertices - static_cast<int>(ov.skel.edges.size()) +
         ov.P.num_polygons();
}

}  // namespace

TEST_CASE("side cells: the first point owns the whole side", "[wave]") {
  std::vector<WavePoint> X{{{0.3, -2.0}, 0}};
  std::vector<SideCell> cells;
  auto ch = insert_side_cell(cells, {0, 0}, {1, 0}, X, 0);
  REQUIRE(cells.size() == 1);
  CHECK(cells[0].owner == 0);
  CHECK(near(cells[0].lo, 0.0));
  CHECK(near(cells[0].hi, 1.0));
  REQUIRE(ch.size() == 1);
  CHECK(ch[0].owner == 0);
  CHECK_FALSE(ch[0].removed);
}

TEST_CASE("side cells: a symmetric pair splits at the midpoint", "[wave]") {
  std::vector<WavePoint> X{{{0, -1}, 0}};
  std::vector<SideCell> cells;
  insert_side_cell(cells, {0, 0}, {1, 0}, X, 0);

  X.push_back({{1, -1}, 0});
  auto ch = insert_side_cell(cells, {0, 0}, {1, 0}, X, 1);
  REQUIRE(cells.size() == 2);
  CHECK(cells[0].owner == 0);
  CHECK(near(cells[0].hi, 0.5));
  CHECK(cells[1].owner == 1);
  CHECK(near(cells[1].lo, 0.5));
  REQUIRE(ch.size() == 2);  // the trimmed incumbent and the new cell

  // A hopeless newcomer changes nothing and wins nothing.
  X.push_back({{5, -9}, 0});
  auto ch2 = insert_side_cell(cells, {0, 0}, {1, 0}, X, 2);
  CHECK(ch2.empty());
  CHECK(cells.size() == 2);
}

TEST_CASE("side cells: incremental and naive rebuild agree", "[wave]") {
  Point2 A{0, 0}, B{3, 1};
  std::vector<WavePoint> X;
  std::vector<SideCell> inc, nai;
  long long moves = 0;
  for (int k = 0; k < 45; ++k) {
    X.push_back({pgt::random_point(-2, 5), 0});
    int zi = static_cast<int>(X.size()) - 1;
    auto ch = insert_side_cell(inc, A, B, X, zi);
    std::vector<SideCell> before = nai;
    rebuild_side_cells(nai, A, B, X);
    auto chn = diff_side_cells(before, nai, zi);
    moves += 1 + (ch.empty() ? 0 : static_cast<long long>(ch.size()) - 1);

    REQUIRE(inc.size() == nai.size());
    for (size_t i = 0; i < inc.size(); ++i) {
      CHECK(inc[i].owner == nai[i].owner);
      CHECK(near(inc[i].lo, nai[i].lo, 1e-9));
      CHECK(near(inc[i].hi, nai[i].hi, 1e-9));
    }
    auto key = [](const CellChange& c) {
      return std::make_pair(c.owner, c.removed);
    };
    std::sort(ch.begin(), ch.end(),
              [&](const CellChange& a, const CellChange& b) {
                return key(a) < key(b);
              });
    std::sort(chn.begin(), chn.end(),
              [&](const CellChange& a, const CellChange& b) {
                return key(a) < key(b);
              });
    REQUIRE(ch.size() == chn.size());
    for (size_t i = 0; i < ch.size(); ++i) {
      CHECK(key(ch[i]) == key(chn[i]));
      if (!ch[i].removed) {
        CHECK(near(ch[i].lo, chn[i].lo, 1e-9));
        CHECK(near(ch[i].hi, chn[i].hi, 1e-9));
      }
    }

    // structural invariants and a brute-force ownership probe
    CHECK(near(inc.front().lo, 0.0));
    CHECK(near(inc.back().hi, 1.0));
    for (size_t i = 0; i + 1 < inc.size(); ++i)
      CHECK(near(inc[i].hi, inc[i + 1].lo, 1e-9));
    for (const SideCell& c : inc) {
      Point2 p = A + (B - A) * ((c.lo + c.hi) / 2);
      double mine = dist(p, X[c.owner].pos);
      for (const WavePoint& w : X) CHECK(mine <= dist(p, w.pos) + 1e-9);
    }
  }
  CHECK(moves <= 5 * 45);
}

TEST_CASE("wave on the square torus delivers the four lattice corners",
          "[wave]") {
  Portalgon T = make_square_torus();
  WaveConfig cfg;
  cfg.check = true;
  WaveState init = wave_init(T, {0}, cfg);
  CHECK(init.X[0].size() == 3);  // seeded with the triangle's corners
  CHECK(init.X[1].size() == 3);
  CHECK(init.queue.size() == 2);  // one tie-point proposal per diagonal side

  WaveState st = wave_run(T, {0}, cfg);
  CHECK(st.stats.popped == 2);
  CHECK(st.stats.inserted == 2);
  CHECK(st.stats.dedup_dropped == 0);
  CHECK(st.stats.date_regressions == 0);
  CHECK(near(st.stats.last_date, std::sqrt(0.5)));
  CHECK(st.queue.empty());
  CHECK(st.event_of.empty());

  std::vector<Point2> want{{0, 0}, {0, 1}, {1, 0}, {1, 1}};
  for (int f = 0; f < 2; ++f) {
    REQUIRE(st.X[f].size() == 4);
    std::vector<Point2> got;
    for (const WavePoint& w : st.X[f]) got.push_back(w.pos);
    std::sort(got.begin(), got.end(), lex_less);
    for (int i = 0; i < 4; ++i) CHECK(near(got[i], want[i], 1e-12));
  }
  check_move_budget(st);
  check_mirror_cells(st);
}

TEST_CASE("overlay of the square torus marks the cut locus", "[overlay]") {
  Portalgon T = make_square_torus();
  WaveState st = wave_run(T, {0});
  VoronoiOverlay ov = voronoi_overlay(st);

  CHECK(ov.P.num_polygons() == 8);
  CHECK(validate(ov.P).ok());
  CHECK(near(total_area(ov.P), total_area(T)));
  CHECK(euler_characteristic(ov) == 0);

  REQUIRE(ov.voronoi_edges.size() == 4);
  CHECK(near(voronoi_total_length(ov), 2.0));
  std::vector<int> deg;
  for (int d : voronoi_vertex_degrees(ov))
    if (d > 0) deg.push_back(d);
  std::sort(deg.begin(), deg.end());
  REQUIRE(deg.size() == 3);  // the crossing and the two circle midpoints
  CHECK(deg[0] == 2);
  CHECK(deg[1] == 2);
  CHECK(deg[2] == 4);
  CHECK(contracted_voronoi_degrees(ov) == std::vector<int>{4});
  CHECK(voronoi_face_count(ov) == 1);
  for (int s : ov.face_site) CHECK(s == 0);
  check_face_owners(st, ov);
}

TEST_CASE("wave on the tetrahedron with all corners as sites is silent",
          "[wave]") {
  Portalgon T = make_tetrahedron();
  ValidationResult vr = validate(T);
  REQUIRE(vr.ok());
  std::vector<int> sites = vr.report->singular_vertices;
  REQUIRE(sites.size() == 4);

  WaveConfig cfg;
  cfg.check = true;
  WaveState st = wave_run(T, sites, cfg);
  CHECK(st.stats.popped == 0);  // every transported corner already exists
  for (int f = 0; f < 4; ++f) CHECK(st.X[f].size() == 3);
  check_move_budget(st);
  check_mirror_cells(st);

  // Inside a unit face the nearest site is always one of its own corners.
  for (int f = 0; f < 4; ++f)
    for (Point2 p : triangle_grid(T.polygons[f], 14)) {
      double want = std::numeric_limits<double>::infinity();
      for (Point2 c : T.polygons[f]) want = std::min(want, dist(p, c));
      CHECK(near(wave_distance(st, f, p), want, 1e-9));
    }
}

TEST_CASE("overlay of the tetrahedron is four corner caps", "[overlay]") {
  Portalgon T = make_tetrahedron();
  std::vector<int> sites = validate(T).report->singular_vertices;
  WaveState st = wave_run(T, sites);
  VoronoiOverlay ov = voronoi_overlay(st);

  CHECK(validate(ov.P).ok());
  CHECK(near(total_area(ov.P), total_area(T)));
  CHECK(euler_characteristic(ov) == 2);

  REQUIRE(ov.voronoi_edges.size() == 12);
  CHECK(near(voronoi_total_length(ov), 12.0 / (2 * std::sqrt(3.0))));
  std::vector<int> deg;
  for (int d : voronoi_vertex_degrees(ov))
    if (d > 0) deg.push_back(d);
  std::sort(deg.begin(), deg.end());
  // six side-midpoint crossings and four in-face circumcenters
  REQUIRE(deg.size() == 10);
  for (int i = 0; i < 6; ++i) CHECK(deg[i] == 2);
  for (int i = 6; i < 10; ++i) CHECK(deg[i] == 3);
  CHECK(contracted_voronoi_degrees(ov) == std::vector<int>{3, 3, 3, 3});

  REQUIRE(voronoi_face_count(ov) == 4);
  std::vector<int> comp = voronoi_face_of(ov);
  std::map<int, std::set<int>> sites_of;
  for (int f = 0; f < ov.P.num_polygons(); ++f)
    sites_of[comp[f]].insert(ov.face_site[f]);
  std::set<int> owners;
  for (const auto& [c, ss] : sites_of) {
    CHECK(ss.size() == 1);  // one site per Voronoi face
    owners.insert(*ss.begin());
  }
  CHECK(owners.size() == 4);  // and the faces exhaust the sites
  check_face_owners(st, ov);
}

TEST_CASE("wave on a generic flat torus reproduces the lattice field",
          "[wave]") {
  const double x = 3.25;
  Portalgon T = make_sheared_torus(x);
  WaveConfig cfg;
  cfg.check = true;
  WaveState st = wave_run(T, {0}, cfg);
  CHECK(st.stats.date_regressions == 0);
  CHECK(st.queue.empty());
  CHECK(st.event_of.empty());
  check_move_budget(st);
  check_mirror_cells(st);

  for (int f = 0; f < 2; ++f) {
    CHECK(st.X[f].size() >= 4);
    CHECK(st.X[f].size() <= 40);
    for (const WavePoint& w : st.X[f]) CHECK(on_lattice(w.pos, x));
    for (size_t i = 0; i < st.X[f].size(); ++i)
      for (size_t j = i + 1; j < st.X[f].size(); ++j)
        CHECK(dist(st.X[f][i].pos, st.X[f][j].pos) > st.merge_radius);
    // the induced field is exactly the lattice distance
    for (Point2 p : triangle_grid(T.polygons[f], 24))
      CHECK(near(wave_distance(st, f, p), lattice_distance(p, x), 1e-9));
  }

  // the naive cell twin drives the wave to the same terminal sets
  WaveConfig naive;
  naive.naive_cells = true;
  WaveState stn = wave_run(T, {0}, naive);
  CHECK(stn.stats.inserted == st.stats.inserted);
  for (int f = 0; f < 2; ++f) {
    REQUIRE(stn.X[f].size() == st.X[f].size());
    std::vector<Point2> a, b;
    for (const WavePoint& w : st.X[f]) a.push_back(w.pos);
    for (const WavePoint& w : stn.X[f]) b.push_back(w.pos);
    std::sort(a.begin(), a.end(), lex_less);
    std::sort(b.begin(), b.end(), lex_less);
    for (size_t i = 0; i < a.size(); ++i) CHECK(near(a[i], b[i], 1e-9));
  }
}

TEST_CASE("overlay of a generic flat torus has a hexagonal cut locus",
          "[overlay]") {
  Portalgon T = make_sheared_torus(3.25);
  WaveState st = wave_run(T, {0});
  VoronoiOverlay ov = voronoi_overlay(st);
  CHECK(validate(ov.P).ok());
  CHECK(near(total_area(ov.P), 2.0));
  CHECK(euler_characteristic(ov) == 0);
  CHECK(contracted_voronoi_degrees(ov) == std::vector<int>{3, 3});
  CHECK(voronoi_face_count(ov) == 1);
  check_face_owners(st, ov);
}

TEST_CASE("a skewed torus with a rectangular lattice degenerates cleanly",
          "[overlay]") {
  // x = 7 reduces to the rectangular lattice spanned by (1,0) and (0,2):
  // the cut locus is a grid with a single degree-4 vertex, and the wave has
  // to cope with aspect ratio ~ 49 on the way there.
  Portalgon T = make_sheared_torus(7.0);
  WaveState st = wave_run(T, {0});
  CHECK(st.stats.popped < 10000);
  for (int f = 0; f < 2; ++f)
    for (Point2 p : triangle_grid(T.polygons[f], 18))
      CHECK(near(wave_distance(st, f, p), lattice_distance(p, 7.0), 1e-9));

  VoronoiOverlay ov = voronoi_overlay(st);
  CHECK(validate(ov.P).ok());
  CHECK(near(total_area(ov.P), 2.0));
  CHECK(euler_characteristic(ov) == 0);
  CHECK(contracted_voronoi_degrees(ov) == std::vector<int>{4});
  CHECK(near(voronoi_total_length(ov), 3.0, 1e-6));
  CHECK(voronoi_face_count(ov) == 1);
}

TEST_CASE("wave distance agrees with refined shortest paths", "[wave]") {
  struct Probe {
    Portalgon T;
    std::vector<int> sites;
    int samples;
    int steiner;  // oracle density; slivers need more to certify 1%
  };
  std::vector<Probe> probes;
  probes.push_back({make_square_torus(), {0}, 70, 32});
  {
    Portalgon tet = make_tetrahedron();
    probes.push_back({tet, validate(tet).report->singular_vertices, 70, 32});
  }
  // the sheared triangles have sides ~5 long while geodesics stay below ~1,
  // and shortest paths cross those sides right next to the query point, so
  // the oracle's crossing quantization needs a much finer subdivision here
  probes.push_back({make_sheared_torus(3.25), {0}, 60, 192});

  for (const Probe& pr : probes) {
    WaveState st = wave_run(pr.T, pr.sites);
    std::vector<PointOnSurface> spots = site_spots(pr.T, st.skel, pr.sites);
    for (int k = 0; k < pr.samples; ++k) {
      int f = static_cast<int>(pgt::uniform(0, pr.T.num_polygons() - 1e-9));
      Point2 p = random_in_triangle(pr.T.polygons[f]);
      INFO("probe " << (&pr - probes.data()) << " sample " << k << " f=" << f
                    << " p=(" << p.x << "," << p.y << ")");
      double claimed = wave_distance(st, f, p);
      double refined = std::numeric_limits<double>::infinity();
      for (const PointOnSurface& s : spots) {
        SurfacePath path = refined_shortest_path(pr.T, {f, p}, s, pr.steiner);
        REQUIRE(path.found);
        refined = std::min(refined, path.length);
      }
      // the graph oracle converges from above
      CHECK(claimed <= refined + st.merge_radius + 1e-9);
      CHECK(refined <= claimed * 1.01 + st.merge_radius);
    }
  }
}

TEST_CASE("overlay export carries the voronoi annotation", "[overlay]") {
  WaveState st = wave_run(make_square_torus(), {0});
  VoronoiOverlay ov = voronoi_overlay(st);
  nlohmann::json j = overlay_to_json(ov);
  REQUIRE(j.contains("polygons"));
  REQUIRE(j.contains("portals"));
  REQUIRE(j.contains("voronoi"));
  CHECK(j["voronoi"]["edges"].size() == 4);
  CHECK(j["voronoi"]["face_site"].size() == size_t(ov.P.num_polygons()));
  CHECK(j["voronoi"]["face_source"].size() == size_t(ov.P.num_polygons()));
  Portalgon back = portalgon_from_json(j);  // the annotation is ignorable
  CHECK(validate(back).ok());
  CHECK(back.num_polygons() == ov.P.num_polygons());
}

TEST_CASE("wave rejects unusable inputs with typed errors", "[wave]") {
  CHECK(code_of([] { wave_run(make_square_torus(), {}); }) == "no-sites");
  CHECK(code_of([] { wave_run(make_square_torus(), {7}); }) == "schema-error");

  Portalgon tet = make_tetrahedron();
  std::vector<int> one{validate(tet).report->singular_vertices[0]};
  CHECK(code_of([&] { wave_run(tet, one); }) == "sites-missing-singularity");

  Portalgon open_torus = make_square_torus();
  open_torus.portals.pop_back();
  CHECK(code_of([&] { wave_run(open_torus, {0}); }) == "not-closed");

  Portalgon quad;  // a flat torus left as one square
  quad.polygons = {{{0, 0}, {1, 0}, {1, 1}, {0, 1}}};
  quad.portals = {{{0, 0}, {0, 2}}, {{0, 1}, {0, 3}}};
  CHECK(code_of([&] { wave_run(quad, {0}); }) == "not-triangular");

  WaveConfig tiny;
  tiny.max_events = 1;
  CHECK(code_of([&] { wave_run(make_square_torus(), {0}, tiny); }) ==
        "event-budget-exceeded");

  // a component with no site on it never gets a wave
  Portalgon two = make_square_torus();
  Portalgon other = make_square_torus();
  for (auto& poly : other.polygons) {
    for (Point2& p : poly) p = p + Point2{5, 0};
    two.polygons.push_back(poly);
  }
  for (Portal pr : other.portals) {
    pr.a.poly += 2;
    pr.b.poly += 2;
    two.portals.push_back(pr);
  }
  two.side_tags.clear();
  CHECK(code_of([&] { wave_run(two, {0}); }) == "no-sites");
}
