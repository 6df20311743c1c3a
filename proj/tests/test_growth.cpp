#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>

#include "error.hpp"
#include "growth.hpp"
#include "test_helpers.hpp"

using namespace surfgrow;
using namespace surfgrow::testing;

namespace {

// O(V^2) Dijkstra on a dense adjacency matrix built straight from the faces.
std::vector<double> dense_dijkstra(const Mesh& m, const std::vector<int>& sources) {
  const int n = m.vertex_count();
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<std::vector<double>> w(n, std::vector<double>(n, inf));
  for (int f = 0; f < m.face_slots(); ++f) {
    if (!m.face_alive(f)) continue;
    const auto& v = m.face(f).v;
    for (int k = 0; k < 3; ++k) {
      const int a = v[k], b = v[(k + 1) % 3];
      w[a][b] = w[b][a] = (m.position(a) - m.position(b)).norm();
    }
  }
  std::vector<double> d(n, inf);
  std::vector<char> done(n, 0);
  for (int s : sources) d[s] = 0.0;
  for (int it = 0; it < n; ++it) {
    int u = -1;
    for (int i = 0; i < n; ++i) {
      if (!done[i] && (u < 0 || d[i] < d[u])) u = i;
    }
    if (u < 0 || !std::isfinite(d[u])) break;
    done[u] = 1;
    for (int x = 0; x < n; ++x) {
      if (std::isfinite(w[u][x]) && d[u] + w[u][x] < d[x]) d[x] = d[u] + w[u][x];
    }
  }
  return d;
}

Mesh path_strip() {
  // Two triangles whose bottom row v0-v1-v2 has unit edges; the apex is far
  // enough that the shortest route to v2 runs along the bottom.
  std::vector<Vec3> p{{0, 0, 0}, {1, 0, 0}, {2, 0, 0}, {1, 5, 0}};
  std::vector<std::array<int, 3>> t{{0, 1, 3}, {1, 2, 3}};
  return Mesh::from_triangles(p, t);
}

Mesh quad(double angle_deg) {
  // Rhombus-like quad a b with apexes c, d placed so each opposite angle equals
  // angle_deg.
  const double half = 0.5 * angle_deg * std::numbers::pi / 180.0;
  const double h = 1.0 / std::tan(half);
  std::vector<Vec3> p{{-1, 0, 0}, {1, 0, 0}, {0, h, 0}, {0, -h, 0}};
  std::vector<std::array<int, 3>> t{{0, 1, 2}, {1, 0, 3}};
  return Mesh::from_triangles(p, t);
}

double max_ratio(const Mesh& m) {
  double r = 0.0;
  for (int e = 0; e < m.edge_slots(); ++e) {
    if (m.edge_alive(e)) r = std::max(r, m.edge(e).rest_length / m.edge(e).original_rest_length);
  }
  return r;
}

double law_of_cosines_angle(double opp, double s1, double s2) {
  return std::acos((s1 * s1 + s2 * s2 - opp * opp) / (2 * s1 * s2));
}

}  // namespace

TEST_CASE("growth field on a unit path") {
  Mesh m = path_strip();
  const ElementId src[] = {m.vertex_id(0)};
  const auto f = compute_growth_field(m, src);
  // Max distance is to the apex: min(1 + |(1,5)-(1,0)|... ) via the bottom path.
  const double apex = std::min(std::hypot(1.0, 5.0), 1.0 + 5.0);
  CHECK(f.g[0] == 0.0);
  CHECK(f.g[1] == doctest::Approx(1.0 / apex));
  CHECK(f.g[2] == doctest::Approx(2.0 / apex));

  // Restricted to the bottom path (apex removed from consideration) the
  // normalized values are 0, 0.5, 1.
  std::vector<Vec3> p{{0, 0, 0}, {1, 0, 0}, {2, 0, 0}, {1, 0.1, 0}};
  Mesh flat = Mesh::from_triangles(p, std::vector<std::array<int, 3>>{{0, 1, 3}, {1, 2, 3}});
  const auto g = compute_growth_field(flat, src);
  CHECK(g.g[0] == 0.0);
  CHECK(g.g[1] == doctest::Approx(0.5));
  CHECK(g.g[2] == doctest::Approx(1.0));
}

TEST_CASE("growth field with every vertex a source is identically zero") {
  Mesh m = seed(TopologyClass::Annulus);
  std::vector<ElementId> all;
  for (int v = 0; v < m.vertex_count(); ++v) all.push_back(m.vertex_id(v));
  const auto f = compute_growth_field(m, all);
  for (double g : f.g) CHECK(g == 0.0);
}

TEST_CASE("growth field rejects unknown and empty sources") {
  Mesh m = seed(TopologyClass::Disc);
  const ElementId bad[] = {ElementId{999999}};
  CHECK_THROWS_AS(compute_growth_field(m, bad), Error);
  try {
    compute_growth_field(m, bad);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::UnknownId);
  }
  CHECK_THROWS_AS(compute_growth_field(m, std::span<const ElementId>{}), Error);
}

TEST_CASE("growth field matches a dense Dijkstra on random meshes") {
  for (std::uint64_t s = 1; s <= 50; ++s) {
    Mesh m = random_mesh(s, 500);
    RngStream rng(s, Purpose::Test, 7);
    const auto sources = select_source_set(m, rng, 0.1);
    std::vector<int> slots;
    for (auto id : sources) slots.push_back(*m.vertex_slot(id));
    const auto oracle = dense_dijkstra(m, slots);
    const auto d = geodesic_distances(m, slots);
    REQUIRE(d.size() == oracle.size());
    double max_d = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) {
      CHECK(d[i] == oracle[i]);
      max_d = std::max(max_d, oracle[i]);
    }
    const auto f = compute_growth_field(m, sources);
    for (std::size_t i = 0; i < d.size(); ++i) {
      CHECK(f.g[i] == oracle[i] / max_d);
      CHECK(f.g[i] >= 0.0);
      CHECK(f.g[i] <= 1.0);
    }
    for (int v : slots) CHECK(f.g[v] == 0.0);
  }
}

TEST_CASE("source set is a contiguous tenth of one boundary loop") {
  for (auto c : kAllTopologyClasses) {
    Mesh m = seed(c);
    RngStream rng(3, Purpose::SourceSet);
    const auto src = select_source_set(m, rng, 0.1);
    const auto loops = boundary_loops(m);
    bool matched = false;
    for (const auto& loop : loops) {
      const std::size_t n = loop.size();
      if (src.size() != static_cast<std::size_t>(std::ceil(0.1 * n))) continue;
      for (std::size_t start = 0; start < n && !matched; ++start) {
        bool ok = true;
        for (std::size_t i = 0; i < src.size(); ++i) {
          ok = ok && m.vertex_id(loop[(start + i) % n]) == src[i];
        }
        matched = ok;
      }
    }
    CHECK(matched);
  }
}

TEST_CASE("rest length accretion law") {
  Mesh m = single_triangle();
  GrowthField f;
  f.g = {0.0, 0.0, 0.0};
  GrowthConfig cfg;
  const double before = m.edge(0).rest_length;
  update_rest_lengths(m, f, cfg);
  CHECK(m.edge(0).rest_length == before);

  for (int e = 0; e < 3; ++e) m.set_rest_length(e, 1.0);
  const double orig = m.edge(0).original_rest_length;
  f.g = {1.0, 1.0, 1.0};
  GrowthConfig one;
  one.gamma = 1.0;
  update_rest_lengths(m, f, one);
  for (int e = 0; e < 3; ++e) CHECK(m.edge(e).rest_length == doctest::Approx(2.0));
  CHECK(m.edge(0).original_rest_length == orig);

  for (int e = 0; e < 3; ++e) m.set_rest_length(e, 1.0);
  f.g = {0.5, 0.5, 0.5};
  update_rest_lengths(m, f, cfg);
  for (int e = 0; e < 3; ++e) CHECK(m.edge(e).rest_length == doctest::Approx(1.01));

  GrowthField short_field;
  short_field.g = {0.0};
  CHECK_THROWS_AS(update_rest_lengths(m, short_field, cfg), Error);
}

TEST_CASE("rest length update is monotone on random fields") {
  Mesh m = random_mesh(11, 200);
  RngStream rng(11, Purpose::Test);
  GrowthField f;
  for (int v = 0; v < m.vertex_count(); ++v) f.g.push_back(rng.uniform());
  std::vector<double> before;
  for (int e = 0; e < m.edge_slots(); ++e) before.push_back(m.edge(e).rest_length);
  update_rest_lengths(m, f, GrowthConfig{});
  for (int e = 0; e < m.edge_slots(); ++e) {
    if (m.edge_alive(e)) CHECK(m.edge(e).rest_length >= before[e]);
  }
}

TEST_CASE("split threshold") {
  Mesh m = triangular_grid(3, 3);
  const int e = *m.find_edge(4, 5);
  const double orig = m.edge(e).original_rest_length;
  m.set_rest_length(e, 1.49 * orig);
  CHECK(split_pass(m, GrowthConfig{}, 1).splits == 0);

  m.set_rest_length(e, 1.51 * orig);
  const ElementId id = m.edge(e).id;
  const auto stats = split_pass(m, GrowthConfig{}, 1);
  CHECK(stats.splits >= 1);
  CHECK_FALSE(m.edge_slot(id).has_value());
  const int v = stats.inserted.front()[0];
  for (int end : {4, 5}) {
    const auto child = m.find_edge(v, end);
    REQUIRE(child.has_value());
    CHECK(m.edge(*child).rest_length / m.edge(*child).original_rest_length == 1.0);
    CHECK(m.edge(*child).rest_length == doctest::Approx(0.5 * 1.51 * orig));
  }
  CHECK(max_ratio(m) <= 1.5);
}

TEST_CASE("split pass handles the largest ratio first") {
  Mesh m = triangular_grid(3, 3);
  const int a = *m.find_edge(4, 5), b = *m.find_edge(1, 4);
  const ElementId ida = m.edge(a).id, idb = m.edge(b).id;
  m.set_rest_length(a, 1.6 * m.edge(a).original_rest_length);
  m.set_rest_length(b, 1.8 * m.edge(b).original_rest_length);
  const auto stats = split_pass(m, GrowthConfig{}, 2);
  REQUIRE(stats.splits == 2);
  CHECK((stats.inserted[0][1] == 1 || stats.inserted[0][2] == 1));  // the 1.8 edge went first
  CHECK_FALSE(m.edge_slot(ida));
  CHECK_FALSE(m.edge_slot(idb));
}

TEST_CASE("growth until ratios pass 1.5 then split leaves none above threshold") {
  for (auto c : kAllTopologyClasses) {
    Mesh m = seed(c);
    GrowthField f;
    f.g.assign(m.vertex_count(), 1.0);
    GrowthConfig cfg;
    cfg.gamma = 0.6;  // one step lands every ratio at 1.6
    update_rest_lengths(m, f, cfg);
    const auto before = topology_signature(m);
    const auto stats = split_pass(m, cfg, 1);
    CHECK(stats.splits > 0);
    CHECK(stats.blocked == 0);
    CHECK(max_ratio(m) <= 1.5);
    CHECK(topology_signature(m) == before);
    CHECK(validate(m).empty());
  }
}

TEST_CASE("split pass terminates below threshold under random fuzz") {
  for (std::uint64_t s = 1; s <= 20; ++s) {
    Mesh m = random_mesh(s, 150);
    RngStream rng(s, Purpose::Test, 1);
    for (int e = 0; e < m.edge_slots(); ++e) {
      if (m.edge_alive(e)) m.set_rest_length(e, m.edge(e).rest_length * rng.uniform(1.0, 2.5));
    }
    const auto before = topology_signature(m);
    split_pass(m, GrowthConfig{}, 3);
    CHECK(max_ratio(m) <= 1.5);
    CHECK(topology_signature(m) == before);
    CHECK(validate(m).empty());
  }
}

TEST_CASE("equilateral grid and a lone triangle need no flips") {
  Mesh grid = triangular_grid(5, 5);
  CHECK(delaunay_flip_pass(grid).flips == 0);
  Mesh fan = hexagon_fan();
  CHECK(delaunay_flip_pass(fan).flips == 0);
  Mesh tri = single_triangle();
  CHECK(delaunay_flip_pass(tri).flips == 0);
}

TEST_CASE("obtuse quad is flipped once and becomes Delaunay") {
  Mesh m = quad(100.0);
  const int e = *m.find_edge(0, 1);
  // Independent trig oracle: apex angle from the side lengths.
  const double side = (m.position(2) - m.position(0)).norm();
  const double alpha = law_of_cosines_angle(2.0, side, side);
  CHECK(alpha * 180.0 / std::numbers::pi == doctest::Approx(100.0));
  CHECK(opposite_angle_sum(m, e) == doctest::Approx(2 * alpha));

  const auto stats = delaunay_flip_pass(m);
  CHECK(stats.flips == 1);
  CHECK_FALSE(stats.non_termination);
  const auto diag = m.find_edge(2, 3);
  REQUIRE(diag.has_value());
  const double h = (m.position(2) - m.position(3)).norm();
  CHECK(m.edge(*diag).rest_length == doctest::Approx(h));
  CHECK(m.edge(*diag).original_rest_length == doctest::Approx(h));
  // After the flip the opposite angles are 80 + 80 degrees.
  const double beta = law_of_cosines_angle(h, side, side);
  CHECK(beta * 180.0 / std::numbers::pi == doctest::Approx(80.0));
  CHECK(opposite_angle_sum(m, *diag) == doctest::Approx(2 * beta));
  CHECK(delaunay_flip_pass(m).flips == 0);
}

TEST_CASE("flip pass leaves boundary and seam edges alone and preserves signature") {
  for (auto c : kAllTopologyClasses) {
    Mesh m = seed(c, 20, 5);
    RngStream rng(5, Purpose::Test);
    roughen(m, rng, 0.15, 0.0);
    std::vector<ElementId> protected_ids;
    for (int e = 0; e < m.edge_slots(); ++e) {
      if (m.edge_alive(e) && (m.is_boundary_edge(e) || m.is_seam_edge(e))) {
        protected_ids.push_back(m.edge(e).id);
      }
    }
    const auto before = topology_signature(m);
    delaunay_flip_pass(m);
    for (auto id : protected_ids) CHECK(m.edge_slot(id).has_value());
    CHECK(topology_signature(m) == before);
    CHECK(validate(m).empty());
  }
}

TEST_CASE("flip pass reaches a locally Delaunay state on random planar grids") {
  for (std::uint64_t s = 1; s <= 10; ++s) {
    Mesh m = triangular_grid(6, 6);
    RngStream rng(s, Purpose::Test);
    for (int v = 0; v < m.vertex_count(); ++v) {
      if (!m.is_boundary_vertex(v)) {
        m.position(v) += Vec3(rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3), 0.0);
      }
    }
    for (int e = 0; e < m.edge_slots(); ++e) {
      if (m.edge_alive(e)) m.set_rest_length(e, m.edge_length(e));
    }
    const auto stats = delaunay_flip_pass(m);
    CHECK_FALSE(stats.non_termination);
    for (int e = 0; e < m.edge_slots(); ++e) {
      if (!m.edge_alive(e) || m.is_boundary_edge(e) || m.flip_blocker(e)) continue;
      CHECK(opposite_angle_sum(m, e) <= std::numbers::pi + 1e-9);
    }
  }
}

TEST_CASE("hexagon fan centre is a fixed point of ODT smoothing") {
  Mesh m = hexagon_fan();
  const Vec3 c = m.position(0);
  odt_smooth_pass(m);
  CHECK((m.position(0) - c).norm() < 1e-12);
}

TEST_CASE("ODT improves a perturbed hexagon fan") {
  Mesh m = hexagon_fan();
  m.position(0) += Vec3(0.1, 0.0, 0.0);
  const double before = quality_report(m).radius_edge_mean;
  const auto stats = odt_smooth_pass(m);
  CHECK(stats.moved >= 1);
  CHECK(quality_report(m).radius_edge_mean < before);
}

TEST_CASE("ODT keeps boundary vertices on their polyline") {
  Mesh m = triangular_grid(6, 2);
  RngStream rng(9, Purpose::Test);
  for (int v = 0; v < m.vertex_count(); ++v) {
    m.position(v) += Vec3(rng.uniform(-0.1, 0.1), rng.uniform(-0.1, 0.1), rng.uniform(-0.1, 0.1));
  }
  const auto flags = boundary_vertex_flags(m);
  const Adjacency adj = vertex_adjacency(m);
  std::vector<Vec3> before(m.positions().begin(), m.positions().end());
  std::vector<std::array<int, 2>> ends(m.vertex_count(), {-1, -1});
  for (int v = 0; v < m.vertex_count(); ++v) {
    int k = 0;
    const auto nb = adj.neighbors_of(v);
    const auto ed = adj.edges_of(v);
    for (std::size_t i = 0; i < nb.size(); ++i) {
      if (m.is_boundary_edge(ed[i]) && k < 2) ends[v][k++] = nb[i];
    }
  }
  odt_smooth_pass(m);
  auto seg_dist = [](const Vec3& x, const Vec3& a, const Vec3& b) {
    const Vec3 ab = b - a;
    const double t = std::clamp((x - a).dot(ab) / ab.squaredNorm(), 0.0, 1.0);
    return (a + t * ab - x).norm();
  };
  // Gauss-Seidel order: vertex v sees its neighbours' already-updated
  // positions only if they come earlier.
  std::vector<Vec3> cur = before;
  for (int v = 0; v < m.vertex_count(); ++v) {
    if (flags[v]) {
      const Vec3& p = cur[ends[v][0]];
      const Vec3& q = cur[ends[v][1]];
      const double d = std::min(seg_dist(m.position(v), p, cur[v]), seg_dist(m.position(v), cur[v], q));
      CHECK(d <= 1e-12);
    }
    cur[v] = m.position(v);
  }
}

TEST_CASE("ODT preserves topology and validity on seeds") {
  for (auto c : kAllTopologyClasses) {
    Mesh m = seed(c, 20, 2);
    RngStream rng(2, Purpose::Test);
    roughen(m, rng, 0.05, 0.0);
    const auto before = topology_signature(m);
    odt_smooth_pass(m, 3);
    CHECK(topology_signature(m) == before);
    CHECK(validate(m).empty());
    for (int f = 0; f < m.face_slots(); ++f) {
      if (m.face_alive(f)) CHECK(face_area(m, f) >= kMinFaceArea);
    }
  }
}

TEST_CASE("radius-edge ratio") {
  const double s3 = std::sqrt(3.0);
  CHECK(radius_edge_ratio({0, 0, 0}, {1, 0, 0}, {0.5, s3 / 2, 0}) == doctest::Approx(1 / s3));

  // Isosceles cap with a 170 degree apex; circumradius from the law of sines.
  const double apex = 170.0 * std::numbers::pi / 180.0;
  const double leg = 1.0;
  const double base = 2 * leg * std::sin(apex / 2);
  const double h = leg * std::cos(apex / 2);
  const Vec3 a{-base / 2, 0, 0}, b{base / 2, 0, 0}, c{0, h, 0};
  const double radius = base / (2 * std::sin(apex));
  const double ratio = radius_edge_ratio(a, b, c);
  CHECK(ratio == doctest::Approx(radius / leg));
  CHECK(ratio > 2.0);

  Mesh tri = Mesh::from_triangles(std::vector<Vec3>{{0, 0, 0}, {1, 0, 0}, {0.5, s3 / 2, 0}},
                                  std::vector<std::array<int, 3>>{{0, 1, 2}});
  const auto q = quality_report(tri);
  CHECK(q.radius_edge_mean == doctest::Approx(1 / s3));
  CHECK(q.min_angle == doctest::Approx(std::numbers::pi / 3));
  CHECK(q.interior_vertices == 0);
}

TEST_CASE("quality report counts interior valence and rejects degenerate faces") {
  Mesh m = hexagon_fan();
  const auto q = quality_report(m);
  CHECK(q.interior_vertices == 1);
  CHECK(q.valence_histogram.at(6) == 1);
  CHECK(q.valence_fraction() == 1.0);
  CHECK(q.radius_edge_mean >= 1 / std::sqrt(3.0) - 1e-9);

  Mesh flat = hexagon_fan();
  flat.position(1) = flat.position(0);
  try {
    quality_report(flat);
    FAIL("expected DegenerateFace");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DegenerateFace);
  }
}

TEST_CASE("both flip metrics agree on a quad whose rest lengths match its shape") {
  for (auto metric : {FlipMetric::Rest, FlipMetric::Embedded}) {
    Mesh m = quad(100.0);
    CHECK(delaunay_flip_pass(m, 0, metric).flips == 1);
    CHECK(m.find_edge(2, 3).has_value());
  }
}

TEST_CASE("rest-metric flip follows the rest lengths, not the embedding") {
  // Embedded quad is a flat square (no flip wanted by positions); the rest
  // lengths describe a rhombus whose a-b diagonal is long.
  std::vector<Vec3> p{{0, 0, 0}, {1, 1, 0}, {0, 1, 0}, {1, 0, 0}};
  std::vector<std::array<int, 3>> t{{0, 1, 2}, {1, 0, 3}};
  Mesh m = Mesh::from_triangles(p, t);
  const int ab = *m.find_edge(0, 1);
  m.set_rest_length(ab, 1.8);  // sides stay 1: apex angles acos(1 - 1.8^2/2) > 90 deg
  const double apex = law_of_cosines_angle(1.8, 1.0, 1.0);
  CHECK(rest_opposite_angle_sum(m, ab) == doctest::Approx(2 * apex));
  CHECK(opposite_angle_sum(m, ab) == doctest::Approx(std::numbers::pi));

  // Unfolded rhombus: the other diagonal is 2 * sqrt(1 - 0.9^2).
  const auto diag = rest_flip_length(m, ab);
  REQUIRE(diag.has_value());
  CHECK(*diag == doctest::Approx(2.0 * std::sqrt(1.0 - 0.81)));

  Mesh embedded = m;
  CHECK(delaunay_flip_pass(embedded, 0, FlipMetric::Embedded).flips == 0);
  CHECK(delaunay_flip_pass(m, 0, FlipMetric::Rest).flips == 1);
  const auto fresh = m.find_edge(2, 3);
  REQUIRE(fresh.has_value());
  CHECK(m.edge(*fresh).rest_length == doctest::Approx(*diag));
  CHECK(m.edge(*fresh).original_rest_length == m.edge(*fresh).rest_length);
}

TEST_CASE("rest flip length is refused for a non-convex rest quad") {
  std::vector<Vec3> p{{0, 0, 0}, {2, 0, 0}, {0.2, 1, 0}, {0.2, -1, 0}};
  std::vector<std::array<int, 3>> t{{0, 1, 2}, {1, 0, 3}};
  Mesh m = Mesh::from_triangles(p, t);
  CHECK(rest_flip_length(m, *m.find_edge(0, 1)).has_value());
  // Rest lengths put both apexes beyond vertex a.
  m.set_rest_length(*m.find_edge(0, 2), 1.0);
  m.set_rest_length(*m.find_edge(0, 3), 1.0);
  m.set_rest_length(*m.find_edge(1, 2), 2.9);
  m.set_rest_length(*m.find_edge(1, 3), 2.9);
  CHECK_FALSE(rest_flip_length(m, *m.find_edge(0, 1)).has_value());
}

TEST_CASE("rest growth keeps every rest triangle clear of the triangle inequality") {
  Mesh m = single_triangle();
  // Edge 0 is the only edge that grows; the others touch a source vertex.
  const auto& e0 = m.edge(0);
  GrowthField f;
  f.g.assign(3, 0.0);
  f.g[e0.v[0]] = f.g[e0.v[1]] = 1.0;
  GrowthConfig cfg;
  cfg.gamma = 0.5;
  for (int i = 0; i < 20; ++i) update_rest_lengths(m, f, cfg);
  const double a = m.edge(0).rest_length, b = m.edge(1).rest_length, c = m.edge(2).rest_length;
  CHECK(a <= (1.0 - cfg.min_rest_slack) * (b + c) * (1 + 1e-12));
  CHECK(a > m.edge(0).original_rest_length);

  Mesh free_growth = single_triangle();
  cfg.min_rest_slack = 0.0;
  for (int i = 0; i < 20; ++i) update_rest_lengths(free_growth, f, cfg);
  CHECK(free_growth.edge(0).rest_length > free_growth.edge(1).rest_length + free_growth.edge(2).rest_length);
}

TEST_CASE("rest area is kept by flips and splits and never lost by resampling ODT") {
  for (auto c : kAllTopologyClasses) {
    Mesh m = seed(c, 30, 5);
    RngStream rng(5, Purpose::Test);
    roughen(m, rng, 0.05, 0.0);
    GrowthConfig cfg;
    cfg.gamma = 0.1;
    const auto field = compute_growth_field(m, select_source_set(m, rng, 0.1));
    for (int k = 0; k < 6; ++k) update_rest_lengths(m, field, cfg);
    double area = total_rest_area(m);
    split_pass(m, cfg, 1);
    CHECK(total_rest_area(m) == doctest::Approx(area).epsilon(1e-12));
    area = total_rest_area(m);
    delaunay_flip_pass(m, 1);
    CHECK(total_rest_area(m) == doctest::Approx(area).epsilon(1e-12));
    area = total_rest_area(m);
    odt_smooth_pass(m, 3, true);
    CHECK(total_rest_area(m) >= area * (1.0 - 1e-12));
  }
}
