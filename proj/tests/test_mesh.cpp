#include <doctest.h>

#include <algorithm>
#include <set>

#include "error.hpp"
#include "test_helpers.hpp"

using namespace surfgrow;
using namespace surfgrow::testing;

TEST_CASE("seed meshes match the class table") {
  for (auto cls : kAllTopologyClasses) {
    for (std::uint64_t s : {1u, 3u, 7u}) {
      Mesh m = seed(cls, cls == TopologyClass::ThricePuncturedDisc ? 24 : 20, s);
      CAPTURE(to_string(cls));
      CHECK(validate(m).empty());
      CHECK(topology_signature(m) == expected_signature(cls));
      CHECK(m.vertex_count() >= 16);
      CHECK(m.vertex_count() <= 40);
      for (int e = 0; e < m.edge_slots(); ++e) {
        CHECK(m.edge(e).rest_length == doctest::Approx(m.edge_length(e)));
      }
    }
  }
  CHECK(seed(TopologyClass::Disc, 20, 7).vertex_count() == 20);
}

TEST_CASE("seed signatures for the named examples") {
  CHECK(topology_signature(seed(TopologyClass::Disc, 20, 7)) == TopologySignature{1, 1, true});
  CHECK(topology_signature(seed(TopologyClass::MobiusStrip, 20, 1)) ==
        TopologySignature{0, 1, false});
  CHECK(topology_signature(seed(TopologyClass::ThricePuncturedDisc, 24, 3)) ==
        TopologySignature{-2, 4, true});
  CHECK(topology_signature(seed(TopologyClass::PairOfPants, 20, 1)) ==
        TopologySignature{-1, 3, true});
}

TEST_CASE("too-small seed target is rejected") {
  RngStream rng(1, Purpose::SeedMesh);
  CHECK_THROWS_AS(seed_mesh(TopologyClass::PairOfPants, 3, rng), Error);
}

TEST_CASE("orientation_agree marks the Möbius seam") {
  Mesh m = seed(TopologyClass::MobiusStrip);
  int disagree = 0;
  for (int e = 0; e < m.edge_slots(); ++e) {
    if (m.edge_alive(e) && m.is_seam_edge(e)) ++disagree;
  }
  CHECK(disagree >= 1);
  Mesh disc = seed(TopologyClass::Annulus);
  for (int e = 0; e < disc.edge_slots(); ++e) {
    if (disc.edge_alive(e)) CHECK_FALSE(disc.is_seam_edge(e));
  }
}

TEST_CASE("split interior diagonal of a quad") {
  Mesh m = unit_square();
  auto diag = m.find_edge(0, 2);
  REQUIRE(diag);
  const double rest = m.edge(*diag).rest_length;
  const ElementId nv = m.split_edge(m.edge(*diag).id, 12);
  CHECK(m.vertex_count() == 5);
  CHECK(m.edge_count() == 8);
  CHECK(m.face_count() == 4);
  CHECK(topology_signature(m).euler_characteristic == 1);
  CHECK(validate(m).empty());
  const int v = *m.vertex_slot(nv);
  CHECK(m.vertex_birth(v) == 12);
  for (int end : {0, 2}) {
    const auto child = m.find_edge(v, end);
    REQUIRE(child);
    CHECK(m.edge(*child).rest_length == doctest::Approx(rest / 2));
    CHECK(m.edge(*child).original_rest_length == doctest::Approx(rest / 2));
  }
  // Cross edges keep the rest metric: median of a right isoceles rest triangle.
  const auto cross = m.find_edge(v, 1);
  REQUIRE(cross);
  CHECK(m.edge(*cross).rest_length == doctest::Approx(std::sqrt(2.0) / 2));
}

TEST_CASE("split boundary edge of a lone triangle") {
  Mesh m = single_triangle();
  m.split_edge(m.edge(*m.find_edge(0, 1)).id, 0);
  CHECK(m.vertex_count() == 4);
  CHECK(m.edge_count() == 5);
  CHECK(m.face_count() == 2);
  CHECK(topology_signature(m) == TopologySignature{1, 1, true});
}

TEST_CASE("split places the midpoint") {
  std::vector<Vec3> p{{0, 0, 0}, {2, 0, 0}, {1, 1, 0}};
  std::vector<std::array<int, 3>> t{{0, 1, 2}};
  Mesh m = Mesh::from_triangles(p, t);
  const ElementId id = m.split_edge(m.edge(*m.find_edge(0, 1)).id, 0);
  CHECK((m.position(*m.vertex_slot(id)) - Vec3(1, 0, 0)).norm() == 0.0);
}

TEST_CASE("split of an unknown id") {
  Mesh m = single_triangle();
  CHECK_THROWS_AS(m.split_edge(ElementId{12345}, 0), Error);
}

TEST_CASE("flip the unit-square diagonal") {
  Mesh m = unit_square();
  // Corners need valence > 3; grow the square into a fan so the flip is legal.
  Mesh grid = triangular_grid(4, 4);
  int flipped = 0;
  for (int e = 0; e < grid.edge_slots() && !flipped; ++e) {
    if (!grid.edge_alive(e) || grid.flip_blocker(e)) continue;
    const int h = grid.edge(e).he[0];
    const int c = grid.he_opposite_vertex(h), d = grid.he_opposite_vertex(grid.he_twin(h));
    const int nv = grid.vertex_count(), ne = grid.edge_count(), nf = grid.face_count();
    const ElementId old = grid.edge(e).id;
    const ElementId fresh = grid.flip_edge(old, 3);
    CHECK(fresh != old);
    CHECK_FALSE(grid.edge_slot(old));
    const auto& ed = grid.edge(*grid.edge_slot(fresh));
    CHECK(((ed.v[0] == c && ed.v[1] == d) || (ed.v[0] == d && ed.v[1] == c)));
    CHECK(grid.vertex_count() == nv);
    CHECK(grid.edge_count() == ne);
    CHECK(grid.face_count() == nf);
    CHECK(validate(grid).empty());
    flipped = 1;
  }
  CHECK(flipped == 1);
  const ElementId fresh = m.flip_edge(m.edge(*m.find_edge(0, 2)).id);
  const auto& ed = m.edge(*m.edge_slot(fresh));
  CHECK(std::min(ed.v[0], ed.v[1]) == 1);
  CHECK(std::max(ed.v[0], ed.v[1]) == 3);
  CHECK(m.vertex_count() == 4);
  CHECK(m.edge_count() == 5);
  CHECK(m.face_count() == 2);
  CHECK_FALSE(m.find_edge(0, 2));
}

TEST_CASE("boundary edge is not flippable") {
  Mesh m = unit_square();
  const auto e = m.find_edge(0, 1);
  CHECK(*m.flip_blocker(*e) == "boundary edge");
  try {
    m.flip_edge(m.edge(*e).id);
    FAIL("expected NotFlippable");
  } catch (const Error& err) {
    CHECK(err.code() == ErrorCode::NotFlippable);
  }
}

TEST_CASE("flip blocked when opposite vertices are already joined") {
  // Cone over a triangle: the tetrahedron minus one face.
  std::vector<Vec3> p{{0, 0, 1}, {1, 0, 0}, {-0.5, 0.8, 0}, {-0.5, -0.8, 0}};
  std::vector<std::array<int, 3>> t{{0, 1, 2}, {0, 2, 3}, {0, 3, 1}};
  Mesh m = Mesh::from_triangles(p, t);
  for (int e = 0; e < m.edge_slots(); ++e) {
    if (m.is_boundary_edge(e)) continue;
    CHECK(*m.flip_blocker(e) == "opposite vertices already joined");
  }
}

// Brute force: an interior edge's opposite vertices are joined iff some face
// contains both of them.
TEST_CASE("flip precondition agrees with a brute-force edge scan") {
  std::vector<Mesh> meshes;
  meshes.push_back(unit_square());
  meshes.push_back(hexagon_fan());
  meshes.push_back(triangular_grid(3, 2));
  {
    std::vector<Vec3> p{{0, 0, 1}, {1, 0, 0}, {-0.5, 0.8, 0}, {-0.5, -0.8, 0}};
    std::vector<std::array<int, 3>> t{{0, 1, 2}, {0, 2, 3}, {0, 3, 1}};
    meshes.push_back(Mesh::from_triangles(p, t));
  }
  {
    // Five-vertex strip folded so both ends meet a shared apex.
    std::vector<Vec3> p{{0, 0, 0}, {1, 0, 0}, {2, 0, 0}, {0.5, 1, 0}, {1.5, 1, 0.2}, {1, 2, 0}};
    std::vector<std::array<int, 3>> t{{0, 1, 3}, {1, 4, 3}, {1, 2, 4}, {3, 4, 5}};
    meshes.push_back(Mesh::from_triangles(p, t));
  }
  int checked = 0;
  for (auto& m : meshes) {
    REQUIRE(validate(m).empty());
    for (int e = 0; e < m.edge_slots(); ++e) {
      if (!m.edge_alive(e) || m.is_boundary_edge(e)) continue;
      const int h = m.edge(e).he[0];
      const int c = m.he_opposite_vertex(h), d = m.he_opposite_vertex(m.he_twin(h));
      bool joined = false;
      for (int f = 0; f < m.face_slots(); ++f) {
        if (!m.face_alive(f)) continue;
        const auto& v = m.face(f).v;
        joined |= std::count(v.begin(), v.end(), c) && std::count(v.begin(), v.end(), d);
      }
      const auto why = m.flip_blocker(e);
      CHECK(joined == (why && *why == "opposite vertices already joined"));
      ++checked;
    }
  }
  CHECK(checked > 5);
}

TEST_CASE("interior valence-3 vertex blocks a flip") {
  // Centre of a three-triangle fan inside a larger triangle.
  std::vector<Vec3> p{{0, 0, 0}, {2, 0, 0}, {1, 2, 0}, {1, 0.7, 0}};
  std::vector<std::array<int, 3>> t{{0, 1, 3}, {1, 2, 3}, {2, 0, 3}};
  Mesh m = Mesh::from_triangles(p, t);
  CHECK_FALSE(m.is_boundary_vertex(3));
  CHECK(m.is_boundary_vertex(0));
  const auto e = m.find_edge(0, 3);
  CHECK(m.flip_blocker(*e).has_value());
}

TEST_CASE("validate reports a broken twin once") {
  Mesh m = seed(TopologyClass::Disc);
  REQUIRE(validate(m).empty());
  int h = -1;
  for (int e = 0; e < m.edge_slots(); ++e) {
    if (!m.is_boundary_edge(e)) {
      h = m.edge(e).he[0];
      break;
    }
  }
  m.corrupt_twin_for_testing(h);
  const auto problems = validate(m);
  REQUIRE(problems.size() == 1);
  CHECK(problems[0].find(std::to_string(h)) != std::string::npos);
}

TEST_CASE("random surgery preserves topology and validity") {
  for (auto cls : kAllTopologyClasses) {
    Mesh m = seed(cls, 24, 5);
    const auto sig = topology_signature(m);
    RngStream rng(42, Purpose::Test, static_cast<int>(cls));
    std::uint64_t last_vertex = 0;
    for (int step = 0; step < 200; ++step) {
      const int e = static_cast<int>(rng.below(m.edge_slots()));
      if (!m.edge_alive(e)) continue;
      if (rng.uniform() < 0.5) {
        const int v = m.split_edge_slot(e, step);
        CHECK(m.vertex_id(v).value > last_vertex);
        last_vertex = m.vertex_id(v).value;
      } else if (!m.flip_blocker(e)) {
        m.flip_edge_slot(e, step);
      }
    }
    CAPTURE(to_string(cls));
    CHECK(validate(m).empty());
    CHECK(topology_signature(m) == sig);
    CHECK(m.vertex_count() > 60);
  }
}

TEST_CASE("from_records rebuilds identical connectivity") {
  Mesh m = seed(TopologyClass::MobiusStrip);
  m.split_edge_slot(3, 1);
  std::vector<Mesh::VertexRecord> vs;
  for (int v = 0; v < m.vertex_count(); ++v) vs.push_back({m.vertex_id(v), m.position(v), m.vertex_birth(v)});
  std::vector<Mesh::FaceRecord> fs;
  for (int f : faces_by_id(m)) {
    const auto& c = m.face(f).v;
    fs.push_back({m.face(f).id, {m.vertex_id(c[0]), m.vertex_id(c[1]), m.vertex_id(c[2])}});
  }
  std::vector<Mesh::EdgeRecord> es;
  for (int e : edges_by_id(m)) {
    const auto& ed = m.edge(e);
    es.push_back({ed.id, m.vertex_id(ed.v[0]), m.vertex_id(ed.v[1]), ed.rest_length,
                  ed.original_rest_length, ed.birth_frame});
  }
  Mesh r = Mesh::from_records(vs, fs, es);
  CHECK(validate(r).empty());
  CHECK(topology_signature(r) == topology_signature(m));
  CHECK(r.ids().counter(ElementKind::Vertex) == m.ids().counter(ElementKind::Vertex));
  CHECK(r.ids().counter(ElementKind::Edge) == m.ids().counter(ElementKind::Edge));
}

TEST_CASE("boundary loops are ordered cycles") {
  Mesh m = seed(TopologyClass::ThricePuncturedDisc, 24);
  const auto loops = boundary_loops(m);
  CHECK(loops.size() == 4);
  for (const auto& loop : loops) {
    for (std::size_t i = 0; i < loop.size(); ++i) {
      const auto e = m.find_edge(loop[i], loop[(i + 1) % loop.size()]);
      REQUIRE(e);
      CHECK(m.is_boundary_edge(*e));
    }
  }
}
