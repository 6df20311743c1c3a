#include <doctest.h>

#include <numbers>

#include "error.hpp"
#include "test_helpers.hpp"

using namespace surfgrow;
using namespace surfgrow::testing;

namespace {

Mesh equilateral(double side = 1.0) {
  std::vector<Vec3> p{{0, 0, 0}, {side, 0, 0}, {0.5 * side, side * std::sqrt(3.0) / 2, 0}};
  std::vector<std::array<int, 3>> t{{0, 1, 2}};
  return Mesh::from_triangles(p, t);
}

// |dev((A^T A - I)/2)|_F for a 2x2 map A, written out by hand.
double shear_norm_oracle(double a, double b, double c, double d) {
  const double c00 = a * a + c * c, c01 = a * b + c * d, c11 = b * b + d * d;
  const double e00 = 0.5 * (c00 - 1), e01 = 0.5 * c01, e11 = 0.5 * (c11 - 1);
  const double m = 0.5 * (e00 + e11);
  return std::sqrt((e00 - m) * (e00 - m) + 2 * e01 * e01 + (e11 - m) * (e11 - m));
}

}  // namespace

TEST_CASE("shear tensor vanishes for rigid motion and dilation") {
  Mesh m = equilateral();
  const Eigen::Matrix3d rot =
      Eigen::AngleAxisd(0.7, Vec3(1, 2, 3).normalized()).toRotationMatrix();
  for (int v = 0; v < 3; ++v) m.position(v) = rot * m.position(v) + Vec3(3, -1, 2);
  CHECK(face_shear_tensor(m, 0).norm() < 1e-14);
  for (int v = 0; v < 3; ++v) m.position(v) *= 1.2;
  CHECK(face_shear_tensor(m, 0).norm() < 1e-14);
}

TEST_CASE("simple shear matches the deformation-gradient oracle") {
  Mesh m = equilateral();
  for (int v = 0; v < 3; ++v) {
    Vec3& x = m.position(v);
    x = Vec3(x.x() + 0.1 * x.y(), x.y(), 0.0);
  }
  const double expected = shear_norm_oracle(1.0, 0.1, 0.0, 1.0);
  CHECK(face_shear_tensor(m, 0).norm() == doctest::Approx(expected).epsilon(1e-12));
  CHECK(expected == doctest::Approx(std::sqrt(0.0050125)).epsilon(1e-12));
}

TEST_CASE("degenerate rest triangle") {
  Mesh m = equilateral();
  m.set_rest_length(*m.find_edge(0, 1), 5.0);
  try {
    face_shear_tensor(m, 0);
    FAIL("expected DegenerateRest");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DegenerateRest);
  }
  CHECK_THROWS_AS(total_energy(m, {}), Error);
}

TEST_CASE("rest configuration has zero energy and gradient") {
  Mesh m = seed(TopologyClass::Disc);
  const auto e = total_energy(m, {});
  CHECK(e.total < 1e-28);
  for (const auto& g : energy_gradient(m, {})) CHECK(g.norm() < 1e-12);
  const auto w = per_vertex_energies(m, {});
  for (double x : w.w_memb) CHECK(x == doctest::Approx(0.0).scale(1e-20));
}

TEST_CASE("stretched edge energy, force and attribution") {
  std::vector<Vec3> p{{0, 0, 0}, {1.5, 0, 0}, {0.75, 1, 0}};
  std::vector<std::array<int, 3>> t{{0, 1, 2}};
  Mesh m = Mesh::from_triangles(p, t);
  m.set_rest_length(*m.find_edge(0, 1), 1.0);
  // Shear stiffness in the vanishing limit isolates the stretch term.
  const MaterialParams params{1.0, 1e-300, 1.0};
  const auto e = total_energy(m, params);
  CHECK(e.stretch == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(e.membrane == doctest::Approx(0.25).epsilon(1e-12));
  const auto g = energy_gradient(m, params);
  CHECK((g[1] - Vec3(1, 0, 0)).norm() < 1e-12);
  CHECK((g[0] + Vec3(1, 0, 0)).norm() < 1e-12);
  const auto w = per_vertex_energies(m, params);
  CHECK(w.w_memb[0] == doctest::Approx(0.125).epsilon(1e-12));
  CHECK(w.w_memb[1] == doctest::Approx(0.125).epsilon(1e-12));
}

TEST_CASE("hinge at a right angle") {
  // Two unit right triangles sharing the x-axis edge, folded to 90 degrees.
  std::vector<Vec3> p{{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  std::vector<std::array<int, 3>> t{{0, 1, 2}, {1, 0, 3}};
  Mesh m = Mesh::from_triangles(p, t);
  const auto e = total_energy(m, {1.0, 1.0, 0.2});
  const double quarter = std::numbers::pi / 2;
  CHECK(std::abs(dihedral_angle(m, *m.find_edge(0, 1))) == doctest::Approx(quarter));
  CHECK(e.flexural == doctest::Approx(0.2 * quarter * quarter).epsilon(1e-12));
  CHECK(e.flexural == doctest::Approx(0.49348).epsilon(1e-5));
  CHECK(e.membrane == doctest::Approx(0.0).scale(1e-20));
}

TEST_CASE("gradient matches central differences on random meshes") {
  for (std::uint64_t s = 1; s <= 6; ++s) {
    Mesh m = random_mesh(s, 80);
    RngStream rng(s, Purpose::Test, 2);
    roughen(m, rng);
    const auto params = random_params(rng);
    const auto analytic = energy_gradient(m, params);
    const auto numeric = fd_gradient(m, params, 1e-6);
    CAPTURE(s);
    CHECK(max_relative_error(analytic, numeric) < 1e-5);
  }
}

TEST_CASE("gradient on the Möbius seam") {
  Mesh m = seed(TopologyClass::MobiusStrip);
  RngStream rng(9, Purpose::Test);
  roughen(m, rng, 0.1, 0.05);
  const MaterialParams params{0.3, 0.2, 0.9};
  CHECK(max_relative_error(energy_gradient(m, params), fd_gradient(m, params, 1e-6)) < 1e-5);
}

TEST_CASE("attribution reproduces the totals") {
  for (std::uint64_t s = 1; s <= 5; ++s) {
    Mesh m = random_mesh(s, 150);
    RngStream rng(s, Purpose::Test, 3);
    roughen(m, rng);
    const auto params = random_params(rng);
    const auto e = total_energy(m, params);
    const auto w = per_vertex_energies(m, params);
    double memb = 0, flex = 0;
    for (double x : w.w_memb) {
      CHECK(x >= 0.0);
      memb += x;
    }
    for (double x : w.w_flex) {
      CHECK(x >= 0.0);
      flex += x;
    }
    CHECK(std::abs(memb - e.membrane) <= 1e-9 * e.membrane);
    CHECK(std::abs(flex - e.flexural) <= 1e-9 * e.flexural);
    CHECK(e.total == e.membrane + e.flexural);
  }
}

TEST_CASE("energy is invariant under rigid motion") {
  Mesh m = random_mesh(11, 120);
  RngStream rng(11, Purpose::Test);
  roughen(m, rng);
  const MaterialParams params{0.5, 0.4, 0.3};
  const double before = total_energy(m, params).total;
  const Eigen::Matrix3d rot =
      Eigen::AngleAxisd(2.1, Vec3(-1, 0.5, 2).normalized()).toRotationMatrix();
  for (int v = 0; v < m.vertex_count(); ++v) m.position(v) = rot * m.position(v) + Vec3(5, 6, -7);
  CHECK(std::abs(total_energy(m, params).total - before) < 1e-10 * before);
}

TEST_CASE("zero energy characterisation") {
  Mesh m = seed(TopologyClass::PairOfPants);
  CHECK(total_energy(m, {}).total < 1e-20);
  m.set_rest_length(0, m.edge(0).rest_length * 1.01);
  CHECK(total_energy(m, {}).total > 1e-10);
}

TEST_CASE("euler step on a zero-gradient mesh is a no-op") {
  Mesh m = seed(TopologyClass::Annulus);
  const std::vector<Vec3> before(m.positions().begin(), m.positions().end());
  const auto r = euler_step(m, {}, 1e-2);
  CHECK(r.accepted);
  for (int v = 0; v < m.vertex_count(); ++v) CHECK((m.position(v) - before[v]).norm() < 1e-15);
}

TEST_CASE("first euler step contracts a lone stretched edge by 1 - 4 k dt") {
  std::vector<Vec3> p{{0, 0, 0}, {1.5, 0, 0}, {0.75, 1, 0}};
  std::vector<std::array<int, 3>> t{{0, 1, 2}};
  Mesh m = Mesh::from_triangles(p, t);
  m.set_rest_length(*m.find_edge(0, 1), 1.0);
  const MaterialParams params{1.0, 1e-300, 1.0};
  const double dt = 1e-2;
  euler_step(m, params, dt);
  // The other two edges start at rest, so only the stretched edge pulls.
  const double gap = (m.position(1) - m.position(0)).norm() - 1.0;
  CHECK(gap == doctest::Approx(0.5 * (1 - 4 * params.k_stretch * dt)).epsilon(1e-12));
}

TEST_CASE("safeguarded descent never increases energy") {
  for (auto cls : kAllTopologyClasses) {
    Mesh m = seed(cls, 24, 3);
    RngStream rng(3, Purpose::Test, static_cast<int>(cls));
    roughen(m, rng, 0.08, 0.05);
    const MaterialParams params{1.0, 0.5, 0.2};
    double last = total_energy(m, params).total;
    for (int i = 0; i < 100; ++i) {
      const auto r = euler_step(m, params, 1e-2);
      CHECK(r.energy_after <= r.energy_before + 1e-12);
      const double now = total_energy(m, params).total;
      CHECK(now <= last + 1e-12);
      last = now;
    }
  }
}

TEST_CASE("relax_frame") {
  SolverConfig bad;
  bad.substeps_per_frame = 0;
  Mesh m = seed(TopologyClass::Disc);
  CHECK_THROWS_AS(relax_frame(m, {}, bad), Error);
  CHECK(relax_frame(m, {}, SolverConfig{}).energy.total < 1e-28);
  RngStream rng(5, Purpose::Test);
  roughen(m, rng);
  const double before = total_energy(m, {}).total;
  CHECK(relax_frame(m, {}, SolverConfig{}).energy.total <= before);
}

TEST_CASE("accepted Euler steps never turn a face over") {
  for (std::uint64_t s = 1; s <= 6; ++s) {
    Mesh m = random_mesh(s, 120);
    RngStream rng(s, Purpose::Test, 3);
    roughen(m, rng, 0.1, 0.02);
    const MaterialParams p = random_params(rng);
    for (int step = 0; step < 20; ++step) {
      std::vector<Vec3> before;
      for (int f = 0; f < m.face_slots(); ++f) before.push_back(face_area_vector(m, f));
      euler_step(m, p, 0.05);
      for (int f = 0; f < m.face_slots(); ++f) {
        if (m.face_alive(f)) CHECK(face_area_vector(m, f).dot(before[f]) > 0.0);
      }
    }
  }
}
