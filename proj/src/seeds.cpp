#include "seeds.hpp"

#include <cmath>
#include <numbers>

#include "error.hpp"

namespace surfgrow {

namespace {

using Triangles = std::vector<std::array<int, 3>>;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Stitches two concentric rings (inner angles increasing CCW) with a zipper.
void stitch_rings(const std::vector<int>& inner, const std::vector<double>& inner_angle,
                  const std::vector<int>& outer, const std::vector<double>& outer_angle,
                  Triangles& tris) {
  const int na = static_cast<int>(inner.size());
  const int nb = static_cast<int>(outer.size());
  auto wrap = [](double x) {
    x = std::fmod(x, kTwoPi);
    return x < 0 ? x + kTwoPi : x;
  };
  // Outer start: the outer point angularly closest to inner[0].
  int b0 = 0;
  double best = 1e9;
  for (int j = 0; j < nb; ++j) {
    double d = wrap(outer_angle[j] - inner_angle[0]);
    if (d > std::numbers::pi) d -= kTwoPi;
    if (std::abs(d) < best) {
      best = std::abs(d);
      b0 = j;
    }
  }
  double shift = wrap(outer_angle[b0] - inner_angle[0]);
  if (shift > std::numbers::pi) shift -= kTwoPi;
  auto a_ang = [&](int i) {
    return i == na ? kTwoPi : wrap(inner_angle[i] - inner_angle[0]);
  };
  auto b_ang = [&](int j) {
    if (j == nb) return kTwoPi + shift;
    return shift + wrap(outer_angle[(b0 + j) % nb] - outer_angle[b0]);
  };
  auto a_idx = [&](int i) { return inner[i % na]; };
  auto b_idx = [&](int j) { return outer[(b0 + j) % nb]; };
  int i = 0, j = 0;
  while (i < na || j < nb) {
    const bool advance_inner = (j == nb) || (i < na && a_ang(i + 1) <= b_ang(j + 1));
    if (advance_inner) {
      tris.push_back({a_idx(i), b_idx(j), a_idx(i + 1)});
      ++i;
    } else {
      tris.push_back({a_idx(i), b_idx(j), b_idx(j + 1)});
      ++j;
    }
  }
}

struct Ring {
  std::vector<int> ids;
  std::vector<double> angles;
};

Ring add_ring(std::vector<Vec3>& pts, int count, double radius, double phase) {
  Ring r;
  for (int k = 0; k < count; ++k) {
    const double a = phase + kTwoPi * k / count;
    r.ids.push_back(static_cast<int>(pts.size()));
    r.angles.push_back(a);
    pts.emplace_back(radius * std::cos(a), radius * std::sin(a), 0.0);
  }
  return r;
}

Mesh ring_mesh(bool with_center, int target, RngStream& rng, LineageSink* sink) {
  const double r_in = with_center ? 0.0 : 0.5;
  // Pick the ring count whose near-isotropic layout best matches the target.
  int best_rings = 1, best_total = 0;
  for (int rings = 1; rings < 64; ++rings) {
    const double h = (1.0 - r_in) / (with_center ? rings : std::max(rings - 1, 1));
    int total = with_center ? 1 : 0;
    for (int i = 0; i < rings; ++i) {
      const double r = with_center ? h * (i + 1) : r_in + h * i;
      total += std::max(3, static_cast<int>(std::lround(kTwoPi * r / h)));
    }
    if (!with_center && rings == 1) continue;
    if (best_total == 0 || std::abs(total - target) < std::abs(best_total - target)) {
      best_total = total;
      best_rings = rings;
    }
  }
  const int rings = best_rings;
  const double h = (1.0 - r_in) / (with_center ? rings : rings - 1);
  std::vector<Vec3> pts;
  Triangles tris;
  std::vector<Ring> ring_list;
  if (with_center) pts.emplace_back(0.0, 0.0, 0.0);
  for (int i = 0; i < rings; ++i) {
    const double r = with_center ? h * (i + 1) : r_in + h * i;
    const int count = std::max(3, static_cast<int>(std::lround(kTwoPi * r / h)));
    ring_list.push_back(add_ring(pts, count, r, rng.uniform(0.0, kTwoPi)));
  }
  if (with_center) {
    const auto& first = ring_list.front();
    const int n = static_cast<int>(first.ids.size());
    for (int k = 0; k < n; ++k) tris.push_back({0, first.ids[k], first.ids[(k + 1) % n]});
  }
  for (int i = 0; i + 1 < rings; ++i) {
    stitch_rings(ring_list[i].ids, ring_list[i].angles, ring_list[i + 1].ids,
                 ring_list[i + 1].angles, tris);
  }
  return Mesh::from_triangles(pts, tris, 0, sink);
}

Mesh mobius_mesh(int target, LineageSink* sink) {
  const int rows = target >= 36 ? 3 : 2;
  const int columns = std::max(5, static_cast<int>(std::lround(double(target) / rows)));
  const double radius = 1.0;
  const double width = std::min(0.8, 2.0 * kTwoPi * radius / columns);
  std::vector<Vec3> pts;
  for (int i = 0; i < columns; ++i) {
    const double phi = kTwoPi * i / columns;
    const Vec3 center(radius * std::cos(phi), radius * std::sin(phi), 0.0);
    const Vec3 radial(std::cos(phi), std::sin(phi), 0.0);
    const Vec3 dir = std::cos(0.5 * phi) * radial + std::sin(0.5 * phi) * Vec3::UnitZ();
    for (int k = 0; k < rows; ++k) {
      const double s = width * (double(k) / (rows - 1) - 0.5);
      pts.push_back(center + s * dir);
    }
  }
  // Column `columns` is column 0 with the rows reversed: the twist.
  auto at = [&](int i, int k) { return i == columns ? rows - 1 - k : i * rows + k; };
  Triangles tris;
  for (int i = 0; i < columns; ++i) {
    for (int k = 0; k + 1 < rows; ++k) {
      const int a = at(i, k), b = at(i, k + 1), c = at(i + 1, k), d = at(i + 1, k + 1);
      tris.push_back({a, c, d});
      tris.push_back({a, d, b});
    }
  }
  return Mesh::from_triangles(pts, tris, 0, sink);
}

Mesh punctured_torus_mesh(int target, LineageSink* sink) {
  const int minor = std::max(4, static_cast<int>(std::lround(std::sqrt(target / 1.25))));
  const int major = std::max(5, static_cast<int>(std::lround(double(target) / minor)));
  const double big_r = 1.0, small_r = 0.45;
  std::vector<Vec3> pts;
  for (int i = 0; i < major; ++i) {
    const double u = kTwoPi * i / major;
    for (int j = 0; j < minor; ++j) {
      const double v = kTwoPi * j / minor;
      pts.emplace_back((big_r + small_r * std::cos(v)) * std::cos(u),
                       (big_r + small_r * std::cos(v)) * std::sin(u), small_r * std::sin(v));
    }
  }
  auto at = [&](int i, int j) { return (i % major) * minor + (j % minor); };
  Triangles tris;
  for (int i = 0; i < major; ++i) {
    for (int j = 0; j < minor; ++j) {
      if (i == 0 && j == 0) continue;  // the puncture
      const int a = at(i, j), b = at(i + 1, j), c = at(i + 1, j + 1), d = at(i, j + 1);
      tris.push_back({a, b, c});
      tris.push_back({a, c, d});
    }
  }
  return Mesh::from_triangles(pts, tris, 0, sink);
}

Mesh holed_grid_mesh(int holes, int target, LineageSink* sink) {
  // Cells: (2*holes + 1) x 3 at minimum, holes centred on the middle row.
  int scale = 1;
  while ((2 * holes + 1) * scale * 3 * scale < target / 2 && scale < 8) ++scale;
  const int cx = (2 * holes + 1) * scale;
  const int cy = 3 * scale;
  const double spacing = 2.0 / cx;
  auto is_hole = [&](int i, int j) {
    const int ci = i / scale, cj = j / scale;
    return cj == 1 && ci % 2 == 1;
  };
  std::vector<int> index((cx + 1) * (cy + 1), -1);
  std::vector<Vec3> pts;
  auto vid = [&](int i, int j) {
    int& slot = index[j * (cx + 1) + i];
    if (slot < 0) {
      slot = static_cast<int>(pts.size());
      pts.emplace_back(spacing * (i - 0.5 * cx), spacing * (j - 0.5 * cy), 0.0);
    }
    return slot;
  };
  Triangles tris;
  for (int j = 0; j < cy; ++j) {
    for (int i = 0; i < cx; ++i) {
      if (is_hole(i, j)) continue;
      const int a = vid(i, j), b = vid(i + 1, j), c = vid(i + 1, j + 1), d = vid(i, j + 1);
      if ((i + j) % 2 == 0) {
        tris.push_back({a, b, c});
        tris.push_back({a, c, d});
      } else {
        tris.push_back({a, b, d});
        tris.push_back({b, c, d});
      }
    }
  }
  return Mesh::from_triangles(pts, tris, 0, sink);
}

}  // namespace

int minimal_seed_size(TopologyClass cls) noexcept {
  switch (cls) {
    case TopologyClass::Disc: return 4;
    case TopologyClass::Annulus: return 9;
    case TopologyClass::PuncturedTorus: return 12;
    case TopologyClass::MobiusStrip: return 10;
    case TopologyClass::PairOfPants: return 16;
    case TopologyClass::ThricePuncturedDisc: return 16;
  }
  return 0;
}

Mesh seed_mesh(TopologyClass cls, int target_vertex_count, RngStream& rng, LineageSink* sink) {
  if (target_vertex_count < minimal_seed_size(cls)) {
    throw Error(ErrorCode::UnsupportedClass,
                std::string("target vertex count too small for class ") + to_string(cls));
  }
  switch (cls) {
    case TopologyClass::Disc: return ring_mesh(true, target_vertex_count, rng, sink);
    case TopologyClass::Annulus: return ring_mesh(false, target_vertex_count, rng, sink);
    case TopologyClass::PuncturedTorus: return punctured_torus_mesh(target_vertex_count, sink);
    case TopologyClass::MobiusStrip: return mobius_mesh(target_vertex_count, sink);
    case TopologyClass::PairOfPants: return holed_grid_mesh(2, target_vertex_count, sink);
    case TopologyClass::ThricePuncturedDisc: return holed_grid_mesh(3, target_vertex_count, sink);
  }
  throw Error(ErrorCode::UnsupportedClass, "unknown topology class");
}

}  // namespace surfgrow
