#include "growth.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numbers>
#include <optional>
#include <queue>

#include <Eigen/Geometry>

#include "error.hpp"

namespace surfgrow {

void GrowthConfig::check() const {
  if (!(gamma > 0.0)) throw Error(ErrorCode::InvalidArgument, "growth gamma must be positive");
  if (!(split_factor > 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "split factor must exceed 1");
  }
  if (!(source_fraction > 0.0 && source_fraction <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "source fraction must lie in (0, 1]");
  }
  if (max_vertices < 0) throw Error(ErrorCode::InvalidArgument, "max_vertices must be >= 0");
}

double QualityReport::valence_fraction(int lo, int hi) const {
  if (interior_vertices == 0) return 1.0;
  int in = 0;
  for (const auto& [valence, count] : valence_histogram) {
    if (valence >= lo && valence <= hi) in += count;
  }
  return double(in) / interior_vertices;
}

// ---------------------------------------------------------------------------
// Growth field

std::vector<double> geodesic_distances(const Mesh& mesh, std::span<const int> source_slots) {
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> dist(mesh.vertex_count(), inf);
  std::vector<char> done(mesh.vertex_count(), 0);
  const Adjacency adj = vertex_adjacency(mesh);
  using Entry = std::pair<double, std::uint64_t>;  // (distance, vertex id)
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> queue;
  for (int s : source_slots) {
    dist[s] = 0.0;
    queue.emplace(0.0, mesh.vertex_id(s).value);
  }
  while (!queue.empty()) {
    const auto [d, id] = queue.top();
    queue.pop();
    const int u = *mesh.vertex_slot(ElementId{id});
    if (done[u]) continue;
    done[u] = 1;
    for (int w : adj.neighbors_of(u)) {
      const double nd = d + (mesh.position(w) - mesh.position(u)).norm();
      if (nd < dist[w]) {
        dist[w] = nd;
        queue.emplace(nd, mesh.vertex_id(w).value);
      }
    }
  }
  return dist;
}

GrowthField compute_growth_field(const Mesh& mesh, std::span<const ElementId> sources) {
  if (sources.empty()) throw Error(ErrorCode::InvalidArgument, "empty source set");
  std::vector<int> slots;
  for (ElementId id : sources) {
    auto s = mesh.vertex_slot(id);
    if (!s) throw Error(ErrorCode::UnknownId, "unknown source vertex " + std::to_string(id.value));
    slots.push_back(*s);
  }
  GrowthField field;
  field.sources.assign(sources.begin(), sources.end());
  field.g = geodesic_distances(mesh, slots);
  double max_d = 0.0;
  for (double d : field.g) {
    if (std::isfinite(d)) max_d = std::max(max_d, d);
  }
  for (double& d : field.g) {
    if (!std::isfinite(d)) {
      d = 1.0;
    } else {
      d = max_d > 0.0 ? d / max_d : 0.0;
    }
  }
  return field;
}

void extend_growth_field(GrowthField& field, const Mesh& mesh,
                         std::span<const std::array<int, 3>> inserted) {
  field.g.resize(mesh.vertex_count(), 0.0);
  for (const auto& [v, a, b] : inserted) field.g[v] = 0.5 * (field.g[a] + field.g[b]);
}

std::vector<ElementId> select_source_set(const Mesh& mesh, RngStream& rng, double fraction) {
  const auto loops = boundary_loops(mesh);
  if (loops.empty()) throw Error(ErrorCode::InvalidMesh, "mesh has no boundary for a source set");
  const auto& loop = loops[rng.below(loops.size())];
  const std::size_t n = loop.size();
  const std::size_t count =
      std::clamp<std::size_t>(static_cast<std::size_t>(std::ceil(fraction * n - 1e-12)), 1, n);
  const std::size_t start = rng.below(n);
  std::vector<ElementId> out;
  for (std::size_t i = 0; i < count; ++i) out.push_back(mesh.vertex_id(loop[(start + i) % n]));
  return out;
}

void update_rest_lengths(Mesh& mesh, const GrowthField& field, const GrowthConfig& cfg) {
  if (field.g.size() < static_cast<std::size_t>(mesh.vertex_count())) {
    throw Error(ErrorCode::InvalidArgument, "growth field does not cover every vertex");
  }
  std::vector<double> grown(mesh.edge_slots(), 0.0);
  for (int e = 0; e < mesh.edge_slots(); ++e) {
    if (!mesh.edge_alive(e)) continue;
    const auto& ed = mesh.edge(e);
    const double mean_g = 0.5 * (field.g[ed.v[0]] + field.g[ed.v[1]]);
    grown[e] = (1.0 + cfg.gamma * mean_g) * ed.rest_length;
  }
  if (cfg.min_rest_slack > 0.0) {
    // An edge may not outgrow (1 - slack) times the sum of the other two rest
    // lengths in either incident face, unless it was already longer.
    for (int f = 0; f < mesh.face_slots(); ++f) {
      if (!mesh.face_alive(f)) continue;
      const std::array<int, 3> es{mesh.he_edge(3 * f), mesh.he_edge(3 * f + 1),
                                  mesh.he_edge(3 * f + 2)};
      for (int k = 0; k < 3; ++k) {
        const double others = grown[es[(k + 1) % 3]] + grown[es[(k + 2) % 3]];
        const double cap =
            std::max(mesh.edge(es[k]).rest_length, (1.0 - cfg.min_rest_slack) * others);
        grown[es[k]] = std::min(grown[es[k]], cap);
      }
    }
  }
  for (int e = 0; e < mesh.edge_slots(); ++e) {
    if (mesh.edge_alive(e)) mesh.set_rest_length(e, grown[e]);
  }
}

// ---------------------------------------------------------------------------
// Splitting

SplitStats split_pass(Mesh& mesh, const GrowthConfig& cfg, int frame) {
  SplitStats stats;
  std::vector<ElementId> blocked;
  for (;;) {
    struct Candidate {
      double ratio;
      ElementId id;
    };
    std::vector<Candidate> todo;
    for (int e = 0; e < mesh.edge_slots(); ++e) {
      if (!mesh.edge_alive(e)) continue;
      const auto& ed = mesh.edge(e);
      const double ratio = ed.rest_length / ed.original_rest_length;
      if (ratio > cfg.split_factor &&
          std::find(blocked.begin(), blocked.end(), ed.id) == blocked.end()) {
        todo.push_back({ratio, ed.id});
      }
    }
    if (todo.empty()) break;
    std::sort(todo.begin(), todo.end(), [](const Candidate& x, const Candidate& y) {
      return x.ratio != y.ratio ? x.ratio > y.ratio : x.id < y.id;
    });
    for (const auto& c : todo) {
      const auto e = mesh.edge_slot(c.id);
      if (!e) continue;
      const int a = mesh.edge(*e).v[0], b = mesh.edge(*e).v[1];
      try {
        const int v = mesh.split_edge_slot(*e, frame);
        stats.inserted.push_back({v, a, b});
        ++stats.splits;
      } catch (const Error& err) {
        if (err.code() != ErrorCode::InvalidMesh) throw;
        blocked.push_back(c.id);
        ++stats.blocked;
      }
    }
  }
  return stats;
}

// ---------------------------------------------------------------------------
// Delaunay flips

namespace {

double angle_at(const Vec3& apex, const Vec3& p, const Vec3& q) {
  const Vec3 u = p - apex, w = q - apex;
  return std::atan2(u.cross(w).norm(), u.dot(w));
}

// Angle opposite side `opp` in a triangle with sides opp, s1, s2.
double angle_from_sides(double opp, double s1, double s2) {
  return std::acos(std::clamp((s1 * s1 + s2 * s2 - opp * opp) / (2.0 * s1 * s2), -1.0, 1.0));
}

double rest_between(const Mesh& mesh, int x, int y) {
  return mesh.edge(*mesh.find_edge(x, y)).rest_length;
}

bool rest_triangle_ok(double a, double b, double c) {
  // 16 area^2 by Heron.
  const double s = (a + b + c) * (-a + b + c) * (a - b + c) * (a + b - c);
  return s > 16.0 * kMinFaceArea * kMinFaceArea;
}

struct Quad {
  int a, b, c, d;  // edge a-b, apex c on the first face, d on the second
};

Quad quad_of(const Mesh& mesh, int edge) {
  const auto& ed = mesh.edge(edge);
  return {mesh.he_origin(ed.he[0]), mesh.he_dest(ed.he[0]), mesh.he_opposite_vertex(ed.he[0]),
          mesh.he_opposite_vertex(ed.he[1])};
}

}  // namespace

double opposite_angle_sum(const Mesh& mesh, int edge) {
  if (mesh.is_boundary_edge(edge)) return 0.0;
  const Quad q = quad_of(mesh, edge);
  const Vec3& a = mesh.position(q.a);
  const Vec3& b = mesh.position(q.b);
  return angle_at(mesh.position(q.c), a, b) + angle_at(mesh.position(q.d), a, b);
}

double rest_opposite_angle_sum(const Mesh& mesh, int edge) {
  if (mesh.is_boundary_edge(edge)) return 0.0;
  const Quad q = quad_of(mesh, edge);
  const double ab = mesh.edge(edge).rest_length;
  return angle_from_sides(ab, rest_between(mesh, q.a, q.c), rest_between(mesh, q.b, q.c)) +
         angle_from_sides(ab, rest_between(mesh, q.a, q.d), rest_between(mesh, q.b, q.d));
}

std::optional<double> rest_flip_length(const Mesh& mesh, int edge) {
  if (mesh.is_boundary_edge(edge)) return std::nullopt;
  const Quad q = quad_of(mesh, edge);
  const double len = mesh.edge(edge).rest_length;
  // Unfold both rest triangles into the plane with a at the origin and b on +x.
  auto place = [&](int apex, double side) {
    const double ra = rest_between(mesh, q.a, apex), rb = rest_between(mesh, q.b, apex);
    const double x = (len * len + ra * ra - rb * rb) / (2.0 * len);
    return Eigen::Vector2d(x, side * std::sqrt(std::max(ra * ra - x * x, 0.0)));
  };
  const Eigen::Vector2d pc = place(q.c, 1.0), pd = place(q.d, -1.0);
  if (pc.y() - pd.y() <= 0.0) return std::nullopt;
  // The new diagonal must cross the old one strictly between a and b.
  const double t = pc.y() / (pc.y() - pd.y());
  const double cross_x = pc.x() + t * (pd.x() - pc.x());
  if (!(cross_x > 0.0 && cross_x < len)) return std::nullopt;
  return (pc - pd).norm();
}

FlipStats delaunay_flip_pass(Mesh& mesh, int frame, FlipMetric metric) {
  FlipStats stats;
  std::deque<std::pair<int, ElementId>> queue;
  for (int e = 0; e < mesh.edge_slots(); ++e) {
    if (mesh.edge_alive(e) && !mesh.is_boundary_edge(e)) queue.emplace_back(e, mesh.edge(e).id);
  }
  const long long bound = 10LL * mesh.edge_count();
  while (!queue.empty()) {
    const auto [e, id] = queue.front();
    queue.pop_front();
    if (!mesh.edge_alive(e) || mesh.edge(e).id != id || mesh.is_boundary_edge(e)) continue;
    if (mesh.is_seam_edge(e)) continue;
    const double sum = metric == FlipMetric::Rest ? rest_opposite_angle_sum(mesh, e)
                                                  : opposite_angle_sum(mesh, e);
    if (sum <= std::numbers::pi + 1e-9) continue;
    if (mesh.flip_blocker(e)) continue;

    const Quad q = quad_of(mesh, e);
    double diagonal = (mesh.position(q.c) - mesh.position(q.d)).norm();
    if (metric == FlipMetric::Rest) {
      const auto unfolded = rest_flip_length(mesh, e);
      if (!unfolded) continue;
      diagonal = *unfolded;
    }
    if (!rest_triangle_ok(rest_between(mesh, q.c, q.a), rest_between(mesh, q.a, q.d), diagonal) ||
        !rest_triangle_ok(rest_between(mesh, q.d, q.b), rest_between(mesh, q.b, q.c), diagonal)) {
      continue;
    }
    if (stats.flips >= bound) {
      stats.non_termination = true;
      break;
    }
    mesh.flip_edge_slot(e, frame);
    const int fresh = *mesh.find_edge(q.c, q.d);
    mesh.set_rest_lengths(fresh, diagonal, diagonal);
    ++stats.flips;
    for (auto [x, y] : {std::pair{q.c, q.a}, std::pair{q.a, q.d}, std::pair{q.d, q.b},
                        std::pair{q.b, q.c}}) {
      const int n = *mesh.find_edge(x, y);
      if (!mesh.is_boundary_edge(n)) queue.emplace_back(n, mesh.edge(n).id);
    }
  }
  return stats;
}

// ---------------------------------------------------------------------------
// Smoothing

Vec3 circumcenter(const Vec3& a, const Vec3& b, const Vec3& c) {
  const Vec3 ab = b - a, ac = c - a;
  const Vec3 n = ab.cross(ac);
  const double denom = 2.0 * n.squaredNorm();
  if (denom == 0.0) return (a + b + c) / 3.0;
  return a + (ac.squaredNorm() * n.cross(ab) + ab.squaredNorm() * ac.cross(n)) / denom;
}

namespace {

bool move_keeps_faces_valid(const Mesh& mesh, int v, const Vec3& target,
                            const std::vector<int>& fan) {
  for (int f : fan) {
    const auto& c = mesh.face(f).v;
    std::array<Vec3, 3> p{mesh.position(c[0]), mesh.position(c[1]), mesh.position(c[2])};
    const Vec3 before = (p[1] - p[0]).cross(p[2] - p[0]);
    for (int k = 0; k < 3; ++k) {
      if (c[k] == v) p[k] = target;
    }
    const Vec3 after = (p[1] - p[0]).cross(p[2] - p[0]);
    if (0.5 * after.norm() < kMinFaceArea || after.dot(before) <= 0.0) return false;
  }
  return true;
}

// Smallest relative margin by which a rest triangle satisfies the triangle
// inequality: 1 - longest / (sum of the other two).
double rest_slack(double a, double b, double c) {
  return std::min({1.0 - a / (b + c), 1.0 - b / (a + c), 1.0 - c / (a + b)});
}

constexpr double kResampleSlack = 0.1;

double heron(double a, double b, double c) {
  const double p = 0.5 * (a + b + c);
  return std::sqrt(std::max(0.0, p * (p - a) * (p - b) * (p - c)));
}

// Scaling the rest lengths at v by the change in embedded length must leave
// every fan face with a margin of kResampleSlack, or at least no worse than
// before.
bool resample_keeps_rest_valid(const Mesh& mesh, int v, const Vec3& target,
                               const std::vector<int>& fan) {
  for (int f : fan) {
    std::array<double, 3> before{}, after{};
    for (int k = 0; k < 3; ++k) {
      const auto& e = mesh.edge(mesh.he_edge(3 * f + k));
      before[k] = after[k] = e.rest_length;
      if (e.v[0] == v || e.v[1] == v) {
        const int other = e.v[0] == v ? e.v[1] : e.v[0];
        after[k] *= (mesh.position(other) - target).norm() /
                    (mesh.position(other) - mesh.position(v)).norm();
      }
    }
    const double old_slack = rest_slack(before[0], before[1], before[2]);
    if (rest_slack(after[0], after[1], after[2]) < std::min(old_slack, kResampleSlack)) return false;
  }
  return true;
}

}  // namespace

SmoothStats odt_smooth_pass(Mesh& mesh, int iterations, bool resample_rest) {
  SmoothStats stats;
  const double area_before = resample_rest ? total_rest_area(mesh) : 0.0;
  for (int it = 0; it < iterations; ++it) {
    const auto fans = vertex_faces(mesh);
    const auto on_boundary = boundary_vertex_flags(mesh);
    const auto normals = vertex_normals(mesh);
    const Adjacency adj = vertex_adjacency(mesh);
    for (int v = 0; v < mesh.vertex_count(); ++v) {
      const Vec3 x = mesh.position(v);
      Vec3 target;
      if (!on_boundary[v]) {
        Vec3 acc = Vec3::Zero();
        double area = 0.0;
        for (int f : fans[v]) {
          const auto& c = mesh.face(f).v;
          const Vec3& p0 = mesh.position(c[0]);
          const Vec3& p1 = mesh.position(c[1]);
          const Vec3& p2 = mesh.position(c[2]);
          const double a = 0.5 * (p1 - p0).cross(p2 - p0).norm();
          acc += a * circumcenter(p0, p1, p2);
          area += a;
        }
        if (area <= 0.0) continue;
        Vec3 step = acc / area - x;
        step -= step.dot(normals[v]) * normals[v];
        target = x + step;
      } else {
        // Slide to the arc-length midpoint of the polyline prev -> v -> next.
        std::array<int, 2> ends{-1, -1};
        int found = 0;
        const auto nbrs = adj.neighbors_of(v);
        const auto edges = adj.edges_of(v);
        for (std::size_t i = 0; i < nbrs.size() && found < 2; ++i) {
          if (mesh.is_boundary_edge(edges[i])) ends[found++] = nbrs[i];
        }
        if (found < 2) continue;
        const Vec3& p = mesh.position(ends[0]);
        const Vec3& q = mesh.position(ends[1]);
        const double lp = (x - p).norm(), lq = (q - x).norm();
        const double half = 0.5 * (lp + lq);
        if (lp <= 0.0 || lq <= 0.0) continue;
        target = half <= lp ? Vec3(p + (x - p) * (half / lp))
                            : Vec3(x + (q - x) * std::min(1.0, (half - lp) / lq));
      }
      if ((target - x).squaredNorm() == 0.0) continue;
      if (move_keeps_faces_valid(mesh, v, target, fans[v]) &&
          (!resample_rest || resample_keeps_rest_valid(mesh, v, target, fans[v]))) {
        if (resample_rest) {
          for (int e : adj.edges_of(v)) {
            const auto& ed = mesh.edge(e);
            const int other = ed.v[0] == v ? ed.v[1] : ed.v[0];
            const double s = (mesh.position(other) - target).norm() / (mesh.position(other) - x).norm();
            mesh.set_rest_lengths(e, s * ed.rest_length, s * ed.original_rest_length);
          }
        }
        mesh.position(v) = target;
        ++stats.moved;
      } else {
        ++stats.rejected;
      }
    }
  }
  if (resample_rest) {
    const double area_after = total_rest_area(mesh);
    if (area_after > 0.0 && area_after < area_before) {
      stats.rest_scale = std::sqrt(area_before / area_after);
      for (int e = 0; e < mesh.edge_slots(); ++e) {
        if (!mesh.edge_alive(e)) continue;
        const auto& ed = mesh.edge(e);
        mesh.set_rest_lengths(e, stats.rest_scale * ed.rest_length,
                              stats.rest_scale * ed.original_rest_length);
      }
    }
  }
  return stats;
}

// ---------------------------------------------------------------------------
// Quality

double radius_edge_ratio(const Vec3& a, const Vec3& b, const Vec3& c) {
  const double la = (b - c).norm(), lb = (c - a).norm(), lc = (a - b).norm();
  const double area = 0.5 * (b - a).cross(c - a).norm();
  const double radius = la * lb * lc / (4.0 * area);
  return radius / std::min({la, lb, lc});
}

double total_rest_area(const Mesh& mesh) {
  double total = 0.0;
  for (int f = 0; f < mesh.face_slots(); ++f) {
    if (!mesh.face_alive(f)) continue;
    total += heron(mesh.edge(mesh.he_edge(3 * f)).rest_length,
                   mesh.edge(mesh.he_edge(3 * f + 1)).rest_length,
                   mesh.edge(mesh.he_edge(3 * f + 2)).rest_length);
  }
  return total;
}

QualityReport quality_report(const Mesh& mesh) {
  QualityReport q;
  double sum = 0.0, sum_sq = 0.0;
  int n = 0;
  q.min_angle = std::numbers::pi;
  for (int f = 0; f < mesh.face_slots(); ++f) {
    if (!mesh.face_alive(f)) continue;
    const auto& c = mesh.face(f).v;
    const Vec3& a = mesh.position(c[0]);
    const Vec3& b = mesh.position(c[1]);
    const Vec3& d = mesh.position(c[2]);
    if (face_area(mesh, f) < kMinFaceArea) {
      throw Error(ErrorCode::DegenerateFace,
                  "face " + std::to_string(mesh.face(f).id.value) + " is degenerate");
    }
    const double r = radius_edge_ratio(a, b, d);
    sum += r;
    sum_sq += r * r;
    ++n;
    q.min_angle = std::min({q.min_angle, angle_at(a, b, d), angle_at(b, d, a), angle_at(d, a, b)});
  }
  if (n > 0) {
    q.radius_edge_mean = sum / n;
    q.radius_edge_std = std::sqrt(std::max(0.0, sum_sq / n - q.radius_edge_mean * q.radius_edge_mean));
  }
  const auto on_boundary = boundary_vertex_flags(mesh);
  for (int v = 0; v < mesh.vertex_count(); ++v) {
    if (on_boundary[v]) continue;
    ++q.valence_histogram[mesh.degree(v)];
    ++q.interior_vertices;
  }
  return q;
}

}  // namespace surfgrow
