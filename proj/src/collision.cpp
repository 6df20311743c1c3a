#include "collision.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "error.hpp"

namespace surfgrow {

Aabb Collider::bounds() const {
  // Support of an ellipsoid with semi-axes (r_t, r_t, r_n), normal n, along
  // coordinate axis i: sqrt(r_t^2 (1 - n_i^2) + r_n^2 n_i^2).
  const Vec3 n2 = normal_axis.cwiseProduct(normal_axis);
  Vec3 half;
  for (int i = 0; i < 3; ++i) {
    half[i] = std::sqrt(std::max(r_t * r_t * (1.0 - n2[i]) + r_n * r_n * n2[i], 0.0));
  }
  return {center - half, center + half};
}

void CollisionConfig::check() const {
  if (!(tangential_factor > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "collider tangential factor must be positive");
  }
  if (!(normal_ratio > 0.0 && normal_ratio < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "collider normal ratio must lie in (0, 1)");
  }
  if (max_iterations < 1) throw Error(ErrorCode::InvalidArgument, "max_iterations must be >= 1");
}

std::vector<Collider> build_colliders(const Mesh& mesh, const CollisionConfig& cfg) {
  cfg.check();
  const auto normals = vertex_normals(mesh);
  const Adjacency adj = vertex_adjacency(mesh);
  std::vector<Collider> out(mesh.vertex_count());
  for (int v = 0; v < mesh.vertex_count(); ++v) {
    double sum = 0.0;
    const auto nb = adj.neighbors_of(v);
    for (int w : nb) sum += (mesh.position(w) - mesh.position(v)).norm();
    const double mean = nb.empty() ? 0.0 : sum / nb.size();
    Collider& c = out[v];
    c.vertex = mesh.vertex_id(v);
    c.center = mesh.position(v);
    c.normal_axis = normals[v];
    c.r_t = cfg.tangential_factor * mean;
    c.r_n = cfg.normal_ratio * c.r_t;
  }
  return out;
}

// ---------------------------------------------------------------------------
// BVH

Bvh Bvh::build(std::span<const Aabb> boxes) {
  if (boxes.empty()) throw Error(ErrorCode::EmptyInput, "cannot build a BVH over nothing");
  Bvh t;
  t.boxes_.assign(boxes.begin(), boxes.end());
  t.order_.resize(boxes.size());
  std::iota(t.order_.begin(), t.order_.end(), 0);
  t.nodes_.reserve(2 * boxes.size() / kLeafCapacity + 1);
  t.build_node(0, static_cast<int>(boxes.size()));
  return t;
}

int Bvh::build_node(int first, int count) {
  const int index = static_cast<int>(nodes_.size());
  nodes_.emplace_back();
  Aabb box, centroids;
  for (int i = first; i < first + count; ++i) {
    box.expand(boxes_[order_[i]]);
    centroids.expand(boxes_[order_[i]].centroid());
  }
  nodes_[index].box = box;
  if (count <= kLeafCapacity) {
    nodes_[index].first = first;
    nodes_[index].count = count;
    return index;
  }
  int axis = 0;
  const Vec3 extent = centroids.hi - centroids.lo;
  if (extent[1] > extent[axis]) axis = 1;
  if (extent[2] > extent[axis]) axis = 2;
  const int half = count / 2;
  auto begin = order_.begin() + first;
  std::nth_element(begin, begin + half, begin + count, [&](int a, int b) {
    const double ca = boxes_[a].centroid()[axis], cb = boxes_[b].centroid()[axis];
    return ca != cb ? ca < cb : a < b;
  });
  const int left = build_node(first, half);
  const int right = build_node(first + half, count - half);
  nodes_[index].left = left;
  nodes_[index].right = right;
  return index;
}

void Bvh::refit(std::span<const Aabb> boxes) {
  if (boxes.size() != boxes_.size()) {
    throw Error(ErrorCode::InvalidArgument, "refit needs one box per primitive");
  }
  boxes_.assign(boxes.begin(), boxes.end());
  if (!nodes_.empty()) refit_node(0);
}

Aabb Bvh::refit_node(int node) {
  Node& n = nodes_[node];
  Aabb box;
  if (n.leaf()) {
    for (int i = n.first; i < n.first + n.count; ++i) box.expand(boxes_[order_[i]]);
  } else {
    box = refit_node(n.left);
    box.expand(refit_node(n.right));
  }
  nodes_[node].box = box;
  return box;
}

int Bvh::depth() const {
  if (nodes_.empty()) return 0;
  std::vector<std::pair<int, int>> stack{{0, 0}};
  int deepest = 0;
  while (!stack.empty()) {
    const auto [node, d] = stack.back();
    stack.pop_back();
    deepest = std::max(deepest, d);
    if (!nodes_[node].leaf()) {
      stack.emplace_back(nodes_[node].left, d + 1);
      stack.emplace_back(nodes_[node].right, d + 1);
    }
  }
  return deepest;
}

// ---------------------------------------------------------------------------
// Broad and narrow phase

namespace {

// Marks the closed 2-ring of v with `stamp`.
void mark_ring(const Adjacency& adj, int v, int stamp, std::vector<int>& mark) {
  mark[v] = stamp;
  for (int w : adj.neighbors_of(v)) {
    mark[w] = stamp;
    for (int x : adj.neighbors_of(w)) mark[x] = stamp;
  }
}

std::vector<Aabb> collider_boxes(std::span<const Collider> colliders) {
  std::vector<Aabb> boxes;
  boxes.reserve(colliders.size());
  for (const auto& c : colliders) boxes.push_back(c.bounds());
  return boxes;
}

}  // namespace

std::vector<ColliderPair> broad_phase(const Bvh& bvh, std::span<const Collider> colliders,
                                      const Mesh& mesh) {
  const Adjacency adj = vertex_adjacency(mesh);
  std::vector<int> mark(colliders.size(), -1);
  std::vector<ColliderPair> pairs;
  std::vector<int> hits;
  for (int i = 0; i < static_cast<int>(colliders.size()); ++i) {
    mark_ring(adj, i, i, mark);
    hits.clear();
    bvh.query(colliders[i].bounds(), [&](int j) {
      if (j > i && mark[j] != i) hits.push_back(j);
    });
    std::sort(hits.begin(), hits.end());
    for (int j : hits) pairs.emplace_back(i, j);
  }
  return pairs;
}

std::vector<ColliderPair> broad_phase_brute_force(std::span<const Collider> colliders,
                                                  const Mesh& mesh) {
  const Adjacency adj = vertex_adjacency(mesh);
  std::vector<int> mark(colliders.size(), -1);
  std::vector<ColliderPair> pairs;
  for (int i = 0; i < static_cast<int>(colliders.size()); ++i) {
    mark_ring(adj, i, i, mark);
    const Aabb bi = colliders[i].bounds();
    for (int j = i + 1; j < static_cast<int>(colliders.size()); ++j) {
      if (mark[j] != i && bi.overlaps(colliders[j].bounds())) pairs.emplace_back(i, j);
    }
  }
  return pairs;
}

double overlap_depth(const Collider& a, const Collider& b) {
  return a.r_t + b.r_t - (a.center - b.center).norm();
}

namespace {

// Largest s >= 0 with |moved + s u| <= limit, for unit u.
double displacement_budget(const Vec3& moved, const Vec3& u, double limit) {
  const double mu = moved.dot(u);
  const double disc = mu * mu - moved.squaredNorm() + limit * limit;
  if (disc <= 0.0) return 0.0;
  return std::max(0.0, -mu + std::sqrt(disc));
}

// A correction may not turn a face over or shrink it below a quarter of its
// area before the correction.
bool faces_survive(const Mesh& mesh, const std::vector<int>& fan,
                   const std::vector<Vec3>& before) {
  for (std::size_t k = 0; k < fan.size(); ++k) {
    const Vec3 after = face_area_vector(mesh, fan[k]);
    if (after.dot(before[k]) <= 0.0 || after.norm() < 0.25 * before[k].norm() ||
        after.norm() < kMinFaceArea) {
      return false;
    }
  }
  return true;
}

}  // namespace

CollisionStats resolve_collisions(Mesh& mesh, const CollisionConfig& cfg) {
  CollisionStats stats;
  if (mesh.vertex_count() == 0) return stats;
  std::vector<Collider> colliders = build_colliders(mesh, cfg);
  double r_max = 0.0;
  for (const auto& c : colliders) r_max = std::max(r_max, c.r_t);
  std::vector<Vec3> moved(colliders.size(), Vec3::Zero());
  const auto fans = vertex_faces(mesh);
  std::vector<int> fan;
  std::vector<Vec3> before;

  Bvh bvh = Bvh::build(collider_boxes(colliders));
  for (int it = 0; it < cfg.max_iterations; ++it) {
    for (std::size_t v = 0; v < colliders.size(); ++v) colliders[v].center = mesh.position(v);
    if (it > 0) bvh.refit(collider_boxes(colliders));
    const auto pairs = broad_phase(bvh, colliders, mesh);
    stats.candidate_pairs += static_cast<int>(pairs.size());
    stats.iterations = it + 1;
    bool pushed = false;
    for (const auto& [i, j] : pairs) {
      Vec3& pi = mesh.position(i);
      Vec3& pj = mesh.position(j);
      const Vec3 delta = pi - pj;
      const double dist = delta.norm();
      const double depth = colliders[i].r_t + colliders[j].r_t - dist;
      if (depth <= 0.0) continue;
      Vec3 dir = dist > 0.0 ? Vec3(delta / dist) : colliders[i].normal_axis;
      if (dir.squaredNorm() == 0.0) dir = Vec3::UnitX();
      double push = 0.5 * depth + cfg.separation_margin;
      push = std::min({push, displacement_budget(moved[i], dir, r_max),
                       displacement_budget(moved[j], -dir, r_max)});
      if (push <= 0.0) continue;
      fan = fans[i];
      fan.insert(fan.end(), fans[j].begin(), fans[j].end());
      before.clear();
      for (int f : fan) before.push_back(face_area_vector(mesh, f));
      pi += push * dir;
      pj -= push * dir;
      if (!faces_survive(mesh, fan, before)) {
        pi -= push * dir;
        pj += push * dir;
        ++stats.rejected;
        continue;
      }
      moved[i] += push * dir;
      moved[j] -= push * dir;
      colliders[i].center = pi;
      colliders[j].center = pj;
      ++stats.corrections;
      pushed = true;
    }
    if (!pushed) break;
  }

  for (std::size_t v = 0; v < colliders.size(); ++v) colliders[v].center = mesh.position(v);
  bvh.refit(collider_boxes(colliders));
  for (const auto& [i, j] : broad_phase(bvh, colliders, mesh)) {
    stats.residual_depth = std::max(stats.residual_depth, overlap_depth(colliders[i], colliders[j]));
  }
  stats.unresolved = stats.residual_depth > cfg.separation_margin;
  return stats;
}

// ---------------------------------------------------------------------------
// Raycasting

TriangleBvh build_triangle_bvh(const Mesh& mesh) {
  TriangleBvh tree;
  std::vector<Aabb> boxes;
  for (int f = 0; f < mesh.face_slots(); ++f) {
    if (!mesh.face_alive(f)) continue;
    Aabb b;
    for (int v : mesh.face(f).v) b.expand(mesh.position(v));
    boxes.push_back(b);
    tree.faces.push_back(f);
  }
  tree.bvh = Bvh::build(boxes);
  return tree;
}

std::optional<RayHit> intersect_triangle(const Mesh& mesh, int face, const Vec3& origin,
                                         const Vec3& direction) {
  const auto& c = mesh.face(face).v;
  const Vec3& p0 = mesh.position(c[0]);
  const Vec3 e1 = mesh.position(c[1]) - p0;
  const Vec3 e2 = mesh.position(c[2]) - p0;
  const Vec3 pvec = direction.cross(e2);
  const double det = e1.dot(pvec);
  if (det == 0.0) return std::nullopt;
  const double inv = 1.0 / det;
  const Vec3 tvec = origin - p0;
  const double u = tvec.dot(pvec) * inv;
  if (u < 0.0 || u > 1.0) return std::nullopt;
  const Vec3 qvec = tvec.cross(e1);
  const double v = direction.dot(qvec) * inv;
  if (v < 0.0 || u + v > 1.0) return std::nullopt;
  const double t = e2.dot(qvec) * inv;
  if (!(t > 0.0)) return std::nullopt;
  RayHit hit;
  hit.face = mesh.face(face).id;
  hit.face_slot = face;
  hit.barycentric = {1.0 - u - v, u, v};
  hit.t = t;
  hit.point = origin + t * direction;
  return hit;
}

namespace {

constexpr double kRayTieTolerance = 1e-12;

bool better_hit(const RayHit& candidate, const std::optional<RayHit>& best) {
  if (!best) return true;
  if (candidate.t < best->t - kRayTieTolerance) return true;
  return std::abs(candidate.t - best->t) <= kRayTieTolerance && candidate.face < best->face;
}

// Entry parameter of the ray into the box, or +inf on a miss.
double slab_entry(const Aabb& box, const Vec3& origin, const Vec3& inv_dir) {
  double t0 = 0.0, t1 = std::numeric_limits<double>::infinity();
  for (int a = 0; a < 3; ++a) {
    double lo = (box.lo[a] - origin[a]) * inv_dir[a];
    double hi = (box.hi[a] - origin[a]) * inv_dir[a];
    if (std::isnan(lo) || std::isnan(hi)) {
      // Ray parallel to this slab and starting on its boundary plane.
      if (origin[a] < box.lo[a] || origin[a] > box.hi[a]) return std::numeric_limits<double>::infinity();
      continue;
    }
    if (lo > hi) std::swap(lo, hi);
    t0 = std::max(t0, lo);
    t1 = std::min(t1, hi);
    if (t0 > t1) return std::numeric_limits<double>::infinity();
  }
  return t0;
}

}  // namespace

std::optional<RayHit> raycast(const Mesh& mesh, const TriangleBvh& tree, const Vec3& origin,
                              const Vec3& direction) {
  if (direction.squaredNorm() == 0.0) {
    throw Error(ErrorCode::InvalidArgument, "ray direction must be non-zero");
  }
  const Vec3 inv_dir = direction.cwiseInverse();
  std::optional<RayHit> best;
  const auto& nodes = tree.bvh.nodes();
  const auto& order = tree.bvh.order();
  int stack[128];
  int top = 0;
  stack[top++] = 0;
  while (top > 0) {
    const auto& n = nodes[stack[--top]];
    const double entry = slab_entry(n.box, origin, inv_dir);
    if (!std::isfinite(entry)) continue;
    if (best && entry > best->t + kRayTieTolerance) continue;
    if (n.leaf()) {
      for (int i = n.first; i < n.first + n.count; ++i) {
        auto hit = intersect_triangle(mesh, tree.faces[order[i]], origin, direction);
        if (hit && better_hit(*hit, best)) best = hit;
      }
    } else {
      // Visit the nearer child first.
      const double el = slab_entry(nodes[n.left].box, origin, inv_dir);
      const double er = slab_entry(nodes[n.right].box, origin, inv_dir);
      if (el <= er) {
        stack[top++] = n.right;
        stack[top++] = n.left;
      } else {
        stack[top++] = n.left;
        stack[top++] = n.right;
      }
    }
  }
  return best;
}

std::optional<RayHit> raycast_brute_force(const Mesh& mesh, const Vec3& origin,
                                          const Vec3& direction) {
  std::optional<RayHit> best;
  for (int f = 0; f < mesh.face_slots(); ++f) {
    if (!mesh.face_alive(f)) continue;
    auto hit = intersect_triangle(mesh, f, origin, direction);
    if (hit && better_hit(*hit, best)) best = hit;
  }
  return best;
}

}  // namespace surfgrow
