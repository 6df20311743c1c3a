#pragma once

#include <array>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "mesh.hpp"

namespace surfgrow {

struct Aabb {
  Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 hi = Vec3::Constant(-std::numeric_limits<double>::infinity());

  void expand(const Vec3& p) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  void expand(const Aabb& b) {
    lo = lo.cwiseMin(b.lo);
    hi = hi.cwiseMax(b.hi);
  }
  bool overlaps(const Aabb& b) const {
    return (lo.array() <= b.hi.array()).all() && (b.lo.array() <= hi.array()).all();
  }
  bool contains(const Aabb& b) const {
    return (lo.array() <= b.lo.array()).all() && (b.hi.array() <= hi.array()).all();
  }
  Vec3 centroid() const { return 0.5 * (lo + hi); }
};

struct Collider {
  ElementId vertex;
  Vec3 center;
  Vec3 normal_axis;
  double r_t = 0.0;  // tangential semi-axis
  double r_n = 0.0;  // semi-axis along the normal

  /// Tight box around the oblate ellipsoid.
  Aabb bounds() const;
};

struct CollisionConfig {
  double tangential_factor = 0.4;  // r_t / mean incident edge length
  double normal_ratio = 0.5;       // r_n / r_t
  int max_iterations = 4;
  double separation_margin = 1e-6;

  void check() const;
};

std::vector<Collider> build_colliders(const Mesh& mesh, const CollisionConfig& cfg = {});

/// Binary AABB tree, median split on the longest centroid axis, leaves of up
/// to four primitives.
class Bvh {
 public:
  static constexpr int kLeafCapacity = 4;

  struct Node {
    Aabb box;
    int left = -1, right = -1;  // children, or -1 for a leaf
    int first = 0, count = 0;   // range into primitive order (leaves)
    bool leaf() const { return left < 0; }
  };

  static Bvh build(std::span<const Aabb> boxes);
  /// Recomputes node boxes for new primitive boxes without restructuring.
  void refit(std::span<const Aabb> boxes);

  const std::vector<Node>& nodes() const { return nodes_; }
  const std::vector<int>& order() const { return order_; }
  int depth() const;

  /// Calls fn(primitive) for every primitive whose box overlaps `box`.
  template <class Fn>
  void query(const Aabb& box, Fn&& fn) const {
    if (nodes_.empty()) return;
    int stack[128];
    int top = 0;
    stack[top++] = 0;
    while (top > 0) {
      const Node& n = nodes_[stack[--top]];
      if (!n.box.overlaps(box)) continue;
      if (n.leaf()) {
        for (int i = n.first; i < n.first + n.count; ++i) {
          if (boxes_[order_[i]].overlaps(box)) fn(order_[i]);
        }
      } else {
        stack[top++] = n.left;
        stack[top++] = n.right;
      }
    }
  }

  const Aabb& primitive_box(int i) const { return boxes_[i]; }

 private:
  int build_node(int first, int count);
  Aabb refit_node(int node);

  std::vector<Node> nodes_;
  std::vector<int> order_;
  std::vector<Aabb> boxes_;
};

using ColliderPair = std::pair<int, int>;  // vertex slots, first < second

/// Vertices within this many edges of each other never collide.
inline constexpr int kCollisionRingExclusion = 2;

/// AABB-overlapping collider pairs outside each other's 2-ring, sorted.
std::vector<ColliderPair> broad_phase(const Bvh& bvh, std::span<const Collider> colliders,
                                      const Mesh& mesh);

/// O(n^2) reference for broad_phase.
std::vector<ColliderPair> broad_phase_brute_force(std::span<const Collider> colliders,
                                                  const Mesh& mesh);

/// Sphere overlap depth (r_t,a + r_t,b) - |c_a - c_b|.
double overlap_depth(const Collider& a, const Collider& b);

struct CollisionStats {
  int candidate_pairs = 0;
  int corrections = 0;
  int rejected = 0;  // corrections skipped because a face would collapse
  int iterations = 0;
  double residual_depth = 0.0;  // deepest remaining overlap
  bool unresolved = false;
};

/// Pushes overlapping collider pairs apart symmetrically, repeating broad and
/// narrow phase up to max_iterations times. No vertex moves more than the
/// largest r_t in one call, and a correction that would turn an incident face
/// over or shrink it below a quarter of its area is skipped.
CollisionStats resolve_collisions(Mesh& mesh, const CollisionConfig& cfg = {});

struct RayHit {
  ElementId face;
  int face_slot = -1;
  std::array<double, 3> barycentric{};
  double t = 0.0;
  Vec3 point = Vec3::Zero();
};

/// Triangle BVH over the live faces of a mesh, in face-slot terms.
struct TriangleBvh {
  Bvh bvh;
  std::vector<int> faces;  // primitive -> face slot
};

TriangleBvh build_triangle_bvh(const Mesh& mesh);

std::optional<RayHit> intersect_triangle(const Mesh& mesh, int face, const Vec3& origin,
                                         const Vec3& direction);

/// Nearest hit with t > 0; equal t within 1e-12 resolves to the lowest face id.
std::optional<RayHit> raycast(const Mesh& mesh, const TriangleBvh& tree, const Vec3& origin,
                              const Vec3& direction);

std::optional<RayHit> raycast_brute_force(const Mesh& mesh, const Vec3& origin,
                                          const Vec3& direction);

}  // namespace surfgrow
