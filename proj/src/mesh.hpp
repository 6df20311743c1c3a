#pragma once

#include <Eigen/Geometry>

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "ids.hpp"

namespace surfgrow {

using Vec3 = Eigen::Vector3d;

/// Faces below this area are rejected by surgery and smoothing.
inline constexpr double kMinFaceArea = 1e-12;

enum class TopologyClass {
  Disc,
  Annulus,
  PuncturedTorus,
  MobiusStrip,
  PairOfPants,
  ThricePuncturedDisc,
};

inline constexpr std::array<TopologyClass, 6> kAllTopologyClasses = {
    TopologyClass::Disc,        TopologyClass::Annulus,     TopologyClass::PuncturedTorus,
    TopologyClass::MobiusStrip, TopologyClass::PairOfPants, TopologyClass::ThricePuncturedDisc,
};

const char* to_string(TopologyClass c) noexcept;
std::optional<TopologyClass> parse_topology(std::string_view name);

struct TopologySignature {
  int euler_characteristic = 0;
  int boundary_loops = 0;
  bool orientable = true;

  friend bool operator==(const TopologySignature&, const TopologySignature&) = default;
};

TopologySignature expected_signature(TopologyClass c) noexcept;

/// Triangle mesh with boundary. Half-edges are face corners: half-edge
/// 3*f+k runs from corner k to corner k+1 of face f, so every half-edge has a
/// face and boundary is marked by a missing twin. Each face keeps its own
/// winding, which lets twins run in the same direction across the seam of a
/// non-orientable surface.
class Mesh {
 public:
  struct Edge {
    ElementId id;
    std::array<int, 2> v{-1, -1};
    double rest_length = 0.0;
    double original_rest_length = 0.0;
    int birth_frame = 0;
    std::array<int, 2> he{-1, -1};
    bool alive = false;
  };

  struct Face {
    ElementId id;
    std::array<int, 3> v{-1, -1, -1};
    bool alive = false;
  };

  struct VertexRecord {
    ElementId id;
    Vec3 position;
    int birth_frame = 0;
  };
  struct EdgeRecord {
    ElementId id;
    ElementId v0, v1;
    double rest_length;
    double original_rest_length;
    int birth_frame;
  };
  struct FaceRecord {
    ElementId id;
    std::array<ElementId, 3> corners;
  };

  Mesh() = default;

  /// Builds a fresh mesh; every element gets a new id and rest lengths equal
  /// the current Euclidean lengths.
  static Mesh from_triangles(std::span<const Vec3> positions,
                             std::span<const std::array<int, 3>> triangles, int frame = 0,
                             LineageSink* sink = nullptr);

  /// Rebuilds a mesh from serialized records, keeping the stored ids.
  static Mesh from_records(std::span<const VertexRecord> vertices,
                           std::span<const FaceRecord> faces,
                           std::span<const EdgeRecord> edges);

  int vertex_count() const noexcept { return static_cast<int>(positions_.size()); }
  int edge_count() const noexcept { return live_edges_; }
  int face_count() const noexcept { return live_faces_; }
  int edge_slots() const noexcept { return static_cast<int>(edges_.size()); }
  int face_slots() const noexcept { return static_cast<int>(faces_.size()); }
  int halfedge_slots() const noexcept { return 3 * face_slots(); }

  ElementId vertex_id(int v) const { return vertex_ids_[v]; }
  int vertex_birth(int v) const { return vertex_birth_[v]; }
  const Vec3& position(int v) const { return positions_[v]; }
  Vec3& position(int v) { return positions_[v]; }
  std::span<const Vec3> positions() const noexcept { return positions_; }
  std::span<Vec3> positions() noexcept { return positions_; }
  int degree(int v) const { return degree_[v]; }
  bool is_boundary_vertex(int v) const { return boundary_degree_[v] > 0; }

  const Edge& edge(int e) const { return edges_[e]; }
  bool edge_alive(int e) const { return edges_[e].alive; }
  void set_rest_length(int e, double rest) { edges_[e].rest_length = rest; }
  void set_rest_lengths(int e, double rest, double original) {
    edges_[e].rest_length = rest;
    edges_[e].original_rest_length = original;
  }
  bool is_boundary_edge(int e) const { return edges_[e].he[1] < 0; }
  double edge_length(int e) const {
    return (positions_[edges_[e].v[1]] - positions_[edges_[e].v[0]]).norm();
  }

  const Face& face(int f) const { return faces_[f]; }
  bool face_alive(int f) const { return faces_[f].alive; }

  static int he_face(int h) noexcept { return h / 3; }
  static int he_next(int h) noexcept { return 3 * (h / 3) + (h % 3 + 1) % 3; }
  static int he_prev(int h) noexcept { return 3 * (h / 3) + (h % 3 + 2) % 3; }
  int he_origin(int h) const { return faces_[h / 3].v[h % 3]; }
  int he_dest(int h) const { return faces_[h / 3].v[(h % 3 + 1) % 3]; }
  int he_opposite_vertex(int h) const { return faces_[h / 3].v[(h % 3 + 2) % 3]; }
  int he_twin(int h) const { return twin_[h]; }
  int he_edge(int h) const { return he_edge_[h]; }
  /// True when the twin runs in the opposite direction (consistent
  /// orientation across the edge). Requires a twin.
  bool orientation_agree(int h) const { return he_origin(twin_[h]) == he_dest(h); }
  /// Seam edges join faces of disagreeing winding.
  bool is_seam_edge(int e) const {
    const auto& ed = edges_[e];
    return ed.he[1] >= 0 && !orientation_agree(ed.he[0]);
  }

  std::optional<int> find_edge(int a, int b) const;
  std::optional<int> vertex_slot(ElementId id) const;
  std::optional<int> edge_slot(ElementId id) const;
  std::optional<int> face_slot(ElementId id) const;

  /// Inserts the midpoint of an edge. Returns the new vertex id.
  ElementId split_edge(ElementId edge, int frame);
  int split_edge_slot(int e, int frame);

  /// Replaces an interior diagonal by the opposite one. Returns the new edge id.
  ElementId flip_edge(ElementId edge, int frame = 0);
  int flip_edge_slot(int e, int frame = 0);
  /// Empty when the edge can be flipped, otherwise the reason.
  std::optional<std::string> flip_blocker(int e) const;

  IdAllocator& ids() noexcept { return ids_; }
  const IdAllocator& ids() const noexcept { return ids_; }
  void set_lineage_sink(LineageSink* sink) noexcept { sink_ = sink; }
  LineageSink* lineage_sink() const noexcept { return sink_; }

  /// Drops the twin link of one half-edge without touching its partner.
  void corrupt_twin_for_testing(int h) { twin_[h] = -1; }

 private:
  friend std::vector<std::string> validate(const Mesh&);

  static std::uint64_t edge_key(int a, int b) noexcept {
    if (a > b) std::swap(a, b);
    return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b);
  }

  int add_vertex(ElementId id, const Vec3& p, int birth);
  int add_edge(ElementId id, int a, int b, double rest, double original, int birth);
  int add_face(ElementId id, std::array<int, 3> v);
  void attach_face(int f);
  void detach_face(int f);
  void retire_edge(int e);
  void retire_face(int f);
  void note_face_count(int e, int before, int after);
  void emit(LineageEventType type, ElementKind kind, ElementId id, int frame,
            std::vector<ElementId> parents = {});

  std::vector<Vec3> positions_;
  std::vector<ElementId> vertex_ids_;
  std::vector<int> vertex_birth_;
  std::vector<int> degree_;
  std::vector<int> boundary_degree_;

  std::vector<Edge> edges_;
  std::vector<Face> faces_;
  std::vector<int> twin_;
  std::vector<int> he_edge_;
  std::vector<int> free_edges_;
  std::vector<int> free_faces_;
  int live_edges_ = 0;
  int live_faces_ = 0;

  std::unordered_map<std::uint64_t, int> edge_lookup_;
  std::unordered_map<std::uint64_t, int> vertex_index_;
  std::unordered_map<std::uint64_t, int> edge_index_;
  std::unordered_map<std::uint64_t, int> face_index_;

  IdAllocator ids_;
  LineageSink* sink_ = nullptr;
};

TopologySignature topology_signature(const Mesh& mesh);

/// Empty iff every structural invariant holds; each entry names element ids.
std::vector<std::string> validate(const Mesh& mesh);

/// Ordered vertex loops along the boundary, each starting at its lowest id.
std::vector<std::vector<int>> boundary_loops(const Mesh& mesh);

/// Compressed vertex adjacency snapshot built from the live edges.
struct Adjacency {
  std::vector<int> offsets;
  std::vector<int> neighbors;
  std::vector<int> edges;

  std::span<const int> neighbors_of(int v) const {
    return {neighbors.data() + offsets[v], neighbors.data() + offsets[v + 1]};
  }
  std::span<const int> edges_of(int v) const {
    return {edges.data() + offsets[v], edges.data() + offsets[v + 1]};
  }
};
Adjacency vertex_adjacency(const Mesh& mesh);

/// Incident faces per vertex.
std::vector<std::vector<int>> vertex_faces(const Mesh& mesh);

std::vector<char> boundary_vertex_flags(const Mesh& mesh);

/// Cross product of two edges of the face in its stored winding (twice the
/// area vector).
Vec3 face_area_vector(const Mesh& mesh, int f);
double face_area(const Mesh& mesh, int f);

/// Area-weighted vertex normals. Face normals are sign-aligned per vertex so
/// that fans straddling an orientation seam still average coherently.
std::vector<Vec3> vertex_normals(const Mesh& mesh);

/// Live face slots sorted by id; the canonical order for output.
std::vector<int> faces_by_id(const Mesh& mesh);
std::vector<int> edges_by_id(const Mesh& mesh);

}  // namespace surfgrow
