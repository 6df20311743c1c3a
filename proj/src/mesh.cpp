#include "mesh.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <numeric>
#include <queue>
#include <sstream>

#include "error.hpp"

namespace surfgrow {

const char* to_string(ElementKind kind) noexcept {
  switch (kind) {
    case ElementKind::Vertex: return "vertex";
    case ElementKind::Edge: return "edge";
    case ElementKind::Face: return "face";
  }
  return "?";
}

const char* to_string(TopologyClass c) noexcept {
  switch (c) {
    case TopologyClass::Disc: return "disc";
    case TopologyClass::Annulus: return "annulus";
    case TopologyClass::PuncturedTorus: return "punctured_torus";
    case TopologyClass::MobiusStrip: return "mobius_strip";
    case TopologyClass::PairOfPants: return "pair_of_pants";
    case TopologyClass::ThricePuncturedDisc: return "thrice_punctured_disc";
  }
  return "?";
}

std::optional<TopologyClass> parse_topology(std::string_view name) {
  for (auto c : kAllTopologyClasses) {
    if (name == to_string(c)) return c;
  }
  return std::nullopt;
}

TopologySignature expected_signature(TopologyClass c) noexcept {
  switch (c) {
    case TopologyClass::Disc: return {1, 1, true};
    case TopologyClass::Annulus: return {0, 2, true};
    case TopologyClass::PuncturedTorus: return {-1, 1, true};
    case TopologyClass::MobiusStrip: return {0, 1, false};
    case TopologyClass::PairOfPants: return {-1, 3, true};
    case TopologyClass::ThricePuncturedDisc: return {-2, 4, true};
  }
  return {};
}

namespace {

std::string id_str(ElementId id) {
  std::ostringstream os;
  os << id.value;
  return os.str();
}

double tri_area(const Vec3& a, const Vec3& b, const Vec3& c) {
  return 0.5 * (b - a).cross(c - a).norm();
}

}  // namespace

// ---------------------------------------------------------------------------
// Construction

int Mesh::add_vertex(ElementId id, const Vec3& p, int birth) {
  const int v = vertex_count();
  positions_.push_back(p);
  vertex_ids_.push_back(id);
  vertex_birth_.push_back(birth);
  degree_.push_back(0);
  boundary_degree_.push_back(0);
  vertex_index_.emplace(id.value, v);
  return v;
}

int Mesh::add_edge(ElementId id, int a, int b, double rest, double original, int birth) {
  int e;
  if (!free_edges_.empty()) {
    e = free_edges_.back();
    free_edges_.pop_back();
  } else {
    e = edge_slots();
    edges_.emplace_back();
  }
  Edge& ed = edges_[e];
  ed.id = id;
  ed.v = {a, b};
  ed.rest_length = rest;
  ed.original_rest_length = original;
  ed.birth_frame = birth;
  ed.he = {-1, -1};
  ed.alive = true;
  edge_lookup_[edge_key(a, b)] = e;
  edge_index_[id.value] = e;
  ++degree_[a];
  ++degree_[b];
  ++live_edges_;
  return e;
}

int Mesh::add_face(ElementId id, std::array<int, 3> v) {
  int f;
  if (!free_faces_.empty()) {
    f = free_faces_.back();
    free_faces_.pop_back();
  } else {
    f = face_slots();
    faces_.emplace_back();
    twin_.resize(twin_.size() + 3, -1);
    he_edge_.resize(he_edge_.size() + 3, -1);
  }
  faces_[f].id = id;
  faces_[f].v = v;
  faces_[f].alive = true;
  face_index_[id.value] = f;
  ++live_faces_;
  attach_face(f);
  return f;
}

void Mesh::attach_face(int f) {
  for (int k = 0; k < 3; ++k) {
    const int h = 3 * f + k;
    const int a = faces_[f].v[k];
    const int b = faces_[f].v[(k + 1) % 3];
    auto e = find_edge(a, b);
    if (!e) {
      throw Error(ErrorCode::InvalidMesh, "face " + id_str(faces_[f].id) + " references a missing edge");
    }
    Edge& ed = edges_[*e];
    {
      const int before = ed.he[0] < 0 ? 0 : (ed.he[1] < 0 ? 1 : 2);
      note_face_count(*e, before, before + 1);
    }
    if (ed.he[0] < 0) {
      ed.he[0] = h;
    } else if (ed.he[1] < 0) {
      ed.he[1] = h;
    } else {
      throw Error(ErrorCode::InvalidMesh, "edge " + id_str(ed.id) + " would have more than two faces");
    }
    he_edge_[h] = *e;
    if (ed.he[1] >= 0) {
      twin_[ed.he[0]] = ed.he[1];
      twin_[ed.he[1]] = ed.he[0];
    } else {
      twin_[h] = -1;
    }
  }
}

void Mesh::detach_face(int f) {
  for (int k = 0; k < 3; ++k) {
    const int h = 3 * f + k;
    Edge& ed = edges_[he_edge_[h]];
    {
      const int before = ed.he[1] < 0 ? 1 : 2;
      note_face_count(he_edge_[h], before, before - 1);
    }
    if (ed.he[0] == h) {
      ed.he[0] = ed.he[1];
      ed.he[1] = -1;
    } else if (ed.he[1] == h) {
      ed.he[1] = -1;
    }
    if (ed.he[0] >= 0) twin_[ed.he[0]] = -1;
    twin_[h] = -1;
    he_edge_[h] = -1;
  }
}

// Keeps the per-vertex count of incident boundary edges current when the
// number of faces on edge e changes.
void Mesh::note_face_count(int e, int before, int after) {
  const int delta = (after == 1) - (before == 1);
  if (delta == 0) return;
  boundary_degree_[edges_[e].v[0]] += delta;
  boundary_degree_[edges_[e].v[1]] += delta;
}

void Mesh::retire_edge(int e) {
  Edge& ed = edges_[e];
  edge_lookup_.erase(edge_key(ed.v[0], ed.v[1]));
  edge_index_.erase(ed.id.value);
  --degree_[ed.v[0]];
  --degree_[ed.v[1]];
  ed.alive = false;
  ed.he = {-1, -1};
  free_edges_.push_back(e);
  --live_edges_;
}

void Mesh::retire_face(int f) {
  detach_face(f);
  face_index_.erase(faces_[f].id.value);
  faces_[f].alive = false;
  free_faces_.push_back(f);
  --live_faces_;
}

void Mesh::emit(LineageEventType type, ElementKind kind, ElementId id, int frame,
                std::vector<ElementId> parents) {
  if (sink_) sink_->record(LineageEvent{type, kind, id, frame, std::move(parents)});
}

Mesh Mesh::from_triangles(std::span<const Vec3> positions,
                          std::span<const std::array<int, 3>> triangles, int frame,
                          LineageSink* sink) {
  Mesh m;
  m.sink_ = sink;
  for (const auto& p : positions) {
    const ElementId id = m.ids_.next(ElementKind::Vertex);
    m.add_vertex(id, p, frame);
    m.emit(LineageEventType::Birth, ElementKind::Vertex, id, frame);
  }
  const int n = static_cast<int>(positions.size());
  for (const auto& t : triangles) {
    for (int k = 0; k < 3; ++k) {
      const int a = t[k], b = t[(k + 1) % 3];
      if (a < 0 || a >= n || a == t[(k + 2) % 3] || a == b) {
        throw Error(ErrorCode::InvalidMesh, "triangle with invalid or repeated corner");
      }
      if (!m.find_edge(a, b)) {
        const double len = (positions[b] - positions[a]).norm();
        const ElementId id = m.ids_.next(ElementKind::Edge);
        m.add_edge(id, a, b, len, len, frame);
        m.emit(LineageEventType::Birth, ElementKind::Edge, id, frame);
      }
    }
  }
  for (const auto& t : triangles) {
    const ElementId id = m.ids_.next(ElementKind::Face);
    m.add_face(id, t);
    m.emit(LineageEventType::Birth, ElementKind::Face, id, frame);
  }
  return m;
}

Mesh Mesh::from_records(std::span<const VertexRecord> vertices, std::span<const FaceRecord> faces,
                        std::span<const EdgeRecord> edges) {
  Mesh m;
  std::vector<const VertexRecord*> vs;
  for (const auto& v : vertices) vs.push_back(&v);
  std::sort(vs.begin(), vs.end(), [](auto* a, auto* b) { return a->id < b->id; });
  std::array<std::uint64_t, 3> max_counter{};
  unsigned branch = 0;
  auto note = [&](ElementKind kind, ElementId id) {
    auto& c = max_counter[static_cast<int>(kind)];
    const std::uint64_t low = id.value & ((std::uint64_t{1} << ElementId::kBranchShift) - 1);
    c = std::max(c, low + 1);
    branch = std::max(branch, id.branch());
  };
  for (auto* v : vs) {
    if (m.vertex_index_.count(v->id.value)) {
      throw Error(ErrorCode::InvalidMesh, "duplicate vertex id " + id_str(v->id));
    }
    m.add_vertex(v->id, v->position, v->birth_frame);
    note(ElementKind::Vertex, v->id);
  }
  auto vslot = [&](ElementId id) {
    auto s = m.vertex_slot(id);
    if (!s) throw Error(ErrorCode::UnknownId, "unknown vertex id " + id_str(id));
    return *s;
  };
  for (const auto& e : edges) {
    const int a = vslot(e.v0), b = vslot(e.v1);
    if (a == b || m.find_edge(a, b) || m.edge_index_.count(e.id.value)) {
      throw Error(ErrorCode::InvalidMesh, "duplicate or degenerate edge " + id_str(e.id));
    }
    m.add_edge(e.id, a, b, e.rest_length, e.original_rest_length, e.birth_frame);
    note(ElementKind::Edge, e.id);
  }
  for (const auto& f : faces) {
    if (m.face_index_.count(f.id.value)) {
      throw Error(ErrorCode::InvalidMesh, "duplicate face id " + id_str(f.id));
    }
    m.add_face(f.id, {vslot(f.corners[0]), vslot(f.corners[1]), vslot(f.corners[2])});
    note(ElementKind::Face, f.id);
  }
  // Continue allocation past everything already issued.
  for (auto kind : {ElementKind::Vertex, ElementKind::Edge, ElementKind::Face}) {
    while (m.ids_.counter(kind) < max_counter[static_cast<int>(kind)]) m.ids_.next(kind);
  }
  m.ids_.set_branch(branch);
  return m;
}

// ---------------------------------------------------------------------------
// Lookup

std::optional<int> Mesh::find_edge(int a, int b) const {
  auto it = edge_lookup_.find(edge_key(a, b));
  if (it == edge_lookup_.end()) return std::nullopt;
  return it->second;
}

std::optional<int> Mesh::vertex_slot(ElementId id) const {
  auto it = vertex_index_.find(id.value);
  if (it == vertex_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<int> Mesh::edge_slot(ElementId id) const {
  auto it = edge_index_.find(id.value);
  if (it == edge_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<int> Mesh::face_slot(ElementId id) const {
  auto it = face_index_.find(id.value);
  if (it == face_index_.end()) return std::nullopt;
  return it->second;
}

// ---------------------------------------------------------------------------
// Surgery

ElementId Mesh::split_edge(ElementId edge, int frame) {
  auto e = edge_slot(edge);
  if (!e) throw Error(ErrorCode::UnknownId, "unknown edge id " + id_str(edge));
  return vertex_ids_[split_edge_slot(*e, frame)];
}

int Mesh::split_edge_slot(int e, int frame) {
  if (e < 0 || e >= edge_slots() || !edges_[e].alive) {
    throw Error(ErrorCode::UnknownId, "split of a dead edge slot");
  }
  const Edge parent = edges_[e];
  if (parent.he[0] < 0) {
    throw Error(ErrorCode::InvalidMesh, "edge " + id_str(parent.id) + " has no incident face");
  }

  struct Side {
    int face;
    ElementId face_id;
    int from, to, opposite;
  };
  std::array<Side, 2> sides{};
  int nsides = 0;
  for (int h : parent.he) {
    if (h < 0) continue;
    sides[nsides++] = Side{h / 3, faces_[h / 3].id, he_origin(h), he_dest(h), he_opposite_vertex(h)};
  }
  for (int s = 0; s < nsides; ++s) {
    const auto& sd = sides[s];
    if (0.5 * tri_area(positions_[sd.from], positions_[sd.to], positions_[sd.opposite]) <
        kMinFaceArea) {
      throw Error(ErrorCode::InvalidMesh, "split of edge " + id_str(parent.id) +
                                              " would create a face below minimum area");
    }
  }

  const int a = parent.v[0], b = parent.v[1];
  const ElementId vid = ids_.next(ElementKind::Vertex);
  const int m = add_vertex(vid, 0.5 * (positions_[a] + positions_[b]), frame);

  // Rest length of each cross edge: the median of the rest triangle, so the
  // two halves keep the parent's rest metric.
  std::array<double, 2> cross_rest{};
  for (int s = 0; s < nsides; ++s) {
    const auto& sd = sides[s];
    const auto ea = find_edge(sd.from, sd.opposite);
    const auto eb = find_edge(sd.to, sd.opposite);
    const double la = edges_[*ea].rest_length, lb = edges_[*eb].rest_length;
    const double lc = parent.rest_length;
    const double sq = (2.0 * la * la + 2.0 * lb * lb - lc * lc) / 4.0;
    cross_rest[s] = sq > 0.0 ? std::sqrt(sq) : (positions_[sd.opposite] - positions_[m]).norm();
  }

  for (int s = 0; s < nsides; ++s) retire_face(sides[s].face);
  retire_edge(e);
  emit(LineageEventType::Retire, ElementKind::Edge, parent.id, frame);
  for (int s = 0; s < nsides; ++s) {
    emit(LineageEventType::Retire, ElementKind::Face, sides[s].face_id, frame);
  }

  emit(LineageEventType::Birth, ElementKind::Vertex, vid, frame, {vertex_ids_[a], vertex_ids_[b]});

  const double half = 0.5 * parent.rest_length;
  for (int endpoint : {a, b}) {
    const ElementId id = ids_.next(ElementKind::Edge);
    add_edge(id, endpoint, m, half, half, frame);
    emit(LineageEventType::Birth, ElementKind::Edge, id, frame, {parent.id});
  }
  for (int s = 0; s < nsides; ++s) {
    const ElementId id = ids_.next(ElementKind::Edge);
    add_edge(id, m, sides[s].opposite, cross_rest[s], cross_rest[s], frame);
    emit(LineageEventType::Birth, ElementKind::Edge, id, frame, {parent.id});
  }
  for (int s = 0; s < nsides; ++s) {
    const auto& sd = sides[s];
    for (const auto& tri : {std::array<int, 3>{sd.from, m, sd.opposite},
                            std::array<int, 3>{m, sd.to, sd.opposite}}) {
      const ElementId id = ids_.next(ElementKind::Face);
      add_face(id, tri);
      emit(LineageEventType::Birth, ElementKind::Face, id, frame, {sd.face_id});
    }
  }
  return m;
}

std::optional<std::string> Mesh::flip_blocker(int e) const {
  if (e < 0 || e >= edge_slots() || !edges_[e].alive) return "dead edge";
  const Edge& ed = edges_[e];
  if (ed.he[1] < 0) return "boundary edge";
  const int h1 = ed.he[0], h2 = ed.he[1];
  if (!orientation_agree(h1)) return "orientation seam";
  const int a = he_origin(h1), b = he_dest(h1);
  const int c = he_opposite_vertex(h1), d = he_opposite_vertex(h2);
  if (c == d) return "degenerate quad";
  if (find_edge(c, d)) return "opposite vertices already joined";
  // An interior vertex of valence 3 would be left with a degenerate fan.
  if ((degree_[a] <= 3 && !is_boundary_vertex(a)) || (degree_[b] <= 3 && !is_boundary_vertex(b))) {
    return "endpoint valence too low";
  }
  if (tri_area(positions_[c], positions_[a], positions_[d]) < kMinFaceArea ||
      tri_area(positions_[d], positions_[b], positions_[c]) < kMinFaceArea) {
    return "flip would create a face below minimum area";
  }
  return std::nullopt;
}

ElementId Mesh::flip_edge(ElementId edge, int frame) {
  auto e = edge_slot(edge);
  if (!e) throw Error(ErrorCode::UnknownId, "unknown edge id " + id_str(edge));
  return edges_[flip_edge_slot(*e, frame)].id;
}

int Mesh::flip_edge_slot(int e, int frame) {
  if (auto why = flip_blocker(e)) {
    const std::string name = (e >= 0 && e < edge_slots()) ? id_str(edges_[e].id) : "?";
    throw Error(ErrorCode::NotFlippable, "edge " + name + " not flippable: " + *why);
  }
  const Edge old = edges_[e];
  const int h1 = old.he[0], h2 = old.he[1];
  const int a = he_origin(h1), b = he_dest(h1);
  const int c = he_opposite_vertex(h1), d = he_opposite_vertex(h2);
  const int f1 = h1 / 3, f2 = h2 / 3;
  const ElementId f1_id = faces_[f1].id, f2_id = faces_[f2].id;

  retire_face(f1);
  retire_face(f2);
  retire_edge(e);
  emit(LineageEventType::Retire, ElementKind::Edge, old.id, frame);
  emit(LineageEventType::Retire, ElementKind::Face, f1_id, frame);
  emit(LineageEventType::Retire, ElementKind::Face, f2_id, frame);

  const double len = (positions_[d] - positions_[c]).norm();
  const ElementId eid = ids_.next(ElementKind::Edge);
  const int ne = add_edge(eid, c, d, len, len, frame);
  emit(LineageEventType::Birth, ElementKind::Edge, eid, frame, {old.id});
  for (const auto& tri : {std::array<int, 3>{c, a, d}, std::array<int, 3>{d, b, c}}) {
    const ElementId id = ids_.next(ElementKind::Face);
    add_face(id, tri);
    emit(LineageEventType::Birth, ElementKind::Face, id, frame, {f1_id, f2_id});
  }
  return ne;
}

// ---------------------------------------------------------------------------
// Queries

namespace {

struct DisjointSets {
  std::vector<int> parent;
  explicit DisjointSets(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(int a, int b) { parent[find(a)] = find(b); }
};

}  // namespace

TopologySignature topology_signature(const Mesh& mesh) {
  TopologySignature sig;
  sig.euler_characteristic = mesh.vertex_count() - mesh.edge_count() + mesh.face_count();

  DisjointSets sets(mesh.vertex_count());
  std::vector<char> on_boundary(mesh.vertex_count(), 0);
  for (int e = 0; e < mesh.edge_slots(); ++e) {
    if (!mesh.edge_alive(e) || !mesh.is_boundary_edge(e)) continue;
    const auto& ed = mesh.edge(e);
    on_boundary[ed.v[0]] = on_boundary[ed.v[1]] = 1;
    sets.unite(ed.v[0], ed.v[1]);
  }
  for (int v = 0; v < mesh.vertex_count(); ++v) {
    if (on_boundary[v] && sets.find(v) == v) ++sig.boundary_loops;
  }

  // Breadth-first orientation propagation; a conflict proves non-orientability.
  std::vector<int> sign(mesh.face_slots(), 0);
  for (int seed = 0; seed < mesh.face_slots() && sig.orientable; ++seed) {
    if (!mesh.face_alive(seed) || sign[seed] != 0) continue;
    sign[seed] = 1;
    std::queue<int> queue;
    queue.push(seed);
    while (!queue.empty() && sig.orientable) {
      const int f = queue.front();
      queue.pop();
      for (int k = 0; k < 3; ++k) {
        const int h = 3 * f + k;
        const int t = mesh.he_twin(h);
        if (t < 0) continue;
        const int g = Mesh::he_face(t);
        const int want = mesh.orientation_agree(h) ? sign[f] : -sign[f];
        if (sign[g] == 0) {
          sign[g] = want;
          queue.push(g);
        } else if (sign[g] != want) {
          sig.orientable = false;
        }
      }
    }
  }
  return sig;
}

std::vector<std::string> validate(const Mesh& mesh) {
  std::vector<std::string> out;
  auto report = [&](const std::string& s) { out.push_back(s); };

  const int nv = mesh.vertex_count();
  for (int f = 0; f < mesh.face_slots(); ++f) {
    const auto& face = mesh.faces_[f];
    if (!face.alive) continue;
    const auto& v = face.v;
    bool ok = true;
    for (int k = 0; k < 3; ++k) {
      if (v[k] < 0 || v[k] >= nv) ok = false;
    }
    if (!ok || v[0] == v[1] || v[1] == v[2] || v[0] == v[2]) {
      report("face " + id_str(face.id) + ": invalid corner vertices");
      continue;
    }
    for (int k = 0; k < 3; ++k) {
      const int h = 3 * f + k;
      const int e = mesh.he_edge_[h];
      if (e < 0 || e >= mesh.edge_slots() || !mesh.edges_[e].alive) {
        report("half-edge " + std::to_string(h) + " of face " + id_str(face.id) +
               ": no live edge");
        continue;
      }
      const auto& ed = mesh.edges_[e];
      const int a = v[k], b = v[(k + 1) % 3];
      if (!((ed.v[0] == a && ed.v[1] == b) || (ed.v[0] == b && ed.v[1] == a))) {
        report("half-edge " + std::to_string(h) + ": endpoints disagree with edge " +
               id_str(ed.id));
      }
      if (ed.he[0] != h && ed.he[1] != h) {
        report("half-edge " + std::to_string(h) + ": not registered on edge " + id_str(ed.id));
      }
    }
  }

  std::unordered_map<std::uint64_t, int> seen;
  for (int e = 0; e < mesh.edge_slots(); ++e) {
    const auto& ed = mesh.edges_[e];
    if (!ed.alive) continue;
    const std::string name = "edge " + id_str(ed.id);
    if (ed.v[0] == ed.v[1]) report(name + ": degenerate endpoints");
    if (!seen.emplace(Mesh::edge_key(ed.v[0], ed.v[1]), e).second) {
      report(name + ": duplicates another edge");
    }
    if (!(ed.rest_length > 0.0) || !(ed.original_rest_length > 0.0)) {
      report(name + ": non-positive rest length");
    }
    const int h0 = ed.he[0], h1 = ed.he[1];
    if (h0 < 0) {
      report(name + ": no incident face");
      continue;
    }
    if (h1 < 0) {
      if (mesh.twin_[h0] != -1) {
        report(name + ": boundary half-edge " + std::to_string(h0) + " has a twin");
      }
    } else if (mesh.twin_[h0] != h1 || mesh.twin_[h1] != h0) {
      report(name + ": twin pair (" + std::to_string(h0) + ", " + std::to_string(h1) +
             ") is not mutual");
    }
  }

  // One connected fan per vertex.
  auto fans = vertex_faces(mesh);
  for (int v = 0; v < nv; ++v) {
    const auto& fan = fans[v];
    const std::string name = "vertex " + id_str(mesh.vertex_id(v));
    if (fan.empty()) {
      report(name + ": isolated");
      continue;
    }
    std::vector<char> reached(fan.size(), 0);
    std::vector<int> stack{0};
    reached[0] = 1;
    std::size_t count = 1;
    while (!stack.empty()) {
      const int i = stack.back();
      stack.pop_back();
      const int f = fan[i];
      for (int k = 0; k < 3; ++k) {
        const int h = 3 * f + k;
        if (mesh.he_origin(h) != v && mesh.he_dest(h) != v) continue;
        const int t = mesh.twin_[h];
        if (t < 0) continue;
        const int g = Mesh::he_face(t);
        for (std::size_t j = 0; j < fan.size(); ++j) {
          if (fan[j] == g && !reached[j]) {
            reached[j] = 1;
            ++count;
            stack.push_back(static_cast<int>(j));
          }
        }
      }
    }
    if (count != fan.size()) report(name + ": incident faces form more than one fan");
  }
  return out;
}

std::vector<std::vector<int>> boundary_loops(const Mesh& mesh) {
  std::vector<std::array<int, 2>> nbr(mesh.vertex_count(), {-1, -1});
  for (int e = 0; e < mesh.edge_slots(); ++e) {
    if (!mesh.edge_alive(e) || !mesh.is_boundary_edge(e)) continue;
    const auto& ed = mesh.edge(e);
    for (int s = 0; s < 2; ++s) {
      auto& slot = nbr[ed.v[s]];
      const int other = ed.v[1 - s];
      if (slot[0] < 0) {
        slot[0] = other;
      } else if (slot[1] < 0) {
        slot[1] = other;
      } else {
        throw Error(ErrorCode::InvalidMesh, "boundary vertex with more than two boundary edges");
      }
    }
  }
  std::vector<char> used(mesh.vertex_count(), 0);
  std::vector<std::vector<int>> loops;
  // Vertex slots are in id order, so the first unused boundary vertex is the
  // lowest id of its loop.
  for (int start = 0; start < mesh.vertex_count(); ++start) {
    if (nbr[start][0] < 0 || used[start]) continue;
    std::vector<int> loop;
    int prev = -1, cur = start;
    // Walk toward the lower-id neighbour first for a canonical direction.
    const int first = std::min(nbr[start][0], nbr[start][1]);
    while (!used[cur]) {
      used[cur] = 1;
      loop.push_back(cur);
      int next = (prev < 0) ? first : (nbr[cur][0] == prev ? nbr[cur][1] : nbr[cur][0]);
      if (next < 0) break;
      prev = cur;
      cur = next;
    }
    loops.push_back(std::move(loop));
  }
  return loops;
}

Adjacency vertex_adjacency(const Mesh& mesh) {
  Adjacency adj;
  const int n = mesh.vertex_count();
  adj.offsets.assign(n + 1, 0);
  for (int e = 0; e < mesh.edge_slots(); ++e) {
    if (!mesh.edge_alive(e)) continue;
    ++adj.offsets[mesh.edge(e).v[0] + 1];
    ++adj.offsets[mesh.edge(e).v[1] + 1];
  }
  for (int v = 0; v < n; ++v) adj.offsets[v + 1] += adj.offsets[v];
  adj.neighbors.resize(adj.offsets[n]);
  adj.edges.resize(adj.offsets[n]);
  std::vector<int> fill(adj.offsets.begin(), adj.offsets.end() - 1);
  for (int e = 0; e < mesh.edge_slots(); ++e) {
    if (!mesh.edge_alive(e)) continue;
    const auto& ed = mesh.edge(e);
    adj.neighbors[fill[ed.v[0]]] = ed.v[1];
    adj.edges[fill[ed.v[0]]++] = e;
    adj.neighbors[fill[ed.v[1]]] = ed.v[0];
    adj.edges[fill[ed.v[1]]++] = e;
  }
  return adj;
}

std::vector<std::vector<int>> vertex_faces(const Mesh& mesh) {
  std::vector<std::vector<int>> out(mesh.vertex_count());
  for (int f = 0; f < mesh.face_slots(); ++f) {
    if (!mesh.face_alive(f)) continue;
    for (int v : mesh.face(f).v) {
      if (v >= 0 && v < mesh.vertex_count()) out[v].push_back(f);
    }
  }
  return out;
}

std::vector<char> boundary_vertex_flags(const Mesh& mesh) {
  std::vector<char> flags(mesh.vertex_count(), 0);
  for (int e = 0; e < mesh.edge_slots(); ++e) {
    if (mesh.edge_alive(e) && mesh.is_boundary_edge(e)) {
      flags[mesh.edge(e).v[0]] = flags[mesh.edge(e).v[1]] = 1;
    }
  }
  return flags;
}

Vec3 face_area_vector(const Mesh& mesh, int f) {
  const auto& v = mesh.face(f).v;
  const Vec3& p0 = mesh.position(v[0]);
  return (mesh.position(v[1]) - p0).cross(mesh.position(v[2]) - p0);
}

double face_area(const Mesh& mesh, int f) { return 0.5 * face_area_vector(mesh, f).norm(); }

std::vector<Vec3> vertex_normals(const Mesh& mesh) {
  std::vector<Vec3> area(mesh.face_slots(), Vec3::Zero());
  for (int f = 0; f < mesh.face_slots(); ++f) {
    if (mesh.face_alive(f)) area[f] = face_area_vector(mesh, f);
  }
  const auto fans = vertex_faces(mesh);
  std::vector<Vec3> n(mesh.vertex_count(), Vec3::Zero());
  std::vector<int> sign;
  std::vector<int> stack;
  for (int v = 0; v < mesh.vertex_count(); ++v) {
    const auto& fan = fans[v];
    if (fan.empty()) continue;
    // Propagate a local orientation around the fan through twin links.
    sign.assign(fan.size(), 0);
    sign[0] = 1;
    stack.assign(1, 0);
    while (!stack.empty()) {
      const int i = stack.back();
      stack.pop_back();
      const int f = fan[i];
      for (int k = 0; k < 3; ++k) {
        const int h = 3 * f + k;
        if (mesh.he_origin(h) != v && mesh.he_dest(h) != v) continue;
        const int t = mesh.he_twin(h);
        if (t < 0) continue;
        const int g = Mesh::he_face(t);
        for (std::size_t j = 0; j < fan.size(); ++j) {
          if (fan[j] == g && sign[j] == 0) {
            sign[j] = mesh.orientation_agree(h) ? sign[i] : -sign[i];
            stack.push_back(static_cast<int>(j));
          }
        }
      }
    }
    for (std::size_t j = 0; j < fan.size(); ++j) {
      n[v] += (sign[j] < 0 ? -1.0 : 1.0) * area[fan[j]];
    }
  }
  for (auto& x : n) {
    const double len = x.norm();
    x = len > 0.0 ? Vec3(x / len) : Vec3(0.0, 0.0, 1.0);
  }
  return n;
}

std::vector<int> faces_by_id(const Mesh& mesh) {
  std::vector<int> out;
  out.reserve(mesh.face_count());
  for (int f = 0; f < mesh.face_slots(); ++f) {
    if (mesh.face_alive(f)) out.push_back(f);
  }
  std::sort(out.begin(), out.end(),
            [&](int a, int b) { return mesh.face(a).id < mesh.face(b).id; });
  return out;
}

std::vector<int> edges_by_id(const Mesh& mesh) {
  std::vector<int> out;
  out.reserve(mesh.edge_count());
  for (int e = 0; e < mesh.edge_slots(); ++e) {
    if (mesh.edge_alive(e)) out.push_back(e);
  }
  std::sort(out.begin(), out.end(),
            [&](int a, int b) { return mesh.edge(a).id < mesh.edge(b).id; });
  return out;
}

}  // namespace surfgrow
