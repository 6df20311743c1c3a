#include "trace.hpp"

#include <algorithm>
#include <string>

#include "error.hpp"

namespace surfgrow {

namespace {

std::string describe(ElementKind kind, ElementId id) {
  return std::string(to_string(kind)) + " " + std::to_string(id.value);
}

}  // namespace

void LineageLog::record(const LineageEvent& event) {
  record_event(event.type, event.id, event.kind, event.parents, event.frame);
}

void LineageLog::record_event(LineageEventType type, ElementId id, ElementKind kind,
                              std::vector<ElementId> parents, int frame) {
  auto& index = index_[static_cast<int>(kind)];
  const auto it = index.find(id);
  if (type == LineageEventType::Birth) {
    if (it != index.end()) {
      throw Error(ErrorCode::DuplicateBirth, describe(kind, id) + " was already born");
    }
    index.emplace(id, records_.size());
    records_.push_back(LineageRecord{id, kind, frame, parents, std::nullopt});
  } else {
    if (it == index.end() || records_[it->second].death_frame) {
      throw Error(ErrorCode::RetireUnknown, describe(kind, id) + " is not live");
    }
    records_[it->second].death_frame = frame;
  }
  events_.push_back(LineageEvent{type, kind, id, frame, std::move(parents)});
}

const LineageRecord* LineageLog::find(ElementKind kind, ElementId id) const {
  const auto& index = index_[static_cast<int>(kind)];
  const auto it = index.find(id);
  return it == index.end() ? nullptr : &records_[it->second];
}

std::vector<ElementId> LineageLog::live_ids(ElementKind kind, int frame) const {
  std::vector<ElementId> out;
  for (const auto& r : records_) {
    if (r.kind == kind && r.birth_frame <= frame && (!r.death_frame || *r.death_frame > frame)) {
      out.push_back(r.id);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<LineageEvent> LineageLog::events_at(int frame) const {
  std::vector<LineageEvent> out;
  for (const auto& e : events_) {
    if (e.frame == frame) out.push_back(e);
  }
  return out;
}

std::vector<double> age_field(const LineageLog& log, std::span<const ElementId> vertices,
                              int frame, int total_frames) {
  if (total_frames < 1 || frame > total_frames) {
    throw Error(ErrorCode::InvalidArgument, "age query outside the sequence length");
  }
  std::vector<double> tau;
  tau.reserve(vertices.size());
  for (ElementId id : vertices) {
    const auto* r = log.find(ElementKind::Vertex, id);
    if (!r) throw Error(ErrorCode::UnknownId, "unknown vertex " + std::to_string(id.value));
    tau.push_back(std::clamp(double(frame - r->birth_frame) / total_frames, 0.0, 1.0));
  }
  return tau;
}

std::vector<double> age_field(const Mesh& mesh, int frame, int total_frames) {
  if (total_frames < 1 || frame > total_frames) {
    throw Error(ErrorCode::InvalidArgument, "age query outside the sequence length");
  }
  std::vector<double> tau(mesh.vertex_count());
  for (int v = 0; v < mesh.vertex_count(); ++v) {
    tau[v] = std::clamp(double(frame - mesh.vertex_birth(v)) / total_frames, 0.0, 1.0);
  }
  return tau;
}

std::vector<TrackSample> track(const LineageLog& log, std::span<const FrameAnnotations> frames,
                               ElementId vertex, int first, int last) {
  const auto* r = log.find(ElementKind::Vertex, vertex);
  if (!r || r->birth_frame > last) {
    throw Error(ErrorCode::UnknownId, "vertex " + std::to_string(vertex.value) +
                                          " is not born by frame " + std::to_string(last));
  }
  std::vector<TrackSample> out;
  for (const auto& fa : frames) {
    if (fa.frame < first || fa.frame > last) continue;
    const auto it = std::lower_bound(
        fa.vertices.begin(), fa.vertices.end(), vertex,
        [](const VertexAnnotation& a, ElementId id) { return a.id < id; });
    if (it == fa.vertices.end() || it->id != vertex) continue;
    out.push_back({fa.frame, it->position, it->g, it->w_memb, it->w_flex});
  }
  return out;
}

std::vector<int> live_frames(const LineageLog& log, ElementKind kind, ElementId id, int first,
                             int last) {
  const auto* r = log.find(kind, id);
  if (!r) throw Error(ErrorCode::UnknownId, describe(kind, id) + " never existed");
  std::vector<int> out;
  const int end = r->death_frame ? std::min(last, *r->death_frame - 1) : last;
  for (int f = std::max(first, r->birth_frame); f <= end; ++f) out.push_back(f);
  return out;
}

}  // namespace surfgrow
