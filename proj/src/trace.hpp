#pragma once

#include <array>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "energy.hpp"
#include "ids.hpp"
#include "mesh.hpp"

namespace surfgrow {

struct LineageRecord {
  ElementId id;
  ElementKind kind = ElementKind::Vertex;
  int birth_frame = 0;
  std::vector<ElementId> parents;
  std::optional<int> death_frame;
};

/// Append-only log of births and retirements. Installed on a mesh as its
/// lineage sink, it sees every surgery event.
class LineageLog : public LineageSink {
 public:
  void record(const LineageEvent& event) override;

  /// Throws DuplicateBirth for a second birth of the same id and kind, and
  /// RetireUnknown for retiring an id that is not live.
  void record_event(LineageEventType type, ElementId id, ElementKind kind,
                    std::vector<ElementId> parents, int frame);

  const std::vector<LineageEvent>& events() const { return events_; }
  const std::vector<LineageRecord>& records() const { return records_; }
  const LineageRecord* find(ElementKind kind, ElementId id) const;

  /// Ids live at the end of `frame`, sorted.
  std::vector<ElementId> live_ids(ElementKind kind, int frame) const;

  /// Events recorded at exactly `frame`.
  std::vector<LineageEvent> events_at(int frame) const;

 private:
  std::vector<LineageEvent> events_;
  std::vector<LineageRecord> records_;
  std::array<std::unordered_map<ElementId, std::size_t>, 3> index_;
};

/// tau = (frame - birth_frame) / total_frames clamped to [0, 1], per id.
std::vector<double> age_field(const LineageLog& log, std::span<const ElementId> vertices,
                              int frame, int total_frames = 400);

/// Same formula straight from a mesh's birth frames, indexed by vertex slot.
std::vector<double> age_field(const Mesh& mesh, int frame, int total_frames = 400);

struct VertexAnnotation {
  ElementId id;
  Vec3 position = Vec3::Zero();
  double g = 0.0;
  double w_memb = 0.0;
  double w_flex = 0.0;
  int birth_frame = 0;
};

struct FrameFlags {
  bool step_failure = false;
  bool unresolved_collision = false;
  bool flip_non_termination = false;
};

struct FrameAnnotations {
  int frame = 0;
  std::vector<VertexAnnotation> vertices;  // sorted by id
  EnergyBreakdown energy;
  int splits = 0;
  int flips = 0;
  FrameFlags flags;
};

struct TrackSample {
  int frame = 0;
  Vec3 position = Vec3::Zero();
  double g = 0.0;
  double w_memb = 0.0;
  double w_flex = 0.0;
};

/// One sample per frame in [first, last] at which the vertex is annotated.
std::vector<TrackSample> track(const LineageLog& log, std::span<const FrameAnnotations> frames,
                               ElementId vertex, int first, int last);

/// Frames in [first, last] at which an element of any kind is live.
std::vector<int> live_frames(const LineageLog& log, ElementKind kind, ElementId id, int first,
                             int last);

}  // namespace surfgrow
