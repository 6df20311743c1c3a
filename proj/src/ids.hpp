#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <functional>
#include <vector>

namespace surfgrow {

/// Persistent identity of a vertex, edge or face. Never reused within a
/// sequence. The top 8 bits carry the branch index so that trajectories
/// forked from a shared prefix allocate disjoint ids.
struct ElementId {
  std::uint64_t value = kInvalid;

  static constexpr std::uint64_t kInvalid = ~std::uint64_t{0};
  static constexpr int kBranchShift = 56;

  constexpr bool valid() const noexcept { return value != kInvalid; }
  constexpr unsigned branch() const noexcept {
    return static_cast<unsigned>(value >> kBranchShift);
  }
  friend constexpr auto operator<=>(ElementId, ElementId) = default;
};

enum class ElementKind : std::uint8_t { Vertex = 0, Edge = 1, Face = 2 };

const char* to_string(ElementKind kind) noexcept;

class IdAllocator {
 public:
  IdAllocator() = default;

  ElementId next(ElementKind kind) {
    auto& c = counters_[static_cast<int>(kind)];
    return ElementId{(std::uint64_t{branch_} << ElementId::kBranchShift) | c++};
  }

  // Counters continue from the shared prefix; only the high bits change.
  void set_branch(unsigned branch) { branch_ = branch & 0xffu; }
  unsigned branch() const noexcept { return branch_; }

  std::uint64_t counter(ElementKind kind) const {
    return counters_[static_cast<int>(kind)];
  }

 private:
  std::array<std::uint64_t, 3> counters_{};
  unsigned branch_ = 0;
};

enum class LineageEventType : std::uint8_t { Birth = 0, Retire = 1 };

struct LineageEvent {
  LineageEventType type;
  ElementKind kind;
  ElementId id;
  int frame;
  std::vector<ElementId> parents;
};

/// Receives surgery events from a mesh.
class LineageSink {
 public:
  virtual ~LineageSink() = default;
  virtual void record(const LineageEvent& event) = 0;
};

}  // namespace surfgrow

template <>
struct std::hash<surfgrow::ElementId> {
  std::size_t operator()(surfgrow::ElementId id) const noexcept {
    return std::hash<std::uint64_t>{}(id.value);
  }
};
