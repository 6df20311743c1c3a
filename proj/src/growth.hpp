#pragma once

#include <array>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "mesh.hpp"
#include "rng.hpp"

namespace surfgrow {

/// Normalized geodesic distance to the source set, indexed by vertex slot.
struct GrowthField {
  std::vector<double> g;
  std::vector<ElementId> sources;
};

struct GrowthConfig {
  double gamma = 0.02;        // per-frame growth rate
  double split_factor = 1.5;  // rest / original rest length that triggers a split
  double source_fraction = 0.10;
  // Growth pauses once the mesh holds this many vertices (0 = unbounded).
  int max_vertices = 6000;
  // Rest lengths stop growing where a rest triangle would get closer than
  // this fraction to violating the triangle inequality (0 disables).
  double min_rest_slack = 0.1;

  void check() const;
};

struct QualityReport {
  double radius_edge_mean = 0.0;
  double radius_edge_std = 0.0;
  std::map<int, int> valence_histogram;  // interior vertices only
  double min_angle = 0.0;                // radians
  int interior_vertices = 0;

  /// Share of interior vertices whose valence lies in [lo, hi].
  double valence_fraction(int lo = 5, int hi = 7) const;
};

/// Multi-source Dijkstra over the edge graph with Euclidean weights. Ties in
/// the queue resolve to the lowest vertex id. Unreachable vertices get +inf.
std::vector<double> geodesic_distances(const Mesh& mesh, std::span<const int> source_slots);

GrowthField compute_growth_field(const Mesh& mesh, std::span<const ElementId> sources);

/// Gives vertices added since the field was computed the mean value of the
/// two endpoints they were inserted between.
void extend_growth_field(GrowthField& field, const Mesh& mesh,
                         std::span<const std::array<int, 3>> inserted);

/// Contiguous arc of ceil(fraction * n) vertices on one boundary loop.
std::vector<ElementId> select_source_set(const Mesh& mesh, RngStream& rng, double fraction);

/// rest <- (1 + gamma * (g_i + g_j) / 2) * rest for every edge.
void update_rest_lengths(Mesh& mesh, const GrowthField& field, const GrowthConfig& cfg);

struct SplitStats {
  int splits = 0;
  int blocked = 0;
  /// (new vertex, endpoint a, endpoint b) slots, in split order.
  std::vector<std::array<int, 3>> inserted;
};

/// Splits edges whose rest / original rest ratio exceeds the split factor,
/// largest ratio first (ties: lowest id).
SplitStats split_pass(Mesh& mesh, const GrowthConfig& cfg, int frame);

struct FlipStats {
  int flips = 0;
  bool non_termination = false;
};

/// Which metric the Delaunay test and the new diagonal's rest length use.
/// Rest: angles from rest lengths, new rest length from unfolding the two rest
/// triangles. Embedded: angles from positions, new rest length = current
/// Euclidean length.
enum class FlipMetric { Rest, Embedded };

/// Sum of the angles opposite an interior edge, measured on positions.
double opposite_angle_sum(const Mesh& mesh, int edge);
/// Same, computed from rest lengths.
double rest_opposite_angle_sum(const Mesh& mesh, int edge);
/// Length of the flipped diagonal in the unfolded rest quad, or nothing if the
/// rest quad is not strictly convex.
std::optional<double> rest_flip_length(const Mesh& mesh, int edge);

/// Flips interior, non-seam edges whose opposite angles sum to more than
/// pi + 1e-9 until none remain or 10 |E| flips have been made. The new edge's
/// original rest length equals its rest length.
FlipStats delaunay_flip_pass(Mesh& mesh, int frame = 0, FlipMetric metric = FlipMetric::Rest);

struct SmoothStats {
  int moved = 0;
  int rejected = 0;
  double rest_scale = 1.0;  // uniform rest rescale applied after resampling
};

/// Optimal-Delaunay-triangulation smoothing. Interior vertices move toward the
/// area-weighted mean of incident circumcentres, restricted to the tangent
/// plane; boundary vertices slide along their boundary polyline. With
/// `resample_rest` the move is treated as resampling the material: each edge
/// at the moved vertex keeps its strain, so rest and original rest lengths
/// scale with the change in its embedded length. Moves that would leave a
/// rest triangle nearly degenerate are rejected. Should the pass lower the
/// total rest area, all rest and original rest lengths are scaled by one
/// common factor that restores it, so the rest area never shrinks.
SmoothStats odt_smooth_pass(Mesh& mesh, int iterations = 1, bool resample_rest = false);

Vec3 circumcenter(const Vec3& a, const Vec3& b, const Vec3& c);
double radius_edge_ratio(const Vec3& a, const Vec3& b, const Vec3& c);

QualityReport quality_report(const Mesh& mesh);

/// Sum of the face areas implied by the rest lengths. Growth raises it;
/// splits and rest-metric flips preserve it.
double total_rest_area(const Mesh& mesh);

}  // namespace surfgrow
