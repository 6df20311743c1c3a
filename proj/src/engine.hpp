#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "collision.hpp"
#include "energy.hpp"
#include "growth.hpp"
#include "mesh.hpp"
#include "rng.hpp"
#include "sensors.hpp"
#include "trace.hpp"

namespace surfgrow {

struct SensorConfig {
  bool enabled = true;
  int cameras = 8;
  int width = 336;
  int height = 336;
  // Rig radius as a multiple of the frame-0 bounding radius.
  double rig_radius_factor = 6.0;
  double cutout = 0.20;
  bool lidar = true;
  bool png = true;
  LidarConfig lidar_config;

  void check() const;
};

struct SequenceConfig {
  TopologyClass topology = TopologyClass::Disc;
  int seed_vertices = 20;
  MaterialParams material;
  int frames = 400;
  SolverConfig solver;
  GrowthConfig growth;
  CollisionConfig collision;
  bool collisions = true;
  int odt_iterations = 1;
  bool odt_resample = true;
  double perturbation_amplitude = 0.02;
  SensorConfig sensors;
  int sensor_every = 1;
  std::uint64_t seed = 0;

  void check() const;
};

/// One material override: `value` replaces the parameter, or multiplies it
/// when `scale` is set.
struct ParamOverride {
  std::string param;
  bool scale = false;
  double value = 0.0;
};

/// Parses "k_bend=*0.5" (multiplier) or "k_bend=0.2" (replacement); several
/// may be joined with commas.
std::vector<ParamOverride> parse_overrides(const std::string& text);
MaterialParams apply_overrides(MaterialParams params, const std::vector<ParamOverride>& overrides);

struct BranchSpec {
  int branch_frame = 50;
  // One entry per non-baseline branch.
  std::vector<std::vector<ParamOverride>> branches;
};

/// Uniformly random rotation followed by a smooth displacement of three
/// sinusoidal modes whose summed amplitude is `amplitude` times the bounding
/// radius. Retries with halved amplitude up to three times if a face
/// degenerates or turns over, then throws InvalidMesh. Rest lengths are
/// reset to the perturbed lengths so the perturbed shape is the reference.
/// Returns the amplitude actually used.
double apply_initial_perturbation(Mesh& mesh, RngStream& rng, double amplitude);

/// Largest distance from the vertex centroid.
double bounding_radius(const Mesh& mesh);

struct SensorFrame {
  std::vector<double> exposures;
  std::vector<PixelBuffer> views;
  std::optional<LidarScan> lidar;
};

/// State of one trajectory. Frame 0 is the perturbed seed; every call to
/// step() simulates the next frame.
class Sequence {
 public:
  explicit Sequence(const SequenceConfig& config);
  Sequence(const Sequence& other);
  Sequence& operator=(const Sequence&) = delete;

  /// Copy of this state that continues as branch `index` under new material
  /// parameters, with its own RNG substream and id space.
  Sequence fork(unsigned index, const MaterialParams& material) const;

  void step();

  int frame() const noexcept { return frame_; }
  const SequenceConfig& config() const noexcept { return config_; }
  const Mesh& mesh() const noexcept { return mesh_; }
  const LineageLog& lineage() const noexcept { return log_; }
  const FrameAnnotations& annotations() const noexcept { return annotations_; }
  const std::optional<SensorFrame>& sensors() const noexcept { return sensors_; }
  const CameraRig& rig() const noexcept { return rig_; }
  const std::vector<CutoutMask>& masks() const noexcept { return masks_; }
  const GrowthField& growth_field() const noexcept { return field_; }
  unsigned branch() const noexcept { return branch_; }
  double sim_time() const noexcept;
  std::uint64_t rng_seed() const noexcept { return rng_seed_; }

 private:
  void annotate(int splits, int flips, const FrameFlags& flags);
  void capture_sensors();

  SequenceConfig config_;
  Mesh mesh_;
  LineageLog log_;
  GrowthField field_;
  std::vector<ElementId> sources_;
  CameraRig rig_;
  std::vector<CutoutMask> masks_;
  FrameAnnotations annotations_;
  std::optional<SensorFrame> sensors_;
  int frame_ = 0;
  bool split_last_ = false;
  unsigned branch_ = 0;
  std::uint64_t rng_seed_ = 0;
};

enum class Split { Train, Val, Test };
const char* to_string(Split s) noexcept;

/// Group-aware 8:1:1 assignment. Groups are shuffled by seed and filled
/// into train, then val, then test; members of one group never separate.
/// `groups[i]` names the group of `ids[i]`; empty means one group per id.
std::map<std::string, Split> assign_splits(const std::vector<std::string>& ids,
                                           const std::vector<std::string>& groups,
                                           std::uint64_t seed);

/// Each coefficient log-uniform in [0.01, 1].
std::vector<MaterialParams> sample_material_grid(int n, RngStream& rng);

}  // namespace surfgrow
