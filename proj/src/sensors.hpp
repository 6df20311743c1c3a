#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "collision.hpp"
#include "ids.hpp"
#include "mesh.hpp"
#include "rng.hpp"

namespace surfgrow {

/// Pinhole camera aimed at the origin. Rays leave through pixel centres with
/// the origin of pixel coordinates at the top-left corner.
struct Camera {
  Vec3 position = Vec3::Zero();
  Vec3 forward = -Vec3::UnitZ();
  Vec3 up = Vec3::UnitY();
  Vec3 right = Vec3::UnitX();
  double horizontal_fov = 0.0;
  int width = 336;
  int height = 336;

  /// Unit direction of the primary ray through pixel (x, y).
  Vec3 ray_direction(int x, int y) const;
};

struct CameraRig {
  double radius = 0.0;
  std::vector<Camera> cameras;
};

/// 2 * atan(18 / 50): a 50 mm lens on a 36 mm wide sensor.
double default_horizontal_fov();

/// n cameras on a Fibonacci sphere of the given radius, with a random azimuth
/// phase drawn from `rng`.
CameraRig fibonacci_rig(int n, double radius, RngStream& rng, int width = 336,
                        int height = 336);

struct MaskRect {
  int x = 0, y = 0, w = 0, h = 0;
};

struct CutoutMask {
  int width = 0;
  int height = 0;
  std::vector<MaskRect> rects;
  std::vector<std::uint8_t> covered;  // row-major, 1 where masked

  bool masked(int x, int y) const { return covered[static_cast<std::size_t>(y) * width + x] != 0; }
  double coverage() const;
};

/// Random rectangles of 5 to 15 % of the image each, accumulated until the
/// union covers coverage +- 0.01 of the image.
CutoutMask make_cutout_mask(const Camera& camera, double coverage, RngStream& rng);

/// Log-uniform in [0.8, 1.25].
double exposure_gain(RngStream& rng);

/// Per-pixel correspondence buffer. Background pixels have an invalid face
/// id and infinite depth.
struct PixelBuffer {
  int width = 0;
  int height = 0;
  std::vector<ElementId> face;
  std::vector<std::array<double, 2>> barycentric;
  std::vector<double> depth;
  std::vector<std::uint8_t> masked;
  std::vector<std::uint8_t> rgb;  // 3 bytes per pixel

  std::size_t index(int x, int y) const { return static_cast<std::size_t>(y) * width + x; }
};

PixelBuffer render_correspondence(const Mesh& mesh, const TriangleBvh& tree, const Camera& camera,
                                  const CutoutMask* mask, double exposure);

/// Spinning sensor: azimuth turns about `up`, azimuth 0 points along `forward`.
struct LidarPose {
  Vec3 position = Vec3::Zero();
  Vec3 forward = -Vec3::UnitZ();
  Vec3 up = Vec3::UnitY();
};

/// Sensor on +z at the given distance, looking at the origin.
LidarPose default_lidar_pose(double distance);

struct LidarConfig {
  int rows = 64;
  int cols = 2048;
  double min_elevation = -0.25 * 3.14159265358979323846;
  double max_elevation = 0.25 * 3.14159265358979323846;
  double dropout = 0.05;
  double noise_sigma = 0.005;
};

struct LidarBeam {
  bool hit = false;    // the ray met geometry
  bool valid = false;  // hit and not dropped
  std::array<float, 3> point{};
  ElementId nearest_vertex;
  ElementId face;
  std::array<double, 3> barycentric{};
  Vec3 true_point = Vec3::Zero();
};

struct LidarScan {
  int rows = 0;
  int cols = 0;
  std::vector<LidarBeam> beams;  // row-major
};

Vec3 lidar_beam_direction(const LidarPose& pose, const LidarConfig& cfg, int row, int col);

/// Beam (row, col) draws from the stream (seed, Lidar, frame, row * cols + col).
LidarScan lidar_scan(const Mesh& mesh, const TriangleBvh& tree, const LidarPose& pose,
                     std::uint64_t seed, std::uint64_t frame, const LidarConfig& cfg = {});

/// Corner of face slot `face` closest to p; ties go to the lower vertex id.
int nearest_corner(const Mesh& mesh, int face, const Vec3& p);

}  // namespace surfgrow
