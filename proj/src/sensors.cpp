#include "sensors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "error.hpp"

namespace surfgrow {

Vec3 Camera::ray_direction(int x, int y) const {
  const double half = std::tan(0.5 * horizontal_fov);
  const double sx = (2.0 * (x + 0.5) / width - 1.0) * half;
  const double sy = (1.0 - 2.0 * (y + 0.5) / height) * half * height / width;
  return (forward + sx * right + sy * up).normalized();
}

double default_horizontal_fov() { return 2.0 * std::atan(18.0 / 50.0); }

CameraRig fibonacci_rig(int n, double radius, RngStream& rng, int width, int height) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "rig needs at least one camera");
  if (!(radius > 0.0)) throw Error(ErrorCode::InvalidArgument, "rig radius must be positive");
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
  CameraRig rig;
  rig.radius = radius;
  for (int k = 0; k < n; ++k) {
    const double z = 1.0 - 2.0 * (k + 0.5) / n;
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double phi = k * golden + phase;
    Camera cam;
    cam.position = radius * Vec3(r * std::cos(phi), r * std::sin(phi), z);
    cam.forward = -cam.position.normalized();
    const Vec3 world_up = std::abs(cam.forward.z()) > 0.99 ? Vec3::UnitY() : Vec3::UnitZ();
    cam.right = cam.forward.cross(world_up).normalized();
    cam.up = cam.right.cross(cam.forward);
    cam.horizontal_fov = default_horizontal_fov();
    cam.width = width;
    cam.height = height;
    rig.cameras.push_back(cam);
  }
  return rig;
}

double CutoutMask::coverage() const {
  if (covered.empty()) return 0.0;
  const auto n = std::count(covered.begin(), covered.end(), std::uint8_t{1});
  return static_cast<double>(n) / static_cast<double>(covered.size());
}

CutoutMask make_cutout_mask(const Camera& camera, double coverage, RngStream& rng) {
  if (!(coverage >= 0.0 && coverage < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "mask coverage must lie in [0, 1)");
  }
  CutoutMask mask;
  mask.width = camera.width;
  mask.height = camera.height;
  const std::size_t total = static_cast<std::size_t>(mask.width) * mask.height;
  mask.covered.assign(total, 0);
  constexpr double kBand = 0.01;
  if (coverage <= kBand) return mask;

  const double lo = (coverage - kBand) * total, hi = (coverage + kBand) * total;
  constexpr int kAttempts = 20000;
  std::size_t count = 0;
  for (int attempt = 0; attempt < kAttempts && count < lo; ++attempt) {
    const double area = rng.uniform(0.05, 0.15) * total;
    const double aspect = std::exp(rng.uniform(std::log(0.5), std::log(2.0)));
    const int w = std::clamp(static_cast<int>(std::lround(std::sqrt(area * aspect))), 1, mask.width);
    const int h = std::clamp(static_cast<int>(std::lround(area / w)), 1, mask.height);
    const int x = static_cast<int>(rng.below(mask.width - w + 1));
    const int y = static_cast<int>(rng.below(mask.height - h + 1));
    std::size_t fresh = 0;
    for (int j = y; j < y + h; ++j) {
      for (int i = x; i < x + w; ++i) fresh += mask.covered[static_cast<std::size_t>(j) * mask.width + i] == 0;
    }
    if (count + fresh > hi) continue;
    for (int j = y; j < y + h; ++j) {
      std::fill_n(mask.covered.begin() + static_cast<std::ptrdiff_t>(j) * mask.width + x, w, 1);
    }
    mask.rects.push_back({x, y, w, h});
    count += fresh;
  }
  if (count < lo) throw Error(ErrorCode::InvalidArgument, "could not reach mask coverage");
  return mask;
}

double exposure_gain(RngStream& rng) {
  return std::exp(rng.uniform(std::log(0.8), std::log(1.25)));
}

namespace {

const Vec3 kLightA = Vec3(0.4, 0.5, 0.77).normalized();
const Vec3 kLightB = Vec3(-0.6, -0.3, 0.2).normalized();
constexpr double kIntensityA = 0.75, kIntensityB = 0.35, kAmbient = 0.08;
constexpr std::array<double, 3> kAlbedo{0.86, 0.74, 0.62};

}  // namespace

PixelBuffer render_correspondence(const Mesh& mesh, const TriangleBvh& tree, const Camera& camera,
                                  const CutoutMask* mask, double exposure) {
  PixelBuffer buf;
  buf.width = camera.width;
  buf.height = camera.height;
  const std::size_t n = static_cast<std::size_t>(buf.width) * buf.height;
  buf.face.assign(n, ElementId{});
  buf.barycentric.assign(n, {0.0, 0.0});
  buf.depth.assign(n, std::numeric_limits<double>::infinity());
  buf.masked.assign(n, 0);
  buf.rgb.assign(3 * n, 0);
  const bool empty = tree.faces.empty();
  for (int y = 0; y < buf.height; ++y) {
    for (int x = 0; x < buf.width; ++x) {
      const std::size_t i = buf.index(x, y);
      if (mask && mask->masked(x, y)) {
        buf.masked[i] = 1;
        continue;
      }
      if (empty) continue;
      const Vec3 dir = camera.ray_direction(x, y);
      const auto hit = raycast(mesh, tree, camera.position, dir);
      if (!hit) continue;
      buf.face[i] = hit->face;
      buf.barycentric[i] = {hit->barycentric[0], hit->barycentric[1]};
      buf.depth[i] = hit->t;
      const Vec3 normal = face_area_vector(mesh, hit->face_slot).normalized();
      const double shade = kAmbient + kIntensityA * std::abs(normal.dot(kLightA)) +
                           kIntensityB * std::abs(normal.dot(kLightB));
      for (int c = 0; c < 3; ++c) {
        const double value = 255.0 * exposure * shade * kAlbedo[c];
        buf.rgb[3 * i + c] = static_cast<std::uint8_t>(std::lround(std::clamp(value, 0.0, 255.0)));
      }
    }
  }
  return buf;
}

LidarPose default_lidar_pose(double distance) {
  LidarPose pose;
  pose.position = Vec3(0.0, 0.0, distance);
  pose.forward = -Vec3::UnitZ();
  pose.up = Vec3::UnitY();
  return pose;
}

Vec3 lidar_beam_direction(const LidarPose& pose, const LidarConfig& cfg, int row, int col) {
  const double elevation =
      cfg.rows > 1 ? cfg.min_elevation + (cfg.max_elevation - cfg.min_elevation) * row / (cfg.rows - 1)
                   : 0.5 * (cfg.min_elevation + cfg.max_elevation);
  const double azimuth = 2.0 * std::numbers::pi * col / cfg.cols;
  const Vec3 right = pose.forward.cross(pose.up);
  return std::cos(elevation) * (std::cos(azimuth) * pose.forward + std::sin(azimuth) * right) +
         std::sin(elevation) * pose.up;
}

int nearest_corner(const Mesh& mesh, int face, const Vec3& p) {
  const auto& c = mesh.face(face).v;
  int best = c[0];
  double best_d = (mesh.position(c[0]) - p).squaredNorm();
  for (int k = 1; k < 3; ++k) {
    const double d = (mesh.position(c[k]) - p).squaredNorm();
    if (d < best_d || (d == best_d && mesh.vertex_id(c[k]) < mesh.vertex_id(best))) {
      best = c[k];
      best_d = d;
    }
  }
  return best;
}

LidarScan lidar_scan(const Mesh& mesh, const TriangleBvh& tree, const LidarPose& pose,
                     std::uint64_t seed, std::uint64_t frame, const LidarConfig& cfg) {
  LidarScan scan;
  scan.rows = cfg.rows;
  scan.cols = cfg.cols;
  scan.beams.resize(static_cast<std::size_t>(cfg.rows) * cfg.cols);
  if (tree.faces.empty()) return scan;
  for (int r = 0; r < cfg.rows; ++r) {
    for (int c = 0; c < cfg.cols; ++c) {
      const std::size_t i = static_cast<std::size_t>(r) * cfg.cols + c;
      auto& beam = scan.beams[i];
      const auto hit = raycast(mesh, tree, pose.position, lidar_beam_direction(pose, cfg, r, c));
      if (!hit) continue;
      beam.hit = true;
      beam.face = hit->face;
      beam.barycentric = hit->barycentric;
      beam.true_point = hit->point;
      RngStream rng(seed, Purpose::Lidar, frame, i);
      if (rng.uniform() < cfg.dropout) continue;
      beam.valid = true;
      beam.nearest_vertex = mesh.vertex_id(nearest_corner(mesh, hit->face_slot, hit->point));
      const Vec3 noise(rng.normal(), rng.normal(), rng.normal());
      const Vec3 p = hit->point + cfg.noise_sigma * noise;
      beam.point = {static_cast<float>(p.x()), static_cast<float>(p.y()), static_cast<float>(p.z())};
    }
  }
  return scan;
}

}  // namespace surfgrow
