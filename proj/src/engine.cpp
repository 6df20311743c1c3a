#include "engine.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

#include "error.hpp"
#include "seeds.hpp"

namespace surfgrow {

void SensorConfig::check() const {
  if (cameras < 1) throw Error(ErrorCode::InvalidArgument, "sensors need at least one camera");
  if (width < 1 || height < 1) throw Error(ErrorCode::InvalidArgument, "image size must be positive");
  if (!(rig_radius_factor > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "rig radius factor must be positive");
  }
  if (!(cutout >= 0.0 && cutout < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "cutout coverage must lie in [0, 1)");
  }
  if (lidar_config.rows < 1 || lidar_config.cols < 1) {
    throw Error(ErrorCode::InvalidArgument, "lidar pattern must be non-empty");
  }
}

void SequenceConfig::check() const {
  if (frames < 1) throw Error(ErrorCode::InvalidArgument, "frames must be at least 1");
  if (seed_vertices < minimal_seed_size(topology)) {
    throw Error(ErrorCode::InvalidArgument, "seed_vertices below the minimum for the class");
  }
  if (sensor_every < 1) throw Error(ErrorCode::InvalidArgument, "sensor_every must be at least 1");
  if (odt_iterations < 0) throw Error(ErrorCode::InvalidArgument, "odt_iterations must be >= 0");
  if (!(perturbation_amplitude >= 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "perturbation amplitude must be non-negative");
  }
  material.check();
  solver.check();
  growth.check();
  collision.check();
  sensors.check();
}

std::vector<ParamOverride> parse_overrides(const std::string& text) {
  std::vector<ParamOverride> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == item.size()) {
      throw Error(ErrorCode::InvalidArgument, "override must look like name=value or name=*factor");
    }
    ParamOverride o;
    o.param = item.substr(0, eq);
    if (o.param != "k_stretch" && o.param != "k_shear" && o.param != "k_bend") {
      throw Error(ErrorCode::InvalidArgument, "unknown override parameter " + o.param);
    }
    std::string value = item.substr(eq + 1);
    if (value[0] == '*') {
      o.scale = true;
      value.erase(0, 1);
    }
    std::size_t used = 0;
    try {
      o.value = std::stod(value, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != value.size()) {
      throw Error(ErrorCode::InvalidArgument, "bad override value in " + item);
    }
    out.push_back(o);
  }
  if (out.empty()) throw Error(ErrorCode::InvalidArgument, "empty override");
  return out;
}

MaterialParams apply_overrides(MaterialParams params, const std::vector<ParamOverride>& overrides) {
  for (const auto& o : overrides) {
    double& slot = o.param == "k_stretch" ? params.k_stretch
                   : o.param == "k_shear" ? params.k_shear
                                          : params.k_bend;
    slot = o.scale ? slot * o.value : o.value;
  }
  params.check();
  return params;
}

double bounding_radius(const Mesh& mesh) {
  Vec3 c = Vec3::Zero();
  for (const Vec3& p : mesh.positions()) c += p;
  c /= std::max(1, mesh.vertex_count());
  double r = 0.0;
  for (const Vec3& p : mesh.positions()) r = std::max(r, (p - c).norm());
  return r;
}

namespace {

bool faces_consistent(const Mesh& mesh, const std::vector<Vec3>& reference) {
  for (int f = 0; f < mesh.face_slots(); ++f) {
    if (!mesh.face_alive(f)) continue;
    const Vec3 a = face_area_vector(mesh, f);
    if (a.norm() < kMinFaceArea || a.dot(reference[f]) <= 0.0) return false;
  }
  return true;
}

}  // namespace

double apply_initial_perturbation(Mesh& mesh, RngStream& rng, double amplitude) {
  const double u1 = rng.uniform(), u2 = rng.uniform(), u3 = rng.uniform();
  const double tau = 2.0 * std::numbers::pi;
  const Eigen::Quaterniond q(std::sqrt(u1) * std::cos(tau * u3), std::sqrt(1.0 - u1) * std::sin(tau * u2),
                             std::sqrt(1.0 - u1) * std::cos(tau * u2), std::sqrt(u1) * std::sin(tau * u3));
  const Eigen::Matrix3d rot = q.normalized().toRotationMatrix();
  for (Vec3& p : mesh.positions()) p = rot * p;

  const double radius = bounding_radius(mesh);
  struct Mode {
    Vec3 k, a;
    double phase;
  };
  std::array<Mode, 3> modes;
  auto unit = [&] {
    Vec3 d(rng.normal(), rng.normal(), rng.normal());
    return d.normalized();
  };
  for (auto& m : modes) {
    m.k = unit() * (rng.uniform(0.5, 1.5) * std::numbers::pi / std::max(radius, 1e-12));
    m.a = unit() / 3.0;
    m.phase = rng.uniform(0.0, tau);
  }

  std::vector<Vec3> reference(mesh.face_slots(), Vec3::Zero());
  for (int f = 0; f < mesh.face_slots(); ++f) {
    if (mesh.face_alive(f)) reference[f] = face_area_vector(mesh, f);
  }
  const std::vector<Vec3> rotated(mesh.positions().begin(), mesh.positions().end());
  double amp = amplitude;
  for (int attempt = 0; attempt <= 3; ++attempt, amp *= 0.5) {
    for (int v = 0; v < mesh.vertex_count(); ++v) {
      Vec3 d = Vec3::Zero();
      for (const auto& m : modes) d += m.a * std::sin(m.k.dot(rotated[v]) + m.phase);
      mesh.position(v) = rotated[v] + amp * radius * d;
    }
    if (faces_consistent(mesh, reference)) {
      for (int e = 0; e < mesh.edge_slots(); ++e) {
        if (!mesh.edge_alive(e)) continue;
        const double len = mesh.edge_length(e);
        mesh.set_rest_lengths(e, len, len);
      }
      return amp;
    }
  }
  std::copy(rotated.begin(), rotated.end(), mesh.positions().begin());
  throw Error(ErrorCode::InvalidMesh, "initial perturbation degenerates a face");
}

Sequence::Sequence(const SequenceConfig& config) : config_(config) {
  config_.check();
  rng_seed_ = config_.seed;
  RngStream seed_rng(config_.seed, Purpose::SeedMesh);
  mesh_ = seed_mesh(config_.topology, config_.seed_vertices, seed_rng, &log_);
  RngStream perturb(config_.seed, Purpose::Perturbation);
  apply_initial_perturbation(mesh_, perturb, config_.perturbation_amplitude);
  RngStream src(config_.seed, Purpose::SourceSet);
  sources_ = select_source_set(mesh_, src, config_.growth.source_fraction);
  field_ = compute_growth_field(mesh_, sources_);

  if (config_.sensors.enabled) {
    RngStream rig_rng(config_.seed, Purpose::CameraRig);
    const double radius = config_.sensors.rig_radius_factor * bounding_radius(mesh_);
    rig_ = fibonacci_rig(config_.sensors.cameras, radius, rig_rng, config_.sensors.width,
                         config_.sensors.height);
    for (int k = 0; k < config_.sensors.cameras; ++k) {
      RngStream mask_rng(config_.seed, Purpose::CutoutMask, 0, static_cast<std::uint64_t>(k));
      masks_.push_back(make_cutout_mask(rig_.cameras[k], config_.sensors.cutout, mask_rng));
    }
  }

  annotations_.frame = 0;
  annotate(0, 0, FrameFlags{});
  capture_sensors();
}

Sequence::Sequence(const Sequence& other)
    : config_(other.config_),
      mesh_(other.mesh_),
      log_(other.log_),
      field_(other.field_),
      sources_(other.sources_),
      rig_(other.rig_),
      masks_(other.masks_),
      annotations_(other.annotations_),
      sensors_(other.sensors_),
      frame_(other.frame_),
      split_last_(other.split_last_),
      branch_(other.branch_),
      rng_seed_(other.rng_seed_) {
  mesh_.set_lineage_sink(&log_);
}

Sequence Sequence::fork(unsigned index, const MaterialParams& material) const {
  material.check();
  Sequence s(*this);
  s.config_.material = material;
  s.branch_ = index;
  s.rng_seed_ = fork_seed(config_.seed, index);
  s.mesh_.ids().set_branch(index);
  return s;
}

double Sequence::sim_time() const noexcept {
  return frame_ * config_.solver.substeps_per_frame * config_.solver.dt;
}

void Sequence::step() {
  const int frame = ++frame_;
  const auto& growth = config_.growth;
  FrameFlags flags;

  if (split_last_ || frame % 10 == 0) field_ = compute_growth_field(mesh_, sources_);
  if (growth.max_vertices == 0 || mesh_.vertex_count() < growth.max_vertices) {
    update_rest_lengths(mesh_, field_, growth);
  }
  const auto splits = split_pass(mesh_, growth, frame);
  extend_growth_field(field_, mesh_, splits.inserted);
  split_last_ = splits.splits > 0;
  const auto flips = delaunay_flip_pass(mesh_, frame);
  flags.flip_non_termination = flips.non_termination;
  if (config_.odt_iterations > 0) odt_smooth_pass(mesh_, config_.odt_iterations, config_.odt_resample);

  const auto relax = relax_frame(mesh_, config_.material, config_.solver);
  flags.step_failure = relax.failed_steps > 0;

  if (config_.collisions) {
    const auto col = resolve_collisions(mesh_, config_.collision);
    flags.unresolved_collision = col.unresolved;
  }

  annotations_ = FrameAnnotations{};
  annotations_.frame = frame;
  annotate(splits.splits, flips.flips, flags);
  capture_sensors();
}

void Sequence::annotate(int splits, int flips, const FrameFlags& flags) {
  PerVertexEnergies pv;
  annotations_.energy = evaluate_energy(mesh_, config_.material, nullptr, &pv);
  annotations_.splits = splits;
  annotations_.flips = flips;
  annotations_.flags = flags;
  annotations_.vertices.clear();
  annotations_.vertices.reserve(mesh_.vertex_count());
  for (int v = 0; v < mesh_.vertex_count(); ++v) {
    annotations_.vertices.push_back({mesh_.vertex_id(v), mesh_.position(v), field_.g[v],
                                     pv.w_memb[v], pv.w_flex[v], mesh_.vertex_birth(v)});
  }
  std::sort(annotations_.vertices.begin(), annotations_.vertices.end(),
            [](const VertexAnnotation& a, const VertexAnnotation& b) { return a.id < b.id; });
}

void Sequence::capture_sensors() {
  sensors_.reset();
  if (!config_.sensors.enabled || frame_ % config_.sensor_every != 0) return;
  SensorFrame out;
  const auto tree = build_triangle_bvh(mesh_);
  for (std::size_t k = 0; k < rig_.cameras.size(); ++k) {
    RngStream rng(rng_seed_, Purpose::Exposure, static_cast<std::uint64_t>(frame_), k);
    const double gain = exposure_gain(rng);
    out.exposures.push_back(gain);
    out.views.push_back(render_correspondence(mesh_, tree, rig_.cameras[k], &masks_[k], gain));
  }
  if (config_.sensors.lidar) {
    out.lidar = lidar_scan(mesh_, tree, default_lidar_pose(rig_.radius), rng_seed_,
                           static_cast<std::uint64_t>(frame_), config_.sensors.lidar_config);
  }
  sensors_ = std::move(out);
}

const char* to_string(Split s) noexcept {
  switch (s) {
    case Split::Train: return "train";
    case Split::Val: return "val";
    case Split::Test: return "test";
  }
  return "?";
}

std::map<std::string, Split> assign_splits(const std::vector<std::string>& ids,
                                           const std::vector<std::string>& groups,
                                           std::uint64_t seed) {
  if (ids.empty()) throw Error(ErrorCode::InvalidArgument, "no sequences to split");
  if (!groups.empty() && groups.size() != ids.size()) {
    throw Error(ErrorCode::InvalidArgument, "one group name per sequence id is required");
  }
  std::map<std::string, std::vector<std::string>> members;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    members[groups.empty() ? ids[i] : groups[i]].push_back(ids[i]);
  }
  std::vector<const std::vector<std::string>*> order;
  for (const auto& [name, list] : members) order.push_back(&list);
  RngStream rng(seed, Purpose::Splits);
  for (std::size_t i = order.size(); i > 1; --i) {
    std::swap(order[i - 1], order[rng.below(i)]);
  }
  const std::size_t n = ids.size();
  const std::size_t n_train = n * 8 / 10, n_val = n / 10;
  std::size_t train = 0, val = 0;
  std::map<std::string, Split> out;
  for (const auto* list : order) {
    Split s = Split::Test;
    if (train + list->size() <= n_train) {
      s = Split::Train;
      train += list->size();
    } else if (val + list->size() <= n_val) {
      s = Split::Val;
      val += list->size();
    }
    for (const auto& id : *list) {
      if (!out.emplace(id, s).second) {
        throw Error(ErrorCode::InvalidArgument, "duplicate sequence id " + id);
      }
    }
  }
  return out;
}

std::vector<MaterialParams> sample_material_grid(int n, RngStream& rng) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "material grid needs n >= 1");
  const double lo = std::log(0.01);
  std::vector<MaterialParams> out;
  for (int i = 0; i < n; ++i) {
    MaterialParams p;
    p.k_stretch = std::exp(rng.uniform(lo, 0.0));
    p.k_shear = std::exp(rng.uniform(lo, 0.0));
    p.k_bend = std::exp(rng.uniform(lo, 0.0));
    out.push_back(p);
  }
  return out;
}

}  // namespace surfgrow
