#include "dataset.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>
#include <unordered_set>

#include "error.hpp"
#include "growth.hpp"

namespace surfgrow {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// ---------------------------------------------------------------------------
// Config schema

[[noreturn]] void schema_error(const std::string& what) {
  throw Error(ErrorCode::InvalidArgument, "config: " + what);
}

void allow_keys(const json& j, std::initializer_list<const char*> keys, const char* where) {
  if (!j.is_object()) schema_error(std::string(where) + " must be an object");
  for (const auto& [k, v] : j.items()) {
    if (std::none_of(keys.begin(), keys.end(), [&](const char* x) { return k == x; })) {
      schema_error("unknown key '" + k + "' in " + where);
    }
  }
}

template <class T>
void read_key(const json& j, const char* key, T& out) {
  auto it = j.find(key);
  if (it == j.end()) return;
  try {
    if constexpr (std::is_same_v<T, bool>) {
      if (!it->is_boolean()) schema_error(std::string(key) + " must be a boolean");
    } else if constexpr (std::is_integral_v<T>) {
      if (!it->is_number_integer()) schema_error(std::string(key) + " must be an integer");
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!it->is_number()) schema_error(std::string(key) + " must be a number");
    }
    out = it->get<T>();
  } catch (const json::exception& e) {
    schema_error(std::string(key) + ": " + e.what());
  }
}

TopologyClass topology_from(const json& j) {
  if (!j.is_string()) schema_error("topology must be a string");
  auto c = parse_topology(j.get<std::string>());
  if (!c) schema_error("unknown topology '" + j.get<std::string>() + "'");
  return *c;
}

json material_json(const MaterialParams& m) {
  return {{"k_stretch", m.k_stretch}, {"k_shear", m.k_shear}, {"k_bend", m.k_bend}};
}

MaterialParams material_from(const json& j, MaterialParams m = {}) {
  if (j.is_array()) {
    if (j.size() != 3) schema_error("material arrays hold [k_stretch, k_shear, k_bend]");
    for (const auto& x : j) {
      if (!x.is_number()) schema_error("material values must be numbers");
    }
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
  }
  allow_keys(j, {"k_stretch", "k_shear", "k_bend"}, "material");
  read_key(j, "k_stretch", m.k_stretch);
  read_key(j, "k_shear", m.k_shear);
  read_key(j, "k_bend", m.k_bend);
  return m;
}

std::string format_double(double v) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::string format_override(const ParamOverride& o) {
  return o.param + "=" + (o.scale ? "*" : "") + format_double(o.value);
}

std::string format_overrides(const std::vector<ParamOverride>& list) {
  std::string out;
  for (const auto& o : list) {
    if (!out.empty()) out += ',';
    out += format_override(o);
  }
  return out;
}

const char* kSequenceKeys[] = {"topology", "seed_vertices", "material", "frames", "solver",
                               "growth", "collision", "collisions", "odt_iterations",
                               "odt_resample", "perturbation_amplitude", "sensors",
                               "sensor_every", "seed"};

void read_sequence_keys(const json& j, SequenceConfig& c) {
  if (j.contains("topology")) c.topology = topology_from(j["topology"]);
  read_key(j, "seed_vertices", c.seed_vertices);
  if (j.contains("material")) c.material = material_from(j["material"], c.material);
  read_key(j, "frames", c.frames);
  if (j.contains("solver")) {
    const auto& s = j["solver"];
    allow_keys(s, {"dt", "substeps_per_frame", "max_step_halvings"}, "solver");
    read_key(s, "dt", c.solver.dt);
    read_key(s, "substeps_per_frame", c.solver.substeps_per_frame);
    read_key(s, "max_step_halvings", c.solver.max_step_halvings);
  }
  if (j.contains("growth")) {
    const auto& g = j["growth"];
    allow_keys(g, {"gamma", "split_factor", "source_fraction", "max_vertices", "min_rest_slack"},
               "growth");
    read_key(g, "gamma", c.growth.gamma);
    read_key(g, "split_factor", c.growth.split_factor);
    read_key(g, "source_fraction", c.growth.source_fraction);
    read_key(g, "max_vertices", c.growth.max_vertices);
    read_key(g, "min_rest_slack", c.growth.min_rest_slack);
  }
  if (j.contains("collision")) {
    const auto& k = j["collision"];
    allow_keys(k, {"tangential_factor", "normal_ratio", "max_iterations", "separation_margin"},
               "collision");
    read_key(k, "tangential_factor", c.collision.tangential_factor);
    read_key(k, "normal_ratio", c.collision.normal_ratio);
    read_key(k, "max_iterations", c.collision.max_iterations);
    read_key(k, "separation_margin", c.collision.separation_margin);
  }
  read_key(j, "collisions", c.collisions);
  read_key(j, "odt_iterations", c.odt_iterations);
  read_key(j, "odt_resample", c.odt_resample);
  read_key(j, "perturbation_amplitude", c.perturbation_amplitude);
  if (j.contains("sensors")) {
    const auto& s = j["sensors"];
    allow_keys(s, {"enabled", "cameras", "width", "height", "rig_radius_factor", "cutout", "lidar",
                   "png", "lidar_config"},
               "sensors");
    read_key(s, "enabled", c.sensors.enabled);
    read_key(s, "cameras", c.sensors.cameras);
    read_key(s, "width", c.sensors.width);
    read_key(s, "height", c.sensors.height);
    read_key(s, "rig_radius_factor", c.sensors.rig_radius_factor);
    read_key(s, "cutout", c.sensors.cutout);
    read_key(s, "lidar", c.sensors.lidar);
    read_key(s, "png", c.sensors.png);
    if (s.contains("lidar_config")) {
      const auto& l = s["lidar_config"];
      auto& lc = c.sensors.lidar_config;
      allow_keys(l, {"rows", "cols", "min_elevation", "max_elevation", "dropout", "noise_sigma"},
                 "lidar_config");
      read_key(l, "rows", lc.rows);
      read_key(l, "cols", lc.cols);
      read_key(l, "min_elevation", lc.min_elevation);
      read_key(l, "max_elevation", lc.max_elevation);
      read_key(l, "dropout", lc.dropout);
      read_key(l, "noise_sigma", lc.noise_sigma);
    }
  }
  read_key(j, "sensor_every", c.sensor_every);
  read_key(j, "seed", c.seed);
}

json config_json(const SequenceConfig& c) {
  const auto& lc = c.sensors.lidar_config;
  return {
      {"topology", to_string(c.topology)},
      {"seed_vertices", c.seed_vertices},
      {"material", material_json(c.material)},
      {"frames", c.frames},
      {"solver",
       {{"dt", c.solver.dt},
        {"substeps_per_frame", c.solver.substeps_per_frame},
        {"max_step_halvings", c.solver.max_step_halvings}}},
      {"growth",
       {{"gamma", c.growth.gamma},
        {"split_factor", c.growth.split_factor},
        {"source_fraction", c.growth.source_fraction},
        {"max_vertices", c.growth.max_vertices},
        {"min_rest_slack", c.growth.min_rest_slack}}},
      {"collision",
       {{"tangential_factor", c.collision.tangential_factor},
        {"normal_ratio", c.collision.normal_ratio},
        {"max_iterations", c.collision.max_iterations},
        {"separation_margin", c.collision.separation_margin}}},
      {"collisions", c.collisions},
      {"odt_iterations", c.odt_iterations},
      {"odt_resample", c.odt_resample},
      {"perturbation_amplitude", c.perturbation_amplitude},
      {"sensors",
       {{"enabled", c.sensors.enabled},
        {"cameras", c.sensors.cameras},
        {"width", c.sensors.width},
        {"height", c.sensors.height},
        {"rig_radius_factor", c.sensors.rig_radius_factor},
        {"cutout", c.sensors.cutout},
        {"lidar", c.sensors.lidar},
        {"png", c.sensors.png},
        {"lidar_config",
         {{"rows", lc.rows},
          {"cols", lc.cols},
          {"min_elevation", lc.min_elevation},
          {"max_elevation", lc.max_elevation},
          {"dropout", lc.dropout},
          {"noise_sigma", lc.noise_sigma}}}}},
      {"sensor_every", c.sensor_every},
      {"seed", c.seed},
  };
}

SequenceConfig sequence_config_from(const json& j) {
  SequenceConfig c;
  if (!j.is_object()) schema_error("sequence config must be an object");
  for (const auto& [k, v] : j.items()) {
    if (std::find_if(std::begin(kSequenceKeys), std::end(kSequenceKeys),
                     [&](const char* x) { return k == x; }) == std::end(kSequenceKeys)) {
      schema_error("unknown key '" + k + "'");
    }
  }
  read_sequence_keys(j, c);
  return c;
}

json parse_json(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Format, what + ": " + e.what());
  }
}

std::string text_of(const std::vector<std::uint8_t>& bytes) {
  return std::string(bytes.begin(), bytes.end());
}

std::uint64_t checksum_of(std::span<const std::uint8_t> bytes) { return fnv1a(bytes); }

// ---------------------------------------------------------------------------
// Writing sequences

std::string frame_name(int frame) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "frame_%05d", frame);
  return buf;
}

json flags_json(const FrameFlags& f) {
  json out = json::array();
  if (f.step_failure) out.push_back("step_failure");
  if (f.unresolved_collision) out.push_back("unresolved_collision");
  if (f.flip_non_termination) out.push_back("flip_non_termination");
  return out;
}

struct BranchInfo {
  unsigned index = 0;
  int branch_frame = 0;
  MaterialParams prefix_material;
  std::vector<ParamOverride> overrides;
};

class SequenceWriter {
 public:
  explicit SequenceWriter(fs::path dir) : dir_(std::move(dir)) { fs::create_directories(dir_); }

  void write(const Sequence& s) {
    const int t = s.frame();
    const std::string rel = "frames/" + frame_name(t) + ".sgm";
    const auto bytes = encode_frame(make_frame_data(s.mesh(), s.annotations(), s.sim_time()));
    write_file(dir_ / rel, bytes);
    const auto& a = s.annotations();
    json rec = {
        {"frame", t},
        {"file", rel},
        {"checksum", hex64(checksum_of(bytes))},
        {"vertices", s.mesh().vertex_count()},
        {"faces", s.mesh().face_count()},
        {"edges", s.mesh().edge_count()},
        {"splits", a.splits},
        {"flips", a.flips},
        {"sim_time", s.sim_time()},
        {"energy",
         {{"stretch", a.energy.stretch},
          {"shear", a.energy.shear},
          {"membrane", a.energy.membrane},
          {"flexural", a.energy.flexural},
          {"total", a.energy.total}}},
        {"flags", flags_json(a.flags)},
    };
    if (s.sensors()) {
      const auto& sf = *s.sensors();
      const std::string sdir = "sensors/" + frame_name(t) + "/";
      json files = json::array();
      auto put = [&](const std::string& name, const std::vector<std::uint8_t>& data) {
        write_file(dir_ / (sdir + name), data);
        files.push_back({{"file", sdir + name}, {"checksum", hex64(checksum_of(data))}});
      };
      for (std::size_t k = 0; k < sf.views.size(); ++k) {
        const auto& v = sf.views[k];
        const std::string stem = "cam" + std::to_string(k);
        if (s.config().sensors.png) put(stem + ".png", encode_png(v.width, v.height, v.rgb));
        put(stem + ".sgcb", encode_correspondence(v));
      }
      if (sf.lidar) put("lidar.sgpc", encode_point_cloud(*sf.lidar));
      rec["sensor_files"] = std::move(files);
      rec["exposures"] = sf.exposures;
    }
    frames_.push_back(std::move(rec));
  }

  /// Copies the first `count` frames of another writer, files and records.
  void copy_prefix(const SequenceWriter& from, int count) {
    for (int t = 0; t < count; ++t) {
      const json& rec = from.frames_.at(t);
      copy_one(from, rec["file"].get<std::string>());
      if (rec.contains("sensor_files")) {
        for (const auto& f : rec["sensor_files"]) copy_one(from, f["file"].get<std::string>());
      }
      frames_.push_back(rec);
    }
  }

  void finish(const Sequence& s, const SequenceMeta& meta, const std::optional<BranchInfo>& branch) {
    const auto lineage = encode_lineage(s.lineage());
    write_file(dir_ / "lineage.sgln", lineage);
    const auto sig = expected_signature(s.config().topology);
    json flag_counts = {{"step_failure", 0}, {"unresolved_collision", 0},
                        {"flip_non_termination", 0}};
    for (const auto& rec : frames_) {
      for (const auto& f : rec["flags"]) flag_counts[f.get<std::string>()] =
          flag_counts[f.get<std::string>()].get<int>() + 1;
    }
    json m = {
        {"format", "surfgrow-sequence"},
        {"version", 1},
        {"id", meta.id},
        {"group", meta.group},
        {"config", config_json(s.config())},
        {"seed", s.config().seed},
        {"rng_seed", s.rng_seed()},
        {"signature",
         {{"euler_characteristic", sig.euler_characteristic},
          {"boundary_loops", sig.boundary_loops},
          {"orientable", sig.orientable}}},
        {"frames", frames_},
        {"flag_counts", flag_counts},
        {"lineage", {{"file", "lineage.sgln"}, {"checksum", hex64(checksum_of(lineage))}}},
    };
    if (meta.split) m["split"] = to_string(*meta.split);
    if (branch) {
      m["branch"] = {
          {"index", branch->index},
          {"branch_frame", branch->branch_frame},
          {"parent", branch->index == 0 ? json(nullptr) : json("baseline")},
          {"prefix_material", material_json(branch->prefix_material)},
          {"overrides", format_overrides(branch->overrides)},
      };
    }
    write_text(dir_ / "manifest.json", m.dump(1) + "\n");
  }

 private:
  void copy_one(const SequenceWriter& from, const std::string& rel) {
    write_file(dir_ / rel, read_file(from.dir_ / rel));
  }

  fs::path dir_;
  std::vector<json> frames_;
};

}  // namespace

// ---------------------------------------------------------------------------
// Config

void DatasetConfig::check() const {
  base.check();
  if (seeds_per_cell < 1) schema_error("seeds_per_cell must be at least 1");
  if (material_samples < 0) schema_error("material_samples must be non-negative");
  for (const auto& m : materials) m.check();
  if (branch) {
    if (branch->branch_frame < 1 || branch->branch_frame >= base.frames) {
      schema_error("branch frame must lie in [1, frames)");
    }
    for (const auto& b : branch->branches) apply_overrides(base.material, b);
  }
}

std::vector<MaterialParams> DatasetConfig::material_grid() const {
  if (material_samples > 0) {
    RngStream rng(base.seed, Purpose::Materials);
    return sample_material_grid(material_samples, rng);
  }
  if (materials.empty()) return {base.material};
  return materials;
}

DatasetConfig parse_dataset_config(const std::string& json_text) {
  const json j = parse_json(json_text, "config");
  DatasetConfig c;
  if (!j.is_object()) schema_error("top level must be an object");
  static const std::set<std::string> extra = {"topologies", "materials", "material_samples",
                                              "seeds_per_cell", "branch", "split_seed"};
  json seq = json::object();
  for (const auto& [k, v] : j.items()) {
    if (extra.count(k) == 0) seq[k] = v;
  }
  c.base = sequence_config_from(seq);
  if (j.contains("topologies")) {
    if (!j["topologies"].is_array()) schema_error("topologies must be an array");
    for (const auto& t : j["topologies"]) c.topologies.push_back(topology_from(t));
  }
  if (j.contains("materials")) {
    if (!j["materials"].is_array()) schema_error("materials must be an array");
    for (const auto& m : j["materials"]) c.materials.push_back(material_from(m));
  }
  read_key(j, "material_samples", c.material_samples);
  read_key(j, "seeds_per_cell", c.seeds_per_cell);
  if (j.contains("split_seed")) {
    std::uint64_t s = 0;
    read_key(j, "split_seed", s);
    c.split_seed = s;
  }
  if (j.contains("branch")) {
    const auto& b = j["branch"];
    allow_keys(b, {"at_frame", "overrides"}, "branch");
    BranchSpec spec;
    read_key(b, "at_frame", spec.branch_frame);
    if (b.contains("overrides")) {
      if (!b["overrides"].is_array()) schema_error("branch overrides must be an array of strings");
      for (const auto& o : b["overrides"]) {
        if (!o.is_string()) schema_error("branch overrides must be strings");
        spec.branches.push_back(parse_overrides(o.get<std::string>()));
      }
    }
    c.branch = std::move(spec);
  }
  c.check();
  return c;
}

DatasetConfig load_dataset_config(const fs::path& path) {
  return parse_dataset_config(text_of(read_file(path)));
}

std::string sequence_config_json(const SequenceConfig& config) {
  return config_json(config).dump(1);
}

// ---------------------------------------------------------------------------
// Running

void run_sequence(const SequenceConfig& config, const fs::path& dir, const SequenceMeta& meta) {
  config.check();
  Sequence s(config);
  SequenceWriter w(dir);
  w.write(s);
  while (s.frame() + 1 < config.frames) {
    s.step();
    w.write(s);
  }
  w.finish(s, meta, std::nullopt);
}

void run_branches(const SequenceConfig& config, const BranchSpec& spec, const fs::path& root,
                  const std::string& group, const std::map<std::string, Split>& splits) {
  config.check();
  if (spec.branch_frame < 1 || spec.branch_frame >= config.frames) {
    throw Error(ErrorCode::InvalidArgument, "branch frame must lie in [1, frames)");
  }
  const std::string prefix = group.empty() ? "" : group + "/";
  auto meta_for = [&](const std::string& name) {
    SequenceMeta m{prefix + name, group.empty() ? "root" : group, std::nullopt};
    if (auto it = splits.find(m.id); it != splits.end()) m.split = it->second;
    return m;
  };

  auto base = std::make_unique<Sequence>(config);
  std::vector<std::unique_ptr<Sequence>> seqs;
  std::vector<std::unique_ptr<SequenceWriter>> writers;
  writers.push_back(std::make_unique<SequenceWriter>(root / "baseline"));
  writers[0]->write(*base);
  while (base->frame() + 1 < spec.branch_frame) {
    base->step();
    writers[0]->write(*base);
  }
  seqs.push_back(std::move(base));
  for (std::size_t i = 0; i < spec.branches.size(); ++i) {
    const unsigned index = static_cast<unsigned>(i + 1);
    seqs.push_back(std::make_unique<Sequence>(
        seqs[0]->fork(index, apply_overrides(config.material, spec.branches[i]))));
    writers.push_back(
        std::make_unique<SequenceWriter>(root / ("branch_" + std::to_string(index))));
    writers.back()->copy_prefix(*writers[0], spec.branch_frame);
  }
  for (std::size_t i = 0; i < seqs.size(); ++i) {
    Sequence& s = *seqs[i];
    while (s.frame() + 1 < config.frames) {
      s.step();
      writers[i]->write(s);
    }
    BranchInfo info{static_cast<unsigned>(i), spec.branch_frame, config.material,
                    i == 0 ? std::vector<ParamOverride>{} : spec.branches[i - 1]};
    writers[i]->finish(s, meta_for(i == 0 ? "baseline" : "branch_" + std::to_string(i)), info);
  }
}

namespace {

struct Cell {
  std::string id;
  SequenceConfig config;
};

std::vector<Cell> expand_grid(const DatasetConfig& c) {
  std::vector<Cell> cells;
  const auto topologies =
      c.topologies.empty() ? std::vector<TopologyClass>{c.base.topology} : c.topologies;
  const auto materials = c.material_grid();
  for (auto topo : topologies) {
    for (std::size_t m = 0; m < materials.size(); ++m) {
      for (int s = 0; s < c.seeds_per_cell; ++s) {
        char buf[96];
        std::snprintf(buf, sizeof buf, "%s_m%03zu_s%d", to_string(topo), m, s);
        Cell cell{buf, c.base};
        cell.config.topology = topo;
        cell.config.material = materials[m];
        cell.config.seed = c.base.seed + static_cast<std::uint64_t>(s);
        cells.push_back(std::move(cell));
      }
    }
  }
  return cells;
}

std::vector<std::string> branch_names(const BranchSpec& spec) {
  std::vector<std::string> out{"baseline"};
  for (std::size_t i = 0; i < spec.branches.size(); ++i) out.push_back("branch_" + std::to_string(i + 1));
  return out;
}

void write_dataset_json(const fs::path& out, const DatasetConfig& config,
                        const std::vector<DatasetEntry>& entries, std::uint64_t split_seed) {
  json seqs = json::array();
  std::map<std::string, int> counts{{"train", 0}, {"val", 0}, {"test", 0}};
  for (const auto& e : entries) {
    const auto manifest = read_file(out / e.id / "manifest.json");
    seqs.push_back({{"id", e.id},
                    {"group", e.group},
                    {"split", to_string(e.split)},
                    {"manifest", e.id + "/manifest.json"},
                    {"manifest_checksum", hex64(checksum_of(manifest))}});
    ++counts[to_string(e.split)];
  }
  json topologies = json::array();
  for (auto t : config.topologies) topologies.push_back(to_string(t));
  json materials = json::array();
  for (const auto& m : config.material_grid()) materials.push_back(material_json(m));
  json d = {
      {"format", "surfgrow-dataset"},
      {"version", 1},
      {"seed", config.base.seed},
      {"split_seed", split_seed},
      {"base_config", config_json(config.base)},
      {"topologies", topologies},
      {"materials", materials},
      {"seeds_per_cell", config.seeds_per_cell},
      {"sequences", seqs},
      {"split_counts", counts},
  };
  if (config.branch) {
    json overrides = json::array();
    for (const auto& b : config.branch->branches) overrides.push_back(format_overrides(b));
    d["branch"] = {{"at_frame", config.branch->branch_frame}, {"overrides", overrides}};
  }
  write_text(out / "dataset.json", d.dump(1) + "\n");
}

}  // namespace

std::vector<DatasetEntry> generate_dataset(const DatasetConfig& config, const fs::path& out,
                                           int jobs) {
  config.check();
  const auto cells = expand_grid(config);
  std::vector<std::string> ids, groups;
  for (const auto& cell : cells) {
    if (config.branch) {
      for (const auto& name : branch_names(*config.branch)) {
        ids.push_back(cell.id + "/" + name);
        groups.push_back(cell.id);
      }
    } else {
      ids.push_back(cell.id);
      groups.push_back(cell.id);
    }
  }
  const std::uint64_t split_seed = config.split_seed.value_or(config.base.seed);
  const auto splits = assign_splits(ids, groups, split_seed);

  fs::create_directories(out);
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(cells.size());
  auto worker = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      try {
        const auto& cell = cells[i];
        if (config.branch) {
          run_branches(cell.config, *config.branch, out / cell.id, cell.id, splits);
        } else {
          run_sequence(cell.config, out / cell.id, {cell.id, cell.id, splits.at(cell.id)});
        }
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int n = std::max(1, std::min<int>(jobs, static_cast<int>(cells.size())));
  std::vector<std::thread> pool;
  for (int k = 1; k < n; ++k) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  std::vector<DatasetEntry> entries;
  for (std::size_t i = 0; i < ids.size(); ++i) entries.push_back({ids[i], groups[i], splits.at(ids[i])});
  write_dataset_json(out, config, entries, split_seed);
  return entries;
}

std::vector<DatasetEntry> branch_dataset(const DatasetConfig& config, const BranchSpec& spec,
                                         const fs::path& out) {
  DatasetConfig c = config;
  c.branch = spec;
  c.topologies.clear();
  c.materials.clear();
  c.material_samples = 0;
  c.seeds_per_cell = 1;
  c.check();
  std::vector<std::string> ids = branch_names(spec);
  const std::vector<std::string> groups(ids.size(), "root");
  const std::uint64_t split_seed = c.split_seed.value_or(c.base.seed);
  const auto splits = assign_splits(ids, groups, split_seed);
  run_branches(c.base, spec, out, "", splits);
  std::vector<DatasetEntry> entries;
  for (const auto& id : ids) entries.push_back({id, "root", splits.at(id)});
  write_dataset_json(out, c, entries, split_seed);
  return entries;
}

// ---------------------------------------------------------------------------
// Validation

FrameData read_frame_file(const fs::path& path) { return decode_frame(read_file(path)); }

namespace {

bool close_rel(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::max({std::abs(a), std::abs(b), 1e-300});
}

struct SequenceCheck {
  json manifest;
  std::vector<std::string> frame_checksums;
  int branch_frame = -1;
};

std::optional<json> load_manifest(const fs::path& file, ValidationReport& report) {
  try {
    return parse_json(text_of(read_file(file)), file.string());
  } catch (const Error& e) {
    report.problems.push_back(file.string() + ": " + e.what());
    return std::nullopt;
  }
}

std::optional<std::vector<std::uint8_t>> checked_bytes(const fs::path& dir, const json& ref,
                                                       ValidationReport& report) {
  const fs::path file = dir / ref["file"].get<std::string>();
  std::vector<std::uint8_t> bytes;
  try {
    bytes = read_file(file);
  } catch (const Error& e) {
    report.problems.push_back(file.string() + ": missing or unreadable");
    return std::nullopt;
  }
  if (hex64(checksum_of(bytes)) != ref["checksum"].get<std::string>()) {
    report.problems.push_back(file.string() + ": checksum does not match the manifest");
    return std::nullopt;
  }
  return bytes;
}

template <class T>
std::vector<ElementId> sorted_ids(const std::vector<T>& items) {
  std::vector<ElementId> out;
  out.reserve(items.size());
  for (const auto& x : items) out.push_back(x.id);
  std::sort(out.begin(), out.end());
  return out;
}

std::optional<SequenceCheck> validate_sequence(const fs::path& dir, ValidationReport& report) {
  auto problem = [&](const std::string& s) { report.problems.push_back(s); };
  auto manifest = load_manifest(dir / "manifest.json", report);
  if (!manifest) return std::nullopt;
  SequenceCheck out;
  out.manifest = *manifest;
  const json& m = *manifest;
  ++report.sequences;

  SequenceConfig config;
  MaterialParams prefix_material;
  try {
    if (m.value("format", "") != "surfgrow-sequence") throw Error(ErrorCode::Format, "not a sequence manifest");
    config = sequence_config_from(m.at("config"));
    config.check();
    prefix_material = config.material;
    if (m.contains("branch")) {
      out.branch_frame = m["branch"].at("branch_frame").get<int>();
      prefix_material = material_from(m["branch"].at("prefix_material"));
    }
  } catch (const std::exception& e) {
    problem((dir / "manifest.json").string() + ": " + e.what());
    return std::nullopt;
  }
  const TopologySignature expected = expected_signature(config.topology);
  const json& sig = m["signature"];
  if (sig.value("euler_characteristic", 0) != expected.euler_characteristic ||
      sig.value("boundary_loops", -1) != expected.boundary_loops ||
      sig.value("orientable", !expected.orientable) != expected.orientable) {
    problem((dir / "manifest.json").string() + ": signature does not match the topology class");
  }

  std::optional<LineageLog> log;
  if (auto bytes = checked_bytes(dir, m["lineage"], report)) {
    try {
      log = decode_lineage(*bytes);
    } catch (const std::exception& e) {
      problem((dir / "lineage.sgln").string() + ": " + e.what());
    }
  }

  const auto& frames = m["frames"];
  if (static_cast<int>(frames.size()) != config.frames) {
    problem((dir / "manifest.json").string() + ": expected " + std::to_string(config.frames) +
            " frames, found " + std::to_string(frames.size()));
  }
  int last_vertices = -1;
  double last_rest = -1.0;
  const double split_limit = config.growth.split_factor * (1.0 + 1e-12);
  for (std::size_t t = 0; t < frames.size(); ++t) {
    const json& rec = frames[t];
    const std::string name = (dir / rec["file"].get<std::string>()).string();
    out.frame_checksums.push_back(rec["checksum"].get<std::string>());
    auto bytes = checked_bytes(dir, rec, report);
    if (!bytes) continue;
    FrameData fd;
    Mesh mesh;
    try {
      fd = decode_frame(*bytes);
      mesh = fd.to_mesh();
    } catch (const std::exception& e) {
      problem(name + ": " + e.what());
      continue;
    }
    ++report.frames;
    const int frame = static_cast<int>(t);
    if (fd.frame != t) problem(name + ": frame index " + std::to_string(fd.frame) + " out of order");
    if (!(topology_signature(mesh) == expected)) problem(name + ": topology signature changed");
    if (mesh.vertex_count() < last_vertices) problem(name + ": vertex count decreased");
    last_vertices = mesh.vertex_count();

    for (const auto& e : fd.edges) {
      if (e.rest_length > split_limit * e.original_rest_length) {
        problem(name + ": edge over the split threshold");
        break;
      }
    }
    const double rest_total = total_rest_area(mesh);
    if (rest_total < last_rest * (1.0 - 1e-12)) problem(name + ": total rest area decreased");
    last_rest = rest_total;

    const MaterialParams& mat = (out.branch_frame >= 0 && frame < out.branch_frame) ? prefix_material
                                                                                    : config.material;
    const EnergyBreakdown energy = evaluate_energy(mesh, mat, nullptr, nullptr);
    double memb = 0.0, flex = 0.0;
    for (const auto& v : fd.vertices) {
      memb += v.w_memb;
      flex += v.w_flex;
      if (!(v.g >= 0.0 && v.g <= 1.0)) {
        problem(name + ": growth field outside [0, 1]");
        break;
      }
    }
    if (!close_rel(memb, energy.membrane, 1e-9) || !close_rel(flex, energy.flexural, 1e-9)) {
      problem(name + ": per-vertex energies do not sum to the frame energy");
    }

    if (log) {
      const std::array<std::pair<ElementKind, std::vector<ElementId>>, 3> live = {{
          {ElementKind::Vertex, sorted_ids(fd.vertices)},
          {ElementKind::Edge, sorted_ids(fd.edges)},
          {ElementKind::Face, sorted_ids(fd.faces)},
      }};
      for (const auto& [kind, ids] : live) {
        if (log->live_ids(kind, frame) != ids) {
          problem(name + ": live " + to_string(kind) + " ids disagree with the lineage log");
        }
      }
      for (const auto& v : fd.vertices) {
        const auto* r = log->find(ElementKind::Vertex, v.id);
        if (!r || r->birth_frame != static_cast<int>(v.birth_frame)) {
          problem(name + ": vertex birth frame disagrees with the lineage log");
          break;
        }
      }
    }

    if (rec.contains("sensor_files")) {
      std::unordered_set<ElementId> faces, verts;
      for (const auto& f : fd.faces) faces.insert(f.id);
      for (const auto& v : fd.vertices) verts.insert(v.id);
      for (const auto& f : rec["sensor_files"]) {
        auto sb = checked_bytes(dir, f, report);
        if (!sb) continue;
        const std::string file = f["file"].get<std::string>();
        const std::string sname = (dir / file).string();
        try {
          if (file.ends_with(".sgcb")) {
            const auto buf = decode_correspondence(*sb);
            for (const auto& id : buf.face) {
              if (id.valid() && !faces.count(id)) {
                problem(sname + ": pixel references a face missing from the frame");
                break;
              }
            }
          } else if (file.ends_with(".sgpc")) {
            const auto scan = decode_point_cloud(*sb);
            for (const auto& b : scan.beams) {
              if (b.valid && !verts.count(b.nearest_vertex)) {
                problem(sname + ": beam label references a missing vertex");
                break;
              }
            }
          }
        } catch (const std::exception& e) {
          problem(sname + ": " + e.what());
        }
      }
    }
  }
  return out;
}

void validate_dataset(const fs::path& root, ValidationReport& report) {
  auto d = load_manifest(root / "dataset.json", report);
  if (!d) return;
  std::vector<std::string> ids, groups;
  std::map<std::string, std::vector<std::pair<std::string, SequenceCheck>>> by_group;
  try {
    for (const auto& e : d->at("sequences")) {
      const std::string id = e.at("id").get<std::string>();
      const fs::path mfile = root / e.at("manifest").get<std::string>();
      ids.push_back(id);
      groups.push_back(e.at("group").get<std::string>());
      try {
        if (hex64(checksum_of(read_file(mfile))) != e.at("manifest_checksum").get<std::string>()) {
          report.problems.push_back(mfile.string() + ": checksum does not match dataset.json");
        }
      } catch (const Error&) {
        report.problems.push_back(mfile.string() + ": missing");
        continue;
      }
      auto check = validate_sequence(mfile.parent_path(), report);
      if (!check) continue;
      if (check->manifest.contains("split") &&
          check->manifest["split"].get<std::string>() != e.at("split").get<std::string>()) {
        report.problems.push_back(mfile.string() + ": split disagrees with dataset.json");
      }
      by_group[groups.back()].push_back({id, std::move(*check)});
    }
    const auto expected = assign_splits(ids, groups, d->at("split_seed").get<std::uint64_t>());
    std::size_t i = 0;
    for (const auto& e : d->at("sequences")) {
      if (to_string(expected.at(ids[i])) != e.at("split").get<std::string>()) {
        report.problems.push_back("dataset.json: split of " + ids[i] + " does not match its seed");
      }
      ++i;
    }
  } catch (const std::exception& e) {
    report.problems.push_back((root / "dataset.json").string() + ": " + e.what());
    return;
  }
  for (const auto& [group, members] : by_group) {
    const auto& first = members.front().second;
    if (first.branch_frame < 0) continue;
    for (const auto& [id, check] : members) {
      for (int t = 0; t < first.branch_frame; ++t) {
        if (t >= static_cast<int>(check.frame_checksums.size()) ||
            t >= static_cast<int>(first.frame_checksums.size()) ||
            check.frame_checksums[t] != first.frame_checksums[t]) {
          report.problems.push_back(id + ": prefix frame " + std::to_string(t) +
                                    " differs from " + members.front().first);
          break;
        }
      }
    }
  }
}

json load_sequence_manifest(const fs::path& dir) {
  return parse_json(text_of(read_file(dir / "manifest.json")), (dir / "manifest.json").string());
}

}  // namespace

ValidationReport validate_path(const fs::path& path) {
  ValidationReport report;
  if (fs::is_regular_file(path) && path.filename() == "dataset.json") {
    validate_dataset(path.parent_path(), report);
  } else if (fs::exists(path / "dataset.json")) {
    validate_dataset(path, report);
  } else if (fs::exists(path / "manifest.json")) {
    validate_sequence(path, report);
  } else {
    report.problems.push_back(path.string() + ": neither manifest.json nor dataset.json found");
  }
  return report;
}

std::string stats_table(const fs::path& dir) {
  const json m = load_sequence_manifest(dir);
  std::ostringstream out;
  char line[256];
  std::snprintf(line, sizeof line, "%6s %7s %7s %6s %6s %9s %9s %8s %9s %12s %12s  %s\n", "frame",
                "verts", "faces", "splits", "flips", "re_mean", "re_std", "val5-7", "min_ang",
                "E_memb", "E_flex", "flags");
  out << line;
  for (const auto& rec : m.at("frames")) {
    const auto fd = read_frame_file(dir / rec.at("file").get<std::string>());
    const Mesh mesh = fd.to_mesh();
    const auto q = quality_report(mesh);
    std::string flags;
    for (const auto& f : rec.at("flags")) flags += (flags.empty() ? "" : ",") + f.get<std::string>();
    std::snprintf(line, sizeof line,
                  "%6d %7d %7d %6d %6d %9.4f %9.4f %8.3f %9.3f %12.5e %12.5e  %s\n",
                  static_cast<int>(fd.frame), mesh.vertex_count(), mesh.face_count(),
                  rec.at("splits").get<int>(), rec.at("flips").get<int>(), q.radius_edge_mean,
                  q.radius_edge_std, q.valence_fraction(), q.min_angle * 180.0 / std::numbers::pi,
                  rec.at("energy").at("membrane").get<double>(),
                  rec.at("energy").at("flexural").get<double>(), flags.empty() ? "-" : flags.c_str());
    out << line;
  }
  return out.str();
}

bool export_frame(const fs::path& dir, int frame, const std::string& format, const fs::path& out) {
  if (format != "obj" && format != "ply") {
    throw Error(ErrorCode::InvalidArgument, "export format must be obj or ply");
  }
  const json m = load_sequence_manifest(dir);
  for (const auto& rec : m.at("frames")) {
    if (rec.at("frame").get<int>() != frame) continue;
    const auto fd = read_frame_file(dir / rec.at("file").get<std::string>());
    std::ostringstream buf(std::ios::binary);
    const bool orientable = format == "obj" ? export_obj(fd, buf) : export_ply(fd, buf);
    write_text(out, buf.str());
    return orientable;
  }
  throw Error(ErrorCode::InvalidArgument, "frame " + std::to_string(frame) + " not in sequence");
}

std::vector<DatasetEntry> splits_from_manifest(const fs::path& manifest, std::uint64_t seed) {
  const json d = parse_json(text_of(read_file(manifest)), manifest.string());
  std::vector<std::string> ids, groups;
  try {
    for (const auto& e : d.at("sequences")) {
      ids.push_back(e.at("id").get<std::string>());
      groups.push_back(e.at("group").get<std::string>());
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Format, manifest.string() + ": " + e.what());
  }
  const auto a = assign_splits(ids, groups, seed);
  std::vector<DatasetEntry> out;
  for (std::size_t i = 0; i < ids.size(); ++i) out.push_back({ids[i], groups[i], a.at(ids[i])});
  return out;
}

}  // namespace surfgrow
