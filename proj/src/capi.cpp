#include "surfgrow/surfgrow.h"

#include <exception>
#include <memory>
#include <new>
#include <string>

#include "dataset.hpp"
#include "error.hpp"

using namespace surfgrow;

struct sg_config {
  DatasetConfig config;
};

struct sg_sequence {
  std::unique_ptr<Sequence> seq;
};

struct sg_mesh {
  FrameData frame;
  TopologySignature signature;
};

namespace {

thread_local std::string g_last_error;

sg_status status_of(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return SG_ERR_INVALID_ARGUMENT;
    case ErrorCode::UnknownId: return SG_ERR_UNKNOWN_ID;
    case ErrorCode::InvalidMesh: return SG_ERR_INVALID_MESH;
    case ErrorCode::NotFlippable: return SG_ERR_NOT_FLIPPABLE;
    case ErrorCode::UnsupportedClass: return SG_ERR_UNSUPPORTED_CLASS;
    case ErrorCode::DegenerateRest: return SG_ERR_DEGENERATE_REST;
    case ErrorCode::DegenerateFace: return SG_ERR_DEGENERATE_FACE;
    case ErrorCode::EmptyInput: return SG_ERR_EMPTY_INPUT;
    case ErrorCode::DuplicateBirth: return SG_ERR_DUPLICATE_BIRTH;
    case ErrorCode::RetireUnknown: return SG_ERR_RETIRE_UNKNOWN;
    case ErrorCode::Io: return SG_ERR_IO;
    case ErrorCode::Format: return SG_ERR_FORMAT;
    case ErrorCode::ChecksumMismatch: return SG_ERR_CHECKSUM;
    case ErrorCode::Validation: return SG_ERR_VALIDATION;
  }
  return SG_ERR_INTERNAL;
}

sg_status fail(sg_status s, std::string message) {
  g_last_error = std::move(message);
  return s;
}

// Runs `body`, translating exceptions into status codes.
template <class F>
sg_status guarded(F&& body) {
  try {
    body();
    return SG_OK;
  } catch (const Error& e) {
    return fail(status_of(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(SG_ERR_INTERNAL, "out of memory");
  } catch (const std::filesystem::filesystem_error& e) {
    return fail(SG_ERR_IO, e.what());
  } catch (const std::exception& e) {
    return fail(SG_ERR_INTERNAL, e.what());
  }
}

sg_status null_argument(const char* name) {
  return fail(SG_ERR_INVALID_ARGUMENT, std::string(name) + " must not be NULL");
}

void emit(sg_text_fn fn, void* user, const std::string& text) {
  if (fn) fn(text.c_str(), user);
}

}  // namespace

extern "C" {

const char* sg_version(void) { return "0.1.0"; }

const char* sg_status_name(sg_status status) {
  switch (status) {
    case SG_OK: return "ok";
    case SG_ERR_INVALID_ARGUMENT: return "invalid argument";
    case SG_ERR_UNKNOWN_ID: return "unknown id";
    case SG_ERR_INVALID_MESH: return "invalid mesh";
    case SG_ERR_NOT_FLIPPABLE: return "not flippable";
    case SG_ERR_UNSUPPORTED_CLASS: return "unsupported class";
    case SG_ERR_DEGENERATE_REST: return "degenerate rest";
    case SG_ERR_DEGENERATE_FACE: return "degenerate face";
    case SG_ERR_EMPTY_INPUT: return "empty input";
    case SG_ERR_DUPLICATE_BIRTH: return "duplicate birth";
    case SG_ERR_RETIRE_UNKNOWN: return "retire unknown";
    case SG_ERR_IO: return "i/o error";
    case SG_ERR_FORMAT: return "format error";
    case SG_ERR_CHECKSUM: return "checksum mismatch";
    case SG_ERR_VALIDATION: return "validation failure";
    case SG_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* sg_last_error(void) { return g_last_error.c_str(); }

sg_status sg_config_load(const char* path, sg_config** out) {
  if (!path) return null_argument("path");
  if (!out) return null_argument("out");
  *out = nullptr;
  return guarded([&] { *out = new sg_config{load_dataset_config(path)}; });
}

sg_status sg_config_parse(const char* json_text, sg_config** out) {
  if (!json_text) return null_argument("json_text");
  if (!out) return null_argument("out");
  *out = nullptr;
  return guarded([&] { *out = new sg_config{parse_dataset_config(json_text)}; });
}

sg_status sg_config_set_seed(sg_config* config, uint64_t seed) {
  if (!config) return null_argument("config");
  config->config.base.seed = seed;
  return SG_OK;
}

sg_status sg_config_set_frames(sg_config* config, int frames) {
  if (!config) return null_argument("config");
  return guarded([&] {
    DatasetConfig c = config->config;
    c.base.frames = frames;
    c.check();
    config->config = std::move(c);
  });
}

sg_status sg_config_dump(const sg_config* config, sg_text_fn out, void* user) {
  if (!config) return null_argument("config");
  return guarded([&] { emit(out, user, sequence_config_json(config->config.base)); });
}

void sg_config_free(sg_config* config) { delete config; }

sg_status sg_generate(const sg_config* config, const char* out_dir, int jobs,
                      size_t* sequences_written) {
  if (!config) return null_argument("config");
  if (!out_dir) return null_argument("out_dir");
  if (jobs < 1) return fail(SG_ERR_INVALID_ARGUMENT, "jobs must be at least 1");
  return guarded([&] {
    const auto entries = generate_dataset(config->config, out_dir, jobs);
    if (sequences_written) *sequences_written = entries.size();
  });
}

sg_status sg_branch(const sg_config* config, int at_frame, const char* const* overrides,
                    size_t override_count, const char* out_dir) {
  if (!config) return null_argument("config");
  if (!out_dir) return null_argument("out_dir");
  if (override_count > 0 && !overrides) return null_argument("overrides");
  return guarded([&] {
    BranchSpec spec;
    spec.branch_frame = at_frame;
    for (size_t i = 0; i < override_count; ++i) {
      if (!overrides[i]) throw Error(ErrorCode::InvalidArgument, "override must not be NULL");
      spec.branches.push_back(parse_overrides(overrides[i]));
    }
    branch_dataset(config->config, spec, out_dir);
  });
}

sg_status sg_validate(const char* path, sg_text_fn on_problem, void* user,
                      sg_validation_summary* summary) {
  if (!path) return null_argument("path");
  ValidationReport report;
  const sg_status s = guarded([&] { report = validate_path(path); });
  if (s != SG_OK) return s;
  for (const auto& p : report.problems) emit(on_problem, user, p);
  if (summary) {
    summary->sequences = report.sequences;
    summary->frames = report.frames;
    summary->problems = static_cast<int>(report.problems.size());
  }
  if (!report.ok()) {
    return fail(SG_ERR_VALIDATION,
                std::to_string(report.problems.size()) + " problem(s); first: " + report.problems[0]);
  }
  return SG_OK;
}

sg_status sg_stats(const char* sequence_dir, sg_text_fn out, void* user) {
  if (!sequence_dir) return null_argument("sequence_dir");
  return guarded([&] { emit(out, user, stats_table(sequence_dir)); });
}

sg_status sg_export(const char* sequence_dir, int frame, const char* format, const char* out_path,
                    int* orientable) {
  if (!sequence_dir) return null_argument("sequence_dir");
  if (!format) return null_argument("format");
  if (!out_path) return null_argument("out_path");
  return guarded([&] {
    const bool o = export_frame(sequence_dir, frame, format, out_path);
    if (orientable) *orientable = o ? 1 : 0;
  });
}

sg_status sg_splits(const char* manifest_path, uint64_t seed, sg_text_fn out, void* user) {
  if (!manifest_path) return null_argument("manifest_path");
  return guarded([&] {
    for (const auto& e : splits_from_manifest(manifest_path, seed)) {
      emit(out, user, e.id + "\t" + e.group + "\t" + to_string(e.split));
    }
  });
}

sg_status sg_sequence_create(const sg_config* config, sg_sequence** out) {
  if (!config) return null_argument("config");
  if (!out) return null_argument("out");
  *out = nullptr;
  return guarded([&] { *out = new sg_sequence{std::make_unique<Sequence>(config->config.base)}; });
}

sg_status sg_sequence_step(sg_sequence* sequence) {
  if (!sequence) return null_argument("sequence");
  return guarded([&] { sequence->seq->step(); });
}

sg_status sg_sequence_fork(const sg_sequence* sequence, unsigned index, const char* overrides,
                           sg_sequence** out) {
  if (!sequence) return null_argument("sequence");
  if (!out) return null_argument("out");
  *out = nullptr;
  return guarded([&] {
    MaterialParams m = sequence->seq->config().material;
    if (overrides && *overrides) m = apply_overrides(m, parse_overrides(overrides));
    *out = new sg_sequence{std::make_unique<Sequence>(sequence->seq->fork(index, m))};
  });
}

int sg_sequence_frame(const sg_sequence* sequence) {
  return sequence ? sequence->seq->frame() : -1;
}

sg_status sg_sequence_counts(const sg_sequence* sequence, size_t* vertices, size_t* edges,
                             size_t* faces) {
  if (!sequence) return null_argument("sequence");
  const Mesh& m = sequence->seq->mesh();
  if (vertices) *vertices = static_cast<size_t>(m.vertex_count());
  if (edges) *edges = static_cast<size_t>(m.edge_count());
  if (faces) *faces = static_cast<size_t>(m.face_count());
  return SG_OK;
}

sg_status sg_sequence_energy(const sg_sequence* sequence, double* membrane, double* flexural) {
  if (!sequence) return null_argument("sequence");
  const auto& e = sequence->seq->annotations().energy;
  if (membrane) *membrane = e.membrane;
  if (flexural) *flexural = e.flexural;
  return SG_OK;
}

sg_status sg_sequence_write_frame(const sg_sequence* sequence, const char* path) {
  if (!sequence) return null_argument("sequence");
  if (!path) return null_argument("path");
  return guarded([&] {
    const Sequence& s = *sequence->seq;
    write_file(path, encode_frame(make_frame_data(s.mesh(), s.annotations(), s.sim_time())));
  });
}

void sg_sequence_free(sg_sequence* sequence) { delete sequence; }

sg_status sg_mesh_read(const char* path, sg_mesh** out) {
  if (!path) return null_argument("path");
  if (!out) return null_argument("out");
  *out = nullptr;
  return guarded([&] {
    auto m = std::make_unique<sg_mesh>();
    m->frame = read_frame_file(path);
    m->signature = topology_signature(m->frame.to_mesh());
    *out = m.release();
  });
}

uint64_t sg_mesh_frame(const sg_mesh* mesh) { return mesh ? mesh->frame.frame : 0; }

size_t sg_mesh_vertex_count(const sg_mesh* mesh) { return mesh ? mesh->frame.vertices.size() : 0; }

size_t sg_mesh_face_count(const sg_mesh* mesh) { return mesh ? mesh->frame.faces.size() : 0; }

size_t sg_mesh_edge_count(const sg_mesh* mesh) { return mesh ? mesh->frame.edges.size() : 0; }

sg_status sg_mesh_vertices(const sg_mesh* mesh, uint64_t* ids, double* xyz, size_t capacity) {
  if (!mesh) return null_argument("mesh");
  const auto& v = mesh->frame.vertices;
  if (capacity < v.size()) return fail(SG_ERR_INVALID_ARGUMENT, "vertex buffer too small");
  for (size_t i = 0; i < v.size(); ++i) {
    if (ids) ids[i] = v[i].id.value;
    if (xyz) {
      for (int k = 0; k < 3; ++k) xyz[3 * i + k] = v[i].position[k];
    }
  }
  return SG_OK;
}

sg_status sg_mesh_faces(const sg_mesh* mesh, uint64_t* corners, size_t capacity) {
  if (!mesh) return null_argument("mesh");
  if (!corners) return null_argument("corners");
  const auto& f = mesh->frame.faces;
  if (capacity < f.size()) return fail(SG_ERR_INVALID_ARGUMENT, "face buffer too small");
  for (size_t i = 0; i < f.size(); ++i) {
    for (int k = 0; k < 3; ++k) corners[3 * i + k] = f[i].corners[k].value;
  }
  return SG_OK;
}

sg_status sg_mesh_signature(const sg_mesh* mesh, int* euler_characteristic, int* boundary_loops,
                            int* orientable) {
  if (!mesh) return null_argument("mesh");
  if (euler_characteristic) *euler_characteristic = mesh->signature.euler_characteristic;
  if (boundary_loops) *boundary_loops = mesh->signature.boundary_loops;
  if (orientable) *orientable = mesh->signature.orientable ? 1 : 0;
  return SG_OK;
}

void sg_mesh_free(sg_mesh* mesh) { delete mesh; }

}  // extern "C"
