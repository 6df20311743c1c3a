/*
 * surfgrow C API.
 *
 * Every function that can fail returns an sg_status. On failure a message
 * describing the error is available from sg_last_error() on the same thread
 * until the next failing call. Handles are opaque and owned by the caller,
 * who releases them with the matching *_free function (NULL is accepted).
 * Strings passed to callbacks are only valid during the call.
 */
#ifndef SURFGROW_SURFGROW_H
#define SURFGROW_SURFGROW_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(SURFGROW_BUILD)
#    define SG_API __declspec(dllexport)
#  else
#    define SG_API __declspec(dllimport)
#  endif
#else
#  define SG_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum sg_status {
  SG_OK = 0,
  SG_ERR_INVALID_ARGUMENT = 1,
  SG_ERR_UNKNOWN_ID = 2,
  SG_ERR_INVALID_MESH = 3,
  SG_ERR_NOT_FLIPPABLE = 4,
  SG_ERR_UNSUPPORTED_CLASS = 5,
  SG_ERR_DEGENERATE_REST = 6,
  SG_ERR_DEGENERATE_FACE = 7,
  SG_ERR_EMPTY_INPUT = 8,
  SG_ERR_DUPLICATE_BIRTH = 9,
  SG_ERR_RETIRE_UNKNOWN = 10,
  SG_ERR_IO = 11,
  SG_ERR_FORMAT = 12,
  SG_ERR_CHECKSUM = 13,
  SG_ERR_VALIDATION = 14,
  SG_ERR_INTERNAL = 15
} sg_status;

SG_API const char* sg_version(void);
SG_API const char* sg_status_name(sg_status status);
/* Message of the last failure on this thread, "" if none. */
SG_API const char* sg_last_error(void);

typedef void (*sg_text_fn)(const char* text, void* user);

/* ---- configuration ------------------------------------------------------ */

typedef struct sg_config sg_config;

SG_API sg_status sg_config_load(const char* path, sg_config** out);
SG_API sg_status sg_config_parse(const char* json_text, sg_config** out);
SG_API sg_status sg_config_set_seed(sg_config* config, uint64_t seed);
SG_API sg_status sg_config_set_frames(sg_config* config, int frames);
/* Writes the normalized sequence configuration as JSON. */
SG_API sg_status sg_config_dump(const sg_config* config, sg_text_fn out, void* user);
SG_API void sg_config_free(sg_config* config);

/* ---- dataset operations ------------------------------------------------- */

/* Runs the whole grid of the config into out_dir with up to `jobs` threads. */
SG_API sg_status sg_generate(const sg_config* config, const char* out_dir, int jobs,
                             size_t* sequences_written);

/* Baseline plus one branch per entry of `overrides`; each entry uses the
 * syntax "k_bend=*0.5" (multiplier) or "k_bend=0.2" (value), joined by
 * commas for several parameters. */
SG_API sg_status sg_branch(const sg_config* config, int at_frame, const char* const* overrides,
                           size_t override_count, const char* out_dir);

typedef struct sg_validation_summary {
  int sequences;
  int frames;
  int problems;
} sg_validation_summary;

/* Returns SG_OK for a clean tree and SG_ERR_VALIDATION otherwise; each
 * problem is reported through `on_problem` (may be NULL). */
SG_API sg_status sg_validate(const char* path, sg_text_fn on_problem, void* user,
                             sg_validation_summary* summary);

SG_API sg_status sg_stats(const char* sequence_dir, sg_text_fn out, void* user);

/* format is "obj" or "ply"; *orientable is set to 0 for a non-orientable
 * frame, which is still written with its stored winding. */
SG_API sg_status sg_export(const char* sequence_dir, int frame, const char* format,
                           const char* out_path, int* orientable);

/* One "id<TAB>group<TAB>split" line per sequence listed in a dataset.json. */
SG_API sg_status sg_splits(const char* manifest_path, uint64_t seed, sg_text_fn out, void* user);

/* ---- live simulation ---------------------------------------------------- */

typedef struct sg_sequence sg_sequence;

/* Starts the config's base sequence at frame 0. */
SG_API sg_status sg_sequence_create(const sg_config* config, sg_sequence** out);
SG_API sg_status sg_sequence_step(sg_sequence* sequence);
/* Copy that continues as branch `index` with overrides applied (NULL or ""
 * for none). */
SG_API sg_status sg_sequence_fork(const sg_sequence* sequence, unsigned index,
                                  const char* overrides, sg_sequence** out);
SG_API int sg_sequence_frame(const sg_sequence* sequence);
SG_API sg_status sg_sequence_counts(const sg_sequence* sequence, size_t* vertices, size_t* edges,
                                    size_t* faces);
SG_API sg_status sg_sequence_energy(const sg_sequence* sequence, double* membrane,
                                    double* flexural);
/* Writes the current frame as an SGM1 file. */
SG_API sg_status sg_sequence_write_frame(const sg_sequence* sequence, const char* path);
SG_API void sg_sequence_free(sg_sequence* sequence);

/* ---- frame files -------------------------------------------------------- */

typedef struct sg_mesh sg_mesh;

SG_API sg_status sg_mesh_read(const char* path, sg_mesh** out);
SG_API uint64_t sg_mesh_frame(const sg_mesh* mesh);
SG_API size_t sg_mesh_vertex_count(const sg_mesh* mesh);
SG_API size_t sg_mesh_face_count(const sg_mesh* mesh);
SG_API size_t sg_mesh_edge_count(const sg_mesh* mesh);
/* ids and xyz (3 per vertex) may each be NULL; capacity counts vertices. */
SG_API sg_status sg_mesh_vertices(const sg_mesh* mesh, uint64_t* ids, double* xyz,
                                  size_t capacity);
/* Three corner vertex ids per face; capacity counts faces. */
SG_API sg_status sg_mesh_faces(const sg_mesh* mesh, uint64_t* corners, size_t capacity);
SG_API sg_status sg_mesh_signature(const sg_mesh* mesh, int* euler_characteristic,
                                   int* boundary_loops, int* orientable);
SG_API void sg_mesh_free(sg_mesh* mesh);

#ifdef __cplusplus
}
#endif

#endif
