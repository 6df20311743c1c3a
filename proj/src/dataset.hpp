#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "engine.hpp"
#include "io.hpp"

namespace surfgrow {

/// Everything a `generate` or `branch` run needs. Each grid cell
/// (topology, material) is simulated once per seed, with sequence seeds
/// `seed, seed + 1, ...`.
struct DatasetConfig {
  SequenceConfig base;
  std::vector<TopologyClass> topologies;  // empty: base.topology alone
  std::vector<MaterialParams> materials;  // empty: base.material alone
  // When positive, replaces `materials` by this many log-uniform samples
  // drawn from the dataset seed.
  int material_samples = 0;
  int seeds_per_cell = 1;
  std::optional<BranchSpec> branch;  // when set every cell is branched
  std::optional<std::uint64_t> split_seed;

  void check() const;
  /// The grid of materials after sampling.
  std::vector<MaterialParams> material_grid() const;
};

/// Parses the JSON config format. Missing keys keep their defaults, unknown
/// keys are rejected. Throws InvalidArgument on schema errors.
DatasetConfig parse_dataset_config(const std::string& json_text);
DatasetConfig load_dataset_config(const std::filesystem::path& path);
std::string sequence_config_json(const SequenceConfig& config);

struct SequenceMeta {
  std::string id;
  std::string group;
  std::optional<Split> split;
};

/// Simulates frames 0..frames-1 into `dir`: frames/, sensors/, lineage.sgln
/// and manifest.json.
void run_sequence(const SequenceConfig& config, const std::filesystem::path& dir,
                  const SequenceMeta& meta = {});

/// Baseline in `root/baseline`, branch i in `root/branch_i`. The prefix is
/// simulated once and its files are copied into each branch.
void run_branches(const SequenceConfig& config, const BranchSpec& spec,
                  const std::filesystem::path& root, const std::string& group = "",
                  const std::map<std::string, Split>& splits = {});

struct DatasetEntry {
  std::string id;     // relative path of the sequence directory
  std::string group;
  Split split = Split::Train;
};

/// Runs the whole grid with `jobs` worker threads and writes dataset.json.
/// Output bytes do not depend on `jobs`.
std::vector<DatasetEntry> generate_dataset(const DatasetConfig& config,
                                           const std::filesystem::path& out, int jobs = 1);

/// Single baseline-plus-branches run with its own dataset.json.
std::vector<DatasetEntry> branch_dataset(const DatasetConfig& config, const BranchSpec& spec,
                                         const std::filesystem::path& out);

struct ValidationReport {
  std::vector<std::string> problems;
  int sequences = 0;
  int frames = 0;
  bool ok() const { return problems.empty(); }
};

/// Checks a sequence directory or a dataset root from the files alone:
/// checksums, frame decoding, topology signature, energy attribution against
/// a fresh energy evaluation, split threshold, monotone growth, lineage
/// consistency, sensor references, prefix sharing and split assignment.
ValidationReport validate_path(const std::filesystem::path& path);

/// Per-frame quality and energy table.
std::string stats_table(const std::filesystem::path& sequence_dir);

/// Returns false when the exported mesh is non-orientable.
bool export_frame(const std::filesystem::path& sequence_dir, int frame, const std::string& format,
                  const std::filesystem::path& out);

/// Recomputes the group-aware split of the sequences listed in a dataset.json.
std::vector<DatasetEntry> splits_from_manifest(const std::filesystem::path& manifest,
                                               std::uint64_t seed);

FrameData read_frame_file(const std::filesystem::path& path);

}  // namespace surfgrow
