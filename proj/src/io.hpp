#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "mesh.hpp"
#include "sensors.hpp"
#include "trace.hpp"

namespace surfgrow {

/// 64-bit FNV-1a.
std::uint64_t fnv1a(std::span<const std::uint8_t> bytes,
                    std::uint64_t hash = 0xcbf29ce484222325ull) noexcept;
std::string hex64(std::uint64_t value);

/// Contents of one frame file.
struct FrameData {
  struct Vertex {
    ElementId id;
    Vec3 position = Vec3::Zero();
    std::uint32_t birth_frame = 0;
    double g = 0.0;
    double w_memb = 0.0;
    double w_flex = 0.0;
  };
  std::uint64_t frame = 0;
  double sim_time = 0.0;
  std::vector<Vertex> vertices;
  std::vector<Mesh::FaceRecord> faces;
  std::vector<Mesh::EdgeRecord> edges;

  /// Rebuilds the mesh with the stored ids, corner order and rest data.
  Mesh to_mesh() const;
};

/// Vertices in slot order, live faces and edges in slot order. Annotation
/// values are looked up by vertex id.
FrameData make_frame_data(const Mesh& mesh, const FrameAnnotations& annotations,
                          double sim_time);

std::vector<std::uint8_t> encode_frame(const FrameData& frame);
/// Throws Format for a bad magic, version or layout and ChecksumMismatch when
/// the trailing checksum disagrees with the payload.
FrameData decode_frame(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> encode_point_cloud(const LidarScan& scan);
LidarScan decode_point_cloud(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> encode_correspondence(const PixelBuffer& buffer);
PixelBuffer decode_correspondence(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> encode_lineage(const LineageLog& log);
LineageLog decode_lineage(std::span<const std::uint8_t> bytes);

/// 8-bit RGB PNG.
std::vector<std::uint8_t> encode_png(int width, int height, std::span<const std::uint8_t> rgb);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
/// Writes through a temporary file in the same directory and renames it.
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
void write_text(const std::filesystem::path& path, const std::string& text);

/// ASCII OBJ with 1-based indices in id order and 17 significant digits.
/// Returns false if the mesh is non-orientable (written with stored winding).
bool export_obj(const FrameData& frame, std::ostream& out);
/// Binary little-endian PLY with double vertices and int32 face indices.
bool export_ply(const FrameData& frame, std::ostream& out);

}  // namespace surfgrow
