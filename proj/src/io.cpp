#include "io.hpp"

#include <png.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <unordered_map>

#include "error.hpp"

namespace surfgrow {

std::uint64_t fnv1a(std::span<const std::uint8_t> bytes, std::uint64_t hash) noexcept {
  for (std::uint8_t b : bytes) {
    hash ^= b;
    hash *= 0x100000001b3ull;
  }
  return hash;
}

std::string hex64(std::uint64_t value) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i, value >>= 4) s[i] = digits[value & 0xf];
  return s;
}

namespace {

class Writer {
 public:
  void bytes(const char* s, std::size_t n) { out_.insert(out_.end(), s, s + n); }
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void checksum() { u64(fnv1a(out_)); }
  std::vector<std::uint8_t> take() { return std::move(out_); }

 private:
  std::vector<std::uint8_t> out_;
};

class Reader {
 public:
  Reader(std::span<const std::uint8_t> data, const char* what) : data_(data), what_(what) {}

  void magic(const char* m) {
    need(4);
    if (std::memcmp(data_.data() + pos_, m, 4) != 0) {
      throw Error(ErrorCode::Format, std::string(what_) + ": bad magic");
    }
    pos_ += 4;
  }
  std::uint8_t u8() {
    need(1);
    return data_[pos_++];
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t{data_[pos_ + i]} << (8 * i);
    pos_ += 4;
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t{data_[pos_ + i]} << (8 * i);
    pos_ += 8;
    return v;
  }
  float f32() { return std::bit_cast<float>(u32()); }
  double f64() { return std::bit_cast<double>(u64()); }

  /// Count prefix checked against the bytes that remain.
  std::uint64_t count(std::size_t record_size) {
    const std::uint64_t n = u64();
    if (record_size > 0 && n > (data_.size() - pos_) / record_size) {
      throw Error(ErrorCode::Format, std::string(what_) + ": count exceeds file size");
    }
    return n;
  }

  void verify_checksum() {
    const std::size_t payload = pos_;
    const std::uint64_t stored = u64();
    if (stored != fnv1a(data_.first(payload))) {
      throw Error(ErrorCode::ChecksumMismatch, std::string(what_) + ": checksum mismatch");
    }
  }
  void finish() {
    if (pos_ != data_.size()) {
      throw Error(ErrorCode::Format, std::string(what_) + ": trailing bytes");
    }
  }

 private:
  void need(std::size_t n) {
    if (data_.size() - pos_ < n) throw Error(ErrorCode::Format, std::string(what_) + ": truncated");
  }

  std::span<const std::uint8_t> data_;
  std::size_t pos_ = 0;
  const char* what_;
};

constexpr std::uint32_t kFrameVersion = 1;
constexpr std::uint32_t kLineageVersion = 1;

}  // namespace

Mesh FrameData::to_mesh() const {
  std::vector<Mesh::VertexRecord> vr;
  vr.reserve(vertices.size());
  for (const auto& v : vertices) vr.push_back({v.id, v.position, static_cast<int>(v.birth_frame)});
  return Mesh::from_records(vr, faces, edges);
}

FrameData make_frame_data(const Mesh& mesh, const FrameAnnotations& annotations,
                          double sim_time) {
  FrameData out;
  out.frame = static_cast<std::uint64_t>(annotations.frame);
  out.sim_time = sim_time;
  const auto& ann = annotations.vertices;
  for (int v = 0; v < mesh.vertex_count(); ++v) {
    const ElementId id = mesh.vertex_id(v);
    auto it = std::lower_bound(ann.begin(), ann.end(), id,
                               [](const VertexAnnotation& a, ElementId x) { return a.id < x; });
    if (it == ann.end() || it->id != id) {
      throw Error(ErrorCode::UnknownId, "vertex without annotation");
    }
    out.vertices.push_back({id, mesh.position(v), static_cast<std::uint32_t>(mesh.vertex_birth(v)),
                            it->g, it->w_memb, it->w_flex});
  }
  for (int f = 0; f < mesh.face_slots(); ++f) {
    if (!mesh.face_alive(f)) continue;
    const auto& c = mesh.face(f).v;
    out.faces.push_back({mesh.face(f).id,
                         {mesh.vertex_id(c[0]), mesh.vertex_id(c[1]), mesh.vertex_id(c[2])}});
  }
  for (int e = 0; e < mesh.edge_slots(); ++e) {
    if (!mesh.edge_alive(e)) continue;
    const auto& ed = mesh.edge(e);
    out.edges.push_back({ed.id, mesh.vertex_id(ed.v[0]), mesh.vertex_id(ed.v[1]), ed.rest_length,
                         ed.original_rest_length, ed.birth_frame});
  }
  return out;
}

std::vector<std::uint8_t> encode_frame(const FrameData& frame) {
  Writer w;
  w.bytes("SGM1", 4);
  w.u32(kFrameVersion);
  w.u64(frame.frame);
  w.f64(frame.sim_time);
  w.u64(frame.vertices.size());
  for (const auto& v : frame.vertices) {
    w.u64(v.id.value);
    for (int k = 0; k < 3; ++k) w.f64(v.position[k]);
    w.u32(v.birth_frame);
    w.f64(v.g);
    w.f64(v.w_memb);
    w.f64(v.w_flex);
  }
  w.u64(frame.faces.size());
  for (const auto& f : frame.faces) {
    w.u64(f.id.value);
    for (ElementId c : f.corners) w.u64(c.value);
  }
  w.u64(frame.edges.size());
  for (const auto& e : frame.edges) {
    w.u64(e.id.value);
    w.u64(e.v0.value);
    w.u64(e.v1.value);
    w.f64(e.rest_length);
    w.f64(e.original_rest_length);
    w.u32(static_cast<std::uint32_t>(e.birth_frame));
  }
  w.checksum();
  return w.take();
}

FrameData decode_frame(std::span<const std::uint8_t> bytes) {
  Reader r(bytes, "frame file");
  r.magic("SGM1");
  if (r.u32() != kFrameVersion) throw Error(ErrorCode::Format, "frame file: unsupported version");
  FrameData out;
  out.frame = r.u64();
  out.sim_time = r.f64();
  const auto nv = r.count(8 + 24 + 4 + 24);
  out.vertices.resize(nv);
  for (auto& v : out.vertices) {
    v.id.value = r.u64();
    for (int k = 0; k < 3; ++k) v.position[k] = r.f64();
    v.birth_frame = r.u32();
    v.g = r.f64();
    v.w_memb = r.f64();
    v.w_flex = r.f64();
  }
  const auto nf = r.count(32);
  out.faces.resize(nf);
  for (auto& f : out.faces) {
    f.id.value = r.u64();
    for (auto& c : f.corners) c.value = r.u64();
  }
  const auto ne = r.count(8 * 3 + 16 + 4);
  out.edges.resize(ne);
  for (auto& e : out.edges) {
    e.id.value = r.u64();
    e.v0.value = r.u64();
    e.v1.value = r.u64();
    e.rest_length = r.f64();
    e.original_rest_length = r.f64();
    e.birth_frame = static_cast<int>(r.u32());
  }
  r.verify_checksum();
  r.finish();
  return out;
}

std::vector<std::uint8_t> encode_point_cloud(const LidarScan& scan) {
  Writer w;
  w.bytes("SGPC", 4);
  w.u32(static_cast<std::uint32_t>(scan.rows));
  w.u32(static_cast<std::uint32_t>(scan.cols));
  for (const auto& b : scan.beams) {
    w.u8(b.valid ? 1 : 0);
    for (int k = 0; k < 3; ++k) w.f32(b.valid ? b.point[k] : 0.0f);
    w.u64(b.valid ? b.nearest_vertex.value : ElementId::kInvalid);
  }
  return w.take();
}

LidarScan decode_point_cloud(std::span<const std::uint8_t> bytes) {
  Reader r(bytes, "point cloud");
  r.magic("SGPC");
  LidarScan scan;
  scan.rows = static_cast<int>(r.u32());
  scan.cols = static_cast<int>(r.u32());
  const std::uint64_t n = std::uint64_t(scan.rows) * std::uint64_t(scan.cols);
  if (bytes.size() != 12 + n * 21) throw Error(ErrorCode::Format, "point cloud: size mismatch");
  scan.beams.resize(n);
  for (auto& b : scan.beams) {
    b.valid = r.u8() != 0;
    b.hit = b.valid;
    for (auto& c : b.point) c = r.f32();
    b.nearest_vertex.value = r.u64();
  }
  r.finish();
  return scan;
}

std::vector<std::uint8_t> encode_correspondence(const PixelBuffer& buffer) {
  Writer w;
  w.bytes("SGCB", 4);
  w.u32(static_cast<std::uint32_t>(buffer.width));
  w.u32(static_cast<std::uint32_t>(buffer.height));
  for (std::size_t i = 0; i < buffer.face.size(); ++i) {
    w.u64(buffer.face[i].value);
    w.f32(static_cast<float>(buffer.barycentric[i][0]));
    w.f32(static_cast<float>(buffer.barycentric[i][1]));
    w.f32(static_cast<float>(buffer.depth[i]));
    w.u8(buffer.masked[i]);
  }
  return w.take();
}

PixelBuffer decode_correspondence(std::span<const std::uint8_t> bytes) {
  Reader r(bytes, "correspondence buffer");
  r.magic("SGCB");
  PixelBuffer buf;
  buf.width = static_cast<int>(r.u32());
  buf.height = static_cast<int>(r.u32());
  const std::uint64_t n = std::uint64_t(buf.width) * std::uint64_t(buf.height);
  if (bytes.size() != 12 + n * 21) {
    throw Error(ErrorCode::Format, "correspondence buffer: size mismatch");
  }
  buf.face.resize(n);
  buf.barycentric.resize(n);
  buf.depth.resize(n);
  buf.masked.resize(n);
  buf.rgb.assign(3 * n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    buf.face[i].value = r.u64();
    buf.barycentric[i][0] = r.f32();
    buf.barycentric[i][1] = r.f32();
    buf.depth[i] = r.f32();
    buf.masked[i] = r.u8();
  }
  r.finish();
  return buf;
}

std::vector<std::uint8_t> encode_lineage(const LineageLog& log) {
  Writer w;
  w.bytes("SGLN", 4);
  w.u32(kLineageVersion);
  w.u64(log.events().size());
  for (const auto& e : log.events()) {
    w.u8(static_cast<std::uint8_t>(e.type));
    w.u8(static_cast<std::uint8_t>(e.kind));
    w.u64(e.id.value);
    w.u32(static_cast<std::uint32_t>(e.frame));
    w.u32(static_cast<std::uint32_t>(e.parents.size()));
    for (ElementId p : e.parents) w.u64(p.value);
  }
  w.checksum();
  return w.take();
}

LineageLog decode_lineage(std::span<const std::uint8_t> bytes) {
  Reader r(bytes, "lineage file");
  r.magic("SGLN");
  if (r.u32() != kLineageVersion) throw Error(ErrorCode::Format, "lineage file: unsupported version");
  const auto n = r.count(18);
  LineageLog log;
  for (std::uint64_t i = 0; i < n; ++i) {
    const auto type = r.u8();
    const auto kind = r.u8();
    if (type > 1 || kind > 2) throw Error(ErrorCode::Format, "lineage file: bad event tag");
    ElementId id{r.u64()};
    const int frame = static_cast<int>(r.u32());
    const auto np = r.u32();
    if (np > 8) throw Error(ErrorCode::Format, "lineage file: too many parents");
    std::vector<ElementId> parents(np);
    for (auto& p : parents) p.value = r.u64();
    log.record_event(static_cast<LineageEventType>(type), id, static_cast<ElementKind>(kind),
                     std::move(parents), frame);
  }
  r.verify_checksum();
  r.finish();
  return log;
}

namespace {

void png_append(png_structp png, png_bytep data, png_size_t length) {
  auto* out = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
  out->insert(out->end(), data, data + length);
}

void png_flush(png_structp) {}

}  // namespace

std::vector<std::uint8_t> encode_png(int width, int height, std::span<const std::uint8_t> rgb) {
  if (width < 1 || height < 1 || rgb.size() != std::size_t(width) * height * 3) {
    throw Error(ErrorCode::InvalidArgument, "png: image size does not match pixel data");
  }
  std::vector<std::uint8_t> out;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    throw Error(ErrorCode::Io, "png: cannot allocate encoder");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw Error(ErrorCode::Io, "png: encoding failed");
  }
  png_set_write_fn(png, &out, png_append, png_flush);
  png_set_IHDR(png, info, width, height, 8, PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int y = 0; y < height; ++y) {
    png_write_row(png, const_cast<png_bytep>(rgb.data() + std::size_t(y) * width * 3));
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return out;
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::vector<std::uint8_t> data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw Error(ErrorCode::Io, "cannot read " + path.string());
  return data;
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "cannot create " + tmp);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(ErrorCode::Io, "cannot write " + tmp);
  }
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot rename " + tmp + ": " + ec.message());
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

namespace {

struct Indexed {
  std::vector<const FrameData::Vertex*> vertices;
  std::vector<std::array<int, 3>> faces;
};

Indexed index_by_id(const FrameData& frame) {
  Indexed out;
  for (const auto& v : frame.vertices) out.vertices.push_back(&v);
  std::sort(out.vertices.begin(), out.vertices.end(),
            [](auto* a, auto* b) { return a->id < b->id; });
  std::unordered_map<ElementId, int> index;
  for (std::size_t i = 0; i < out.vertices.size(); ++i) index[out.vertices[i]->id] = static_cast<int>(i);
  std::vector<const Mesh::FaceRecord*> faces;
  for (const auto& f : frame.faces) faces.push_back(&f);
  std::sort(faces.begin(), faces.end(), [](auto* a, auto* b) { return a->id < b->id; });
  for (const auto* f : faces) {
    std::array<int, 3> tri{};
    for (int k = 0; k < 3; ++k) {
      auto it = index.find(f->corners[k]);
      if (it == index.end()) throw Error(ErrorCode::Format, "face references an unknown vertex");
      tri[k] = it->second;
    }
    out.faces.push_back(tri);
  }
  return out;
}

bool orientable(const FrameData& frame) {
  return topology_signature(frame.to_mesh()).orientable;
}

}  // namespace

bool export_obj(const FrameData& frame, std::ostream& out) {
  const auto ix = index_by_id(frame);
  char buf[128];
  for (const auto* v : ix.vertices) {
    std::snprintf(buf, sizeof buf, "v %.17g %.17g %.17g\n", v->position.x(), v->position.y(),
                  v->position.z());
    out << buf;
  }
  for (const auto& f : ix.faces) out << "f " << f[0] + 1 << ' ' << f[1] + 1 << ' ' << f[2] + 1 << '\n';
  if (!out) throw Error(ErrorCode::Io, "obj: write failed");
  return orientable(frame);
}

bool export_ply(const FrameData& frame, std::ostream& out) {
  const auto ix = index_by_id(frame);
  out << "ply\nformat binary_little_endian 1.0\n"
      << "element vertex " << ix.vertices.size() << "\n"
      << "property double x\nproperty double y\nproperty double z\n"
      << "element face " << ix.faces.size() << "\n"
      << "property list uchar int vertex_indices\nend_header\n";
  Writer w;
  for (const auto* v : ix.vertices) {
    for (int k = 0; k < 3; ++k) w.f64(v->position[k]);
  }
  for (const auto& f : ix.faces) {
    w.u8(3);
    for (int k : f) w.u32(static_cast<std::uint32_t>(k));
  }
  const auto bytes = w.take();
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::Io, "ply: write failed");
  return orientable(frame);
}

}  // namespace surfgrow
