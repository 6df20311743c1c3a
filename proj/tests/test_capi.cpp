#include <doctest.h>

#include <filesystem>
#include <string>
#include <vector>

#include "surfgrow/surfgrow.h"

namespace fs = std::filesystem;

namespace {

void collect(const char* text, void* user) {
  static_cast<std::vector<std::string>*>(user)->push_back(text);
}

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("surfgrow_capi_" + name);
  fs::remove_all(dir);
  return dir;
}

const char* kConfig = R"({"topology": "pair_of_pants", "frames": 5, "seed": 2,
  "sensors": {"cameras": 1, "width": 16, "height": 12, "lidar_config": {"rows": 2, "cols": 16}}})";

}  // namespace

TEST_CASE("status strings and errors") {
  CHECK(std::string(sg_status_name(SG_OK)) == "ok");
  CHECK(std::string(sg_status_name(SG_ERR_CHECKSUM)) == "checksum mismatch");
  CHECK(std::string(sg_version()).size() > 0);
  sg_config* c = nullptr;
  CHECK(sg_config_parse("{\"frames\": -1}", &c) == SG_ERR_INVALID_ARGUMENT);
  CHECK(c == nullptr);
  CHECK(std::string(sg_last_error()).find("frames") != std::string::npos);
  CHECK(sg_config_parse("{", &c) == SG_ERR_FORMAT);
  CHECK(sg_config_load("/nonexistent/surfgrow.json", &c) == SG_ERR_IO);
  CHECK(sg_config_parse(nullptr, &c) == SG_ERR_INVALID_ARGUMENT);
  sg_config_free(nullptr);
  sg_sequence_free(nullptr);
  sg_mesh_free(nullptr);
}

TEST_CASE("generate, validate, stats, export and splits through the C API") {
  sg_config* c = nullptr;
  REQUIRE(sg_config_parse(kConfig, &c) == SG_OK);
  std::vector<std::string> dump;
  CHECK(sg_config_dump(c, collect, &dump) == SG_OK);
  REQUIRE(dump.size() == 1);
  CHECK(dump[0].find("pair_of_pants") != std::string::npos);

  const auto out = scratch("gen");
  size_t n = 0;
  REQUIRE(sg_generate(c, out.c_str(), 2, &n) == SG_OK);
  CHECK(n == 1);
  CHECK(sg_generate(c, out.c_str(), 0, &n) == SG_ERR_INVALID_ARGUMENT);

  std::vector<std::string> problems;
  sg_validation_summary summary{};
  CHECK(sg_validate(out.c_str(), collect, &problems, &summary) == SG_OK);
  CHECK(problems.empty());
  CHECK(summary.sequences == 1);
  CHECK(summary.frames == 5);

  const auto seq = out / "pair_of_pants_m000_s0";
  std::vector<std::string> table;
  CHECK(sg_stats(seq.c_str(), collect, &table) == SG_OK);
  CHECK(table.size() == 1);

  int orientable = -1;
  const auto obj = out / "f.obj";
  CHECK(sg_export(seq.c_str(), 4, "obj", obj.c_str(), &orientable) == SG_OK);
  CHECK(orientable == 1);
  CHECK(sg_export(seq.c_str(), 4, "stl", obj.c_str(), &orientable) == SG_ERR_INVALID_ARGUMENT);

  std::vector<std::string> lines;
  CHECK(sg_splits((out / "dataset.json").c_str(), 0, collect, &lines) == SG_OK);
  REQUIRE(lines.size() == 1);
  CHECK(lines[0].rfind("pair_of_pants_m000_s0\t", 0) == 0);

  sg_mesh* m = nullptr;
  REQUIRE(sg_mesh_read((seq / "frames" / "frame_00004.sgm").c_str(), &m) == SG_OK);
  CHECK(sg_mesh_frame(m) == 4);
  int chi = 0, loops = 0, orient = 0;
  CHECK(sg_mesh_signature(m, &chi, &loops, &orient) == SG_OK);
  CHECK(chi == -1);
  CHECK(loops == 3);
  CHECK(orient == 1);
  std::vector<std::uint64_t> ids(sg_mesh_vertex_count(m));
  std::vector<double> xyz(3 * ids.size());
  CHECK(sg_mesh_vertices(m, ids.data(), xyz.data(), ids.size()) == SG_OK);
  CHECK(sg_mesh_vertices(m, ids.data(), xyz.data(), ids.size() - 1) == SG_ERR_INVALID_ARGUMENT);
  std::vector<std::uint64_t> corners(3 * sg_mesh_face_count(m));
  CHECK(sg_mesh_faces(m, corners.data(), sg_mesh_face_count(m)) == SG_OK);
  CHECK(sg_mesh_edge_count(m) > 0);
  sg_mesh_free(m);

  const auto frame = seq / "frames" / "frame_00002.sgm";
  {
    std::FILE* f = std::fopen(frame.c_str(), "r+b");
    REQUIRE(f);
    std::fseek(f, 40, SEEK_SET);
    const int byte = std::fgetc(f);
    std::fseek(f, 40, SEEK_SET);
    std::fputc(byte ^ 0x20, f);
    std::fclose(f);
  }
  problems.clear();
  CHECK(sg_validate(out.c_str(), collect, &problems, &summary) == SG_ERR_VALIDATION);
  REQUIRE_FALSE(problems.empty());
  CHECK(problems[0].find("frame_00002.sgm") != std::string::npos);
  CHECK(sg_mesh_read(frame.c_str(), &m) == SG_ERR_CHECKSUM);
  CHECK(sg_validate((out / "missing").c_str(), nullptr, nullptr, &summary) == SG_ERR_VALIDATION);

  sg_config_free(c);
  fs::remove_all(out);
}

TEST_CASE("live sequences, forks and branch runs") {
  sg_config* c = nullptr;
  REQUIRE(sg_config_parse(kConfig, &c) == SG_OK);
  sg_sequence* s = nullptr;
  REQUIRE(sg_sequence_create(c, &s) == SG_OK);
  CHECK(sg_sequence_frame(s) == 0);
  for (int i = 0; i < 3; ++i) CHECK(sg_sequence_step(s) == SG_OK);
  CHECK(sg_sequence_frame(s) == 3);
  size_t v = 0, e = 0, f = 0;
  CHECK(sg_sequence_counts(s, &v, &e, &f) == SG_OK);
  CHECK(v - e + f == static_cast<size_t>(-1));
  double memb = -1, flex = -1;
  CHECK(sg_sequence_energy(s, &memb, &flex) == SG_OK);
  CHECK(memb >= 0.0);
  CHECK(flex >= 0.0);

  sg_sequence* b = nullptr;
  CHECK(sg_sequence_fork(s, 1, "k_bend=*0.5", &b) == SG_OK);
  CHECK(sg_sequence_fork(s, 1, "k_nope=1", &b) == SG_ERR_INVALID_ARGUMENT);
  REQUIRE(sg_sequence_fork(s, 1, "k_bend=*0.5", &b) == SG_OK);
  CHECK(sg_sequence_step(b) == SG_OK);
  CHECK(sg_sequence_frame(b) == 4);

  const auto dir = scratch("live");
  fs::create_directories(dir);
  CHECK(sg_sequence_write_frame(b, (dir / "b.sgm").c_str()) == SG_OK);
  sg_mesh* m = nullptr;
  REQUIRE(sg_mesh_read((dir / "b.sgm").c_str(), &m) == SG_OK);
  CHECK(sg_mesh_frame(m) == 4);
  sg_mesh_free(m);
  sg_sequence_free(b);
  sg_sequence_free(s);

  const char* overrides[] = {"k_bend=*0.5"};
  const auto out = dir / "branch";
  CHECK(sg_branch(c, 3, overrides, 1, out.c_str()) == SG_OK);
  CHECK(fs::exists(out / "baseline" / "manifest.json"));
  CHECK(fs::exists(out / "branch_1" / "manifest.json"));
  CHECK(sg_validate(out.c_str(), nullptr, nullptr, nullptr) == SG_OK);
  CHECK(sg_branch(c, 5, overrides, 1, out.c_str()) == SG_ERR_INVALID_ARGUMENT);
  sg_config_free(c);
  fs::remove_all(dir);
}
