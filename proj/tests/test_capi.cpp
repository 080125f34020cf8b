// Exercises the shared library through its C header only.

#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

#include <unistd.h>

#include "pxa/pxa.h"

namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("pxa_capi_" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

// Octahedron around (0, 0, 2).
pxa_mesh* octahedron(double r) {
  const double v[] = {r, 0, 2, -r, 0, 2, 0, r, 2, 0, -r, 2, 0, 0, 2 + r, 0, 0, 2 - r};
  const int32_t t[] = {0, 2, 4, 2, 1, 4, 1, 3, 4, 3, 0, 4, 2, 0, 5, 1, 2, 5, 3, 1, 5, 0, 3, 5};
  pxa_mesh* mesh = nullptr;
  REQUIRE(pxa_mesh_create(v, 6, t, 8, &mesh) == PXA_OK);
  return mesh;
}

}  // namespace

TEST_CASE("version and error reporting") {
  CHECK(std::strlen(pxa_version()) > 0);
  pxa_camera* cam = nullptr;
  CHECK(pxa_camera_from_fov(200.0, 64, 64, &cam) == PXA_ERR_INVALID);
  CHECK(cam == nullptr);
  CHECK(std::string(pxa_last_error()).find("field of view") != std::string::npos);
  CHECK(pxa_camera_from_fov(40.0, 64, 64, nullptr) == PXA_ERR_INVALID);
}

TEST_CASE("camera calls") {
  pxa_camera* cam = nullptr;
  REQUIRE(pxa_camera_from_fov(90.0, 100, 100, &cam) == PXA_OK);
  pxa_intrinsics in{};
  REQUIRE(pxa_camera_intrinsics(cam, &in) == PXA_OK);
  CHECK(in.fx == 50.0);
  CHECK(in.cx == 50.0);

  const double point[3] = {0.2, -0.4, 2.0};
  double uvz[3];
  REQUIRE(pxa_camera_project(cam, point, uvz) == PXA_OK);
  CHECK(uvz[0] == doctest::Approx(55.0));
  CHECK(uvz[1] == doctest::Approx(40.0));
  double dir[3];
  REQUIRE(pxa_camera_unproject(cam, uvz[0], uvz[1], dir) == PXA_OK);
  CHECK(std::abs(std::hypot(dir[0], dir[1], dir[2]) - 1.0) < 1e-12);
  CHECK(std::abs(dir[0] * 2.0 / dir[2] - 0.2) < 1e-12);

  const double behind[3] = {0, 0, -1};
  CHECK(pxa_camera_project(cam, behind, uvz) == PXA_ERR_NUMERIC);

  char* json = nullptr;
  REQUIRE(pxa_camera_to_json(cam, &json) == PXA_OK);
  CHECK(std::string(json).find("\"fx\"") != std::string::npos);
  pxa_string_free(json);

  const double bad_pose[16] = {2, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1};
  pxa_camera* bad = nullptr;
  CHECK(pxa_camera_create(&in, bad_pose, &bad) == PXA_ERR_INVALID);
  pxa_camera_free(cam);
  pxa_camera_free(nullptr);
}

TEST_CASE("placement calls") {
  pxa_placement p{};
  REQUIRE(pxa_place_auto(90.0, 1.0, 4, &p) == PXA_OK);
  CHECK(p.d == 0.0);
  REQUIRE(pxa_place_auto(60.0, 1.0, 4, &p) == PXA_OK);
  CHECK(std::abs(p.d - 0.3660254037844386) < 1e-12);
  double c[3];
  REQUIRE(pxa_voxel_center(&p, 0, 0, 0, c) == PXA_OK);
  CHECK(c[0] == -0.375);
  CHECK(pxa_voxel_center(&p, 4, 0, 0, c) == PXA_ERR_INVALID);
  pxa_placement bad{-1.0, 1.0, 4};
  CHECK(pxa_placement_validate(&bad) == PXA_ERR_INVALID);
}

TEST_CASE("tensors round trip through files") {
  TempDir dir;
  const uint64_t dims[] = {2, 3};
  pxa_tensor* t = nullptr;
  REQUIRE(pxa_tensor_create(PXA_DTYPE_F32, 2, dims, &t) == PXA_OK);
  CHECK(pxa_tensor_element_count(t) == 6);
  CHECK(pxa_tensor_set_f32(t, 4, 1.25f) == PXA_OK);
  CHECK(pxa_tensor_set_f32(t, 6, 1.0f) == PXA_ERR_INVALID);
  REQUIRE(pxa_tensor_save(t, dir.file("t.pxt").c_str()) == PXA_OK);
  pxa_tensor* back = nullptr;
  REQUIRE(pxa_tensor_load(dir.file("t.pxt").c_str(), &back) == PXA_OK);
  CHECK(pxa_tensor_dtype(back) == PXA_DTYPE_F32);
  CHECK(pxa_tensor_ndim(back) == 2);
  CHECK(pxa_tensor_dim(back, 1) == 3);
  CHECK(std::memcmp(pxa_tensor_data(t), pxa_tensor_data(back), 24) == 0);
  float value = 0.0f;
  REQUIRE(pxa_tensor_get_f32(back, 4, &value) == PXA_OK);
  CHECK(value == 1.25f);
  pxa_tensor_free(t);
  pxa_tensor_free(back);

  pxa_tensor* missing = nullptr;
  CHECK(pxa_tensor_load(dir.file("nope.pxt").c_str(), &missing) == PXA_ERR_INVALID);
  CHECK(missing == nullptr);
  CHECK(pxa_tensor_create(static_cast<pxa_dtype>(7), 2, dims, &t) == PXA_ERR_INVALID);
}

TEST_CASE("mesh calls and validation") {
  TempDir dir;
  pxa_mesh* mesh = octahedron(0.3);
  CHECK(pxa_mesh_vertex_count(mesh) == 6);
  CHECK(pxa_mesh_triangle_count(mesh) == 8);
  int32_t tri[3];
  REQUIRE(pxa_mesh_triangle(mesh, 7, tri) == PXA_OK);
  CHECK(tri[2] == 5);
  CHECK(pxa_mesh_triangle(mesh, 8, tri) == PXA_ERR_INVALID);
  REQUIRE(pxa_mesh_save_obj(mesh, dir.file("m.obj").c_str()) == PXA_OK);
  pxa_mesh* back = nullptr;
  REQUIRE(pxa_mesh_load_obj(dir.file("m.obj").c_str(), &back) == PXA_OK);
  double v[3];
  REQUIRE(pxa_mesh_vertex(back, 4, v) == PXA_OK);
  CHECK(v[2] == 2.3);
  pxa_mesh_free(back);
  pxa_mesh_free(mesh);

  const double verts[] = {0, 0, 1, 1, 0, 1, 0, 1, 1};
  const int32_t bad[] = {0, 1, 3};
  pxa_mesh* out = nullptr;
  CHECK(pxa_mesh_create(verts, 3, bad, 1, &out) == PXA_ERR_INVALID);
  CHECK(out == nullptr);
}

TEST_CASE("voxelize, marching cubes and grid files") {
  TempDir dir;
  pxa_mesh* mesh = octahedron(0.35);
  pxa_placement p{2.0, 1.0, 12};
  pxa_grid* sdf = nullptr;
  REQUIRE(pxa_voxelize(mesh, &p, &sdf) == PXA_OK);
  CHECK(pxa_grid_kind_of(sdf) == PXA_GRID_SDF);
  double center = 0.0;
  REQUIRE(pxa_grid_value(sdf, 6, 6, 6, &center) == PXA_OK);
  CHECK(center < 0.0);
  const size_t inside = pxa_grid_occupied_count(sdf);
  CHECK(inside > 0);

  pxa_grid* occ = nullptr;
  REQUIRE(pxa_grid_to_occupancy(sdf, 0.0, &occ) == PXA_OK);
  CHECK(pxa_grid_occupied_count(occ) == inside);
  REQUIRE(pxa_grid_save(occ, dir.file("occ.pxt").c_str()) == PXA_OK);
  pxa_grid* loaded = nullptr;
  REQUIRE(pxa_grid_load(dir.file("occ.pxt").c_str(), &loaded) == PXA_OK);
  CHECK(pxa_grid_kind_of(loaded) == PXA_GRID_OCCUPANCY);
  pxa_placement lp{};
  REQUIRE(pxa_grid_placement(loaded, &lp) == PXA_OK);
  CHECK(lp.resolution == 12);
  CHECK(pxa_grid_occupied_count(loaded) == inside);

  pxa_mesh* surface = nullptr;
  REQUIRE(pxa_marching_cubes(sdf, 0.0, &surface) == PXA_OK);
  CHECK(pxa_mesh_triangle_count(surface) > 0);
  pxa_mesh* from_occ = nullptr;
  REQUIRE(pxa_marching_cubes(loaded, 0.0, &from_occ) == PXA_OK);
  CHECK(pxa_mesh_triangle_count(from_occ) > 0);

  pxa_mesh_free(from_occ);
  pxa_mesh_free(surface);
  pxa_grid_free(loaded);
  pxa_grid_free(occ);
  pxa_grid_free(sdf);
  pxa_mesh_free(mesh);
}

TEST_CASE("rendering, carving and normal evaluation") {
  pxa_mesh* mesh = octahedron(0.3);
  pxa_camera* cam = nullptr;
  REQUIRE(pxa_camera_from_fov(40.0, 32, 32, &cam) == PXA_OK);
  pxa_tensor* normals = nullptr;
  REQUIRE(pxa_render_normals(mesh, cam, &normals) == PXA_OK);
  CHECK(pxa_tensor_dim(normals, 2) == 4);

  pxa_normal_metrics m{};
  char* report = nullptr;
  REQUIRE(pxa_eval_normals(normals, normals, 5, &m, &report) == PXA_OK);
  CHECK(m.iou == 100.0);
  CHECK(m.angular_present == 1);
  CHECK(m.mean == 0.0);
  CHECK(std::isinf(m.psnr));
  const std::string text(report);
  CHECK(text.find("conventions") != std::string::npos);
  CHECK(text.find("\"inf\"") != std::string::npos);
  pxa_string_free(report);

  // Silhouette of the mesh as a u8 mask.
  const uint64_t dims[] = {32, 32};
  pxa_tensor* mask = nullptr;
  REQUIRE(pxa_tensor_create(PXA_DTYPE_U8, 2, dims, &mask) == PXA_OK);
  uint8_t* bits = pxa_tensor_data(mask);
  size_t covered = 0;
  for (size_t px = 0; px < 32 * 32; ++px) {
    float valid = 0.0f;
    pxa_tensor_get_f32(normals, px * 4 + 3, &valid);
    bits[px] = valid != 0.0f;
    covered += bits[px];
  }
  REQUIRE(covered > 0);

  pxa_view_set* set = nullptr;
  REQUIRE(pxa_view_set_create(&set) == PXA_OK);
  REQUIRE(pxa_view_set_add_mask(set, mask, cam) == PXA_OK);
  CHECK(pxa_view_set_mask_count(set) == 1);
  pxa_placement p{};
  REQUIRE(pxa_place_auto(40.0, 1.0, 8, &p) == PXA_OK);
  pxa_grid* occ = nullptr;
  REQUIRE(pxa_carve(set, 0, &p, &occ) == PXA_OK);
  CHECK(pxa_grid_occupied_count(occ) > 0);
  CHECK(pxa_carve(set, 1, &p, &occ) == PXA_ERR_INVALID);

  pxa_tensor* wrong = nullptr;
  const uint64_t small[] = {16, 16};
  REQUIRE(pxa_tensor_create(PXA_DTYPE_U8, 2, small, &wrong) == PXA_OK);
  CHECK(pxa_view_set_add_mask(set, wrong, cam) == PXA_ERR_INVALID);

  pxa_tensor_free(wrong);
  pxa_grid_free(occ);
  pxa_view_set_free(set);
  pxa_tensor_free(mask);
  pxa_tensor_free(normals);
  pxa_camera_free(cam);
  pxa_mesh_free(mesh);
}

TEST_CASE("feature lifting through the C API") {
  pxa_camera* cam = nullptr;
  REQUIRE(pxa_camera_from_fov(40.0, 8, 8, &cam) == PXA_OK);
  const uint64_t dims[] = {8, 8, 2};
  pxa_tensor* level = nullptr;
  REQUIRE(pxa_tensor_create(PXA_DTYPE_F32, 3, dims, &level) == PXA_OK);
  for (size_t i = 0; i < 128; ++i) pxa_tensor_set_f32(level, i, 0.5f);
  pxa_view_set* set = nullptr;
  REQUIRE(pxa_view_set_create(&set) == PXA_OK);
  const pxa_tensor* levels[] = {level};
  REQUIRE(pxa_view_set_add_features(set, levels, 1, cam) == PXA_OK);
  pxa_placement p{};
  REQUIRE(pxa_place_auto(40.0, 1.0, 4, &p) == PXA_OK);
  pxa_tensor* vol = nullptr;
  REQUIRE(pxa_lift(set, 0, &p, 0, &vol) == PXA_OK);
  CHECK(pxa_tensor_ndim(vol) == 4);
  CHECK(pxa_tensor_dim(vol, 3) == 3);
  // Voxel (2, 2, 2) sits on the optical axis; front corners are outside the frustum.
  float f = 0.0f, count = 0.0f, corner = 1.0f;
  pxa_tensor_get_f32(vol, 42 * 3, &f);
  pxa_tensor_get_f32(vol, 42 * 3 + 2, &count);
  pxa_tensor_get_f32(vol, 2, &corner);
  CHECK(corner == 0.0f);
  CHECK(f == 0.5f);
  CHECK(count == 1.0f);
  pxa_tensor_free(vol);
  pxa_view_set_free(set);
  pxa_tensor_free(level);
  pxa_camera_free(cam);
}

TEST_CASE("geometry evaluation of identical meshes") {
  pxa_mesh* mesh = octahedron(0.3);
  pxa_geo_options opts{};
  pxa_geo_options_default(&opts);
  CHECK(opts.samples == 10000);
  CHECK(opts.emd_samples == 1024);
  CHECK(opts.tau == 0.02);
  opts.samples = 500;
  opts.emd_samples = 100;
  opts.seed = 7;
  pxa_geo_metrics g{};
  char* report = nullptr;
  REQUIRE(pxa_eval_geo(mesh, mesh, &opts, &g, &report) == PXA_OK);
  CHECK(g.cd == 0.0);
  CHECK(g.emd == 0.0);
  CHECK(g.fscore == 100.0);
  CHECK(std::string(report).find("conventions") != std::string::npos);
  pxa_string_free(report);
  opts.emd_samples = 2000;
  CHECK(pxa_eval_geo(mesh, mesh, &opts, &g, nullptr) == PXA_ERR_INVALID);
  pxa_mesh_free(mesh);
}

TEST_CASE("scene alignment through the C API") {
  pxa_mesh* mesh = octahedron(0.3);
  pxa_camera* cam = nullptr;
  REQUIRE(pxa_camera_from_fov(40.0, 48, 48, &cam) == PXA_OK);
  pxa_tensor* depth = nullptr;
  REQUIRE(pxa_render_depth(mesh, cam, &depth) == PXA_OK);
  pxa_intrinsics in{};
  pxa_camera_intrinsics(cam, &in);

  const uint64_t mdims[] = {48, 48};
  const uint64_t pdims[] = {48, 48, 4};
  pxa_tensor* mask = nullptr;
  pxa_tensor* points = nullptr;
  REQUIRE(pxa_tensor_create(PXA_DTYPE_U8, 2, mdims, &mask) == PXA_OK);
  REQUIRE(pxa_tensor_create(PXA_DTYPE_F32, 3, pdims, &points) == PXA_OK);
  for (int r = 0; r < 48; ++r)
    for (int c = 0; c < 48; ++c) {
      const size_t px = static_cast<size_t>(r) * 48 + c;
      float z = 0.0f, valid = 0.0f;
      pxa_tensor_get_f32(depth, px * 2, &z);
      pxa_tensor_get_f32(depth, px * 2 + 1, &valid);
      if (valid == 0.0f) continue;
      pxa_tensor_data(mask)[px] = 1;
      // Scene twice as far as the generated object.
      const double x = (c + 0.5 - in.cx) / in.fx * z, y = (r + 0.5 - in.cy) / in.fy * z;
      pxa_tensor_set_f32(points, px * 4 + 0, static_cast<float>(2.0 * x));
      pxa_tensor_set_f32(points, px * 4 + 1, static_cast<float>(2.0 * y));
      pxa_tensor_set_f32(points, px * 4 + 2, static_cast<float>(2.0 * z));
      pxa_tensor_set_f32(points, px * 4 + 3, 1.0f);
    }

  pxa_scene* scene = nullptr;
  REQUIRE(pxa_scene_create(cam, &scene) == PXA_OK);
  REQUIRE(pxa_scene_add_object(scene, "oct", mesh, mask) == PXA_OK);
  double alpha = 0.0;
  pxa_mesh* composed = nullptr;
  char* report = nullptr;
  pxa_align_options opts{10, 0};
  REQUIRE(pxa_scene_align(scene, points, &opts, &alpha, &composed, &report) == PXA_OK);
  // float32 point map storage limits the agreement.
  CHECK(std::abs(alpha - 2.0) < 1e-5);
  double v[3];
  pxa_mesh_vertex(composed, 4, v);
  CHECK(std::abs(v[2] - 2.3 * alpha) < 1e-12);
  CHECK(std::string(report).find("\"oct\"") != std::string::npos);
  pxa_string_free(report);
  pxa_mesh_free(composed);

  opts.min_pixels = 1000000;
  composed = nullptr;
  CHECK(pxa_scene_align(scene, points, &opts, &alpha, &composed, nullptr) == PXA_ERR_NUMERIC);
  CHECK(composed == nullptr);

  pxa_scene_free(scene);
  pxa_tensor_free(points);
  pxa_tensor_free(mask);
  pxa_tensor_free(depth);
  pxa_camera_free(cam);
  pxa_mesh_free(mesh);
}

TEST_CASE("synthetic case files") {
  TempDir dir;
  pxa_synth_case c{};
  pxa_synth_case_default(&c);
  c.image_size = 24;
  c.grid = 8;
  c.views = 2;
  const std::string out = dir.file("case");
  REQUIRE(pxa_synth_write(&c, out.c_str()) == PXA_OK);
  for (const char* name : {"gt.obj", "placement.json", "case.json", "pointmap.pxt", "view0.json",
                           "view1_mask.pxt", "view1_normals.pxt", "view1_depth.pxt"}) {
    CHECK(fs::exists(fs::path(out) / name));
  }
  c.radius = 0.7;
  const std::string bad = dir.file("bad");
  CHECK(pxa_synth_write(&c, bad.c_str()) == PXA_ERR_INVALID);
  CHECK_FALSE(fs::exists(bad));
}
