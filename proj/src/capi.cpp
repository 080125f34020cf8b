#include "pxa/pxa.h"

#include <cmath>
#include <cstring>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "pxa/camera.hpp"
#include "pxa/error.hpp"
#include "pxa/eval.hpp"
#include "pxa/hullgen.hpp"
#include "pxa/io.hpp"
#include "pxa/lift.hpp"
#include "pxa/parallel.hpp"
#include "pxa/placement.hpp"
#include "pxa/pxt.hpp"
#include "pxa/scene.hpp"
#include "pxa/synth.hpp"
#include "pxa/volume.hpp"

struct pxa_camera {
  pxa::Camera cam;
};

struct pxa_tensor {
  pxa::Tensor tensor;
};

struct pxa_mesh {
  pxa::TriMesh mesh;
};

struct pxa_grid {
  std::variant<pxa::SdfGrid, pxa::OccupancyGrid> grid;
};

struct pxa_view_set {
  std::vector<pxa::ViewInput> features;
  std::vector<pxa::MaskView> masks;
};

struct pxa_scene {
  pxa::Camera cam;
  std::vector<pxa::SceneObject> objects;
};

namespace {

using json = nlohmann::json;

thread_local std::string g_last_error;

pxa_status fail(pxa_status code, const std::string& msg) {
  g_last_error = msg;
  return code;
}

template <typename F>
pxa_status guarded(F&& body) {
  try {
    body();
    return PXA_OK;
  } catch (const pxa::Error& e) {
    return fail(e.kind() == pxa::ErrorKind::numeric ? PXA_ERR_NUMERIC : PXA_ERR_INVALID, e.what());
  } catch (const json::exception& e) {
    return fail(PXA_ERR_INVALID, e.what());
  } catch (const std::bad_alloc&) {
    return fail(PXA_ERR_NUMERIC, "out of memory");
  } catch (const std::exception& e) {
    return fail(PXA_ERR_NUMERIC, e.what());
  }
}

void require(const void* p, const char* what) {
  if (p == nullptr) pxa::throw_invalid(std::string("null ") + what);
}

char* dup_string(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

pxa::CubePlacement to_placement(const pxa_placement* p) {
  require(p, "placement");
  pxa::CubePlacement out{p->d, p->s, p->resolution};
  out.validate();
  return out;
}

pxa_placement from_placement(const pxa::CubePlacement& p) { return {p.d, p.s, p.resolution}; }

json number_or_inf(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return x;
}

// Rebuilds a FeatureVolume from its dense R^3 x (C + 1) tensor form.
pxa::FeatureVolume volume_from_tensor(const pxa::Tensor& t) {
  if (t.dtype != pxa::DType::f32 || t.dims.size() != 4 || t.dims[0] != t.dims[1] ||
      t.dims[1] != t.dims[2] || t.dims[3] < 2 || t.dims[0] == 0) {
    pxa::throw_invalid("feature volume must be an R x R x R x (C + 1) float32 tensor");
  }
  const int r = static_cast<int>(t.dims[0]);
  const int c = static_cast<int>(t.dims[3]) - 1;
  pxa::FeatureVolume vol(pxa::CubePlacement{1.0, 1.0, r}, c);
  std::size_t in = 0;
  for (std::size_t v = 0; v < vol.voxel_count(); ++v) {
    for (int ch = 0; ch < c; ++ch) vol.data[v * c + ch] = t.f32(in++);
    const float count = t.f32(in++);
    vol.view_count[v] = count > 0.0f ? static_cast<std::uint32_t>(count) : 0u;
    vol.valid[v] = count > 0.0f ? 1 : 0;
  }
  return vol;
}

const char* kCdConvention =
    "sum of the two directed mean squared nearest-neighbour distances";

}  // namespace

extern "C" {

const char* pxa_version(void) { return PXA_VERSION_STRING; }

const char* pxa_last_error(void) { return g_last_error.c_str(); }

void pxa_set_threads(int32_t threads) { pxa::set_thread_count(threads); }

void pxa_string_free(char* s) { delete[] s; }

pxa_status pxa_write_text(const char* path, const char* text) {
  return guarded([&] {
    require(path, "path");
    require(text, "text");
    pxa::write_text_atomic(path, text);
  });
}

// ---- cameras ---------------------------------------------------------------

pxa_status pxa_camera_create(const pxa_intrinsics* intrinsics, const double world_from_camera[16],
                             pxa_camera** out) {
  return guarded([&] {
    require(intrinsics, "intrinsics");
    require(out, "output");
    pxa::Camera cam;
    cam.intrinsics = {intrinsics->fx, intrinsics->fy, intrinsics->cx,
                      intrinsics->cy, intrinsics->width, intrinsics->height};
    cam.intrinsics.validate();
    if (world_from_camera != nullptr) {
      pxa::Mat4 m;
      for (int i = 0; i < 16; ++i) m(i / 4, i % 4) = world_from_camera[i];
      cam.world_from_camera = pxa::Pose::from_matrix(m);
    }
    *out = new pxa_camera{cam};
  });
}

pxa_status pxa_camera_from_fov(double fov_deg, int32_t width, int32_t height, pxa_camera** out) {
  return guarded([&] {
    require(out, "output");
    *out = new pxa_camera{{pxa::fov_to_intrinsics(fov_deg, width, height), pxa::Pose::identity()}};
  });
}

pxa_status pxa_camera_load(const char* path, pxa_camera** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "output");
    *out = new pxa_camera{pxa::load_camera(path)};
  });
}

pxa_status pxa_camera_save(const pxa_camera* cam, const char* path) {
  return guarded([&] {
    require(cam, "camera");
    require(path, "path");
    pxa::save_camera(path, cam->cam);
  });
}

pxa_status pxa_camera_to_json(const pxa_camera* cam, char** out_json) {
  return guarded([&] {
    require(cam, "camera");
    require(out_json, "output");
    *out_json = dup_string(pxa::camera_to_json(cam->cam));
  });
}

pxa_status pxa_camera_intrinsics(const pxa_camera* cam, pxa_intrinsics* out) {
  return guarded([&] {
    require(cam, "camera");
    require(out, "output");
    const auto& i = cam->cam.intrinsics;
    *out = {i.fx, i.fy, i.cx, i.cy, i.width, i.height};
  });
}

pxa_status pxa_camera_pose(const pxa_camera* cam, double out_world_from_camera[16]) {
  return guarded([&] {
    require(cam, "camera");
    require(out_world_from_camera, "output");
    const pxa::Mat4 m = cam->cam.world_from_camera.matrix();
    for (int i = 0; i < 16; ++i) out_world_from_camera[i] = m(i / 4, i % 4);
  });
}

pxa_status pxa_camera_project(const pxa_camera* cam, const double point[3], double out_uvz[3]) {
  return guarded([&] {
    require(cam, "camera");
    require(point, "point");
    require(out_uvz, "output");
    const auto px = pxa::project(pxa::Vec3(point[0], point[1], point[2]), cam->cam.intrinsics);
    out_uvz[0] = px.u;
    out_uvz[1] = px.v;
    out_uvz[2] = px.z;
  });
}

pxa_status pxa_camera_unproject(const pxa_camera* cam, double u, double v, double out_dir[3]) {
  return guarded([&] {
    require(cam, "camera");
    require(out_dir, "output");
    const pxa::Ray ray = pxa::unproject(u, v, cam->cam.intrinsics);
    for (int i = 0; i < 3; ++i) out_dir[i] = ray.direction[i];
  });
}

void pxa_camera_free(pxa_camera* cam) { delete cam; }

// ---- placement -------------------------------------------------------------

pxa_status pxa_place_auto(double fov_deg, double s, int32_t resolution, pxa_placement* out) {
  return guarded([&] {
    require(out, "output");
    *out = from_placement(pxa::auto_place(fov_deg, s, resolution));
  });
}

pxa_status pxa_placement_validate(const pxa_placement* p) {
  return guarded([&] { to_placement(p); });
}

pxa_status pxa_voxel_center(const pxa_placement* p, int32_t i, int32_t j, int32_t k, double out[3]) {
  return guarded([&] {
    require(out, "output");
    const pxa::Vec3 c = pxa::voxel_center(i, j, k, to_placement(p));
    for (int a = 0; a < 3; ++a) out[a] = c[a];
  });
}

// ---- tensors ---------------------------------------------------------------

pxa_status pxa_tensor_create(pxa_dtype dtype, size_t ndim, const uint64_t* dims, pxa_tensor** out) {
  return guarded([&] {
    require(out, "output");
    if (ndim > 0) require(dims, "dims");
    if (dtype != PXA_DTYPE_F32 && dtype != PXA_DTYPE_U8) pxa::throw_invalid("unknown dtype");
    if (ndim > 255) pxa::throw_invalid("PXT supports at most 255 dimensions");
    *out = new pxa_tensor{pxa::Tensor::zeros(static_cast<pxa::DType>(dtype),
                                             std::vector<std::uint64_t>(dims, dims + ndim))};
  });
}

pxa_status pxa_tensor_load(const char* path, pxa_tensor** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "output");
    *out = new pxa_tensor{pxa::read_pxt(path)};
  });
}

pxa_status pxa_tensor_save(const pxa_tensor* t, const char* path) {
  return guarded([&] {
    require(t, "tensor");
    require(path, "path");
    pxa::write_pxt(path, t->tensor);
  });
}

pxa_dtype pxa_tensor_dtype(const pxa_tensor* t) { return static_cast<pxa_dtype>(t->tensor.dtype); }

size_t pxa_tensor_ndim(const pxa_tensor* t) { return t->tensor.dims.size(); }

uint64_t pxa_tensor_dim(const pxa_tensor* t, size_t axis) {
  return axis < t->tensor.dims.size() ? t->tensor.dims[axis] : 0;
}

size_t pxa_tensor_element_count(const pxa_tensor* t) { return t->tensor.element_count(); }

uint8_t* pxa_tensor_data(pxa_tensor* t) { return t->tensor.payload.data(); }

pxa_status pxa_tensor_get_f32(const pxa_tensor* t, size_t index, float* out) {
  return guarded([&] {
    require(t, "tensor");
    require(out, "output");
    if (t->tensor.dtype != pxa::DType::f32) pxa::throw_invalid("tensor is not float32");
    if (index >= t->tensor.element_count()) pxa::throw_invalid("tensor index out of range");
    *out = t->tensor.f32(index);
  });
}

pxa_status pxa_tensor_set_f32(pxa_tensor* t, size_t index, float value) {
  return guarded([&] {
    require(t, "tensor");
    if (t->tensor.dtype != pxa::DType::f32) pxa::throw_invalid("tensor is not float32");
    if (index >= t->tensor.element_count()) pxa::throw_invalid("tensor index out of range");
    t->tensor.set_f32(index, value);
  });
}

void pxa_tensor_free(pxa_tensor* t) { delete t; }

// ---- meshes ----------------------------------------------------------------

pxa_status pxa_mesh_create(const double* vertices, size_t vertex_count, const int32_t* triangles,
                           size_t triangle_count, pxa_mesh** out) {
  return guarded([&] {
    require(out, "output");
    if (vertex_count > 0) require(vertices, "vertices");
    if (triangle_count > 0) require(triangles, "triangles");
    pxa::TriMesh mesh;
    for (size_t i = 0; i < vertex_count; ++i) {
      mesh.vertices.emplace_back(vertices[3 * i], vertices[3 * i + 1], vertices[3 * i + 2]);
    }
    for (size_t i = 0; i < triangle_count; ++i) {
      mesh.triangles.push_back({triangles[3 * i], triangles[3 * i + 1], triangles[3 * i + 2]});
    }
    mesh.validate();
    *out = new pxa_mesh{std::move(mesh)};
  });
}

pxa_status pxa_mesh_load_obj(const char* path, pxa_mesh** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "output");
    *out = new pxa_mesh{pxa::load_obj(path)};
  });
}

pxa_status pxa_mesh_save_obj(const pxa_mesh* mesh, const char* path) {
  return guarded([&] {
    require(mesh, "mesh");
    require(path, "path");
    pxa::save_obj(path, mesh->mesh);
  });
}

size_t pxa_mesh_vertex_count(const pxa_mesh* mesh) { return mesh->mesh.vertices.size(); }

size_t pxa_mesh_triangle_count(const pxa_mesh* mesh) { return mesh->mesh.triangles.size(); }

pxa_status pxa_mesh_vertex(const pxa_mesh* mesh, size_t index, double out[3]) {
  return guarded([&] {
    require(mesh, "mesh");
    require(out, "output");
    if (index >= mesh->mesh.vertices.size()) pxa::throw_invalid("vertex index out of range");
    for (int a = 0; a < 3; ++a) out[a] = mesh->mesh.vertices[index][a];
  });
}

pxa_status pxa_mesh_triangle(const pxa_mesh* mesh, size_t index, int32_t out[3]) {
  return guarded([&] {
    require(mesh, "mesh");
    require(out, "output");
    if (index >= mesh->mesh.triangles.size()) pxa::throw_invalid("triangle index out of range");
    for (int a = 0; a < 3; ++a) out[a] = mesh->mesh.triangles[index][a];
  });
}

void pxa_mesh_free(pxa_mesh* mesh) { delete mesh; }

// ---- grids -----------------------------------------------------------------

pxa_status pxa_grid_load(const char* path, pxa_grid** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "output");
    const pxa::Tensor t = pxa::read_pxt(path);
    if (t.dtype == pxa::DType::f32) {
      *out = new pxa_grid{pxa::load_sdf_grid(path)};
    } else {
      *out = new pxa_grid{pxa::load_occupancy_grid(path)};
    }
  });
}

pxa_status pxa_grid_save(const pxa_grid* grid, const char* path) {
  return guarded([&] {
    require(grid, "grid");
    require(path, "path");
    if (const auto* sdf = std::get_if<pxa::SdfGrid>(&grid->grid)) {
      pxa::save_sdf_grid(path, *sdf);
    } else {
      pxa::save_occupancy_grid(path, std::get<pxa::OccupancyGrid>(grid->grid));
    }
  });
}

pxa_grid_kind pxa_grid_kind_of(const pxa_grid* grid) {
  return std::holds_alternative<pxa::SdfGrid>(grid->grid) ? PXA_GRID_SDF : PXA_GRID_OCCUPANCY;
}

pxa_status pxa_grid_placement(const pxa_grid* grid, pxa_placement* out) {
  return guarded([&] {
    require(grid, "grid");
    require(out, "output");
    std::visit([&](const auto& g) { *out = from_placement(g.placement); }, grid->grid);
  });
}

size_t pxa_grid_occupied_count(const pxa_grid* grid) {
  if (const auto* sdf = std::get_if<pxa::SdfGrid>(&grid->grid)) {
    return pxa::occupancy_from_sdf(*sdf).count();
  }
  return std::get<pxa::OccupancyGrid>(grid->grid).count();
}

pxa_status pxa_grid_value(const pxa_grid* grid, int32_t i, int32_t j, int32_t k, double* out) {
  return guarded([&] {
    require(grid, "grid");
    require(out, "output");
    std::visit(
        [&](const auto& g) {
          const int r = g.placement.resolution;
          if (i < 0 || j < 0 || k < 0 || i >= r || j >= r || k >= r) {
            pxa::throw_invalid("voxel index out of range");
          }
          *out = static_cast<double>(g.at(i, j, k));
        },
        grid->grid);
  });
}

pxa_status pxa_grid_to_occupancy(const pxa_grid* sdf, double threshold, pxa_grid** out) {
  return guarded([&] {
    require(sdf, "grid");
    require(out, "output");
    const auto* g = std::get_if<pxa::SdfGrid>(&sdf->grid);
    if (g == nullptr) pxa::throw_invalid("expected an SDF grid");
    *out = new pxa_grid{pxa::occupancy_from_sdf(*g, threshold)};
  });
}

pxa_status pxa_grid_to_sdf(const pxa_grid* occupancy, pxa_grid** out) {
  return guarded([&] {
    require(occupancy, "grid");
    require(out, "output");
    const auto* g = std::get_if<pxa::OccupancyGrid>(&occupancy->grid);
    if (g == nullptr) pxa::throw_invalid("expected an occupancy grid");
    *out = new pxa_grid{pxa::sdf_from_occupancy(*g)};
  });
}

void pxa_grid_free(pxa_grid* grid) { delete grid; }

pxa_status pxa_voxelize(const pxa_mesh* mesh, const pxa_placement* p, pxa_grid** out) {
  return guarded([&] {
    require(mesh, "mesh");
    require(out, "output");
    *out = new pxa_grid{pxa::voxelize_sdf(mesh->mesh, to_placement(p))};
  });
}

pxa_status pxa_marching_cubes(const pxa_grid* grid, double iso, pxa_mesh** out) {
  return guarded([&] {
    require(grid, "grid");
    require(out, "output");
    if (const auto* sdf = std::get_if<pxa::SdfGrid>(&grid->grid)) {
      *out = new pxa_mesh{pxa::marching_cubes(*sdf, iso)};
    } else {
      const auto sdf2 = pxa::sdf_from_occupancy(std::get<pxa::OccupancyGrid>(grid->grid));
      *out = new pxa_mesh{pxa::marching_cubes(sdf2, iso)};
    }
  });
}

// ---- views -----------------------------------------------------------------

pxa_status pxa_view_set_create(pxa_view_set** out) {
  return guarded([&] {
    require(out, "output");
    *out = new pxa_view_set{};
  });
}

pxa_status pxa_view_set_add_features(pxa_view_set* set, const pxa_tensor* const* levels,
                                     size_t level_count, const pxa_camera* cam) {
  return guarded([&] {
    require(set, "view set");
    require(cam, "camera");
    if (level_count == 0) pxa::throw_invalid("a feature view needs at least one level");
    require(levels, "levels");
    pxa::ViewInput view;
    view.intrinsics = cam->cam.intrinsics;
    view.world_from_camera = cam->cam.world_from_camera;
    view.pyramid.full_width = view.intrinsics.width;
    view.pyramid.full_height = view.intrinsics.height;
    for (size_t l = 0; l < level_count; ++l) {
      require(levels[l], "level tensor");
      view.pyramid.levels.push_back(pxa::feature_map_from_tensor(levels[l]->tensor));
    }
    view.validate();
    set->features.push_back(std::move(view));
  });
}

pxa_status pxa_view_set_add_mask(pxa_view_set* set, const pxa_tensor* mask, const pxa_camera* cam) {
  return guarded([&] {
    require(set, "view set");
    require(mask, "mask");
    require(cam, "camera");
    pxa::MaskView view;
    view.mask = pxa::mask_from_tensor(mask->tensor, view.height, view.width);
    view.intrinsics = cam->cam.intrinsics;
    view.world_from_camera = cam->cam.world_from_camera;
    view.validate();
    set->masks.push_back(std::move(view));
  });
}

size_t pxa_view_set_feature_count(const pxa_view_set* set) { return set->features.size(); }

size_t pxa_view_set_mask_count(const pxa_view_set* set) { return set->masks.size(); }

void pxa_view_set_free(pxa_view_set* set) { delete set; }

pxa_status pxa_lift(const pxa_view_set* set, size_t reference, const pxa_placement* p,
                    int32_t nearest_sampling, pxa_tensor** out_volume) {
  return guarded([&] {
    require(set, "view set");
    require(out_volume, "output");
    pxa::LiftOptions opts;
    opts.sampling = nearest_sampling ? pxa::Sampling::nearest : pxa::Sampling::bilinear;
    const pxa::FeatureVolume vol = pxa::fuse_views(set->features, reference, to_placement(p), opts);
    *out_volume = new pxa_tensor{pxa::volume_to_tensor(vol)};
  });
}

pxa_status pxa_condition_add(const pxa_tensor* volume, const pxa_tensor* target, pxa_tensor** out) {
  return guarded([&] {
    require(volume, "volume");
    require(target, "target");
    require(out, "output");
    const pxa::FeatureVolume vol = volume_from_tensor(volume->tensor);
    const auto& t = target->tensor;
    const auto r = static_cast<std::uint64_t>(vol.resolution());
    if (t.dtype != pxa::DType::f32 ||
        t.dims != std::vector<std::uint64_t>{r, r, r, static_cast<std::uint64_t>(vol.channels)}) {
      pxa::throw_invalid("target volume shape does not match the feature volume");
    }
    const std::vector<float> tf = t.to_f32();
    const std::vector<double> sum =
        pxa::condition_add(vol, std::vector<double>(tf.begin(), tf.end()));
    *out = new pxa_tensor{pxa::Tensor::from_f32(t.dims, std::vector<float>(sum.begin(), sum.end()))};
  });
}

pxa_status pxa_carve(const pxa_view_set* set, size_t reference, const pxa_placement* p,
                     pxa_grid** out) {
  return guarded([&] {
    require(set, "view set");
    require(out, "output");
    *out = new pxa_grid{pxa::carve(set->masks, reference, to_placement(p))};
  });
}

pxa_status pxa_generate_mesh(const pxa_view_set* set, size_t reference, const pxa_placement* p,
                             int32_t smooth_width, pxa_mesh** out) {
  return guarded([&] {
    require(set, "view set");
    require(out, "output");
    *out = new pxa_mesh{pxa::generate_mesh(set->masks, reference, to_placement(p), smooth_width)};
  });
}

// ---- evaluation ------------------------------------------------------------

pxa_status pxa_render_normals(const pxa_mesh* mesh, const pxa_camera* cam, pxa_tensor** out) {
  return guarded([&] {
    require(mesh, "mesh");
    require(cam, "camera");
    require(out, "output");
    if (mesh->mesh.empty()) pxa::throw_invalid("cannot render an empty mesh");
    *out = new pxa_tensor{pxa::normal_map_to_tensor(
        pxa::render_normals(mesh->mesh, cam->cam.intrinsics, cam->cam.world_from_camera))};
  });
}

pxa_status pxa_render_depth(const pxa_mesh* mesh, const pxa_camera* cam, pxa_tensor** out) {
  return guarded([&] {
    require(mesh, "mesh");
    require(cam, "camera");
    require(out, "output");
    if (mesh->mesh.empty()) pxa::throw_invalid("cannot render an empty mesh");
    *out = new pxa_tensor{pxa::depth_map_to_tensor(
        pxa::render_depth(mesh->mesh, cam->cam.intrinsics, cam->cam.world_from_camera))};
  });
}

pxa_status pxa_eval_normals(const pxa_tensor* pred, const pxa_tensor* gt, int32_t boundary_width,
                            pxa_normal_metrics* out, char** out_report_json) {
  return guarded([&] {
    require(pred, "prediction");
    require(gt, "ground truth");
    pxa::NormalMetricOptions opts;
    opts.boundary_width = boundary_width;
    const pxa::NormalMetrics m = pxa::normal_metrics(pxa::normal_map_from_tensor(pred->tensor),
                                                     pxa::normal_map_from_tensor(gt->tensor), opts);
    json report;
    report["iou"] = m.iou;
    report["intersection_pixels"] = m.intersection;
    report["union_pixels"] = m.union_count;
    report["angular_present"] = m.angular_present;
    if (m.angular_present) {
      report["psnr"] = number_or_inf(m.psnr);
      report["ssim"] = m.ssim;
      report["mean"] = m.mean;
      report["median"] = m.median;
      report["mean_b"] = m.mean_b ? json(*m.mean_b) : json(nullptr);
      report["boundary_pixels"] = m.boundary_pixels;
      report["acc_11.25"] = m.acc_1125;
      report["acc_22.5"] = m.acc_225;
      report["acc_30"] = m.acc_30;
    } else {
      for (const char* key : {"psnr", "ssim", "mean", "median", "mean_b", "acc_11.25", "acc_22.5",
                              "acc_30"}) {
        report[key] = nullptr;
      }
    }
    report["conventions"] = {
        {"angles", "degrees, atan2(|a x b|, a . b) per pixel over the valid-mask intersection"},
        {"accuracy_thresholds_deg", {11.25, 22.5, 30.0}},
        {"boundary_width", boundary_width},
        {"boundary_band", "Chebyshev distance to gt-valid pixels with a gt-invalid 4-neighbour"},
        {"psnr_ssim_region", "intersection of valid masks"},
        {"psnr_ssim_encoding", "(n + 1) / 2 per channel, peak 1"},
        {"ssim_window", "11x11 gaussian, sigma 1.5, C1 = 0.01^2, C2 = 0.03^2, masked"},
        {"iou", "percent over valid masks"}};
    if (out != nullptr) {
      *out = pxa_normal_metrics{};
      out->iou = m.iou;
      out->angular_present = m.angular_present ? 1 : 0;
      out->psnr = m.psnr;
      out->ssim = m.ssim;
      out->mean = m.mean;
      out->median = m.median;
      out->mean_b_present = m.mean_b.has_value() ? 1 : 0;
      out->mean_b = m.mean_b.value_or(0.0);
      out->acc_1125 = m.acc_1125;
      out->acc_225 = m.acc_225;
      out->acc_30 = m.acc_30;
    }
    if (out_report_json != nullptr) *out_report_json = dup_string(report.dump(2) + "\n");
  });
}

void pxa_geo_options_default(pxa_geo_options* out) {
  const pxa::GeoEvalOptions d;
  *out = {d.samples, d.emd_samples, d.tau, d.seed};
}

pxa_status pxa_eval_geo(const pxa_mesh* pred, const pxa_mesh* gt, const pxa_geo_options* opts,
                        pxa_geo_metrics* out, char** out_report_json) {
  return guarded([&] {
    require(pred, "prediction");
    require(gt, "ground truth");
    pxa::GeoEvalOptions o;
    if (opts != nullptr) {
      o.samples = opts->samples;
      o.emd_samples = opts->emd_samples;
      o.tau = opts->tau;
      o.seed = opts->seed;
    }
    const pxa::GeoMetrics m = pxa::evaluate_geometry(pred->mesh, gt->mesh, o);
    if (out != nullptr) *out = {m.cd, m.emd, m.fscore, m.tau, m.samples, m.emd_samples};
    if (out_report_json != nullptr) {
      json report;
      report["cd"] = m.cd;
      report["emd"] = m.emd;
      report["fscore"] = m.fscore;
      report["tau"] = m.tau;
      report["samples"] = m.samples;
      report["emd_samples"] = m.emd_samples;
      report["seed"] = o.seed;
      report["conventions"] = {
          {"cd", kCdConvention},
          {"emd", "exact optimal assignment (Hungarian), mean matched Euclidean distance over the "
                  "first emd_samples points of each cloud"},
          {"fscore", "percent, 2PR/(P+R) with nearest-neighbour distance <= tau"},
          {"tau", m.tau},
          {"samples", m.samples},
          {"emd_samples", m.emd_samples},
          {"sampling", "area-weighted triangles, uniform barycentric, xorshift64* seeded via "
                       "splitmix64; both meshes use the same seed"},
          {"units", "mesh units (cube frame), no normalization"}};
      *out_report_json = dup_string(report.dump(2) + "\n");
    }
  });
}

// ---- scenes ----------------------------------------------------------------

pxa_status pxa_scene_create(const pxa_camera* cam, pxa_scene** out) {
  return guarded([&] {
    require(cam, "camera");
    require(out, "output");
    *out = new pxa_scene{cam->cam, {}};
  });
}

pxa_status pxa_scene_add_object(pxa_scene* scene, const char* id, const pxa_mesh* mesh,
                                const pxa_tensor* visibility_mask) {
  return guarded([&] {
    require(scene, "scene");
    require(id, "id");
    require(mesh, "mesh");
    require(visibility_mask, "mask");
    pxa::SceneObject obj;
    obj.id = id;
    obj.mesh = mesh->mesh;
    int h = 0;
    int w = 0;
    obj.visibility_mask = pxa::mask_from_tensor(visibility_mask->tensor, h, w);
    obj.intrinsics = scene->cam.intrinsics;
    if (h != obj.intrinsics.height || w != obj.intrinsics.width) {
      pxa::throw_invalid("mask of object '" + obj.id + "' does not match the scene camera");
    }
    const auto& intr = obj.intrinsics;
    const double fov = intr.width == intr.height
                           ? 2.0 * std::atan(intr.width / (2.0 * intr.fx)) * 180.0 / M_PI
                           : pxa::kDefaultFovDeg;
    obj.placement = pxa::auto_place(fov, 1.0, 1);
    obj.validate();
    scene->objects.push_back(std::move(obj));
  });
}

pxa_status pxa_scene_align(const pxa_scene* scene, const pxa_tensor* point_map,
                           const pxa_align_options* opts, double* out_alphas, pxa_mesh** out_mesh,
                           char** out_report_json) {
  return guarded([&] {
    require(scene, "scene");
    require(point_map, "point map");
    if (scene->objects.empty()) pxa::throw_invalid("scene has no objects");
    pxa::AlignOptions o;
    if (opts != nullptr) {
      o.min_pixels = opts->min_pixels;
      o.trim = opts->trim != 0;
    }
    const pxa::GlobalPointMap map = pxa::point_map_from_tensor(point_map->tensor);
    std::vector<pxa::AlignmentResult> results;
    for (const auto& obj : scene->objects) {
      try {
        results.push_back(pxa::align_object(obj, map, o));
      } catch (const pxa::Error& e) {
        throw pxa::Error(e.kind(), "object '" + obj.id + "': " + e.what());
      }
    }
    pxa::ComposedScene composed = pxa::compose_scene(scene->objects, results);
    if (out_alphas != nullptr) {
      for (std::size_t i = 0; i < results.size(); ++i) out_alphas[i] = results[i].alpha;
    }
    if (out_report_json != nullptr) {
      json objects = json::array();
      for (std::size_t i = 0; i < results.size(); ++i) {
        objects.push_back({{"id", scene->objects[i].id},
                           {"alpha", results[i].alpha},
                           {"residual_rms", results[i].residual_rms},
                           {"pixel_count", results[i].pixel_count}});
      }
      json report;
      report["objects"] = objects;
      report["conventions"] = {
          {"model", "single scale alpha about the camera origin, minimizing sum |alpha p - q|^2"},
          {"constraint_pixels", "visibility mask & point-map valid & rendered depth valid"},
          {"min_pixels", o.min_pixels},
          {"trim", o.trim ? "one round, worst 10% residuals dropped" : "off"}};
      *out_report_json = dup_string(report.dump(2) + "\n");
    }
    if (out_mesh != nullptr) *out_mesh = new pxa_mesh{std::move(composed.mesh)};
  });
}

void pxa_scene_free(pxa_scene* scene) { delete scene; }

// ---- synthetic data --------------------------------------------------------

void pxa_synth_case_default(pxa_synth_case* out) {
  const pxa::SyntheticCase d;
  *out = pxa_synth_case{};
  out->shape = "sphere";
  out->radius = d.radius;
  for (int a = 0; a < 3; ++a) out->half_extents[a] = d.half_extents[a];
  out->major_radius = d.major_radius;
  out->minor_radius = d.minor_radius;
  out->subdivisions = d.subdivisions;
  out->views = d.views;
  out->fov_deg = d.fov_deg;
  out->view_distance = d.view_distance;
  out->image_size = d.image_size;
  out->grid = d.grid;
  out->cube_scale = d.cube_scale;
  out->seed = d.seed;
  out->random_rotation = d.random_rotation ? 1 : 0;
  out->pointmap_scale = d.pointmap_scale;
}

pxa_status pxa_synth_write(const pxa_synth_case* c, const char* out_dir) {
  return guarded([&] {
    require(c, "case");
    require(out_dir, "output directory");
    require(c->shape, "shape");
    pxa::SyntheticCase spec;
    spec.shape = pxa::parse_shape_kind(c->shape);
    spec.radius = c->radius;
    spec.half_extents = pxa::Vec3(c->half_extents[0], c->half_extents[1], c->half_extents[2]);
    spec.major_radius = c->major_radius;
    spec.minor_radius = c->minor_radius;
    spec.subdivisions = c->subdivisions;
    spec.views = c->views;
    spec.fov_deg = c->fov_deg;
    spec.view_distance = c->view_distance;
    spec.image_size = c->image_size;
    spec.grid = c->grid;
    spec.cube_scale = c->cube_scale;
    spec.seed = c->seed;
    spec.random_rotation = c->random_rotation != 0;
    spec.pointmap_scale = c->pointmap_scale;
    const pxa::SyntheticScene scene = pxa::make_synthetic(spec);

    // Serialize everything before touching the filesystem.
    namespace fs = std::filesystem;
    const fs::path dir(out_dir);
    std::vector<std::pair<fs::path, std::vector<std::uint8_t>>> files;
    auto add_text = [&](const std::string& name, const std::string& text) {
      files.emplace_back(dir / name, std::vector<std::uint8_t>(text.begin(), text.end()));
    };
    add_text("gt.obj", pxa::format_obj(scene.mesh));
    add_text("placement.json", pxa::placement_to_json(scene.placement));
    files.emplace_back(dir / "pointmap.pxt", pxa::encode_pxt(pxa::point_map_to_tensor(scene.point_map)));
    json views = json::array();
    for (std::size_t v = 0; v < scene.views.size(); ++v) {
      const auto& view = scene.views[v];
      const std::string stem = "view" + std::to_string(v);
      add_text(stem + ".json", pxa::camera_to_json(view.camera));
      files.emplace_back(dir / (stem + "_mask.pxt"),
                         pxa::encode_pxt(pxa::mask_to_tensor(view.mask, view.depth.height,
                                                             view.depth.width)));
      files.emplace_back(dir / (stem + "_normals.pxt"),
                         pxa::encode_pxt(pxa::normal_map_to_tensor(view.normals)));
      files.emplace_back(dir / (stem + "_depth.pxt"),
                         pxa::encode_pxt(pxa::depth_map_to_tensor(view.depth)));
      views.push_back({{"camera", stem + ".json"},
                       {"mask", stem + "_mask.pxt"},
                       {"normals", stem + "_normals.pxt"},
                       {"depth", stem + "_depth.pxt"}});
    }
    json manifest;
    manifest["shape"] = c->shape;
    manifest["radius"] = spec.radius;
    manifest["half_extents"] = {spec.half_extents.x(), spec.half_extents.y(), spec.half_extents.z()};
    manifest["major_radius"] = spec.major_radius;
    manifest["minor_radius"] = spec.minor_radius;
    manifest["subdivisions"] = spec.subdivisions;
    manifest["fov_deg"] = spec.fov_deg;
    manifest["view_distance"] = spec.view_distance;
    manifest["image_size"] = spec.image_size;
    manifest["grid"] = spec.grid;
    manifest["cube_scale"] = spec.cube_scale;
    manifest["seed"] = spec.seed;
    manifest["random_rotation"] = spec.random_rotation;
    manifest["pointmap_scale"] = spec.pointmap_scale;
    manifest["reference_view"] = 0;
    manifest["views"] = views;
    add_text("case.json", manifest.dump(2) + "\n");

    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) pxa::throw_invalid("cannot create output directory '" + dir.string() + "': " + ec.message());
    std::vector<fs::path> written;
    try {
      for (const auto& [path, bytes] : files) {
        pxa::write_file_atomic(path.string(), bytes);
        written.push_back(path);
      }
    } catch (...) {
      for (const auto& p : written) fs::remove(p, ec);
      throw;
    }
  });
}

}  // extern "C"
