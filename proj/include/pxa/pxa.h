/*
 * pxa: pixel-aligned 3D geometry toolkit, C interface.
 *
 * Every object is an opaque handle created by a pxa_*_create/load call and
 * released with the matching pxa_*_free. Functions that can fail return a
 * pxa_status; on failure a message is available from pxa_last_error() on the
 * same thread until the next failing call. Output handles are only written
 * on success.
 *
 * Frames: camera frame is +x right, +y down, +z forward; pixel i covers
 * [i, i+1). Poses are world-from-camera, 4x4 row-major.
 */
#ifndef PXA_H
#define PXA_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(PXA_BUILDING_LIBRARY)
#define PXA_API __attribute__((visibility("default")))
#else
#define PXA_API
#endif

/* Values match the CLI exit codes. */
typedef enum pxa_status {
  PXA_OK = 0,
  PXA_ERR_INVALID = 2, /* bad arguments, files or formats */
  PXA_ERR_NUMERIC = 3  /* degenerate geometry or failed numerics */
} pxa_status;

PXA_API const char* pxa_version(void);
PXA_API const char* pxa_last_error(void);
/* Worker threads for parallel loops; 0 = hardware concurrency. Results do
 * not depend on the thread count. */
PXA_API void pxa_set_threads(int32_t threads);
/* Releases strings returned through char** out-parameters. */
PXA_API void pxa_string_free(char* s);
/* Atomic (temp file + rename) text write. */
PXA_API pxa_status pxa_write_text(const char* path, const char* text);

/* ---- cameras ------------------------------------------------------------ */

typedef struct pxa_camera pxa_camera;

typedef struct pxa_intrinsics {
  double fx, fy, cx, cy;
  int32_t width, height;
} pxa_intrinsics;

/* world_from_camera may be NULL for the identity pose. */
PXA_API pxa_status pxa_camera_create(const pxa_intrinsics* intrinsics,
                                     const double world_from_camera[16],
                                     pxa_camera** out);
PXA_API pxa_status pxa_camera_from_fov(double fov_deg, int32_t width, int32_t height,
                                       pxa_camera** out);
PXA_API pxa_status pxa_camera_load(const char* path, pxa_camera** out);
PXA_API pxa_status pxa_camera_save(const pxa_camera* cam, const char* path);
PXA_API pxa_status pxa_camera_to_json(const pxa_camera* cam, char** out_json);
PXA_API pxa_status pxa_camera_intrinsics(const pxa_camera* cam, pxa_intrinsics* out);
PXA_API pxa_status pxa_camera_pose(const pxa_camera* cam, double out_world_from_camera[16]);
/* Camera-frame point to (u, v, z); fails with PXA_ERR_NUMERIC if z <= 0. */
PXA_API pxa_status pxa_camera_project(const pxa_camera* cam, const double point[3],
                                      double out_uvz[3]);
/* Unit camera-frame ray direction through pixel coordinate (u, v). */
PXA_API pxa_status pxa_camera_unproject(const pxa_camera* cam, double u, double v,
                                        double out_dir[3]);
PXA_API void pxa_camera_free(pxa_camera* cam);

/* ---- cube placement ----------------------------------------------------- */

typedef struct pxa_placement {
  double d;           /* camera plane to cube center */
  double s;           /* cube edge length */
  int32_t resolution; /* voxels per axis */
} pxa_placement;

PXA_API pxa_status pxa_place_auto(double fov_deg, double s, int32_t resolution,
                                  pxa_placement* out);
PXA_API pxa_status pxa_placement_validate(const pxa_placement* p);
PXA_API pxa_status pxa_voxel_center(const pxa_placement* p, int32_t i, int32_t j, int32_t k,
                                    double out[3]);

/* ---- PXT tensors -------------------------------------------------------- */

typedef struct pxa_tensor pxa_tensor;

typedef enum pxa_dtype { PXA_DTYPE_F32 = 1, PXA_DTYPE_U8 = 2 } pxa_dtype;

/* Zero-filled tensor. */
PXA_API pxa_status pxa_tensor_create(pxa_dtype dtype, size_t ndim, const uint64_t* dims,
                                     pxa_tensor** out);
PXA_API pxa_status pxa_tensor_load(const char* path, pxa_tensor** out);
PXA_API pxa_status pxa_tensor_save(const pxa_tensor* t, const char* path);
PXA_API pxa_dtype pxa_tensor_dtype(const pxa_tensor* t);
PXA_API size_t pxa_tensor_ndim(const pxa_tensor* t);
PXA_API uint64_t pxa_tensor_dim(const pxa_tensor* t, size_t axis);
PXA_API size_t pxa_tensor_element_count(const pxa_tensor* t);
/* Raw little-endian payload (element_count * element size bytes). */
PXA_API uint8_t* pxa_tensor_data(pxa_tensor* t);
PXA_API pxa_status pxa_tensor_get_f32(const pxa_tensor* t, size_t index, float* out);
PXA_API pxa_status pxa_tensor_set_f32(pxa_tensor* t, size_t index, float value);
PXA_API void pxa_tensor_free(pxa_tensor* t);

/* ---- meshes ------------------------------------------------------------- */

typedef struct pxa_mesh pxa_mesh;

PXA_API pxa_status pxa_mesh_create(const double* vertices, size_t vertex_count,
                                   const int32_t* triangles, size_t triangle_count,
                                   pxa_mesh** out);
PXA_API pxa_status pxa_mesh_load_obj(const char* path, pxa_mesh** out);
PXA_API pxa_status pxa_mesh_save_obj(const pxa_mesh* mesh, const char* path);
PXA_API size_t pxa_mesh_vertex_count(const pxa_mesh* mesh);
PXA_API size_t pxa_mesh_triangle_count(const pxa_mesh* mesh);
PXA_API pxa_status pxa_mesh_vertex(const pxa_mesh* mesh, size_t index, double out[3]);
PXA_API pxa_status pxa_mesh_triangle(const pxa_mesh* mesh, size_t index, int32_t out[3]);
PXA_API void pxa_mesh_free(pxa_mesh* mesh);

/* ---- voxel grids -------------------------------------------------------- */

typedef struct pxa_grid pxa_grid;

typedef enum pxa_grid_kind { PXA_GRID_SDF = 1, PXA_GRID_OCCUPANCY = 2 } pxa_grid_kind;

/* Reads the PXT grid plus its "<path>.json" placement sidecar; float32
 * grids load as SDF, uint8 grids as occupancy. */
PXA_API pxa_status pxa_grid_load(const char* path, pxa_grid** out);
PXA_API pxa_status pxa_grid_save(const pxa_grid* grid, const char* path);
PXA_API pxa_grid_kind pxa_grid_kind_of(const pxa_grid* grid);
PXA_API pxa_status pxa_grid_placement(const pxa_grid* grid, pxa_placement* out);
/* Occupied voxels (occupancy) or voxels with value <= 0 (SDF). */
PXA_API size_t pxa_grid_occupied_count(const pxa_grid* grid);
PXA_API pxa_status pxa_grid_value(const pxa_grid* grid, int32_t i, int32_t j, int32_t k,
                                  double* out);
PXA_API pxa_status pxa_grid_to_occupancy(const pxa_grid* sdf, double threshold, pxa_grid** out);
PXA_API pxa_status pxa_grid_to_sdf(const pxa_grid* occupancy, pxa_grid** out);
PXA_API void pxa_grid_free(pxa_grid* grid);

PXA_API pxa_status pxa_voxelize(const pxa_mesh* mesh, const pxa_placement* p, pxa_grid** out);
/* Occupancy grids are converted with the exact distance transform first. */
PXA_API pxa_status pxa_marching_cubes(const pxa_grid* grid, double iso, pxa_mesh** out);

/* ---- views: feature lifting and silhouette carving ---------------------- */

typedef struct pxa_view_set pxa_view_set;

PXA_API pxa_status pxa_view_set_create(pxa_view_set** out);
/* Feature pyramid levels are H x W x C (or H x W) float32 tensors; pixel
 * coordinates refer to the camera's image size. */
PXA_API pxa_status pxa_view_set_add_features(pxa_view_set* set, const pxa_tensor* const* levels,
                                             size_t level_count, const pxa_camera* cam);
/* Masks are H x W tensors matching the camera image size; nonzero = object. */
PXA_API pxa_status pxa_view_set_add_mask(pxa_view_set* set, const pxa_tensor* mask,
                                         const pxa_camera* cam);
PXA_API size_t pxa_view_set_feature_count(const pxa_view_set* set);
PXA_API size_t pxa_view_set_mask_count(const pxa_view_set* set);
PXA_API void pxa_view_set_free(pxa_view_set* set);

/* Lifts (one view) or fuses (several) the feature views into a dense
 * R x R x R x (C + 1) float32 volume whose last channel is the view count.
 * The cube lives in the camera frame of the reference view. */
PXA_API pxa_status pxa_lift(const pxa_view_set* set, size_t reference, const pxa_placement* p,
                            int32_t nearest_sampling, pxa_tensor** out_volume);
/* target (R x R x R x C) + volume features (R x R x R x (C + 1) as above). */
PXA_API pxa_status pxa_condition_add(const pxa_tensor* volume, const pxa_tensor* target,
                                     pxa_tensor** out);

PXA_API pxa_status pxa_carve(const pxa_view_set* set, size_t reference, const pxa_placement* p,
                             pxa_grid** out);
PXA_API pxa_status pxa_generate_mesh(const pxa_view_set* set, size_t reference,
                                     const pxa_placement* p, int32_t smooth_width,
                                     pxa_mesh** out);

/* ---- evaluation --------------------------------------------------------- */

/* H x W x 4 float32 (nx, ny, nz, valid). */
PXA_API pxa_status pxa_render_normals(const pxa_mesh* mesh, const pxa_camera* cam,
                                      pxa_tensor** out);
/* H x W x 2 float32 (z, valid). */
PXA_API pxa_status pxa_render_depth(const pxa_mesh* mesh, const pxa_camera* cam,
                                    pxa_tensor** out);

typedef struct pxa_normal_metrics {
  double iou;
  int32_t angular_present; /* 0 when the valid masks do not overlap */
  double psnr;             /* +inf when encoded normals agree exactly */
  double ssim;
  double mean, median;
  int32_t mean_b_present;
  double mean_b;
  double acc_1125, acc_225, acc_30;
} pxa_normal_metrics;

/* out and out_report_json may each be NULL. */
PXA_API pxa_status pxa_eval_normals(const pxa_tensor* pred, const pxa_tensor* gt,
                                    int32_t boundary_width, pxa_normal_metrics* out,
                                    char** out_report_json);

typedef struct pxa_geo_options {
  uint64_t samples;     /* default 10000 */
  uint64_t emd_samples; /* default 1024, at most 1024 */
  double tau;           /* default 0.02 */
  uint64_t seed;
} pxa_geo_options;

typedef struct pxa_geo_metrics {
  double cd, emd, fscore, tau;
  uint64_t samples, emd_samples;
} pxa_geo_metrics;

PXA_API void pxa_geo_options_default(pxa_geo_options* out);
PXA_API pxa_status pxa_eval_geo(const pxa_mesh* pred, const pxa_mesh* gt,
                                const pxa_geo_options* opts, pxa_geo_metrics* out,
                                char** out_report_json);

/* ---- scene composition -------------------------------------------------- */

typedef struct pxa_scene pxa_scene;

typedef struct pxa_align_options {
  uint64_t min_pixels; /* default 10 */
  int32_t trim;        /* drop the worst 10% residuals and re-solve once */
} pxa_align_options;

PXA_API pxa_status pxa_scene_create(const pxa_camera* cam, pxa_scene** out);
PXA_API pxa_status pxa_scene_add_object(pxa_scene* scene, const char* id, const pxa_mesh* mesh,
                                        const pxa_tensor* visibility_mask);
/* Point map: H x W x 4 float32 (x, y, z, valid). alphas (may be NULL) must
 * hold one slot per object. */
PXA_API pxa_status pxa_scene_align(const pxa_scene* scene, const pxa_tensor* point_map,
                                   const pxa_align_options* opts, double* out_alphas,
                                   pxa_mesh** out_mesh, char** out_report_json);
PXA_API void pxa_scene_free(pxa_scene* scene);

/* ---- synthetic data ----------------------------------------------------- */

typedef struct pxa_synth_case {
  const char* shape; /* "sphere", "box" or "torus" */
  double radius;
  double half_extents[3];
  double major_radius, minor_radius;
  int32_t subdivisions;
  int32_t views;
  double fov_deg;
  double view_distance; /* <= 0: whole cube fits the view cone */
  int32_t image_size;
  int32_t grid;
  double cube_scale;
  uint64_t seed;
  int32_t random_rotation;
  double pointmap_scale;
} pxa_synth_case;

PXA_API void pxa_synth_case_default(pxa_synth_case* out);
/* Writes gt.obj, placement.json, case.json, pointmap.pxt and per view i
 * view<i>.json, view<i>_mask.pxt, view<i>_normals.pxt, view<i>_depth.pxt. */
PXA_API pxa_status pxa_synth_write(const pxa_synth_case* c, const char* out_dir);

#ifdef __cplusplus
}
#endif

#endif /* PXA_H */
