#pragma once

// File formats: camera descriptor JSON, OBJ triangle meshes, placement
// sidecars, and the PXT layouts used for maps, masks, volumes and grids.

#include <string>

#include "pxa/camera.hpp"
#include "pxa/eval.hpp"
#include "pxa/hullgen.hpp"
#include "pxa/lift.hpp"
#include "pxa/placement.hpp"
#include "pxa/pxt.hpp"
#include "pxa/scene.hpp"
#include "pxa/volume.hpp"

namespace pxa {

// Camera descriptor: {"fx","fy","cx","cy","width","height"} plus optional
// "world_from_camera" (16 numbers, row-major, default identity). Doubles are
// printed in shortest round-trip form.
std::string camera_to_json(const Camera& cam);
Camera camera_from_json(const std::string& text);
Camera load_camera(const std::string& path);
void save_camera(const std::string& path, const Camera& cam);

// Wavefront OBJ subset: "v x y z" and "f a b c" (1-based; "a/b/c" forms keep
// the vertex index). Other statement types are ignored; polygons with more
// than three vertices are rejected.
TriMesh parse_obj(const std::string& text);
std::string format_obj(const TriMesh& mesh);
TriMesh load_obj(const std::string& path);
void save_obj(const std::string& path, const TriMesh& mesh);

std::string placement_to_json(const CubePlacement& p);
CubePlacement placement_from_json(const std::string& text);
inline std::string sidecar_path(const std::string& pxt_path) { return pxt_path + ".json"; }

// H x W x C (or H x W for C = 1) float32.
FeatureMap feature_map_from_tensor(const Tensor& t);
Tensor feature_map_to_tensor(const FeatureMap& map);

// Dense R x R x R x (C + 1) float32; the last channel is view_count.
Tensor volume_to_tensor(const FeatureVolume& vol);

// H x W uint8 (nonzero = true) or float32 (nonzero = true).
std::vector<std::uint8_t> mask_from_tensor(const Tensor& t, int& height, int& width);
Tensor mask_to_tensor(const std::vector<std::uint8_t>& mask, int height, int width);

// H x W x 4 float32: (nx, ny, nz, valid).
NormalMap normal_map_from_tensor(const Tensor& t);
Tensor normal_map_to_tensor(const NormalMap& map);

// H x W x 2 float32: (z, valid).
Tensor depth_map_to_tensor(const DepthMap& map);
DepthMap depth_map_from_tensor(const Tensor& t);

// H x W x 4 float32: (x, y, z, valid).
GlobalPointMap point_map_from_tensor(const Tensor& t);
Tensor point_map_to_tensor(const GlobalPointMap& map);

// Grids: R x R x R float32 (SDF) or uint8 (occupancy) plus a placement
// sidecar at sidecar_path(path).
void save_sdf_grid(const std::string& path, const SdfGrid& grid);
SdfGrid load_sdf_grid(const std::string& path);
void save_occupancy_grid(const std::string& path, const OccupancyGrid& grid);
OccupancyGrid load_occupancy_grid(const std::string& path);

}  // namespace pxa
