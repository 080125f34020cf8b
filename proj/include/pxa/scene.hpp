#pragma once

// Scene composition from pixel-aligned objects. Each object already sits in
// the scene camera's frame up to an unknown scale about the camera origin;
// that scale is recovered by least squares against a global point map.

#include <cstdint>
#include <string>
#include <vector>

#include "pxa/camera.hpp"
#include "pxa/placement.hpp"
#include "pxa/volume.hpp"

namespace pxa {

struct GlobalPointMap {
  int height = 0;
  int width = 0;
  std::vector<Vec3> points;  // scene camera frame
  std::vector<std::uint8_t> valid;

  void validate() const;
};

struct SceneObject {
  std::string id;
  TriMesh mesh;                             // object's pixel-aligned camera frame
  std::vector<std::uint8_t> visibility_mask;  // H x W, un-occluded pixels
  CubePlacement placement;
  CameraIntrinsics intrinsics;

  void validate() const;
};

struct AlignmentResult {
  double alpha = 1.0;
  double residual_rms = 0.0;
  std::size_t pixel_count = 0;
};

struct AlignOptions {
  std::size_t min_pixels = 10;
  // One extra solve after dropping the worst `trim_fraction` of residuals.
  bool trim = false;
  double trim_fraction = 0.1;
};

// Per-pixel constraint pairs: p is the rendered surface point of the object,
// q the point-map point, for every pixel in mask & map.valid & depth-valid.
struct AlignmentConstraints {
  std::vector<Vec3> object_points;
  std::vector<Vec3> map_points;
};

AlignmentConstraints alignment_constraints(const SceneObject& obj, const GlobalPointMap& map);

// Closed-form minimizer of sum |alpha p - q|^2 over the given pairs.
AlignmentResult solve_scale(const std::vector<Vec3>& object_points,
                            const std::vector<Vec3>& map_points,
                            const AlignOptions& opts = {});

AlignmentResult align_object(const SceneObject& obj, const GlobalPointMap& map,
                             const AlignOptions& opts = {});

struct TransformRecord {
  std::string id;
  double alpha = 1.0;
};

struct ComposedScene {
  TriMesh mesh;
  std::vector<TransformRecord> transforms;
};

// Scales every object about the camera origin by its alpha and concatenates
// the meshes in input order.
ComposedScene compose_scene(const std::vector<SceneObject>& objects,
                            const std::vector<AlignmentResult>& results);

}  // namespace pxa
