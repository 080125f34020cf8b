#pragma once

// Synthetic test scenes: analytic shapes inside an auto-placed cube, seen by
// known cameras orbiting the cube center.

#include <cstdint>
#include <string>
#include <vector>

#include "pxa/camera.hpp"
#include "pxa/eval.hpp"
#include "pxa/placement.hpp"
#include "pxa/scene.hpp"
#include "pxa/volume.hpp"

namespace pxa {

enum class ShapeKind { sphere, box, torus };

ShapeKind parse_shape_kind(const std::string& name);
std::string to_string(ShapeKind kind);

struct SyntheticCase {
  ShapeKind shape = ShapeKind::sphere;
  double radius = 0.3;                        // sphere
  Vec3 half_extents = Vec3(0.2, 0.15, 0.25);  // box
  double major_radius = 0.25;                 // torus
  double minor_radius = 0.08;
  int subdivisions = 4;  // icosphere subdivision level; torus uses 8 * 2^level rings
  int views = 6;
  double fov_deg = kDefaultFovDeg;
  // Camera-to-center distance of the non-reference views; <= 0 selects the
  // distance at which the whole cube fits the view cone.
  double view_distance = 0.0;
  int image_size = 256;
  int grid = 64;
  double cube_scale = 1.0;
  std::uint64_t seed = 0;
  bool random_rotation = true;
  double pointmap_scale = 1.0;

  void validate() const;
};

struct SyntheticView {
  Camera camera;
  std::vector<std::uint8_t> mask;
  NormalMap normals;
  DepthMap depth;
};

struct SyntheticScene {
  SyntheticCase spec;
  CubePlacement placement;  // in the frame of view 0, which is the world frame
  TriMesh mesh;
  std::vector<SyntheticView> views;
  GlobalPointMap point_map;  // view 0, scaled by spec.pointmap_scale
};

TriMesh make_icosphere(double radius, int subdivisions, const Vec3& center = Vec3::Zero());
TriMesh make_box(const Vec3& half_extents, const Vec3& center = Vec3::Zero());
TriMesh make_torus(double major_radius, double minor_radius, int rings, int sides,
                   const Vec3& center = Vec3::Zero());

// Camera looking from `center + distance * direction` toward `center`, with
// image +y kept as close to world +y as possible.
Pose look_at_pose(const Vec3& center, const Vec3& direction, double distance);

// Unit directions (center to camera) for `count` views; the first is
// (0, 0, -1), i.e. the reference camera at the world origin.
std::vector<Vec3> view_directions(int count);

SyntheticScene make_synthetic(const SyntheticCase& spec);

}  // namespace pxa
