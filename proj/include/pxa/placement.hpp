#pragma once

#include <array>
#include <vector>

#include "pxa/camera.hpp"

namespace pxa {

// Location of the generation cube in a camera frame: the cube is axis aligned,
// centered at (0, 0, d) with edge length s, and split into R^3 voxels.
struct CubePlacement {
  double d = 0.0;
  double s = 1.0;
  int resolution = 1;

  // Throws invalid_input unless s > 0, R >= 1, d + s/2 > 0, all finite.
  void validate() const;

  double pitch() const { return s / resolution; }
  std::size_t voxel_count() const {
    const auto r = static_cast<std::size_t>(resolution);
    return r * r * r;
  }
  std::size_t linear_index(int i, int j, int k) const {
    const auto r = static_cast<std::size_t>(resolution);
    return (static_cast<std::size_t>(i) * r + static_cast<std::size_t>(j)) * r +
           static_cast<std::size_t>(k);
  }

  bool operator==(const CubePlacement&) const = default;
};

inline constexpr double kDefaultFovDeg = 40.0;

// Places a cube of edge s so that the rays through the four image corners of
// a square camera with the given full field of view pass through the four
// vertices of the cube's back face.
CubePlacement auto_place(double fov_deg, double s, int resolution);

// Camera-frame center of voxel (i, j, k); i runs along +x, j along +y and k
// along +z (depth). Throws invalid_input for out-of-range indices.
Vec3 voxel_center(int i, int j, int k, const CubePlacement& p);

// Voxel center without range checks, for hot loops over valid indices.
inline Vec3 voxel_center_unchecked(int i, int j, int k, const CubePlacement& p) {
  const double r = p.resolution;
  return Vec3(((i + 0.5) / r - 0.5) * p.s, ((j + 0.5) / r - 0.5) * p.s,
              ((k + 0.5) / r - 0.5) * p.s + p.d);
}

using VoxelIndex = std::array<int, 3>;

// Voxels traversed by the ray through pixel coordinate (u, v), ordered front
// to back and free of duplicates. The ray is clipped to the cube (and to the
// half-space in front of the camera) and marched at half-voxel steps.
std::vector<VoxelIndex> pixel_voxel_correspondence(double u, double v,
                                                   const CubePlacement& p,
                                                   const CameraIntrinsics& intr);

}  // namespace pxa
