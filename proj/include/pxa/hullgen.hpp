#pragma once

// Silhouette-carving generator: a non-learned stand-in for a pixel-aligned
// 3D generator. It consumes the same inputs (known cameras, cube placed in
// the reference view) and produces a mesh in the reference camera frame.

#include <cstdint>
#include <vector>

#include "pxa/camera.hpp"
#include "pxa/placement.hpp"
#include "pxa/volume.hpp"

namespace pxa {

struct MaskView {
  int height = 0;
  int width = 0;
  std::vector<std::uint8_t> mask;  // row-major, nonzero = object
  CameraIntrinsics intrinsics;
  Pose world_from_camera;

  bool at(int row, int col) const {
    return mask[static_cast<std::size_t>(row) * width + col] != 0;
  }
  void validate() const;
};

struct CarveOptions {
  double z_near = 1e-6;
};

// A voxel is occupied iff it projects into at least one view and every view
// it projects into has its (nearest-pixel) mask set.
OccupancyGrid carve(const std::vector<MaskView>& views, std::size_t reference,
                    const CubePlacement& p, const CarveOptions& opts = {});

// carve -> sdf_from_occupancy -> box_smooth(smooth_width) -> marching_cubes.
TriMesh generate_mesh(const std::vector<MaskView>& views, std::size_t reference,
                      const CubePlacement& p, int smooth_width = 1,
                      const CarveOptions& opts = {});

}  // namespace pxa
