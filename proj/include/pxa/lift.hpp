#pragma once

// Pixel-aligned feature lifting.
//
// Every voxel of the placed cube is projected into the image; the features
// found there (bilinearly sampled at each pyramid level, levels averaged with
// equal weight) become the voxel's feature. Since a pixel's ray passes through
// a whole column of voxels, each of them receives that pixel's feature. With
// several views, per-view samples are averaged inside each voxel.

#include <cstdint>
#include <vector>

#include "pxa/camera.hpp"
#include "pxa/placement.hpp"

namespace pxa {

// Dense H x W x C map, row-major with index order (row, column, channel).
struct FeatureMap {
  int height = 0;
  int width = 0;
  int channels = 0;
  std::vector<double> data;

  FeatureMap() = default;
  FeatureMap(int h, int w, int c, double fill = 0.0);

  double& at(int row, int col, int ch) {
    return data[(static_cast<std::size_t>(row) * width + col) * channels + ch];
  }
  double at(int row, int col, int ch) const {
    return data[(static_cast<std::size_t>(row) * width + col) * channels + ch];
  }

  void validate() const;
};

struct FeaturePyramid {
  std::vector<FeatureMap> levels;
  // Resolution that pixel coordinates refer to (the camera image size).
  int full_width = 0;
  int full_height = 0;

  int channels() const { return levels.empty() ? 0 : levels.front().channels; }
  void validate() const;
};

struct ViewInput {
  FeaturePyramid pyramid;
  CameraIntrinsics intrinsics;
  Pose world_from_camera;

  void validate() const;
};

enum class Sampling { bilinear, nearest };

struct LiftOptions {
  double z_near = 1e-6;
  // Nearest-texel lookup exists for oracle tests only.
  Sampling sampling = Sampling::bilinear;
};

// R^3 x C feature grid, index order (i, j, k, c), plus per-voxel validity and
// the number of views that contributed.
struct FeatureVolume {
  CubePlacement placement;
  int channels = 0;
  std::vector<double> data;
  std::vector<std::uint8_t> valid;
  std::vector<std::uint32_t> view_count;

  FeatureVolume() = default;
  FeatureVolume(const CubePlacement& p, int c);

  int resolution() const { return placement.resolution; }
  std::size_t voxel_count() const { return placement.voxel_count(); }
  const double* features(std::size_t voxel) const {
    return data.data() + voxel * static_cast<std::size_t>(channels);
  }
};

// Samples `map` at continuous full-resolution pixel coordinate (u, v); the
// coordinate is rescaled to the map's own resolution, texel centers sit at
// half-integers and borders clamp. Writes `map.channels` values to `out`.
void sample_bilinear(const FeatureMap& map, double u, double v, int full_width,
                     int full_height, double* out);
std::vector<double> sample_bilinear(const FeatureMap& map, double u, double v,
                                    int full_width, int full_height);

void sample_nearest(const FeatureMap& map, double u, double v, int full_width,
                    int full_height, double* out);

// Mean over pyramid levels of the per-level sample at (u, v).
void sample_pyramid(const FeaturePyramid& pyramid, double u, double v,
                    Sampling sampling, double* out);

// Lifts one view into a cube defined in that view's camera frame.
FeatureVolume lift_single(const ViewInput& view, const CubePlacement& p,
                          const LiftOptions& opts = {});

// Lifts every view into a cube defined in the camera frame of
// views[reference] and averages per voxel over the views that see it.
// Per-voxel sums run in ascending value order per channel, so the result does
// not depend on the order of the non-reference views.
FeatureVolume fuse_views(const std::vector<ViewInput>& views, std::size_t reference,
                         const CubePlacement& p, const LiftOptions& opts = {});

// Adds the feature volume to a target volume of identical R^3 x C shape
// (index order i, j, k, c). Invalid voxels contribute zero.
std::vector<double> condition_add(const FeatureVolume& volume,
                                  const std::vector<double>& target);

}  // namespace pxa
