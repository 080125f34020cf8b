#pragma once

// Fidelity evaluation: camera-frame normal/depth rendering, normal-map
// metrics, surface sampling and point-set distances.

#include <cstdint>
#include <optional>
#include <vector>

#include "pxa/camera.hpp"
#include "pxa/volume.hpp"

namespace pxa {

struct NormalMap {
  int height = 0;
  int width = 0;
  std::vector<Vec3> normals;         // camera frame; zero where invalid
  std::vector<std::uint8_t> valid;   // row-major

  NormalMap() = default;
  NormalMap(int h, int w)
      : height(h), width(w),
        normals(static_cast<std::size_t>(h) * w, Vec3::Zero()),
        valid(static_cast<std::size_t>(h) * w, 0) {}
  std::size_t pixel_count() const { return valid.size(); }
};

struct DepthMap {
  int height = 0;
  int width = 0;
  std::vector<double> depth;         // camera-frame z; zero where invalid
  std::vector<std::uint8_t> valid;

  DepthMap() = default;
  DepthMap(int h, int w)
      : height(h), width(w), depth(static_cast<std::size_t>(h) * w, 0.0),
        valid(static_cast<std::size_t>(h) * w, 0) {}
};

struct RenderOptions {
  double z_near = 1e-6;
};

// Z-buffered perspective rasterization sampled at pixel centers. Each covered
// pixel records the front-most triangle; exact depth ties go to the lowest
// triangle index. Triangles with a vertex at or behind z_near are skipped.
// Per-pixel output is the flat face normal in the camera frame, oriented
// against the viewing ray.
NormalMap render_normals(const TriMesh& mesh, const CameraIntrinsics& intr,
                         const Pose& world_from_camera, const RenderOptions& opts = {});
DepthMap render_depth(const TriMesh& mesh, const CameraIntrinsics& intr,
                      const Pose& world_from_camera, const RenderOptions& opts = {});
// Index of the front-most triangle per pixel, -1 where uncovered.
std::vector<int> render_triangle_ids(const TriMesh& mesh, const CameraIntrinsics& intr,
                                     const Pose& world_from_camera,
                                     const RenderOptions& opts = {});

inline constexpr double kNormalAccuracyThresholds[3] = {11.25, 22.5, 30.0};

struct NormalMetrics {
  double iou = 0.0;  // percent
  std::size_t intersection = 0;
  std::size_t union_count = 0;
  // Angular fields are absent when the valid masks do not overlap.
  bool angular_present = false;
  double psnr = 0.0;  // +inf when the encoded normals agree exactly
  double ssim = 0.0;
  double mean = 0.0;    // degrees
  double median = 0.0;  // degrees
  std::optional<double> mean_b;  // degrees; absent if the band is empty
  std::size_t boundary_pixels = 0;
  double acc_1125 = 0.0;  // percent
  double acc_225 = 0.0;
  double acc_30 = 0.0;
};

struct NormalMetricOptions {
  int boundary_width = 5;
  int ssim_window = 11;
  double ssim_sigma = 1.5;
};

NormalMetrics normal_metrics(const NormalMap& pred, const NormalMap& gt,
                             const NormalMetricOptions& opts = {});

// Gt-valid pixels with a 4-neighbour (inside the image) that is gt-invalid.
std::vector<std::uint8_t> silhouette_edge(const NormalMap& gt);
// Pixels within Chebyshev distance `width` of a silhouette edge pixel.
std::vector<std::uint8_t> boundary_band(const NormalMap& gt, int width);

using PointCloud = std::vector<Vec3>;

// Area-weighted triangle choice plus uniform barycentric sampling, driven by
// the toolkit's xorshift64* generator.
PointCloud sample_surface(const TriMesh& mesh, std::size_t n, std::uint64_t seed);

// mean_a min_b |a-b|^2 + mean_b min_a |a-b|^2
double chamfer(const PointCloud& a, const PointCloud& b);
// mean over `from` of the (unsquared) distance to the nearest point of `to`
double directed_mean_distance(const PointCloud& from, const PointCloud& to);
// Nearest-neighbour distance from every point of `from` into `to`.
std::vector<double> nearest_distances(const PointCloud& from, const PointCloud& to);

inline constexpr std::size_t kDefaultEmdCap = 1024;
// Exact minimum mean matched Euclidean distance over perfect matchings.
double emd(const PointCloud& a, const PointCloud& b, std::size_t cap = kDefaultEmdCap);
// Minimum-cost perfect matching on a square cost matrix (row-major n x n).
// Returns the column assigned to every row.
std::vector<int> hungarian(const std::vector<double>& cost, std::size_t n);

double fscore(const PointCloud& a, const PointCloud& b, double tau);

struct GeoMetrics {
  double cd = 0.0;
  double emd = 0.0;
  double fscore = 0.0;  // percent
  double tau = 0.0;
  std::size_t samples = 0;
  std::size_t emd_samples = 0;
};

struct GeoEvalOptions {
  std::size_t samples = 10000;
  std::size_t emd_samples = kDefaultEmdCap;
  double tau = 0.02;
  std::uint64_t seed = 0;
};

// Samples both meshes with the same seed, then computes CD and F-score on
// the full sample sets and EMD on the first emd_samples points of each.
GeoMetrics evaluate_geometry(const TriMesh& pred, const TriMesh& gt,
                             const GeoEvalOptions& opts = {});

}  // namespace pxa
