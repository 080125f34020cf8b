#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <vector>

#include "pxa/camera.hpp"
#include "pxa/placement.hpp"

namespace pxa {

struct TriMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 3>> triangles;

  bool empty() const { return triangles.empty(); }
  // Throws invalid_input on out-of-range or repeated indices and non-finite
  // vertices.
  void validate() const;
  double area() const;
};

// Signed distances sampled at voxel centers (world units, negative inside).
struct SdfGrid {
  CubePlacement placement;
  std::vector<double> values;

  SdfGrid() = default;
  explicit SdfGrid(const CubePlacement& p, double fill = 0.0)
      : placement(p), values(p.voxel_count(), fill) {}

  int resolution() const { return placement.resolution; }
  double& at(int i, int j, int k) { return values[placement.linear_index(i, j, k)]; }
  double at(int i, int j, int k) const { return values[placement.linear_index(i, j, k)]; }
};

struct OccupancyGrid {
  CubePlacement placement;
  std::vector<std::uint8_t> bits;

  OccupancyGrid() = default;
  explicit OccupancyGrid(const CubePlacement& p, bool fill = false)
      : placement(p), bits(p.voxel_count(), fill ? 1 : 0) {}

  int resolution() const { return placement.resolution; }
  bool at(int i, int j, int k) const { return bits[placement.linear_index(i, j, k)] != 0; }
  std::size_t count() const;
};

// Unsigned distance from `point` to triangle (a, b, c).
double point_triangle_distance(const Vec3& point, const Vec3& a, const Vec3& b,
                               const Vec3& c);

// Generalized winding number of `mesh` around `point`; about +-1 inside a
// closed surface, 0 outside.
double winding_number(const TriMesh& mesh, const Vec3& point);

// Signed distance to the mesh: nearest-triangle distance, negative where
// |winding number| > 0.5.
double signed_distance(const TriMesh& mesh, const Vec3& point);

SdfGrid voxelize_sdf(const TriMesh& mesh, const CubePlacement& p);

// Marching cubes over the lattice of voxel centers. Triangles are oriented so
// that their normals point toward increasing field values.
TriMesh marching_cubes(const SdfGrid& grid, double iso = 0.0);

OccupancyGrid occupancy_from_sdf(const SdfGrid& grid, double threshold = 0.0);

// Exact two-sided Euclidean distance transform in world units. Empty voxels
// get +distance to the nearest occupied center, occupied ones -distance to
// the nearest empty center.
SdfGrid sdf_from_occupancy(const OccupancyGrid& occ);

// Box filter with a (2w+1)^3 kernel clamped at the grid border; w = 0 is the
// identity.
SdfGrid box_smooth(const SdfGrid& grid, int half_width);

}  // namespace pxa
