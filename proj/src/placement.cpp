#include "pxa/placement.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>

#include "pxa/error.hpp"

namespace pxa {

void CubePlacement::validate() const {
  if (!std::isfinite(d) || !std::isfinite(s)) {
    throw_invalid("cube placement must be finite");
  }
  if (!(s > 0.0)) throw_invalid("cube scale must be positive");
  if (resolution < 1) throw_invalid("grid resolution must be at least 1");
  if (!(d + s / 2.0 > 0.0)) {
    throw_invalid("cube back face must lie in front of the camera (d + s/2 > 0)");
  }
}

CubePlacement auto_place(double fov_deg, double s, int resolution) {
  if (!std::isfinite(fov_deg) || !(fov_deg > 0.0) || !(fov_deg < 180.0)) {
    throw_invalid("field of view must lie strictly between 0 and 180 degrees");
  }
  // Corner ray with lateral slope tan(h), h = fov/2, meets the back-face vertex:
  //   tan(h) * (d + s/2) = s/2  =>  d = (s/2)(cot h - 1) = (s/2) sqrt2 sin(45deg - h) / sin h
  // The last form is exact at fov = 90.
  const double h = fov_deg / 2.0;
  const double deg = std::numbers::pi / 180.0;
  CubePlacement p{(s / 2.0) * std::numbers::sqrt2 * std::sin((45.0 - h) * deg) / std::sin(h * deg), s,
                  resolution};
  p.validate();
  return p;
}

Vec3 voxel_center(int i, int j, int k, const CubePlacement& p) {
  const int r = p.resolution;
  if (i < 0 || j < 0 || k < 0 || i >= r || j >= r || k >= r) {
    throw_invalid("voxel index out of range");
  }
  return voxel_center_unchecked(i, j, k, p);
}

std::vector<VoxelIndex> pixel_voxel_correspondence(double u, double v,
                                                   const CubePlacement& p,
                                                   const CameraIntrinsics& intr) {
  p.validate();
  intr.validate();
  const Ray ray = unproject(u, v, intr);
  const double half = p.s / 2.0;
  const Vec3 lo(-half, -half, p.d - half);
  const Vec3 hi(half, half, p.d + half);

  // Slab clipping; only the part of the ray in front of the camera counts.
  double t0 = 0.0;
  double t1 = std::numeric_limits<double>::infinity();
  for (int axis = 0; axis < 3; ++axis) {
    const double o = ray.origin[axis];
    const double dir = ray.direction[axis];
    if (dir == 0.0) {
      if (o < lo[axis] || o > hi[axis]) return {};
      continue;
    }
    double ta = (lo[axis] - o) / dir;
    double tb = (hi[axis] - o) / dir;
    if (ta > tb) std::swap(ta, tb);
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
  }
  if (!(t1 > t0)) return {};

  const double step = p.pitch() / 2.0;
  const double depth_span = (t1 - t0) * ray.direction.z();
  const auto steps =
      std::max<long long>(1, static_cast<long long>(std::ceil(depth_span / step)));

  std::vector<VoxelIndex> out;
  std::set<VoxelIndex> seen;
  const int r = p.resolution;
  auto to_index = [&](double coord, double origin) {
    const int idx = static_cast<int>(std::floor((coord - origin) / p.pitch()));
    return std::clamp(idx, 0, r - 1);
  };
  for (long long m = 0; m <= steps; ++m) {
    const double t = t0 + (t1 - t0) * static_cast<double>(m) / static_cast<double>(steps);
    const Vec3 x = ray.at(t);
    if (!(x.z() > 0.0)) continue;
    const VoxelIndex idx{to_index(x.x(), lo.x()), to_index(x.y(), lo.y()),
                         to_index(x.z(), lo.z())};
    if (seen.insert(idx).second) out.push_back(idx);
  }
  return out;
}

}  // namespace pxa
