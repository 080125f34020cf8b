#include "pxa/hullgen.hpp"

#include <cmath>

#include "pxa/error.hpp"
#include "pxa/parallel.hpp"

namespace pxa {

void MaskView::validate() const {
  intrinsics.validate();
  if (height != intrinsics.height || width != intrinsics.width) {
    throw_invalid("mask dimensions do not match the camera image size");
  }
  if (mask.size() != static_cast<std::size_t>(height) * width) {
    throw_invalid("mask data length does not match its dimensions");
  }
}

OccupancyGrid carve(const std::vector<MaskView>& views, std::size_t reference,
                    const CubePlacement& p, const CarveOptions& opts) {
  if (views.empty()) throw_invalid("at least one mask view is required");
  if (reference >= views.size()) throw_invalid("reference view index out of range");
  p.validate();
  for (const auto& v : views) v.validate();

  const Pose& world_from_ref = views[reference].world_from_camera;
  std::vector<Pose> view_from_ref(views.size());
  for (std::size_t v = 0; v < views.size(); ++v) {
    if (v != reference) view_from_ref[v] = views[v].world_from_camera.inverse() * world_from_ref;
  }

  OccupancyGrid occ(p);
  const int r = p.resolution;
  parallel_for(0, occ.bits.size(), [&](std::size_t lo, std::size_t hi) {
    for (std::size_t idx = lo; idx < hi; ++idx) {
      const int k = static_cast<int>(idx % r);
      const int j = static_cast<int>((idx / r) % r);
      const int i = static_cast<int>(idx / (static_cast<std::size_t>(r) * r));
      const Vec3 center = voxel_center_unchecked(i, j, k, p);
      bool seen = false;
      bool inside = true;
      for (std::size_t v = 0; v < views.size() && inside; ++v) {
        const MaskView& view = views[v];
        const Vec3 local = v == reference ? center : view_from_ref[v].apply(center);
        if (!(local.z() > opts.z_near)) continue;
        const PixelProjection px = project(local, view.intrinsics);
        if (!(px.u >= 0.0 && px.u < view.width && px.v >= 0.0 && px.v < view.height)) continue;
        seen = true;
        inside = view.at(static_cast<int>(std::floor(px.v)), static_cast<int>(std::floor(px.u)));
      }
      occ.bits[idx] = (seen && inside) ? 1 : 0;
    }
  });
  return occ;
}

TriMesh generate_mesh(const std::vector<MaskView>& views, std::size_t reference,
                      const CubePlacement& p, int smooth_width,
                      const CarveOptions& opts) {
  if (smooth_width < 0) throw_invalid("smoothing width must be non-negative");
  const OccupancyGrid occ = carve(views, reference, p, opts);
  if (occ.count() == 0 || p.resolution < 2) return {};
  const SdfGrid sdf = box_smooth(sdf_from_occupancy(occ), smooth_width);
  return marching_cubes(sdf, 0.0);
}

}  // namespace pxa
