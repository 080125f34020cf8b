#include "pxa/scene.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "pxa/error.hpp"
#include "pxa/eval.hpp"

namespace pxa {

void GlobalPointMap::validate() const {
  if (height < 1 || width < 1) throw_invalid("point map dimensions must be positive");
  const std::size_t n = static_cast<std::size_t>(height) * width;
  if (points.size() != n || valid.size() != n) {
    throw_invalid("point map buffers do not match its dimensions");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (valid[i] && !points[i].allFinite()) throw_invalid("valid point map entry is not finite");
  }
}

void SceneObject::validate() const {
  intrinsics.validate();
  if (mesh.empty()) throw_invalid("scene object '" + id + "' has an empty mesh");
  mesh.validate();
  if (visibility_mask.size() != static_cast<std::size_t>(intrinsics.width) * intrinsics.height) {
    throw_invalid("visibility mask of '" + id + "' does not match the scene image size");
  }
}

AlignmentConstraints alignment_constraints(const SceneObject& obj, const GlobalPointMap& map) {
  obj.validate();
  map.validate();
  if (map.width != obj.intrinsics.width || map.height != obj.intrinsics.height) {
    throw_invalid("point map size does not match the scene camera");
  }
  const DepthMap depth = render_depth(obj.mesh, obj.intrinsics, Pose::identity());
  AlignmentConstraints c;
  for (int row = 0; row < map.height; ++row) {
    for (int col = 0; col < map.width; ++col) {
      const std::size_t px = static_cast<std::size_t>(row) * map.width + col;
      if (!obj.visibility_mask[px] || !map.valid[px] || !depth.valid[px]) continue;
      // Surface point hit by the pixel-center ray (its z equals the depth).
      c.object_points.push_back(depth.depth[px] *
                                pixel_direction(col + 0.5, row + 0.5, obj.intrinsics));
      c.map_points.push_back(map.points[px]);
    }
  }
  return c;
}

namespace {

AlignmentResult closed_form(const std::vector<Vec3>& p, const std::vector<Vec3>& q,
                            const std::vector<std::size_t>& use) {
  double pq = 0.0;
  double pp = 0.0;
  for (std::size_t i : use) {
    pq += p[i].dot(q[i]);
    pp += p[i].dot(p[i]);
  }
  if (!(pp > 1e-12)) throw_numeric("degenerate alignment: object points collapse to the origin");
  AlignmentResult r;
  r.alpha = pq / pp;
  if (!(r.alpha > 0.0) || !std::isfinite(r.alpha)) {
    throw_numeric("degenerate alignment: non-positive scale estimate");
  }
  double sq = 0.0;
  for (std::size_t i : use) sq += (r.alpha * p[i] - q[i]).squaredNorm();
  r.pixel_count = use.size();
  r.residual_rms = std::sqrt(sq / static_cast<double>(use.size()));
  return r;
}

}  // namespace

AlignmentResult solve_scale(const std::vector<Vec3>& object_points,
                            const std::vector<Vec3>& map_points, const AlignOptions& opts) {
  if (object_points.size() != map_points.size()) {
    throw_invalid("alignment needs matched point lists");
  }
  if (object_points.size() < opts.min_pixels || object_points.empty()) {
    throw_numeric("insufficient support for alignment: " + std::to_string(object_points.size()) +
                  " pixels, need " + std::to_string(opts.min_pixels));
  }
  std::vector<std::size_t> use(object_points.size());
  std::iota(use.begin(), use.end(), 0);
  AlignmentResult r = closed_form(object_points, map_points, use);
  if (!opts.trim) return r;

  if (!(opts.trim_fraction >= 0.0 && opts.trim_fraction < 1.0)) {
    throw_invalid("trim fraction must lie in [0, 1)");
  }
  std::vector<double> residual(object_points.size());
  for (std::size_t i = 0; i < residual.size(); ++i) {
    residual[i] = (r.alpha * object_points[i] - map_points[i]).squaredNorm();
  }
  const auto keep = static_cast<std::size_t>(
      std::ceil((1.0 - opts.trim_fraction) * static_cast<double>(use.size())));
  // Stable order so ties keep their pixel order.
  std::stable_sort(use.begin(), use.end(),
                   [&](std::size_t a, std::size_t b) { return residual[a] < residual[b]; });
  use.resize(std::max(keep, opts.min_pixels));
  std::sort(use.begin(), use.end());
  return closed_form(object_points, map_points, use);
}

AlignmentResult align_object(const SceneObject& obj, const GlobalPointMap& map,
                             const AlignOptions& opts) {
  const AlignmentConstraints c = alignment_constraints(obj, map);
  return solve_scale(c.object_points, c.map_points, opts);
}

ComposedScene compose_scene(const std::vector<SceneObject>& objects,
                            const std::vector<AlignmentResult>& results) {
  if (objects.size() != results.size()) {
    throw_invalid("scene composition needs one alignment result per object");
  }
  ComposedScene scene;
  for (std::size_t o = 0; o < objects.size(); ++o) {
    const TriMesh& mesh = objects[o].mesh;
    const double alpha = results[o].alpha;
    const int offset = static_cast<int>(scene.mesh.vertices.size());
    for (const Vec3& v : mesh.vertices) scene.mesh.vertices.push_back(alpha * v);
    for (const auto& t : mesh.triangles) {
      scene.mesh.triangles.push_back({t[0] + offset, t[1] + offset, t[2] + offset});
    }
    scene.transforms.push_back({objects[o].id, alpha});
  }
  return scene;
}

}  // namespace pxa
