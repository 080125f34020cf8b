#include <doctest.h>

#include "oracles.hpp"
#include "pxa/error.hpp"
#include "pxa/hullgen.hpp"
#include "pxa/synth.hpp"

using pxa::Vec3;

namespace {

constexpr double kRadius = 0.3;

// Views of an analytic sphere at the cube center with exact silhouettes.
std::vector<pxa::MaskView> sphere_views(int count, int size, bool conservative,
                                        pxa::CubePlacement& placement) {
  placement = pxa::auto_place(40.0, 1.0, 32);
  const Vec3 center(0, 0, placement.d);
  const auto in = pxa::fov_to_intrinsics(40.0, size, size);
  const auto dirs = pxa::view_directions(count);
  std::vector<pxa::MaskView> views;
  for (int v = 0; v < count; ++v) {
    pxa::MaskView mv;
    mv.height = mv.width = size;
    mv.intrinsics = in;
    mv.world_from_camera = v == 0 ? pxa::Pose::identity() : pxa::look_at_pose(center, dirs[v], 2.6);
    const Vec3 local = mv.world_from_camera.inverse().apply(center);
    mv.mask = oracle::sphere_mask(in, local, kRadius, conservative);
    views.push_back(std::move(mv));
  }
  return views;
}

}  // namespace

TEST_CASE("carved hull contains the shape when masks are conservative") {
  pxa::CubePlacement p;
  const auto views = sphere_views(6, 96, true, p);
  const auto occ = pxa::carve(views, 0, p);
  const Vec3 center(0, 0, p.d);
  std::size_t inside = 0;
  for (int i = 0; i < 32; ++i)
    for (int j = 0; j < 32; ++j)
      for (int k = 0; k < 32; ++k) {
        if (oracle::sphere_sdf(pxa::voxel_center(i, j, k, p), center, kRadius) <= 0.0) {
          ++inside;
          CHECK(occ.at(i, j, k));
        }
      }
  CHECK(inside > 0);
}

TEST_CASE("adding views never grows the hull") {
  pxa::CubePlacement p;
  const auto views = sphere_views(6, 64, false, p);
  std::size_t previous = p.voxel_count() + 1;
  for (std::size_t n = 1; n <= views.size(); ++n) {
    const std::vector<pxa::MaskView> subset(views.begin(), views.begin() + n);
    const std::size_t count = pxa::carve(subset, 0, p).count();
    CHECK(count <= previous);
    previous = count;
  }
}

TEST_CASE("voxels seen by no view are empty, full masks keep the rest") {
  pxa::MaskView mv;
  mv.height = mv.width = 16;
  mv.intrinsics = pxa::fov_to_intrinsics(40.0, 16, 16);
  mv.mask.assign(256, 1);
  const auto p = pxa::auto_place(40.0, 1.0, 8);
  const auto occ = pxa::carve({mv}, 0, p);
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 8; ++j)
      for (int k = 0; k < 8; ++k) {
        const Vec3 c = pxa::voxel_center(i, j, k, p);
        const auto px = pxa::project(c, mv.intrinsics);
        const bool seen = px.u >= 0 && px.u < 16 && px.v >= 0 && px.v < 16;
        CHECK(occ.at(i, j, k) == seen);
      }
}

TEST_CASE("an empty mask gives an empty mesh") {
  pxa::MaskView mv;
  mv.height = mv.width = 16;
  mv.intrinsics = pxa::fov_to_intrinsics(40.0, 16, 16);
  mv.mask.assign(256, 0);
  CHECK(pxa::generate_mesh({mv}, 0, pxa::auto_place(40.0, 1.0, 8)).empty());
}

TEST_CASE("carve input validation") {
  pxa::MaskView mv;
  mv.height = mv.width = 16;
  mv.intrinsics = pxa::fov_to_intrinsics(40.0, 32, 32);
  mv.mask.assign(256, 1);
  const auto p = pxa::auto_place(40.0, 1.0, 8);
  CHECK_THROWS_AS(pxa::carve({mv}, 0, p), pxa::Error);
  CHECK_THROWS_AS(pxa::carve({}, 0, p), pxa::Error);
  mv.intrinsics = pxa::fov_to_intrinsics(40.0, 16, 16);
  CHECK_THROWS_AS(pxa::carve({mv}, 3, p), pxa::Error);
  CHECK_THROWS_AS(pxa::generate_mesh({mv}, 0, p, -1), pxa::Error);
}

TEST_CASE("generated sphere mesh is closed and close to the sphere") {
  pxa::CubePlacement p;
  const auto views = sphere_views(6, 128, false, p);
  const auto mesh = pxa::generate_mesh(views, 0, p);
  REQUIRE_FALSE(mesh.empty());
  const Vec3 center(0, 0, p.d);
  double worst = 0.0;
  for (const auto& v : mesh.vertices) worst = std::max(worst, std::abs((v - center).norm() - kRadius));
  // Six silhouettes leave hull corners; they stay within a few voxels.
  CHECK(worst < 4.0 * p.pitch());
}
