#include <doctest.h>

#include <cmath>
#include <map>
#include <numbers>
#include <set>

#include "oracles.hpp"
#include "pxa/error.hpp"
#include "pxa/synth.hpp"
#include "pxa/volume.hpp"

using pxa::Vec3;

namespace {

// Dense barycentric sampling of the triangle; an upper bound that converges
// to the true distance.
double sampled_distance(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
  double best = 1e300;
  const int n = 200;
  for (int i = 0; i <= n; ++i)
    for (int j = 0; i + j <= n; ++j) {
      const double u = double(i) / n, v = double(j) / n;
      best = std::min(best, (p - (a + u * (b - a) + v * (c - a))).norm());
    }
  return best;
}

double box_distance(const Vec3& p, const Vec3& center, const Vec3& half) {
  const Vec3 q = (p - center).cwiseAbs() - half;
  return q.cwiseMax(0.0).norm() + std::min(q.maxCoeff(), 0.0);
}

}  // namespace

TEST_CASE("point-triangle distance matches dense sampling") {
  pxa::Rng rng(1);
  for (int n = 0; n < 100; ++n) {
    const Vec3 a = oracle::random_unit(rng), b = oracle::random_unit(rng), c = oracle::random_unit(rng);
    const Vec3 p(rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2));
    const double d = pxa::point_triangle_distance(p, a, b, c);
    const double s = sampled_distance(p, a, b, c);
    CHECK(d <= s + 1e-12);
    CHECK(s - d < 0.02);
  }
  // Exact cases: above the interior, beyond a vertex, beside an edge.
  const Vec3 a(0, 0, 0), b(1, 0, 0), c(0, 1, 0);
  CHECK(pxa::point_triangle_distance(Vec3(0.2, 0.2, 0.5), a, b, c) == 0.5);
  CHECK(pxa::point_triangle_distance(Vec3(-3, -4, 0), a, b, c) == 5.0);
  CHECK(pxa::point_triangle_distance(Vec3(0.5, -2, 0), a, b, c) == 2.0);
}

TEST_CASE("winding number separates inside from outside, either orientation") {
  auto sphere = pxa::make_icosphere(1.0, 2);
  auto flipped = sphere;
  for (auto& t : flipped.triangles) std::swap(t[1], t[2]);
  CHECK(pxa::winding_number(sphere, Vec3(0.1, 0.2, -0.3)) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(pxa::winding_number(flipped, Vec3(0.1, 0.2, -0.3)) == doctest::Approx(-1.0).epsilon(1e-9));
  CHECK(std::abs(pxa::winding_number(sphere, Vec3(2, 0, 0))) < 1e-9);
  const Vec3 probe(0.3, -0.2, 0.1);
  CHECK(pxa::signed_distance(sphere, probe) == pxa::signed_distance(flipped, probe));
  CHECK(pxa::signed_distance(sphere, probe) < 0.0);
  CHECK(pxa::signed_distance(sphere, Vec3(0, 0, 3)) > 0.0);
}

TEST_CASE("voxelized box matches the exact box distance") {
  const Vec3 center(0.05, -0.02, 1.0), half(0.2, 0.15, 0.25);
  const auto box = pxa::make_box(half, center);
  const pxa::CubePlacement p{1.0, 1.0, 12};
  const auto grid = pxa::voxelize_sdf(box, p);
  for (int i = 0; i < 12; ++i)
    for (int j = 0; j < 12; ++j)
      for (int k = 0; k < 12; ++k) {
        const Vec3 c = pxa::voxel_center(i, j, k, p);
        const double exact = box_distance(c, center, half);
        if (exact > 0) {
          CHECK(std::abs(grid.at(i, j, k) - exact) < 1e-9);
        } else {
          CHECK(grid.at(i, j, k) <= 0.0);
          CHECK(std::abs(grid.at(i, j, k) - exact) < 1e-9);
        }
      }
}

TEST_CASE("voxelized icosphere agrees with the analytic sphere within a sagitta") {
  const pxa::CubePlacement p{1.0, 1.0, 32};
  const Vec3 center(0, 0, 1.0);
  const auto sphere = pxa::make_icosphere(0.3, 3, center);
  const double sag = oracle::max_sagitta(sphere, center, 0.3);
  const auto grid = pxa::voxelize_sdf(sphere, p);
  for (std::size_t idx = 0; idx < grid.values.size(); idx += 7) {
    const int k = idx % 32, j = (idx / 32) % 32, i = idx / 1024;
    const double analytic = oracle::sphere_sdf(pxa::voxel_center(i, j, k, p), center, 0.3);
    CHECK(std::abs(grid.values[idx] - analytic) <= sag + 1e-12);
  }
  // Cube center is the sphere center (R even: probe the analytic function).
  CHECK(pxa::signed_distance(sphere, center) == doctest::Approx(-0.3).epsilon(sag / 0.3));
}

TEST_CASE("voxelize rejects an empty mesh") {
  CHECK_THROWS_AS(pxa::voxelize_sdf(pxa::TriMesh{}, pxa::CubePlacement{1, 1, 4}), pxa::Error);
}

TEST_CASE("marching cubes on an all-positive grid is empty") {
  const pxa::SdfGrid grid(pxa::CubePlacement{1, 1, 6}, 0.5);
  CHECK(pxa::marching_cubes(grid).empty());
  CHECK_THROWS_AS(pxa::marching_cubes(pxa::SdfGrid(pxa::CubePlacement{1, 1, 1}, 1.0)), pxa::Error);
}

TEST_CASE("marching cubes on an analytic sphere") {
  const pxa::CubePlacement p{1.0, 1.0, 64};
  const Vec3 center(0, 0, 1.0);
  const auto mesh = pxa::marching_cubes(oracle::sphere_grid(p, center, 0.3));
  const auto topo = oracle::topology(mesh);
  CHECK(topo.closed_manifold);
  CHECK(topo.euler == 2);
  const double area = 4.0 * std::numbers::pi * 0.09;
  CHECK(std::abs(mesh.area() - area) / area < 0.02);
  // Oriented toward positive values: outward, positive enclosed volume.
  pxa::TriMesh centered = mesh;
  for (auto& v : centered.vertices) v -= center;
  const double vol = oracle::signed_volume(centered);
  CHECK(vol == doctest::Approx(4.0 / 3.0 * std::numbers::pi * 0.027).epsilon(0.03));
  for (const auto& v : mesh.vertices) CHECK(std::abs((v - center).norm() - 0.3) < p.pitch());
}

TEST_CASE("a single inside voxel gives a small closed surface around it") {
  const pxa::CubePlacement p{1.0, 1.0, 5};
  pxa::SdfGrid grid(p, 1.0);
  grid.at(2, 2, 2) = -1.0;
  const auto mesh = pxa::marching_cubes(grid);
  REQUIRE_FALSE(mesh.empty());
  CHECK(oracle::topology(mesh).closed_manifold);
  CHECK(oracle::topology(mesh).euler == 2);
  pxa::TriMesh shifted = mesh;
  const Vec3 c = pxa::voxel_center(2, 2, 2, p);
  for (auto& v : shifted.vertices) v -= c;
  const double vol = oracle::signed_volume(shifted);
  CHECK(vol > 0.0);
  CHECK(vol < std::pow(2.0 * p.pitch(), 3));
  CHECK(pxa::winding_number(mesh, c) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("occupancy_from_sdf thresholds") {
  const pxa::CubePlacement p{1.0, 1.0, 64};
  const auto grid = oracle::sphere_grid(p, Vec3(0, 0, 1.0), 0.3);
  const double expected = 4.0 / 3.0 * std::numbers::pi * 0.027 * 64 * 64 * 64;
  CHECK(std::abs(pxa::occupancy_from_sdf(grid).count() - expected) / expected < 0.05);
  CHECK(pxa::occupancy_from_sdf(grid, std::numeric_limits<double>::infinity()).count() ==
        p.voxel_count());
  CHECK(pxa::occupancy_from_sdf(pxa::SdfGrid(p, 0.1)).count() == 0);
}

TEST_CASE("distance transform of empty and full grids") {
  const pxa::CubePlacement p{1.0, 2.0, 4};
  const auto empty = pxa::sdf_from_occupancy(pxa::OccupancyGrid(p, false));
  const auto full = pxa::sdf_from_occupancy(pxa::OccupancyGrid(p, true));
  for (double v : empty.values) CHECK(v == 2.0 * std::sqrt(3.0));
  for (double v : full.values) CHECK(v == -2.0 * std::sqrt(3.0));
}

TEST_CASE("distance transform matches brute force") {
  pxa::Rng rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    const int r = 3 + trial % 5;
    const pxa::CubePlacement p{1.0, 1.5, r};
    pxa::OccupancyGrid occ(p);
    for (auto& b : occ.bits) b = rng.uniform() < 0.3 ? 1 : 0;
    occ.bits[0] = 1;
    occ.bits[1] = 0;
    const auto sdf = pxa::sdf_from_occupancy(occ);
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < r; ++j)
        for (int k = 0; k < r; ++k) {
          const bool inside = occ.at(i, j, k);
          double best = 1e300;
          for (int a = 0; a < r; ++a)
            for (int b = 0; b < r; ++b)
              for (int c = 0; c < r; ++c) {
                if (occ.at(a, b, c) == inside) continue;
                best = std::min(best, std::sqrt(double((a - i) * (a - i) + (b - j) * (b - j) +
                                                       (c - k) * (c - k))));
              }
          const double expect = (inside ? -best : best) * p.pitch();
          CHECK(std::abs(sdf.at(i, j, k) - expect) < 1e-12);
        }
  }
}

TEST_CASE("box smoothing") {
  pxa::Rng rng(4);
  const pxa::CubePlacement p{1.0, 1.0, 6};
  pxa::SdfGrid grid(p);
  for (double& v : grid.values) v = rng.uniform(-1, 1);
  const auto same = pxa::box_smooth(grid, 0);
  CHECK(same.values == grid.values);
  const auto smooth = pxa::box_smooth(grid, 1);
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j)
      for (int k = 0; k < 6; ++k) {
        double sum = 0.0;
        int n = 0;
        for (int a = std::max(0, i - 1); a <= std::min(5, i + 1); ++a)
          for (int b = std::max(0, j - 1); b <= std::min(5, j + 1); ++b)
            for (int c = std::max(0, k - 1); c <= std::min(5, k + 1); ++c) {
              sum += grid.at(a, b, c);
              ++n;
            }
        CHECK(std::abs(smooth.at(i, j, k) - sum / n) < 1e-12);
      }
  const auto flat = pxa::box_smooth(pxa::SdfGrid(p, 0.25), 2);
  for (double v : flat.values) CHECK(std::abs(v - 0.25) < 1e-15);
  CHECK_THROWS_AS(pxa::box_smooth(grid, -1), pxa::Error);
}

TEST_CASE("voxelize then marching cubes reproduces a convex shape") {
  const pxa::CubePlacement p{1.0, 1.0, 32};
  const Vec3 center(0, 0, 1.0);
  const auto box = pxa::make_box(Vec3(0.2, 0.15, 0.25), center);
  const auto mesh = pxa::marching_cubes(pxa::voxelize_sdf(box, p));
  const auto a = pxa::sample_surface(mesh, 3000, 1);
  const auto b = pxa::sample_surface(box, 3000, 1);
  const double sym = pxa::directed_mean_distance(a, b) + pxa::directed_mean_distance(b, a);
  CHECK(sym <= 2.0 * p.pitch());
}
