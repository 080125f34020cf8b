#include <doctest.h>

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "pxa/camera.hpp"
#include "pxa/error.hpp"

using pxa::Vec3;

namespace {

pxa::CameraIntrinsics sample_intrinsics() {
  pxa::CameraIntrinsics in;
  in.fx = 500.0;
  in.fy = 480.0;
  in.cx = 320.0;
  in.cy = 240.0;
  in.width = 640;
  in.height = 480;
  return in;
}

pxa::ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const pxa::Error& e) {
    return e.kind();
  }
  FAIL("expected pxa::Error");
  return pxa::ErrorKind::numeric;
}

}  // namespace

TEST_CASE("project matches the pinhole equations") {
  const auto in = sample_intrinsics();
  const auto px = pxa::project(Vec3(0.2, -0.1, 2.0), in);
  CHECK(px.u == doctest::Approx(500.0 * 0.1 + 320.0).epsilon(1e-15));
  CHECK(px.v == doctest::Approx(480.0 * -0.05 + 240.0).epsilon(1e-15));
  CHECK(px.z == 2.0);
}

TEST_CASE("principal point unprojects to the optical axis") {
  const auto ray = pxa::unproject(320.0, 240.0, sample_intrinsics());
  CHECK(ray.origin == Vec3::Zero());
  CHECK(ray.direction.x() == 0.0);
  CHECK(ray.direction.y() == 0.0);
  CHECK(ray.direction.z() == 1.0);
}

TEST_CASE("pixel centers sit at half-integers") {
  // 2x2 image with the principal point at the image center: the center of
  // pixel (0, 0) is up-left of the axis by half a pixel.
  pxa::CameraIntrinsics in;
  in.fx = in.fy = 1.0;
  in.cx = in.cy = 1.0;
  in.width = in.height = 2;
  const Vec3 d = pxa::pixel_direction(0.5, 0.5, in);
  CHECK(d.x() == -0.5);
  CHECK(d.y() == -0.5);
  const auto px = pxa::project(Vec3(-0.5, -0.5, 1.0), in);
  CHECK(std::floor(px.u) == 0.0);
  CHECK(std::floor(px.v) == 0.0);
}

TEST_CASE("unproject then project round trips") {
  const auto in = sample_intrinsics();
  pxa::Rng rng(3);
  for (int n = 0; n < 1000; ++n) {
    const double u = rng.uniform(0.0, in.width);
    const double v = rng.uniform(0.0, in.height);
    const double depth = rng.uniform(0.05, 50.0);
    const auto ray = pxa::unproject(u, v, in);
    CHECK(std::abs(ray.direction.norm() - 1.0) < 1e-12);
    const Vec3 p = ray.at(depth);
    const auto px = pxa::project(p, in);
    CHECK(std::abs(px.u - u) < 1e-9);
    CHECK(std::abs(px.v - v) < 1e-9);
  }
}

TEST_CASE("points at or behind the camera plane are a numeric error") {
  const auto in = sample_intrinsics();
  CHECK(kind_of([&] { pxa::project(Vec3(0, 0, 0), in); }) == pxa::ErrorKind::numeric);
  CHECK(kind_of([&] { pxa::project(Vec3(1, 1, -1), in); }) == pxa::ErrorKind::numeric);
}

TEST_CASE("intrinsics validation") {
  auto in = sample_intrinsics();
  CHECK_NOTHROW(in.validate());
  in.fx = 0.0;
  CHECK(kind_of([&] { in.validate(); }) == pxa::ErrorKind::invalid_input);
  in = sample_intrinsics();
  in.width = 0;
  CHECK(kind_of([&] { in.validate(); }) == pxa::ErrorKind::invalid_input);
  in = sample_intrinsics();
  in.cy = std::nan("");
  CHECK(kind_of([&] { in.validate(); }) == pxa::ErrorKind::invalid_input);
}

TEST_CASE("fov_to_intrinsics puts the image corners on the fov cone") {
  for (double fov : {20.0, 40.0, 60.0, 90.0}) {
    const auto in = pxa::fov_to_intrinsics(fov, 256, 256);
    const double slope = std::tan(fov * std::numbers::pi / 360.0);
    const Vec3 d = pxa::pixel_direction(256.0, 0.0, in);
    CHECK(d.x() == doctest::Approx(slope).epsilon(1e-12));
    CHECK(d.y() == doctest::Approx(-slope).epsilon(1e-12));
    CHECK(in.cx == 128.0);
    CHECK(in.cy == 128.0);
  }
  CHECK(pxa::fov_to_intrinsics(90.0, 100, 100).fx == 50.0);
  CHECK(pxa::fov_to_intrinsics(60.0, 512, 512).fx == doctest::Approx(256.0 / std::tan(std::numbers::pi / 6)).epsilon(1e-14));
  CHECK(std::abs(pxa::fov_to_intrinsics(40.0, 518, 518).fx - 711.5966516387472) < 1e-9);
  CHECK_THROWS_AS(pxa::fov_to_intrinsics(180.0, 64, 64), pxa::Error);
  CHECK_THROWS_AS(pxa::fov_to_intrinsics(0.0, 64, 64), pxa::Error);
}

TEST_CASE("pose validation rejects non-rigid matrices") {
  pxa::Mat3 scaled = pxa::Mat3::Identity() * 1.01;
  CHECK(kind_of([&] { pxa::Pose(scaled, Vec3::Zero()); }) == pxa::ErrorKind::invalid_input);
  pxa::Mat3 mirror = pxa::Mat3::Identity();
  mirror(0, 0) = -1.0;
  CHECK(kind_of([&] { pxa::Pose(mirror, Vec3::Zero()); }) == pxa::ErrorKind::invalid_input);
  pxa::Mat4 m = pxa::Mat4::Identity();
  m(3, 0) = 0.5;
  CHECK(kind_of([&] { pxa::Pose::from_matrix(m); }) == pxa::ErrorKind::invalid_input);
}

TEST_CASE("pose inverse and composition") {
  pxa::Rng rng(11);
  for (int n = 0; n < 50; ++n) {
    const pxa::Pose a(oracle::random_rotation(rng), Vec3(rng.normal(), rng.normal(), rng.normal()));
    const pxa::Pose b(oracle::random_rotation(rng), Vec3(rng.normal(), rng.normal(), rng.normal()));
    const Vec3 p(rng.normal(), rng.normal(), rng.normal());
    CHECK((a.inverse().apply(a.apply(p)) - p).norm() < 1e-12);
    CHECK(((a * b).apply(p) - a.apply(b.apply(p))).norm() < 1e-12);
    const pxa::Pose round = pxa::Pose::from_matrix(a.matrix());
    CHECK(round.rotation() == a.rotation());
    CHECK(round.translation() == a.translation());
  }
}
