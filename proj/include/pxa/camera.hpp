#pragma once

// Pinhole camera model.
//
// Conventions shared by every module:
//   * camera frame: origin at the optical center, +x right, +y down, +z forward
//   * pixel index i covers the continuous coordinate range [i, i+1), so the
//     center of pixel i sits at i + 0.5
//   * poses are stored world-from-camera

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace pxa {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;

struct CameraIntrinsics {
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;
  int width = 1;
  int height = 1;

  // Throws invalid_input unless fx, fy > 0, width, height >= 1, all finite.
  void validate() const;

  bool operator==(const CameraIntrinsics&) const = default;
};

// Rigid transform. Stored as world-from-camera when attached to a camera.
class Pose {
 public:
  Pose() = default;
  // Throws invalid_input unless the rotation is orthonormal with det +1
  // (tolerance 1e-9) and all entries are finite.
  Pose(const Mat3& rotation, const Vec3& translation);

  static Pose identity() { return Pose(); }
  static Pose from_matrix(const Mat4& m);

  const Mat3& rotation() const { return rotation_; }
  const Vec3& translation() const { return translation_; }
  Mat4 matrix() const;

  Vec3 apply(const Vec3& p) const { return rotation_ * p + translation_; }
  Pose inverse() const;

  // (a * b).apply(p) == a.apply(b.apply(p))
  friend Pose operator*(const Pose& a, const Pose& b);

 private:
  Mat3 rotation_ = Mat3::Identity();
  Vec3 translation_ = Vec3::Zero();
};

struct Ray {
  Vec3 origin = Vec3::Zero();
  Vec3 direction = Vec3::UnitZ();

  Vec3 at(double t) const { return origin + t * direction; }
};

struct PixelProjection {
  double u = 0.0;
  double v = 0.0;
  double z = 0.0;
};

// Throws numeric if point.z <= 0 (behind or on the camera plane).
PixelProjection project(const Vec3& point, const CameraIntrinsics& intr);

// Camera-frame ray through continuous pixel coordinate (u, v).
Ray unproject(double u, double v, const CameraIntrinsics& intr);

// Un-normalized ray direction with unit z component.
inline Vec3 pixel_direction(double u, double v, const CameraIntrinsics& intr) {
  return Vec3((u - intr.cx) / intr.fx, (v - intr.cy) / intr.fy, 1.0);
}

// Square-pixel camera whose horizontal and vertical full field of view are
// both fov_deg, principal point at the image center.
CameraIntrinsics fov_to_intrinsics(double fov_deg, int width, int height);

struct Camera {
  CameraIntrinsics intrinsics;
  Pose world_from_camera;
};

}  // namespace pxa
