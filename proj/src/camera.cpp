#include "pxa/camera.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include <Eigen/LU>

#include "pxa/error.hpp"

namespace pxa {

void CameraIntrinsics::validate() const {
  if (!std::isfinite(fx) || !std::isfinite(fy) || !std::isfinite(cx) ||
      !std::isfinite(cy)) {
    throw_invalid("camera intrinsics must be finite");
  }
  if (!(fx > 0.0) || !(fy > 0.0)) {
    throw_invalid("camera focal lengths must be positive");
  }
  if (width < 1 || height < 1) {
    std::ostringstream msg;
    msg << "camera image size must be positive, got " << width << "x" << height;
    throw_invalid(msg.str());
  }
}

Pose::Pose(const Mat3& rotation, const Vec3& translation)
    : rotation_(rotation), translation_(translation) {
  if (!rotation_.allFinite() || !translation_.allFinite()) {
    throw_invalid("pose contains non-finite values");
  }
  const double ortho_err =
      (rotation_.transpose() * rotation_ - Mat3::Identity()).cwiseAbs().maxCoeff();
  if (ortho_err > 1e-9) {
    throw_invalid("pose rotation is not orthonormal");
  }
  if (std::abs(rotation_.determinant() - 1.0) > 1e-9) {
    throw_invalid("pose rotation must have determinant +1");
  }
}

Pose Pose::from_matrix(const Mat4& m) {
  if (!m.allFinite()) throw_invalid("pose matrix contains non-finite values");
  if (m(3, 0) != 0.0 || m(3, 1) != 0.0 || m(3, 2) != 0.0 || m(3, 3) != 1.0) {
    throw_invalid("pose matrix last row must be 0 0 0 1");
  }
  return Pose(m.topLeftCorner<3, 3>(), m.topRightCorner<3, 1>());
}

Mat4 Pose::matrix() const {
  Mat4 m = Mat4::Identity();
  m.topLeftCorner<3, 3>() = rotation_;
  m.topRightCorner<3, 1>() = translation_;
  return m;
}

Pose Pose::inverse() const {
  Pose inv;
  inv.rotation_ = rotation_.transpose();
  inv.translation_ = -(inv.rotation_ * translation_);
  return inv;
}

Pose operator*(const Pose& a, const Pose& b) {
  Pose out;
  out.rotation_ = a.rotation_ * b.rotation_;
  out.translation_ = a.rotation_ * b.translation_ + a.translation_;
  return out;
}

PixelProjection project(const Vec3& point, const CameraIntrinsics& intr) {
  if (!(point.z() > 0.0)) {
    throw_numeric("cannot project a point at or behind the camera plane");
  }
  return {intr.fx * point.x() / point.z() + intr.cx,
          intr.fy * point.y() / point.z() + intr.cy, point.z()};
}

Ray unproject(double u, double v, const CameraIntrinsics& intr) {
  return {Vec3::Zero(), pixel_direction(u, v, intr).normalized()};
}

CameraIntrinsics fov_to_intrinsics(double fov_deg, int width, int height) {
  if (!std::isfinite(fov_deg) || !(fov_deg > 0.0) || !(fov_deg < 180.0)) {
    throw_invalid("field of view must lie strictly between 0 and 180 degrees");
  }
  CameraIntrinsics intr;
  // cot(fov/2) = (1 + cos fov) / sin fov, exact at fov = 90 where tan(pi/4) is not.
  const double fov = fov_deg * std::numbers::pi / 180.0;
  intr.fx = intr.fy = (width / 2.0) * (1.0 + std::cos(fov)) / std::sin(fov);
  intr.cx = width / 2.0;
  intr.cy = height / 2.0;
  intr.width = width;
  intr.height = height;
  intr.validate();
  return intr;
}

}  // namespace pxa
