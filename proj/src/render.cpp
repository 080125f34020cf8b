#include <algorithm>
#include <cmath>
#include <limits>

#include "pxa/error.hpp"
#include "pxa/eval.hpp"
#include "pxa/parallel.hpp"

namespace pxa {
namespace {

struct ScreenTriangle {
  Vec3 a, b, c;            // camera frame
  Vec3 normal;             // unnormalized face normal, camera frame
  double u[3], v[3];       // projected vertices
  int col_lo, col_hi, row_lo, row_hi;
  bool usable = false;
};

double edge(double ax, double ay, double bx, double by, double px, double py) {
  return (bx - ax) * (py - ay) - (by - ay) * (px - ax);
}

std::vector<ScreenTriangle> setup(const TriMesh& mesh, const CameraIntrinsics& intr,
                                  const Pose& world_from_camera, double z_near) {
  const Pose camera_from_world = world_from_camera.inverse();
  std::vector<Vec3> cam(mesh.vertices.size());
  for (std::size_t i = 0; i < cam.size(); ++i) cam[i] = camera_from_world.apply(mesh.vertices[i]);

  std::vector<ScreenTriangle> tris(mesh.triangles.size());
  for (std::size_t t = 0; t < tris.size(); ++t) {
    ScreenTriangle& st = tris[t];
    const auto& idx = mesh.triangles[t];
    st.a = cam[idx[0]];
    st.b = cam[idx[1]];
    st.c = cam[idx[2]];
    if (!(st.a.z() > z_near && st.b.z() > z_near && st.c.z() > z_near)) continue;
    st.normal = (st.b - st.a).cross(st.c - st.a);
    const Vec3* verts[3] = {&st.a, &st.b, &st.c};
    double umin = std::numeric_limits<double>::infinity(), umax = -umin;
    double vmin = umin, vmax = -umin;
    for (int k = 0; k < 3; ++k) {
      const PixelProjection px = project(*verts[k], intr);
      st.u[k] = px.u;
      st.v[k] = px.v;
      umin = std::min(umin, px.u);
      umax = std::max(umax, px.u);
      vmin = std::min(vmin, px.v);
      vmax = std::max(vmax, px.v);
    }
    if (edge(st.u[0], st.v[0], st.u[1], st.v[1], st.u[2], st.v[2]) == 0.0) continue;
    // Pixels whose centers (c + 0.5) fall inside the bounding box.
    st.col_lo = static_cast<int>(std::max(0.0, std::ceil(umin - 0.5)));
    st.col_hi = static_cast<int>(std::min(intr.width - 1.0, std::floor(umax - 0.5)));
    st.row_lo = static_cast<int>(std::max(0.0, std::ceil(vmin - 0.5)));
    st.row_hi = static_cast<int>(std::min(intr.height - 1.0, std::floor(vmax - 0.5)));
    st.usable = st.col_lo <= st.col_hi && st.row_lo <= st.row_hi;
  }
  return tris;
}

struct Raster {
  std::vector<int> triangle;   // -1 where uncovered
  std::vector<double> depth;
};

Raster rasterize(const TriMesh& mesh, const CameraIntrinsics& intr,
                 const Pose& world_from_camera, const RenderOptions& opts) {
  intr.validate();
  mesh.validate();
  const std::vector<ScreenTriangle> tris = setup(mesh, intr, world_from_camera, opts.z_near);
  const std::size_t pixels = static_cast<std::size_t>(intr.width) * intr.height;
  Raster out{std::vector<int>(pixels, -1),
             std::vector<double>(pixels, std::numeric_limits<double>::infinity())};

  // Rows are owned by exactly one worker; within a pixel, triangles are
  // visited in index order, so ties resolve identically for any thread count.
  parallel_for(0, static_cast<std::size_t>(intr.height), [&](std::size_t row_begin,
                                                            std::size_t row_end) {
    const int r0 = static_cast<int>(row_begin);
    const int r1 = static_cast<int>(row_end) - 1;
    for (std::size_t t = 0; t < tris.size(); ++t) {
      const ScreenTriangle& st = tris[t];
      if (!st.usable || st.row_hi < r0 || st.row_lo > r1) continue;
      const int rlo = std::max(st.row_lo, r0);
      const int rhi = std::min(st.row_hi, r1);
      const double plane = st.normal.dot(st.a);
      for (int row = rlo; row <= rhi; ++row) {
        const double pv = row + 0.5;
        for (int col = st.col_lo; col <= st.col_hi; ++col) {
          const double pu = col + 0.5;
          const double w0 = edge(st.u[1], st.v[1], st.u[2], st.v[2], pu, pv);
          const double w1 = edge(st.u[2], st.v[2], st.u[0], st.v[0], pu, pv);
          const double w2 = edge(st.u[0], st.v[0], st.u[1], st.v[1], pu, pv);
          const bool inside = (w0 >= 0.0 && w1 >= 0.0 && w2 >= 0.0) ||
                              (w0 <= 0.0 && w1 <= 0.0 && w2 <= 0.0);
          if (!inside) continue;
          // Exact ray/plane hit; the ray direction has unit z, so the ray
          // parameter is the camera-frame depth.
          const Vec3 dir = pixel_direction(pu, pv, intr);
          const double denom = st.normal.dot(dir);
          if (denom == 0.0) continue;
          const double z = plane / denom;
          if (!(z > opts.z_near)) continue;
          const std::size_t px = static_cast<std::size_t>(row) * intr.width + col;
          if (z < out.depth[px]) {
            out.depth[px] = z;
            out.triangle[px] = static_cast<int>(t);
          }
        }
      }
    }
  });
  return out;
}

}  // namespace

std::vector<int> render_triangle_ids(const TriMesh& mesh, const CameraIntrinsics& intr,
                                     const Pose& world_from_camera,
                                     const RenderOptions& opts) {
  return rasterize(mesh, intr, world_from_camera, opts).triangle;
}

NormalMap render_normals(const TriMesh& mesh, const CameraIntrinsics& intr,
                         const Pose& world_from_camera, const RenderOptions& opts) {
  const Raster raster = rasterize(mesh, intr, world_from_camera, opts);
  const Mat3 camera_from_world = world_from_camera.rotation().transpose();
  NormalMap map(intr.height, intr.width);
  for (int row = 0; row < intr.height; ++row) {
    for (int col = 0; col < intr.width; ++col) {
      const std::size_t px = static_cast<std::size_t>(row) * intr.width + col;
      const int t = raster.triangle[px];
      if (t < 0) continue;
      const auto& idx = mesh.triangles[t];
      const Vec3& a = mesh.vertices[idx[0]];
      Vec3 n = camera_from_world * (mesh.vertices[idx[1]] - a).cross(mesh.vertices[idx[2]] - a);
      n.normalize();
      if (n.dot(pixel_direction(col + 0.5, row + 0.5, intr)) > 0.0) n = -n;
      map.normals[px] = n;
      map.valid[px] = 1;
    }
  }
  return map;
}

DepthMap render_depth(const TriMesh& mesh, const CameraIntrinsics& intr,
                      const Pose& world_from_camera, const RenderOptions& opts) {
  const Raster raster = rasterize(mesh, intr, world_from_camera, opts);
  DepthMap map(intr.height, intr.width);
  for (std::size_t px = 0; px < raster.triangle.size(); ++px) {
    if (raster.triangle[px] < 0) continue;
    map.depth[px] = raster.depth[px];
    map.valid[px] = 1;
  }
  return map;
}

}  // namespace pxa
