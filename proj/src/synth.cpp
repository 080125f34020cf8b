#include "pxa/synth.hpp"

#include <cmath>
#include <map>
#include <numbers>

#include <Eigen/Geometry>

#include "pxa/error.hpp"
#include "pxa/rng.hpp"

namespace pxa {

ShapeKind parse_shape_kind(const std::string& name) {
  if (name == "sphere") return ShapeKind::sphere;
  if (name == "box") return ShapeKind::box;
  if (name == "torus") return ShapeKind::torus;
  throw_invalid("unknown shape '" + name + "' (expected sphere, box or torus)");
}

std::string to_string(ShapeKind kind) {
  switch (kind) {
    case ShapeKind::sphere: return "sphere";
    case ShapeKind::box: return "box";
    case ShapeKind::torus: return "torus";
  }
  return "unknown";
}

void SyntheticCase::validate() const {
  auto positive = [](double x) { return std::isfinite(x) && x > 0.0; };
  if (!positive(radius) || !positive(major_radius) || !positive(minor_radius) ||
      !positive(cube_scale) || !positive(pointmap_scale) || !half_extents.allFinite() ||
      (half_extents.array() <= 0.0).any()) {
    throw_invalid("synthetic shape parameters must be positive and finite");
  }
  if (minor_radius >= major_radius) throw_invalid("torus minor radius must be below its major radius");
  if (subdivisions < 0 || subdivisions > 7) throw_invalid("subdivision level must lie in [0, 7]");
  if (views < 1) throw_invalid("at least one view is required");
  if (image_size < 1) throw_invalid("image size must be positive");
  if (grid < 1) throw_invalid("grid resolution must be positive");
  if (!std::isfinite(view_distance)) throw_invalid("view distance must be finite");
}

namespace {

void orient_outward(TriMesh& mesh, const Vec3& center) {
  for (auto& t : mesh.triangles) {
    const Vec3& a = mesh.vertices[t[0]];
    const Vec3 n = (mesh.vertices[t[1]] - a).cross(mesh.vertices[t[2]] - a);
    const Vec3 centroid = (a + mesh.vertices[t[1]] + mesh.vertices[t[2]]) / 3.0;
    if (n.dot(centroid - center) < 0.0) std::swap(t[1], t[2]);
  }
}

}  // namespace

TriMesh make_icosphere(double radius, int subdivisions, const Vec3& center) {
  const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Vec3> v = {{-1, phi, 0}, {1, phi, 0},  {-1, -phi, 0}, {1, -phi, 0},
                         {0, -1, phi}, {0, 1, phi},  {0, -1, -phi}, {0, 1, -phi},
                         {phi, 0, -1}, {phi, 0, 1},  {-phi, 0, -1}, {-phi, 0, 1}};
  for (auto& p : v) p.normalize();
  std::vector<std::array<int, 3>> f = {
      {0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11}, {1, 5, 9}, {5, 11, 4},
      {11, 10, 2}, {10, 7, 6}, {7, 1, 8},  {3, 9, 4},  {3, 4, 2},   {3, 2, 6}, {3, 6, 8},
      {3, 8, 9},  {4, 9, 5},  {2, 4, 11},  {6, 2, 10}, {8, 6, 7},   {9, 8, 1}};
  for (int level = 0; level < subdivisions; ++level) {
    std::map<std::pair<int, int>, int> midpoint;
    auto mid = [&](int a, int b) {
      const auto key = std::minmax(a, b);
      auto it = midpoint.find(key);
      if (it != midpoint.end()) return it->second;
      v.push_back((v[a] + v[b]).normalized());
      const int idx = static_cast<int>(v.size()) - 1;
      midpoint.emplace(key, idx);
      return idx;
    };
    std::vector<std::array<int, 3>> next;
    next.reserve(f.size() * 4);
    for (const auto& t : f) {
      const int ab = mid(t[0], t[1]);
      const int bc = mid(t[1], t[2]);
      const int ca = mid(t[2], t[0]);
      next.push_back({t[0], ab, ca});
      next.push_back({t[1], bc, ab});
      next.push_back({t[2], ca, bc});
      next.push_back({ab, bc, ca});
    }
    f = std::move(next);
  }
  TriMesh mesh;
  mesh.vertices.reserve(v.size());
  for (const auto& p : v) mesh.vertices.push_back(center + radius * p);
  mesh.triangles = std::move(f);
  orient_outward(mesh, center);
  return mesh;
}

TriMesh make_box(const Vec3& h, const Vec3& center) {
  TriMesh mesh;
  for (int i = 0; i < 8; ++i) {
    mesh.vertices.push_back(center + Vec3((i & 1) ? h.x() : -h.x(), (i & 2) ? h.y() : -h.y(),
                                          (i & 4) ? h.z() : -h.z()));
  }
  // Two triangles per face; orientation fixed below.
  mesh.triangles = {{0, 2, 1}, {1, 2, 3}, {4, 5, 6}, {5, 7, 6}, {0, 1, 4}, {1, 5, 4},
                    {2, 6, 3}, {3, 6, 7}, {0, 4, 2}, {2, 4, 6}, {1, 3, 5}, {3, 7, 5}};
  orient_outward(mesh, center);
  return mesh;
}

TriMesh make_torus(double major_radius, double minor_radius, int rings, int sides,
                   const Vec3& center) {
  if (rings < 3 || sides < 3) throw_invalid("torus needs at least 3 rings and 3 sides");
  TriMesh mesh;
  const double two_pi = 2.0 * std::numbers::pi;
  for (int i = 0; i < rings; ++i) {
    const double u = two_pi * i / rings;
    for (int j = 0; j < sides; ++j) {
      const double w = two_pi * j / sides;
      const double rr = major_radius + minor_radius * std::cos(w);
      mesh.vertices.push_back(center + Vec3(rr * std::cos(u), rr * std::sin(u),
                                            minor_radius * std::sin(w)));
    }
  }
  auto id = [&](int i, int j) { return (i % rings) * sides + (j % sides); };
  for (int i = 0; i < rings; ++i) {
    for (int j = 0; j < sides; ++j) {
      mesh.triangles.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      mesh.triangles.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
    }
  }
  // Orient against the tube's center circle.
  for (auto& t : mesh.triangles) {
    const Vec3 a = mesh.vertices[t[0]] - center;
    const Vec3 b = mesh.vertices[t[1]] - center;
    const Vec3 c = mesh.vertices[t[2]] - center;
    const Vec3 centroid = (a + b + c) / 3.0;
    const Vec3 ring = Vec3(centroid.x(), centroid.y(), 0.0).normalized() * major_radius;
    if ((b - a).cross(c - a).dot(centroid - ring) < 0.0) std::swap(t[1], t[2]);
  }
  return mesh;
}

Pose look_at_pose(const Vec3& center, const Vec3& direction, double distance) {
  const Vec3 z = -direction.normalized();
  Vec3 x = Vec3::UnitY().cross(z);
  if (x.norm() < 1e-9) x = z.cross(Vec3::UnitX());
  x.normalize();
  const Vec3 y = z.cross(x);
  Mat3 r;
  r.col(0) = x;
  r.col(1) = y;
  r.col(2) = z;
  return Pose(r, center + distance * direction.normalized());
}

std::vector<Vec3> view_directions(int count) {
  if (count < 1) throw_invalid("view count must be positive");
  std::vector<Vec3> dirs;
  const Vec3 reference(0.0, 0.0, -1.0);
  if (count <= 6) {
    // One vertex per icosahedron diameter: six maximally spread silhouettes.
    const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
    const std::vector<Vec3> axes = {{0, 1, phi}, {0, -1, phi}, {1, phi, 0},
                                    {-1, phi, 0}, {phi, 0, 1}, {-phi, 0, 1}};
    const Eigen::Quaterniond q = Eigen::Quaterniond::FromTwoVectors(axes[0].normalized(), reference);
    for (int i = 0; i < count; ++i) dirs.push_back((q * axes[i].normalized()).normalized());
  } else {
    // Fibonacci sphere, rotated so the first point is the reference.
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    std::vector<Vec3> pts;
    for (int i = 0; i < count; ++i) {
      const double z = 1.0 - 2.0 * (i + 0.5) / count;
      const double r = std::sqrt(1.0 - z * z);
      pts.emplace_back(r * std::cos(golden * i), r * std::sin(golden * i), z);
    }
    const Eigen::Quaterniond q = Eigen::Quaterniond::FromTwoVectors(pts[0], reference);
    for (const auto& p : pts) dirs.push_back((q * p).normalized());
  }
  dirs[0] = reference;
  return dirs;
}

SyntheticScene make_synthetic(const SyntheticCase& spec) {
  spec.validate();
  SyntheticScene scene;
  scene.spec = spec;
  scene.placement = auto_place(spec.fov_deg, spec.cube_scale, spec.grid);
  const Vec3 center(0.0, 0.0, scene.placement.d);

  switch (spec.shape) {
    case ShapeKind::sphere:
      scene.mesh = make_icosphere(spec.radius, spec.subdivisions);
      break;
    case ShapeKind::box:
      scene.mesh = make_box(spec.half_extents);
      break;
    case ShapeKind::torus: {
      const int rings = 8 << spec.subdivisions;
      scene.mesh = make_torus(spec.major_radius, spec.minor_radius, rings,
                              std::max(6, rings / 3));
      break;
    }
  }

  Mat3 rotation = Mat3::Identity();
  if (spec.random_rotation) {
    Rng rng(spec.seed);
    Eigen::Quaterniond q(rng.normal(), rng.normal(), rng.normal(), rng.normal());
    if (q.norm() > 1e-12) rotation = q.normalized().toRotationMatrix();
  }
  const double half = spec.cube_scale / 2.0;
  for (Vec3& v : scene.mesh.vertices) {
    v = rotation * v + center;
    const Vec3 rel = v - center;
    if (rel.cwiseAbs().maxCoeff() > half) throw_invalid("synthetic shape exits the generation cube");
  }

  const CameraIntrinsics intr = fov_to_intrinsics(spec.fov_deg, spec.image_size, spec.image_size);
  // Default orbit: the cube's circumscribed sphere just fits the view cone, so
  // every orbiting view sees the whole cube.
  const double distance =
      spec.view_distance > 0.0
          ? spec.view_distance
          : (spec.cube_scale * std::sqrt(3.0) / 2.0) / std::sin(spec.fov_deg * std::numbers::pi / 360.0);
  const std::vector<Vec3> dirs = view_directions(spec.views);
  for (int v = 0; v < spec.views; ++v) {
    SyntheticView view;
    view.camera.intrinsics = intr;
    view.camera.world_from_camera =
        v == 0 ? Pose::identity() : look_at_pose(center, dirs[v], distance);
    view.normals = render_normals(scene.mesh, intr, view.camera.world_from_camera);
    view.depth = render_depth(scene.mesh, intr, view.camera.world_from_camera);
    view.mask = view.depth.valid;
    scene.views.push_back(std::move(view));
  }

  const DepthMap& ref = scene.views.front().depth;
  scene.point_map.height = ref.height;
  scene.point_map.width = ref.width;
  scene.point_map.points.assign(ref.depth.size(), Vec3::Zero());
  scene.point_map.valid = ref.valid;
  for (int row = 0; row < ref.height; ++row) {
    for (int col = 0; col < ref.width; ++col) {
      const std::size_t px = static_cast<std::size_t>(row) * ref.width + col;
      if (!ref.valid[px]) continue;
      scene.point_map.points[px] =
          spec.pointmap_scale * ref.depth[px] * pixel_direction(col + 0.5, row + 0.5, intr);
    }
  }
  return scene;
}

}  // namespace pxa
