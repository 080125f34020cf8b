#include "pxa/volume.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Geometry>

#include "pxa/error.hpp"
#include "pxa/parallel.hpp"

namespace pxa {

void TriMesh::validate() const {
  const auto n = static_cast<long long>(vertices.size());
  for (const auto& v : vertices) {
    if (!v.allFinite()) throw_invalid("mesh has non-finite vertex coordinates");
  }
  for (const auto& t : triangles) {
    for (int idx : t) {
      if (idx < 0 || idx >= n) throw_invalid("mesh triangle index out of range");
    }
    if (t[0] == t[1] || t[1] == t[2] || t[0] == t[2]) {
      throw_invalid("mesh has a degenerate triangle with repeated indices");
    }
  }
}

double TriMesh::area() const {
  double total = 0.0;
  for (const auto& t : triangles) {
    total += 0.5 * (vertices[t[1]] - vertices[t[0]])
                       .cross(vertices[t[2]] - vertices[t[0]])
                       .norm();
  }
  return total;
}

std::size_t OccupancyGrid::count() const {
  return static_cast<std::size_t>(std::count(bits.begin(), bits.end(), std::uint8_t{1}));
}

double point_triangle_distance(const Vec3& p, const Vec3& a, const Vec3& b,
                               const Vec3& c) {
  // Closest point by Voronoi-region classification (Ericson, RTCD 5.1.5).
  const Vec3 ab = b - a;
  const Vec3 ac = c - a;
  const Vec3 ap = p - a;
  const double d1 = ab.dot(ap);
  const double d2 = ac.dot(ap);
  if (d1 <= 0.0 && d2 <= 0.0) return ap.norm();

  const Vec3 bp = p - b;
  const double d3 = ab.dot(bp);
  const double d4 = ac.dot(bp);
  if (d3 >= 0.0 && d4 <= d3) return bp.norm();

  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) {
    const double t = d1 / (d1 - d3);
    return (p - (a + t * ab)).norm();
  }

  const Vec3 cp = p - c;
  const double d5 = ab.dot(cp);
  const double d6 = ac.dot(cp);
  if (d6 >= 0.0 && d5 <= d6) return cp.norm();

  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) {
    const double t = d2 / (d2 - d6);
    return (p - (a + t * ac)).norm();
  }

  const double va = d3 * d6 - d5 * d4;
  if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
    const double t = (d4 - d3) / ((d4 - d3) + (d5 - d6));
    return (p - (b + t * (c - b))).norm();
  }

  const double denom = 1.0 / (va + vb + vc);
  const double v = vb * denom;
  const double w = vc * denom;
  return (p - (a + v * ab + w * ac)).norm();
}

double winding_number(const TriMesh& mesh, const Vec3& point) {
  // Sum of signed solid angles (Van Oosterom & Strackee).
  double total = 0.0;
  for (const auto& t : mesh.triangles) {
    const Vec3 a = mesh.vertices[t[0]] - point;
    const Vec3 b = mesh.vertices[t[1]] - point;
    const Vec3 c = mesh.vertices[t[2]] - point;
    const double la = a.norm();
    const double lb = b.norm();
    const double lc = c.norm();
    const double numer = a.dot(b.cross(c));
    const double denom = la * lb * lc + a.dot(b) * lc + b.dot(c) * la + c.dot(a) * lb;
    total += 2.0 * std::atan2(numer, denom);
  }
  return total / (4.0 * std::numbers::pi);
}

double signed_distance(const TriMesh& mesh, const Vec3& point) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& t : mesh.triangles) {
    best = std::min(best, point_triangle_distance(point, mesh.vertices[t[0]],
                                                  mesh.vertices[t[1]],
                                                  mesh.vertices[t[2]]));
  }
  return std::abs(winding_number(mesh, point)) > 0.5 ? -best : best;
}

SdfGrid voxelize_sdf(const TriMesh& mesh, const CubePlacement& p) {
  if (mesh.empty()) throw_invalid("cannot voxelize an empty mesh");
  mesh.validate();
  p.validate();
  SdfGrid grid(p);
  const int r = p.resolution;
  parallel_for(0, grid.values.size(), [&](std::size_t lo, std::size_t hi) {
    for (std::size_t idx = lo; idx < hi; ++idx) {
      const int k = static_cast<int>(idx % r);
      const int j = static_cast<int>((idx / r) % r);
      const int i = static_cast<int>(idx / (static_cast<std::size_t>(r) * r));
      grid.values[idx] = signed_distance(mesh, voxel_center_unchecked(i, j, k, p));
    }
  });
  return grid;
}

OccupancyGrid occupancy_from_sdf(const SdfGrid& grid, double threshold) {
  OccupancyGrid occ(grid.placement);
  for (std::size_t i = 0; i < grid.values.size(); ++i) {
    occ.bits[i] = grid.values[i] <= threshold ? 1 : 0;
  }
  return occ;
}

namespace {

constexpr double kFar = std::numeric_limits<double>::infinity();

// 1D squared-distance transform of sampled function f (Felzenszwalb &
// Huttenlocher), unit sample spacing. Entries of f are 0 at sites and +inf
// elsewhere on the first pass; later passes carry partial results.
void distance_transform_1d(const std::vector<double>& f, std::vector<double>& out,
                           std::vector<int>& hull, std::vector<double>& bounds) {
  const int n = static_cast<int>(f.size());
  int k = -1;
  for (int q = 0; q < n; ++q) {
    if (f[q] == kFar) continue;
    while (k >= 0) {
      const int p = hull[k];
      const double s = ((f[q] + double(q) * q) - (f[p] + double(p) * p)) / (2.0 * (q - p));
      if (s <= bounds[k]) {
        --k;
      } else {
        break;
      }
    }
    ++k;
    hull[k] = q;
    bounds[k] = k == 0 ? -kFar
                       : ((f[q] + double(q) * q) -
                          (f[hull[k - 1]] + double(hull[k - 1]) * hull[k - 1])) /
                             (2.0 * (q - hull[k - 1]));
  }
  if (k < 0) {
    std::fill(out.begin(), out.end(), kFar);
    return;
  }
  int j = 0;
  for (int q = 0; q < n; ++q) {
    while (j < k && bounds[j + 1] < q) ++j;
    const double dq = q - hull[j];
    out[q] = dq * dq + f[hull[j]];
  }
}

// Squared distance (in voxels) from every voxel to the nearest voxel with
// bits == site.
std::vector<double> squared_edt(const OccupancyGrid& occ, std::uint8_t site) {
  const int r = occ.resolution();
  const auto& p = occ.placement;
  std::vector<double> field(occ.bits.size());
  for (std::size_t i = 0; i < field.size(); ++i) {
    field[i] = occ.bits[i] == site ? 0.0 : kFar;
  }
  const std::size_t lines = static_cast<std::size_t>(r) * r;
  for (int axis = 0; axis < 3; ++axis) {
    parallel_for(0, lines, [&](std::size_t lo, std::size_t hi) {
      std::vector<double> f(r), out(r), bounds(r);
      std::vector<int> hull(r);
      for (std::size_t line = lo; line < hi; ++line) {
        const int a = static_cast<int>(line / r);
        const int b = static_cast<int>(line % r);
        auto index = [&](int t) {
          switch (axis) {
            case 0: return p.linear_index(t, a, b);
            case 1: return p.linear_index(a, t, b);
            default: return p.linear_index(a, b, t);
          }
        };
        for (int t = 0; t < r; ++t) f[t] = field[index(t)];
        distance_transform_1d(f, out, hull, bounds);
        for (int t = 0; t < r; ++t) field[index(t)] = out[t];
      }
    });
  }
  return field;
}

}  // namespace

SdfGrid sdf_from_occupancy(const OccupancyGrid& occ) {
  occ.placement.validate();
  SdfGrid grid(occ.placement);
  const double cap = occ.placement.s * std::sqrt(3.0);
  const std::size_t occupied = occ.count();
  if (occupied == 0) {
    std::fill(grid.values.begin(), grid.values.end(), cap);
    return grid;
  }
  if (occupied == occ.bits.size()) {
    std::fill(grid.values.begin(), grid.values.end(), -cap);
    return grid;
  }
  const std::vector<double> to_occupied = squared_edt(occ, 1);
  const std::vector<double> to_empty = squared_edt(occ, 0);
  const double pitch = occ.placement.pitch();
  for (std::size_t i = 0; i < grid.values.size(); ++i) {
    grid.values[i] = occ.bits[i] ? -std::sqrt(to_empty[i]) * pitch
                                 : std::sqrt(to_occupied[i]) * pitch;
  }
  return grid;
}

SdfGrid box_smooth(const SdfGrid& grid, int half_width) {
  if (half_width < 0) throw_invalid("smoothing width must be non-negative");
  if (half_width == 0) return grid;
  const int r = grid.resolution();
  const auto& p = grid.placement;
  SdfGrid out = grid;
  std::vector<double> line(r), prefix(r + 1);
  // Separable: the mean over the clipped box equals the product of 1D means.
  for (int axis = 0; axis < 3; ++axis) {
    for (int a = 0; a < r; ++a) {
      for (int b = 0; b < r; ++b) {
        auto index = [&](int t) {
          switch (axis) {
            case 0: return p.linear_index(t, a, b);
            case 1: return p.linear_index(a, t, b);
            default: return p.linear_index(a, b, t);
          }
        };
        prefix[0] = 0.0;
        for (int t = 0; t < r; ++t) {
          line[t] = out.values[index(t)];
          prefix[t + 1] = prefix[t] + line[t];
        }
        for (int t = 0; t < r; ++t) {
          const int lo = std::max(0, t - half_width);
          const int hi = std::min(r - 1, t + half_width);
          out.values[index(t)] = (prefix[hi + 1] - prefix[lo]) / (hi - lo + 1);
        }
      }
    }
  }
  return out;
}

}  // namespace pxa
