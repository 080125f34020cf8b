#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "pxa/error.hpp"
#include "pxa/eval.hpp"
#include "pxa/parallel.hpp"
#include "pxa/rng.hpp"

namespace pxa {

// ---------------------------------------------------------------------------
// Normal maps

std::vector<std::uint8_t> silhouette_edge(const NormalMap& gt) {
  const int h = gt.height;
  const int w = gt.width;
  std::vector<std::uint8_t> edge(gt.valid.size(), 0);
  auto valid = [&](int r, int c) { return gt.valid[static_cast<std::size_t>(r) * w + c] != 0; };
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      if (!valid(r, c)) continue;
      const bool border = (r > 0 && !valid(r - 1, c)) || (r + 1 < h && !valid(r + 1, c)) ||
                          (c > 0 && !valid(r, c - 1)) || (c + 1 < w && !valid(r, c + 1));
      if (border) edge[static_cast<std::size_t>(r) * w + c] = 1;
    }
  }
  return edge;
}

std::vector<std::uint8_t> boundary_band(const NormalMap& gt, int width) {
  const int h = gt.height;
  const int w = gt.width;
  const std::vector<std::uint8_t> edge = silhouette_edge(gt);
  // Separable square dilation: Chebyshev ball = row dilation then column.
  std::vector<std::uint8_t> rows(edge.size(), 0), band(edge.size(), 0);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      const int lo = std::max(0, c - width), hi = std::min(w - 1, c + width);
      for (int x = lo; x <= hi; ++x) {
        if (edge[static_cast<std::size_t>(r) * w + x]) {
          rows[static_cast<std::size_t>(r) * w + c] = 1;
          break;
        }
      }
    }
  }
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      const int lo = std::max(0, r - width), hi = std::min(h - 1, r + width);
      for (int y = lo; y <= hi; ++y) {
        if (rows[static_cast<std::size_t>(y) * w + c]) {
          band[static_cast<std::size_t>(r) * w + c] = 1;
          break;
        }
      }
    }
  }
  return band;
}

namespace {

double angle_deg(const Vec3& a, const Vec3& b) {
  // atan2 form: exact zero for identical vectors and accurate near 0 and 180.
  return std::atan2(a.cross(b).norm(), a.dot(b)) * 180.0 / std::numbers::pi;
}

double masked_ssim(const NormalMap& pred, const NormalMap& gt,
                   const std::vector<std::uint8_t>& region, const NormalMetricOptions& opts) {
  const int h = gt.height;
  const int w = gt.width;
  const int half = opts.ssim_window / 2;
  const double c1 = 0.01 * 0.01;
  const double c2 = 0.03 * 0.03;
  std::vector<double> kernel(static_cast<std::size_t>(2 * half + 1) * (2 * half + 1));
  for (int dy = -half; dy <= half; ++dy) {
    for (int dx = -half; dx <= half; ++dx) {
      kernel[static_cast<std::size_t>(dy + half) * (2 * half + 1) + (dx + half)] =
          std::exp(-(dx * dx + dy * dy) / (2.0 * opts.ssim_sigma * opts.ssim_sigma));
    }
  }

  double total = 0.0;
  std::size_t terms = 0;
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      if (!region[static_cast<std::size_t>(r) * w + c]) continue;
      for (int ch = 0; ch < 3; ++ch) {
        double wsum = 0.0, mx = 0.0, my = 0.0, mxx = 0.0, myy = 0.0, mxy = 0.0;
        for (int dy = -half; dy <= half; ++dy) {
          const int y = r + dy;
          if (y < 0 || y >= h) continue;
          for (int dx = -half; dx <= half; ++dx) {
            const int x = c + dx;
            if (x < 0 || x >= w) continue;
            const std::size_t q = static_cast<std::size_t>(y) * w + x;
            if (!region[q]) continue;
            const double g = kernel[static_cast<std::size_t>(dy + half) * (2 * half + 1) + (dx + half)];
            const double a = (pred.normals[q][ch] + 1.0) / 2.0;
            const double b = (gt.normals[q][ch] + 1.0) / 2.0;
            wsum += g;
            mx += g * a;
            my += g * b;
            mxx += g * a * a;
            myy += g * b * b;
            mxy += g * a * b;
          }
        }
        mx /= wsum;
        my /= wsum;
        const double vx = mxx / wsum - mx * mx;
        const double vy = myy / wsum - my * my;
        const double cxy = mxy / wsum - mx * my;
        total += ((2.0 * mx * my + c1) * (2.0 * cxy + c2)) /
                 ((mx * mx + my * my + c1) * (vx + vy + c2));
        ++terms;
      }
    }
  }
  return total / static_cast<double>(terms);
}

}  // namespace

NormalMetrics normal_metrics(const NormalMap& pred, const NormalMap& gt,
                             const NormalMetricOptions& opts) {
  if (pred.height != gt.height || pred.width != gt.width) {
    throw_invalid("normal maps differ in size");
  }
  if (pred.valid.size() != gt.valid.size() || pred.normals.size() != gt.normals.size() ||
      gt.normals.size() != gt.valid.size()) {
    throw_invalid("normal map buffers are inconsistent with their dimensions");
  }
  if (opts.boundary_width < 0) throw_invalid("boundary width must be non-negative");

  NormalMetrics m;
  std::vector<std::uint8_t> both(gt.valid.size(), 0);
  for (std::size_t p = 0; p < both.size(); ++p) {
    const bool a = pred.valid[p] != 0;
    const bool b = gt.valid[p] != 0;
    if (a && b) {
      both[p] = 1;
      ++m.intersection;
    }
    if (a || b) ++m.union_count;
  }
  m.iou = m.union_count == 0 ? 100.0
                             : 100.0 * static_cast<double>(m.intersection) /
                                   static_cast<double>(m.union_count);
  if (m.intersection == 0) return m;
  m.angular_present = true;

  const std::vector<std::uint8_t> band = boundary_band(gt, opts.boundary_width);
  std::vector<double> errors;
  errors.reserve(m.intersection);
  double sum = 0.0, band_sum = 0.0, sq = 0.0;
  std::size_t hits[3] = {0, 0, 0};
  for (std::size_t p = 0; p < both.size(); ++p) {
    if (!both[p]) continue;
    const double e = angle_deg(pred.normals[p], gt.normals[p]);
    errors.push_back(e);
    sum += e;
    for (int t = 0; t < 3; ++t) {
      if (e <= kNormalAccuracyThresholds[t]) ++hits[t];
    }
    if (band[p]) {
      band_sum += e;
      ++m.boundary_pixels;
    }
    for (int ch = 0; ch < 3; ++ch) {
      const double d = (pred.normals[p][ch] + 1.0) / 2.0 - (gt.normals[p][ch] + 1.0) / 2.0;
      sq += d * d;
    }
  }
  const auto n = static_cast<double>(errors.size());
  m.mean = sum / n;
  std::sort(errors.begin(), errors.end());
  const std::size_t mid = errors.size() / 2;
  m.median = errors.size() % 2 == 1 ? errors[mid] : 0.5 * (errors[mid - 1] + errors[mid]);
  if (m.boundary_pixels > 0) m.mean_b = band_sum / static_cast<double>(m.boundary_pixels);
  m.acc_1125 = 100.0 * static_cast<double>(hits[0]) / n;
  m.acc_225 = 100.0 * static_cast<double>(hits[1]) / n;
  m.acc_30 = 100.0 * static_cast<double>(hits[2]) / n;

  const double mse = sq / (3.0 * n);
  m.psnr = mse == 0.0 ? std::numeric_limits<double>::infinity() : 10.0 * std::log10(1.0 / mse);
  m.ssim = masked_ssim(pred, gt, both, opts);
  return m;
}

// ---------------------------------------------------------------------------
// Point sets

PointCloud sample_surface(const TriMesh& mesh, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw_invalid("sample count must be at least 1");
  mesh.validate();
  std::vector<double> cumulative(mesh.triangles.size());
  double total = 0.0;
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto& tri = mesh.triangles[t];
    total += 0.5 * (mesh.vertices[tri[1]] - mesh.vertices[tri[0]])
                       .cross(mesh.vertices[tri[2]] - mesh.vertices[tri[0]])
                       .norm();
    cumulative[t] = total;
  }
  if (!(total > 0.0)) throw_numeric("cannot sample a mesh with zero surface area");

  Rng rng(seed);
  PointCloud points;
  points.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double pick = rng.uniform() * total;
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), pick);
    if (it == cumulative.end()) --it;
    const auto& tri = mesh.triangles[static_cast<std::size_t>(it - cumulative.begin())];
    const double s = std::sqrt(rng.uniform());
    const double r2 = rng.uniform();
    const double wa = 1.0 - s;
    const double wb = s * (1.0 - r2);
    const double wc = s * r2;
    points.push_back(wa * mesh.vertices[tri[0]] + wb * mesh.vertices[tri[1]] +
                     wc * mesh.vertices[tri[2]]);
  }
  return points;
}

namespace {

void require_nonempty(const PointCloud& a, const PointCloud& b) {
  if (a.empty() || b.empty()) throw_invalid("point clouds must be non-empty");
}

std::vector<double> nearest_squared(const PointCloud& from, const PointCloud& to) {
  std::vector<double> out(from.size());
  parallel_for(0, from.size(), [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (const Vec3& q : to) best = std::min(best, (from[i] - q).squaredNorm());
      out[i] = best;
    }
  });
  return out;
}

double mean(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

std::vector<double> nearest_distances(const PointCloud& from, const PointCloud& to) {
  require_nonempty(from, to);
  std::vector<double> d = nearest_squared(from, to);
  for (double& x : d) x = std::sqrt(x);
  return d;
}

double chamfer(const PointCloud& a, const PointCloud& b) {
  require_nonempty(a, b);
  return mean(nearest_squared(a, b)) + mean(nearest_squared(b, a));
}

double directed_mean_distance(const PointCloud& from, const PointCloud& to) {
  return mean(nearest_distances(from, to));
}

std::vector<int> hungarian(const std::vector<double>& cost, std::size_t n) {
  if (cost.size() != n * n) throw_invalid("cost matrix must be n x n");
  // Shortest augmenting path with potentials, O(n^3). Index 0 is a sentinel
  // column; rows and columns are 1-based internally.
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> row_pot(n + 1, 0.0), col_pot(n + 1, 0.0);
  std::vector<std::size_t> match(n + 1, 0), way(n + 1, 0);
  std::vector<double> min_slack(n + 1);
  std::vector<char> used(n + 1);
  for (std::size_t row = 1; row <= n; ++row) {
    match[0] = row;
    std::size_t col0 = 0;
    std::fill(min_slack.begin(), min_slack.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[col0] = 1;
      const std::size_t r0 = match[col0];
      double delta = inf;
      std::size_t col1 = 0;
      for (std::size_t col = 1; col <= n; ++col) {
        if (used[col]) continue;
        const double cur = cost[(r0 - 1) * n + (col - 1)] - row_pot[r0] - col_pot[col];
        if (cur < min_slack[col]) {
          min_slack[col] = cur;
          way[col] = col0;
        }
        if (min_slack[col] < delta) {
          delta = min_slack[col];
          col1 = col;
        }
      }
      for (std::size_t col = 0; col <= n; ++col) {
        if (used[col]) {
          row_pot[match[col]] += delta;
          col_pot[col] -= delta;
        } else {
          min_slack[col] -= delta;
        }
      }
      col0 = col1;
    } while (match[col0] != 0);
    do {
      const std::size_t col1 = way[col0];
      match[col0] = match[col1];
      col0 = col1;
    } while (col0 != 0);
  }
  std::vector<int> assignment(n, -1);
  for (std::size_t col = 1; col <= n; ++col) {
    assignment[match[col] - 1] = static_cast<int>(col - 1);
  }
  return assignment;
}

double emd(const PointCloud& a, const PointCloud& b, std::size_t cap) {
  require_nonempty(a, b);
  if (a.size() != b.size()) throw_invalid("EMD needs point clouds of equal size");
  if (a.size() > cap) {
    throw_invalid("EMD point count " + std::to_string(a.size()) + " exceeds the cap of " +
                  std::to_string(cap));
  }
  const std::size_t n = a.size();
  std::vector<double> cost(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) cost[i * n + j] = (a[i] - b[j]).norm();
  }
  const std::vector<int> assignment = hungarian(cost, n);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) total += cost[i * n + static_cast<std::size_t>(assignment[i])];
  return total / static_cast<double>(n);
}

double fscore(const PointCloud& a, const PointCloud& b, double tau) {
  require_nonempty(a, b);
  if (!(tau > 0.0) || !std::isfinite(tau)) throw_invalid("F-score threshold must be positive");
  const double tau2 = tau * tau;
  auto fraction_within = [&](const PointCloud& from, const PointCloud& to) {
    const std::vector<double> d = nearest_squared(from, to);
    const auto hits = std::count_if(d.begin(), d.end(), [&](double x) { return x <= tau2; });
    return static_cast<double>(hits) / static_cast<double>(d.size());
  };
  const double precision = fraction_within(a, b);
  const double recall = fraction_within(b, a);
  if (precision + recall == 0.0) return 0.0;
  return 200.0 * precision * recall / (precision + recall);
}

GeoMetrics evaluate_geometry(const TriMesh& pred, const TriMesh& gt,
                             const GeoEvalOptions& opts) {
  if (pred.empty() || gt.empty()) throw_invalid("geometry evaluation needs non-empty meshes");
  if (opts.emd_samples == 0) throw_invalid("EMD sample count must be at least 1");
  if (opts.emd_samples > kDefaultEmdCap) {
    throw_invalid("EMD sample count " + std::to_string(opts.emd_samples) + " exceeds the cap of " +
                  std::to_string(kDefaultEmdCap));
  }
  const PointCloud a = sample_surface(pred, opts.samples, opts.seed);
  const PointCloud b = sample_surface(gt, opts.samples, opts.seed);
  const std::size_t k = std::min(opts.emd_samples, opts.samples);
  GeoMetrics m;
  m.cd = chamfer(a, b);
  m.emd = emd(PointCloud(a.begin(), a.begin() + static_cast<std::ptrdiff_t>(k)),
              PointCloud(b.begin(), b.begin() + static_cast<std::ptrdiff_t>(k)));
  m.fscore = fscore(a, b, opts.tau);
  m.tau = opts.tau;
  m.samples = opts.samples;
  m.emd_samples = k;
  return m;
}

}  // namespace pxa
