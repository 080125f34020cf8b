#include "pxa/lift.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pxa/error.hpp"
#include "pxa/parallel.hpp"

namespace pxa {

FeatureMap::FeatureMap(int h, int w, int c, double fill)
    : height(h), width(w), channels(c) {
  if (h < 1 || w < 1 || c < 1) throw_invalid("feature map dimensions must be positive");
  data.assign(static_cast<std::size_t>(h) * w * c, fill);
}

void FeatureMap::validate() const {
  if (height < 1 || width < 1 || channels < 1) {
    throw_invalid("feature map dimensions must be positive");
  }
  if (data.size() != static_cast<std::size_t>(height) * width * channels) {
    throw_invalid("feature map data length does not match its dimensions");
  }
  for (double x : data) {
    if (!std::isfinite(x)) throw_invalid("feature map contains non-finite values");
  }
}

void FeaturePyramid::validate() const {
  if (levels.empty()) throw_invalid("feature pyramid has no levels");
  if (full_width < 1 || full_height < 1) {
    throw_invalid("feature pyramid reference resolution must be positive");
  }
  for (const auto& level : levels) {
    level.validate();
    if (level.channels != levels.front().channels) {
      throw_invalid("feature pyramid levels disagree on channel count");
    }
  }
}

void ViewInput::validate() const {
  pyramid.validate();
  intrinsics.validate();
  if (intrinsics.width != pyramid.full_width || intrinsics.height != pyramid.full_height) {
    throw_invalid("view intrinsics resolution does not match its feature pyramid");
  }
}

FeatureVolume::FeatureVolume(const CubePlacement& p, int c) : placement(p), channels(c) {
  const std::size_t n = p.voxel_count();
  data.assign(n * static_cast<std::size_t>(c), 0.0);
  valid.assign(n, 0);
  view_count.assign(n, 0);
}

void sample_bilinear(const FeatureMap& map, double u, double v, int full_width,
                     int full_height, double* out) {
  // Texel centers at half-integers in the level's own pixel grid.
  const double x = u * (static_cast<double>(map.width) / full_width) - 0.5;
  const double y = v * (static_cast<double>(map.height) / full_height) - 0.5;
  const double x0f = std::floor(x);
  const double y0f = std::floor(y);
  const double tx = x - x0f;
  const double ty = y - y0f;
  auto clamp_col = [&](double c) {
    return static_cast<int>(std::clamp(c, 0.0, static_cast<double>(map.width - 1)));
  };
  auto clamp_row = [&](double r) {
    return static_cast<int>(std::clamp(r, 0.0, static_cast<double>(map.height - 1)));
  };
  const int c0 = clamp_col(x0f);
  const int c1 = clamp_col(x0f + 1.0);
  const int r0 = clamp_row(y0f);
  const int r1 = clamp_row(y0f + 1.0);
  for (int ch = 0; ch < map.channels; ++ch) {
    const double a = map.at(r0, c0, ch);
    const double b = map.at(r0, c1, ch);
    const double c = map.at(r1, c0, ch);
    const double d = map.at(r1, c1, ch);
    // Lerp form keeps constant neighborhoods exact.
    const double top = a + tx * (b - a);
    const double bottom = c + tx * (d - c);
    out[ch] = top + ty * (bottom - top);
  }
}

std::vector<double> sample_bilinear(const FeatureMap& map, double u, double v,
                                    int full_width, int full_height) {
  std::vector<double> out(static_cast<std::size_t>(map.channels));
  sample_bilinear(map, u, v, full_width, full_height, out.data());
  return out;
}

void sample_nearest(const FeatureMap& map, double u, double v, int full_width,
                    int full_height, double* out) {
  const double x = std::floor(u * (static_cast<double>(map.width) / full_width));
  const double y = std::floor(v * (static_cast<double>(map.height) / full_height));
  const int col = static_cast<int>(std::clamp(x, 0.0, static_cast<double>(map.width - 1)));
  const int row = static_cast<int>(std::clamp(y, 0.0, static_cast<double>(map.height - 1)));
  for (int ch = 0; ch < map.channels; ++ch) out[ch] = map.at(row, col, ch);
}

void sample_pyramid(const FeaturePyramid& pyramid, double u, double v,
                    Sampling sampling, double* out) {
  const int channels = pyramid.channels();
  std::vector<double> level_sample(static_cast<std::size_t>(channels));
  std::fill(out, out + channels, 0.0);
  // Running mean: a pyramid of identical levels reproduces the single level
  // bit for bit.
  for (std::size_t l = 0; l < pyramid.levels.size(); ++l) {
    const auto& map = pyramid.levels[l];
    if (sampling == Sampling::bilinear) {
      sample_bilinear(map, u, v, pyramid.full_width, pyramid.full_height,
                      level_sample.data());
    } else {
      sample_nearest(map, u, v, pyramid.full_width, pyramid.full_height,
                     level_sample.data());
    }
    const double n = static_cast<double>(l + 1);
    for (int ch = 0; ch < channels; ++ch) {
      out[ch] += (level_sample[ch] - out[ch]) / n;
    }
  }
}

namespace {

// Projects a camera-frame point; returns false unless it lands in the image
// in front of the near plane.
bool project_visible(const Vec3& p, const CameraIntrinsics& intr, double z_near,
                     double& u, double& v) {
  if (!(p.z() > z_near)) return false;
  const PixelProjection px = project(p, intr);
  u = px.u;
  v = px.v;
  return u >= 0.0 && u < intr.width && v >= 0.0 && v < intr.height;
}

void check_channels(const std::vector<ViewInput>& views) {
  for (const auto& view : views) {
    view.validate();
    if (view.pyramid.channels() != views.front().pyramid.channels()) {
      throw_invalid("views disagree on feature channel count");
    }
  }
}

}  // namespace

FeatureVolume lift_single(const ViewInput& view, const CubePlacement& p,
                          const LiftOptions& opts) {
  return fuse_views({view}, 0, p, opts);
}

FeatureVolume fuse_views(const std::vector<ViewInput>& views, std::size_t reference,
                         const CubePlacement& p, const LiftOptions& opts) {
  if (views.empty()) throw_invalid("at least one view is required");
  if (reference >= views.size()) throw_invalid("reference view index out of range");
  p.validate();
  check_channels(views);

  // view_from_reference for every view; the reference view uses voxel centers
  // as-is so a single view reproduces lift_single exactly.
  const Pose& world_from_ref = views[reference].world_from_camera;
  std::vector<Pose> view_from_ref(views.size());
  for (std::size_t v = 0; v < views.size(); ++v) {
    if (v == reference) continue;
    view_from_ref[v] = views[v].world_from_camera.inverse() * world_from_ref;
  }

  const int channels = views.front().pyramid.channels();
  FeatureVolume vol(p, channels);
  const int r = p.resolution;
  const std::size_t n = p.voxel_count();

  parallel_for(0, n, [&](std::size_t lo, std::size_t hi) {
    std::vector<double> sample(static_cast<std::size_t>(channels));
    // samples[ch * views + count]: per-channel values of the views that see the voxel
    std::vector<double> samples(static_cast<std::size_t>(channels) * views.size());
    for (std::size_t idx = lo; idx < hi; ++idx) {
      const int k = static_cast<int>(idx % r);
      const int j = static_cast<int>((idx / r) % r);
      const int i = static_cast<int>(idx / (static_cast<std::size_t>(r) * r));
      const Vec3 center = voxel_center_unchecked(i, j, k, p);
      std::uint32_t count = 0;
      for (std::size_t v = 0; v < views.size(); ++v) {
        const ViewInput& view = views[v];
        const Vec3 local = (v == reference) ? center : view_from_ref[v].apply(center);
        double pu = 0.0;
        double pv = 0.0;
        if (!project_visible(local, view.intrinsics, opts.z_near, pu, pv)) continue;
        sample_pyramid(view.pyramid, pu, pv, opts.sampling, sample.data());
        for (int ch = 0; ch < channels; ++ch) samples[ch * views.size() + count] = sample[ch];
        ++count;
      }
      vol.view_count[idx] = count;
      if (count == 0) continue;
      vol.valid[idx] = 1;
      double* acc = vol.data.data() + idx * static_cast<std::size_t>(channels);
      for (int ch = 0; ch < channels; ++ch) {
        // Summing in ascending order makes the mean independent of view order.
        double* first = samples.data() + ch * views.size();
        std::sort(first, first + count);
        double sum = 0.0;
        for (std::uint32_t c = 0; c < count; ++c) sum += first[c];
        acc[ch] = sum / static_cast<double>(count);
      }
    }
  });
  return vol;
}

std::vector<double> condition_add(const FeatureVolume& volume,
                                  const std::vector<double>& target) {
  if (target.size() != volume.data.size()) {
    throw_invalid("target volume shape does not match the feature volume (" +
                  std::to_string(target.size()) + " vs " +
                  std::to_string(volume.data.size()) + " values)");
  }
  std::vector<double> out(target);
  const auto c = static_cast<std::size_t>(volume.channels);
  for (std::size_t v = 0; v < volume.voxel_count(); ++v) {
    if (!volume.valid[v]) continue;
    for (std::size_t ch = 0; ch < c; ++ch) out[v * c + ch] += volume.data[v * c + ch];
  }
  return out;
}

}  // namespace pxa
