#include "pxa/io.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <sstream>

#include <json.hpp>

#include "pxa/error.hpp"

namespace pxa {

using json = nlohmann::json;

namespace {

json parse_json(const std::string& text, const char* what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw_invalid(std::string("malformed ") + what + " JSON: " + e.what());
  }
}

double get_number(const json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_number()) {
    throw_invalid(std::string("missing or non-numeric key '") + key + "'");
  }
  return j[key].get<double>();
}

int get_int(const json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_number_integer()) {
    throw_invalid(std::string("missing or non-integer key '") + key + "'");
  }
  return j[key].get<int>();
}

std::string slurp(const std::string& path) {
  const auto bytes = read_file(path);
  return std::string(bytes.begin(), bytes.end());
}

void append_double(std::string& out, double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, res.ptr);
}

void require_dims(const Tensor& t, std::size_t ndim, const char* what) {
  if (t.dims.size() != ndim) {
    throw_invalid(std::string(what) + " tensor must have " + std::to_string(ndim) + " dims");
  }
}

int dim_as_int(std::uint64_t d) {
  if (d == 0 || d > 1u << 30) throw_invalid("tensor dimension out of supported range");
  return static_cast<int>(d);
}

}  // namespace

// ---------------------------------------------------------------------------
// Cameras

std::string camera_to_json(const Camera& cam) {
  json j;
  j["fx"] = cam.intrinsics.fx;
  j["fy"] = cam.intrinsics.fy;
  j["cx"] = cam.intrinsics.cx;
  j["cy"] = cam.intrinsics.cy;
  j["width"] = cam.intrinsics.width;
  j["height"] = cam.intrinsics.height;
  const Mat4 m = cam.world_from_camera.matrix();
  json rows = json::array();
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) rows.push_back(m(r, c));
  }
  j["world_from_camera"] = rows;
  return j.dump(2) + "\n";
}

Camera camera_from_json(const std::string& text) {
  const json j = parse_json(text, "camera");
  if (!j.is_object()) throw_invalid("camera descriptor must be a JSON object");
  Camera cam;
  cam.intrinsics.fx = get_number(j, "fx");
  cam.intrinsics.fy = get_number(j, "fy");
  cam.intrinsics.cx = get_number(j, "cx");
  cam.intrinsics.cy = get_number(j, "cy");
  cam.intrinsics.width = get_int(j, "width");
  cam.intrinsics.height = get_int(j, "height");
  cam.intrinsics.validate();
  if (j.contains("world_from_camera")) {
    const json& m = j["world_from_camera"];
    if (!m.is_array() || m.size() != 16) {
      throw_invalid("world_from_camera must hold 16 numbers (row-major 4x4)");
    }
    Mat4 mat;
    for (int i = 0; i < 16; ++i) {
      if (!m[i].is_number()) throw_invalid("world_from_camera entries must be numbers");
      mat(i / 4, i % 4) = m[i].get<double>();
    }
    cam.world_from_camera = Pose::from_matrix(mat);
  }
  return cam;
}

Camera load_camera(const std::string& path) {
  try {
    return camera_from_json(slurp(path));
  } catch (const Error& e) {
    throw Error(e.kind(), path + ": " + e.what());
  }
}

void save_camera(const std::string& path, const Camera& cam) {
  write_text_atomic(path, camera_to_json(cam));
}

// ---------------------------------------------------------------------------
// OBJ

TriMesh parse_obj(const std::string& text) {
  TriMesh mesh;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  auto fail = [&](const std::string& msg) {
    throw_invalid("OBJ line " + std::to_string(line_no) + ": " + msg);
  };
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag) || tag[0] == '#') continue;
    if (tag == "v") {
      double x, y, z;
      if (!(ls >> x >> y >> z)) fail("vertex needs three coordinates");
      mesh.vertices.emplace_back(x, y, z);
    } else if (tag == "f") {
      std::vector<int> idx;
      std::string token;
      while (ls >> token) {
        const std::string head = token.substr(0, token.find('/'));
        int value = 0;
        const auto res = std::from_chars(head.data(), head.data() + head.size(), value);
        if (res.ec != std::errc() || res.ptr != head.data() + head.size() || value == 0) {
          fail("bad face index '" + token + "'");
        }
        if (value < 0) value = static_cast<int>(mesh.vertices.size()) + value + 1;
        idx.push_back(value - 1);
      }
      if (idx.size() > 3) fail("polygon with " + std::to_string(idx.size()) + " vertices; only triangles are supported");
      if (idx.size() < 3) fail("face needs three vertices");
      mesh.triangles.push_back({idx[0], idx[1], idx[2]});
    }
  }
  mesh.validate();
  return mesh;
}

std::string format_obj(const TriMesh& mesh) {
  std::string out;
  out.reserve(mesh.vertices.size() * 48 + mesh.triangles.size() * 24);
  for (const Vec3& v : mesh.vertices) {
    out += "v ";
    append_double(out, v.x());
    out += ' ';
    append_double(out, v.y());
    out += ' ';
    append_double(out, v.z());
    out += '\n';
  }
  for (const auto& t : mesh.triangles) {
    out += "f " + std::to_string(t[0] + 1) + ' ' + std::to_string(t[1] + 1) + ' ' +
           std::to_string(t[2] + 1) + '\n';
  }
  return out;
}

TriMesh load_obj(const std::string& path) {
  try {
    return parse_obj(slurp(path));
  } catch (const Error& e) {
    throw Error(e.kind(), path + ": " + e.what());
  }
}

void save_obj(const std::string& path, const TriMesh& mesh) {
  write_text_atomic(path, format_obj(mesh));
}

// ---------------------------------------------------------------------------
// Placement sidecar

std::string placement_to_json(const CubePlacement& p) {
  json j;
  j["d"] = p.d;
  j["s"] = p.s;
  j["R"] = p.resolution;
  return j.dump(2) + "\n";
}

CubePlacement placement_from_json(const std::string& text) {
  const json j = parse_json(text, "placement");
  CubePlacement p{get_number(j, "d"), get_number(j, "s"), get_int(j, "R")};
  p.validate();
  return p;
}

// ---------------------------------------------------------------------------
// Tensors

FeatureMap feature_map_from_tensor(const Tensor& t) {
  if (t.dtype != DType::f32) throw_invalid("feature maps must be float32 tensors");
  if (t.dims.size() != 2 && t.dims.size() != 3) throw_invalid("feature maps must be H x W x C");
  const int c = t.dims.size() == 3 ? dim_as_int(t.dims[2]) : 1;
  FeatureMap map(dim_as_int(t.dims[0]), dim_as_int(t.dims[1]), c);
  for (std::size_t i = 0; i < map.data.size(); ++i) map.data[i] = t.f32(i);
  map.validate();
  return map;
}

Tensor feature_map_to_tensor(const FeatureMap& map) {
  std::vector<float> v(map.data.begin(), map.data.end());
  return Tensor::from_f32({static_cast<std::uint64_t>(map.height),
                           static_cast<std::uint64_t>(map.width),
                           static_cast<std::uint64_t>(map.channels)},
                          v);
}

Tensor volume_to_tensor(const FeatureVolume& vol) {
  const auto r = static_cast<std::uint64_t>(vol.resolution());
  const auto c = static_cast<std::uint64_t>(vol.channels);
  Tensor t = Tensor::zeros(DType::f32, {r, r, r, c + 1});
  std::size_t out = 0;
  for (std::size_t v = 0; v < vol.voxel_count(); ++v) {
    for (std::uint64_t ch = 0; ch < c; ++ch) {
      t.set_f32(out++, static_cast<float>(vol.data[v * c + ch]));
    }
    t.set_f32(out++, static_cast<float>(vol.view_count[v]));
  }
  return t;
}

std::vector<std::uint8_t> mask_from_tensor(const Tensor& t, int& height, int& width) {
  require_dims(t, 2, "mask");
  height = dim_as_int(t.dims[0]);
  width = dim_as_int(t.dims[1]);
  std::vector<std::uint8_t> mask(t.element_count());
  for (std::size_t i = 0; i < mask.size(); ++i) {
    mask[i] = t.dtype == DType::u8 ? (t.u8(i) != 0) : (t.f32(i) != 0.0f);
  }
  return mask;
}

Tensor mask_to_tensor(const std::vector<std::uint8_t>& mask, int height, int width) {
  std::vector<std::uint8_t> v(mask.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = mask[i] ? 1 : 0;
  return Tensor::from_u8({static_cast<std::uint64_t>(height), static_cast<std::uint64_t>(width)},
                         std::move(v));
}

NormalMap normal_map_from_tensor(const Tensor& t) {
  if (t.dtype != DType::f32) throw_invalid("normal maps must be float32 tensors");
  require_dims(t, 3, "normal map");
  if (t.dims[2] != 4) throw_invalid("normal maps must be H x W x 4");
  NormalMap map(dim_as_int(t.dims[0]), dim_as_int(t.dims[1]));
  for (std::size_t p = 0; p < map.pixel_count(); ++p) {
    if (t.f32(4 * p + 3) == 0.0f) continue;
    const Vec3 n(t.f32(4 * p), t.f32(4 * p + 1), t.f32(4 * p + 2));
    if (!n.allFinite() || n.norm() == 0.0) throw_invalid("valid normal map pixel holds a zero or non-finite normal");
    // Stored as float32; renormalize so unit length holds in double.
    map.normals[p] = n.normalized();
    map.valid[p] = 1;
  }
  return map;
}

Tensor normal_map_to_tensor(const NormalMap& map) {
  Tensor t = Tensor::zeros(DType::f32, {static_cast<std::uint64_t>(map.height),
                                        static_cast<std::uint64_t>(map.width), 4});
  for (std::size_t p = 0; p < map.pixel_count(); ++p) {
    for (int c = 0; c < 3; ++c) t.set_f32(4 * p + c, static_cast<float>(map.normals[p][c]));
    t.set_f32(4 * p + 3, map.valid[p] ? 1.0f : 0.0f);
  }
  return t;
}

Tensor depth_map_to_tensor(const DepthMap& map) {
  Tensor t = Tensor::zeros(DType::f32, {static_cast<std::uint64_t>(map.height),
                                        static_cast<std::uint64_t>(map.width), 2});
  for (std::size_t p = 0; p < map.depth.size(); ++p) {
    t.set_f32(2 * p, static_cast<float>(map.depth[p]));
    t.set_f32(2 * p + 1, map.valid[p] ? 1.0f : 0.0f);
  }
  return t;
}

DepthMap depth_map_from_tensor(const Tensor& t) {
  if (t.dtype != DType::f32) throw_invalid("depth maps must be float32 tensors");
  require_dims(t, 3, "depth map");
  if (t.dims[2] != 2) throw_invalid("depth maps must be H x W x 2");
  DepthMap map(dim_as_int(t.dims[0]), dim_as_int(t.dims[1]));
  for (std::size_t p = 0; p < map.depth.size(); ++p) {
    if (t.f32(2 * p + 1) == 0.0f) continue;
    map.depth[p] = t.f32(2 * p);
    map.valid[p] = 1;
  }
  return map;
}

GlobalPointMap point_map_from_tensor(const Tensor& t) {
  if (t.dtype != DType::f32) throw_invalid("point maps must be float32 tensors");
  require_dims(t, 3, "point map");
  if (t.dims[2] != 4) throw_invalid("point maps must be H x W x 4");
  GlobalPointMap map;
  map.height = dim_as_int(t.dims[0]);
  map.width = dim_as_int(t.dims[1]);
  const std::size_t n = static_cast<std::size_t>(map.height) * map.width;
  map.points.assign(n, Vec3::Zero());
  map.valid.assign(n, 0);
  for (std::size_t p = 0; p < n; ++p) {
    if (t.f32(4 * p + 3) == 0.0f) continue;
    map.points[p] = Vec3(t.f32(4 * p), t.f32(4 * p + 1), t.f32(4 * p + 2));
    map.valid[p] = 1;
  }
  map.validate();
  return map;
}

Tensor point_map_to_tensor(const GlobalPointMap& map) {
  Tensor t = Tensor::zeros(DType::f32, {static_cast<std::uint64_t>(map.height),
                                        static_cast<std::uint64_t>(map.width), 4});
  for (std::size_t p = 0; p < map.points.size(); ++p) {
    if (!map.valid[p]) continue;
    for (int c = 0; c < 3; ++c) t.set_f32(4 * p + c, static_cast<float>(map.points[p][c]));
    t.set_f32(4 * p + 3, 1.0f);
  }
  return t;
}

namespace {

CubePlacement read_grid(const std::string& path, DType dtype, Tensor& t) {
  const CubePlacement p = placement_from_json(slurp(sidecar_path(path)));
  t = read_pxt(path);
  if (t.dtype != dtype) throw_invalid(path + ": unexpected grid dtype");
  const auto r = static_cast<std::uint64_t>(p.resolution);
  if (t.dims != std::vector<std::uint64_t>{r, r, r}) {
    throw_invalid(path + ": grid shape does not match its placement sidecar");
  }
  return p;
}

void write_grid(const std::string& path, const Tensor& t, const CubePlacement& p) {
  write_pxt(path, t);
  try {
    write_text_atomic(sidecar_path(path), placement_to_json(p));
  } catch (...) {
    std::filesystem::remove(path);
    throw;
  }
}

}  // namespace

void save_sdf_grid(const std::string& path, const SdfGrid& grid) {
  const auto r = static_cast<std::uint64_t>(grid.resolution());
  std::vector<float> v(grid.values.begin(), grid.values.end());
  write_grid(path, Tensor::from_f32({r, r, r}, v), grid.placement);
}

SdfGrid load_sdf_grid(const std::string& path) {
  Tensor t;
  SdfGrid grid(read_grid(path, DType::f32, t));
  for (std::size_t i = 0; i < grid.values.size(); ++i) {
    grid.values[i] = t.f32(i);
    if (!std::isfinite(grid.values[i])) throw_invalid(path + ": SDF grid holds non-finite values");
  }
  return grid;
}

void save_occupancy_grid(const std::string& path, const OccupancyGrid& grid) {
  const auto r = static_cast<std::uint64_t>(grid.resolution());
  write_grid(path, Tensor::from_u8({r, r, r}, grid.bits), grid.placement);
}

OccupancyGrid load_occupancy_grid(const std::string& path) {
  Tensor t;
  OccupancyGrid grid(read_grid(path, DType::u8, t));
  for (std::size_t i = 0; i < grid.bits.size(); ++i) grid.bits[i] = t.u8(i) ? 1 : 0;
  return grid;
}

}  // namespace pxa
