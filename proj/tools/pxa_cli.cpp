// Command-line front end over the pxa C interface.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "pxa/pxa.h"

namespace {

using json = nlohmann::json;

struct Failure {
  int code;
  std::string message;
};

[[noreturn]] void invalid(const std::string& msg) { throw Failure{PXA_ERR_INVALID, msg}; }

void check(pxa_status st) {
  if (st != PXA_OK) throw Failure{st, pxa_last_error()};
}

template <typename T, void (*Free)(T*)>
struct Deleter {
  void operator()(T* p) const { Free(p); }
};

using Camera = std::unique_ptr<pxa_camera, Deleter<pxa_camera, pxa_camera_free>>;
using Tensor = std::unique_ptr<pxa_tensor, Deleter<pxa_tensor, pxa_tensor_free>>;
using Mesh = std::unique_ptr<pxa_mesh, Deleter<pxa_mesh, pxa_mesh_free>>;
using Grid = std::unique_ptr<pxa_grid, Deleter<pxa_grid, pxa_grid_free>>;
using ViewSet = std::unique_ptr<pxa_view_set, Deleter<pxa_view_set, pxa_view_set_free>>;
using Scene = std::unique_ptr<pxa_scene, Deleter<pxa_scene, pxa_scene_free>>;

struct String {
  char* p = nullptr;
  ~String() { pxa_string_free(p); }
  std::string str() const { return p ? p : ""; }
};

Camera load_camera(const std::string& path) {
  pxa_camera* c = nullptr;
  check(pxa_camera_load(path.c_str(), &c));
  return Camera(c);
}

Tensor load_tensor(const std::string& path) {
  pxa_tensor* t = nullptr;
  check(pxa_tensor_load(path.c_str(), &t));
  return Tensor(t);
}

Mesh load_mesh(const std::string& path) {
  pxa_mesh* m = nullptr;
  check(pxa_mesh_load_obj(path.c_str(), &m));
  return Mesh(m);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(cur);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

// "a:b" with the split at the last colon.
std::pair<std::string, std::string> split_pair(const std::string& s, const char* what) {
  const auto pos = s.rfind(':');
  if (pos == std::string::npos || pos == 0 || pos + 1 == s.size()) {
    invalid(std::string("expected ") + what + ", got '" + s + "'");
  }
  return {s.substr(0, pos), s.substr(pos + 1)};
}

// Placement flags shared by lift/fuse/carve/genmesh/voxelize.
struct PlacementArgs {
  int grid = 64;
  std::optional<double> fov;
  std::optional<double> dist;
  double scale = 1.0;

  void add(CLI::App* cmd) {
    cmd->add_option("--grid", grid, "voxels per axis")->check(CLI::PositiveNumber);
    auto* f = cmd->add_option("--fov", fov, "auto-placement field of view in degrees (default 40)");
    auto* d = cmd->add_option("--dist", dist, "explicit camera-plane to cube-center distance");
    cmd->add_option("--scale", scale, "cube edge length");
    f->excludes(d);
  }

  pxa_placement resolve(const pxa_camera* cam) const {
    pxa_placement p{};
    if (dist) {
      p = {*dist, scale, grid};
      check(pxa_placement_validate(&p));
      return p;
    }
    if (cam != nullptr) {
      pxa_intrinsics in{};
      check(pxa_camera_intrinsics(cam, &in));
      if (in.width != in.height) invalid("auto-placement needs a square image; pass --dist and --scale");
    }
    check(pxa_place_auto(fov.value_or(40.0), scale, grid, &p));
    return p;
  }
};

void write_text(const std::string& path, const std::string& text) {
  check(pxa_write_text(path.c_str(), text.c_str()));
}

void emit_report(const std::string& out, const std::string& text) {
  if (out.empty()) {
    std::cout << text;
  } else {
    write_text(out, text);
  }
}

struct Global {
  std::uint64_t seed = 0;
  int threads = 0;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pxa: pixel-aligned voxel geometry toolkit"};
  app.set_version_flag("--version", std::string(pxa_version()));
  app.require_subcommand(1);
  app.fallthrough();
  Global g;
  app.add_option("--seed", g.seed, "random seed");
  app.add_option("--threads", g.threads, "worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);

  std::function<void()> action;

  // place
  double place_fov = 40.0;
  double place_scale = 1.0;
  int place_size = 256;
  int place_grid = 64;
  std::string place_out;
  auto* place = app.add_subcommand("place", "auto-place the generation cube and print the camera");
  place->add_option("--fov", place_fov, "field of view in degrees");
  place->add_option("--scale", place_scale, "cube edge length");
  place->add_option("--size", place_size, "square image size in pixels")->check(CLI::PositiveNumber);
  place->add_option("--grid", place_grid, "voxels per axis")->check(CLI::PositiveNumber);
  place->add_option("-o", place_out, "also write the camera descriptor here");
  place->callback([&] {
    action = [&] {
      pxa_placement p{};
      check(pxa_place_auto(place_fov, place_scale, place_grid, &p));
      pxa_camera* raw = nullptr;
      check(pxa_camera_from_fov(place_fov, place_size, place_size, &raw));
      Camera cam(raw);
      String text;
      check(pxa_camera_to_json(cam.get(), &text.p));
      json out;
      out["d"] = p.d;
      out["s"] = p.s;
      out["resolution"] = p.resolution;
      out["camera"] = json::parse(text.str());
      if (!place_out.empty()) write_text(place_out, text.str());
      std::cout << out.dump(2) << "\n";
    };
  });

  // lift / fuse
  PlacementArgs lift_pa;
  std::string lift_features;
  std::string lift_camera;
  std::string lift_out;
  bool lift_nearest = false;
  auto* lift = app.add_subcommand("lift", "lift one view's feature pyramid into the cube");
  lift->add_option("--features", lift_features, "comma-separated PXT pyramid levels")->required();
  lift->add_option("--camera", lift_camera, "camera descriptor JSON")->required();
  lift->add_flag("--nearest", lift_nearest, "nearest-pixel sampling");
  lift->add_option("-o", lift_out, "output volume PXT")->required();
  lift_pa.add(lift);

  PlacementArgs fuse_pa;
  std::vector<std::string> fuse_views;
  std::size_t fuse_ref = 0;
  std::string fuse_out;
  bool fuse_nearest = false;
  auto* fuse = app.add_subcommand("fuse", "fuse several feature views into the reference cube");
  fuse->add_option("--view", fuse_views, "levels.pxt[,levels.pxt...]:camera.json")->required();
  fuse->add_option("--reference", fuse_ref, "reference view index");
  fuse->add_flag("--nearest", fuse_nearest, "nearest-pixel sampling");
  fuse->add_option("-o", fuse_out, "output volume PXT")->required();
  fuse_pa.add(fuse);

  auto run_lift = [](const std::vector<std::pair<std::string, std::string>>& views, std::size_t ref,
                     const PlacementArgs& pa, bool nearest, const std::string& out) {
    ViewSet set;
    {
      pxa_view_set* s = nullptr;
      check(pxa_view_set_create(&s));
      set.reset(s);
    }
    std::vector<Camera> cams;
    for (const auto& [features, camera] : views) {
      cams.push_back(load_camera(camera));
      std::vector<Tensor> levels;
      std::vector<const pxa_tensor*> ptrs;
      for (const auto& path : split(features, ',')) {
        if (path.empty()) invalid("empty feature path in '" + features + "'");
        levels.push_back(load_tensor(path));
        ptrs.push_back(levels.back().get());
      }
      check(pxa_view_set_add_features(set.get(), ptrs.data(), ptrs.size(), cams.back().get()));
    }
    if (ref >= cams.size()) invalid("reference view index out of range");
    const pxa_placement p = pa.resolve(cams[ref].get());
    pxa_tensor* vol = nullptr;
    check(pxa_lift(set.get(), ref, &p, nearest ? 1 : 0, &vol));
    Tensor holder(vol);
    check(pxa_tensor_save(vol, out.c_str()));
  };
  lift->callback([&] {
    action = [&] { run_lift({{lift_features, lift_camera}}, 0, lift_pa, lift_nearest, lift_out); };
  });
  fuse->callback([&] {
    action = [&] {
      std::vector<std::pair<std::string, std::string>> views;
      for (const auto& v : fuse_views) views.push_back(split_pair(v, "levels:camera"));
      run_lift(views, fuse_ref, fuse_pa, fuse_nearest, fuse_out);
    };
  });

  // carve / genmesh
  auto load_masks = [](const std::vector<std::string>& specs, std::vector<Camera>& cams) {
    pxa_view_set* s = nullptr;
    check(pxa_view_set_create(&s));
    ViewSet set(s);
    for (const auto& spec : specs) {
      const auto [mask, camera] = split_pair(spec, "mask.pxt:camera.json");
      cams.push_back(load_camera(camera));
      Tensor m = load_tensor(mask);
      check(pxa_view_set_add_mask(set.get(), m.get(), cams.back().get()));
    }
    return set;
  };

  PlacementArgs carve_pa;
  std::vector<std::string> carve_masks;
  std::size_t carve_ref = 0;
  std::string carve_out;
  auto* carve = app.add_subcommand("carve", "carve an occupancy grid from silhouettes");
  carve->add_option("--mask", carve_masks, "mask.pxt:camera.json")->required();
  carve->add_option("--reference", carve_ref, "reference view index");
  carve->add_option("-o", carve_out, "output occupancy PXT (placement sidecar alongside)")->required();
  carve_pa.add(carve);
  carve->callback([&] {
    action = [&] {
      std::vector<Camera> cams;
      ViewSet set = load_masks(carve_masks, cams);
      if (carve_ref >= cams.size()) invalid("reference view index out of range");
      const pxa_placement p = carve_pa.resolve(cams[carve_ref].get());
      pxa_grid* grid = nullptr;
      check(pxa_carve(set.get(), carve_ref, &p, &grid));
      Grid holder(grid);
      check(pxa_grid_save(grid, carve_out.c_str()));
    };
  });

  PlacementArgs gen_pa;
  std::vector<std::string> gen_masks;
  std::size_t gen_ref = 0;
  int gen_smooth = 1;
  std::string gen_out;
  auto* genmesh = app.add_subcommand("genmesh", "silhouette-carved mesh in the reference camera frame");
  genmesh->add_option("--mask", gen_masks, "mask.pxt:camera.json")->required();
  genmesh->add_option("--reference", gen_ref, "reference view index");
  genmesh->add_option("--smooth", gen_smooth, "SDF box-filter half width in voxels (0 = off)")
      ->check(CLI::NonNegativeNumber);
  genmesh->add_option("-o", gen_out, "output OBJ")->required();
  gen_pa.add(genmesh);
  genmesh->callback([&] {
    action = [&] {
      std::vector<Camera> cams;
      ViewSet set = load_masks(gen_masks, cams);
      if (gen_ref >= cams.size()) invalid("reference view index out of range");
      const pxa_placement p = gen_pa.resolve(cams[gen_ref].get());
      pxa_mesh* mesh = nullptr;
      check(pxa_generate_mesh(set.get(), gen_ref, &p, gen_smooth, &mesh));
      Mesh holder(mesh);
      check(pxa_mesh_save_obj(mesh, gen_out.c_str()));
    };
  });

  // voxelize / mesh
  PlacementArgs vox_pa;
  std::string vox_mesh;
  std::string vox_out;
  bool vox_occupancy = false;
  auto* voxelize = app.add_subcommand("voxelize", "signed distance grid of a closed mesh");
  voxelize->add_option("--mesh", vox_mesh, "input OBJ in the cube's camera frame")->required();
  voxelize->add_flag("--occupancy", vox_occupancy, "write occupancy (sdf <= 0) instead");
  voxelize->add_option("-o", vox_out, "output grid PXT (placement sidecar alongside)")->required();
  vox_pa.add(voxelize);
  voxelize->callback([&] {
    action = [&] {
      Mesh mesh = load_mesh(vox_mesh);
      const pxa_placement p = vox_pa.resolve(nullptr);
      pxa_grid* sdf = nullptr;
      check(pxa_voxelize(mesh.get(), &p, &sdf));
      Grid grid(sdf);
      if (vox_occupancy) {
        pxa_grid* occ = nullptr;
        check(pxa_grid_to_occupancy(sdf, 0.0, &occ));
        grid.reset(occ);
      }
      check(pxa_grid_save(grid.get(), vox_out.c_str()));
    };
  });

  std::string mesh_grid;
  double mesh_iso = 0.0;
  std::string mesh_out;
  auto* mesh_cmd = app.add_subcommand("mesh", "marching cubes on an SDF or occupancy grid");
  mesh_cmd->add_option("--sdf", mesh_grid, "grid PXT with placement sidecar")->required();
  mesh_cmd->add_option("--iso", mesh_iso, "iso level");
  mesh_cmd->add_option("-o", mesh_out, "output OBJ")->required();
  mesh_cmd->callback([&] {
    action = [&] {
      pxa_grid* grid = nullptr;
      check(pxa_grid_load(mesh_grid.c_str(), &grid));
      Grid holder(grid);
      pxa_mesh* mesh = nullptr;
      check(pxa_marching_cubes(grid, mesh_iso, &mesh));
      Mesh mh(mesh);
      check(pxa_mesh_save_obj(mesh, mesh_out.c_str()));
    };
  });

  // render-normals / render-depth
  std::string rn_mesh, rn_camera, rn_out;
  auto* rnormals = app.add_subcommand("render-normals", "rasterize camera-frame normals");
  rnormals->add_option("--mesh", rn_mesh, "input OBJ")->required();
  rnormals->add_option("--camera", rn_camera, "camera descriptor JSON")->required();
  rnormals->add_option("-o", rn_out, "output H x W x 4 PXT")->required();
  rnormals->callback([&] {
    action = [&] {
      Mesh mesh = load_mesh(rn_mesh);
      Camera cam = load_camera(rn_camera);
      pxa_tensor* t = nullptr;
      check(pxa_render_normals(mesh.get(), cam.get(), &t));
      Tensor holder(t);
      check(pxa_tensor_save(t, rn_out.c_str()));
    };
  });

  std::string rd_mesh, rd_camera, rd_out;
  auto* rdepth = app.add_subcommand("render-depth", "rasterize camera-frame depth");
  rdepth->add_option("--mesh", rd_mesh, "input OBJ")->required();
  rdepth->add_option("--camera", rd_camera, "camera descriptor JSON")->required();
  rdepth->add_option("-o", rd_out, "output H x W x 2 PXT")->required();
  rdepth->callback([&] {
    action = [&] {
      Mesh mesh = load_mesh(rd_mesh);
      Camera cam = load_camera(rd_camera);
      pxa_tensor* t = nullptr;
      check(pxa_render_depth(mesh.get(), cam.get(), &t));
      Tensor holder(t);
      check(pxa_tensor_save(t, rd_out.c_str()));
    };
  });

  // eval-normals / eval-geo
  std::string en_pred, en_gt, en_out;
  int en_bw = 5;
  auto* enormals = app.add_subcommand("eval-normals", "normal-map fidelity metrics");
  enormals->add_option("--pred", en_pred, "predicted normal map PXT")->required();
  enormals->add_option("--gt", en_gt, "ground-truth normal map PXT")->required();
  enormals->add_option("--boundary-width", en_bw, "silhouette band width in pixels")
      ->check(CLI::NonNegativeNumber);
  enormals->add_option("-o", en_out, "report JSON (stdout if omitted)");
  enormals->callback([&] {
    action = [&] {
      Tensor pred = load_tensor(en_pred);
      Tensor gt = load_tensor(en_gt);
      String report;
      check(pxa_eval_normals(pred.get(), gt.get(), en_bw, nullptr, &report.p));
      emit_report(en_out, report.str());
    };
  });

  pxa_geo_options geo{};
  pxa_geo_options_default(&geo);
  std::string eg_pred, eg_gt, eg_out;
  auto* egeo = app.add_subcommand("eval-geo", "Chamfer, EMD and F-score between two meshes");
  egeo->add_option("--pred", eg_pred, "predicted OBJ")->required();
  egeo->add_option("--gt", eg_gt, "ground-truth OBJ")->required();
  egeo->add_option("--samples", geo.samples, "surface samples per mesh")->check(CLI::PositiveNumber);
  egeo->add_option("--emd-samples", geo.emd_samples, "points used for EMD (at most 1024)")
      ->check(CLI::Range(1, 1024));
  egeo->add_option("--tau", geo.tau, "F-score distance threshold")->check(CLI::PositiveNumber);
  egeo->add_option("-o", eg_out, "report JSON (stdout if omitted)");
  egeo->callback([&] {
    action = [&] {
      Mesh pred = load_mesh(eg_pred);
      Mesh gt = load_mesh(eg_gt);
      geo.seed = g.seed;
      String report;
      check(pxa_eval_geo(pred.get(), gt.get(), &geo, nullptr, &report.p));
      emit_report(eg_out, report.str());
    };
  });

  // align-scene
  std::vector<std::string> as_objects;
  std::string as_camera, as_pointmap, as_out, as_report;
  pxa_align_options align{10, 0};
  bool as_trim = false;
  auto* ascene = app.add_subcommand("align-scene", "scale objects onto a global point map");
  ascene->add_option("--object", as_objects, "id:mesh.obj:mask.pxt")->required();
  ascene->add_option("--camera", as_camera, "scene camera descriptor JSON")->required();
  ascene->add_option("--pointmap", as_pointmap, "H x W x 4 point map PXT")->required();
  ascene->add_option("--min-pixels", align.min_pixels, "minimum constraint pixels per object");
  ascene->add_flag("--trim", as_trim, "drop the worst 10% residuals and re-solve once");
  ascene->add_option("-o", as_out, "composed scene OBJ")->required();
  ascene->add_option("--report", as_report, "alignment report JSON (stdout if omitted)");
  ascene->callback([&] {
    action = [&] {
      Camera cam = load_camera(as_camera);
      pxa_scene* s = nullptr;
      check(pxa_scene_create(cam.get(), &s));
      Scene scene(s);
      for (const auto& spec : as_objects) {
        const auto first = spec.find(':');
        if (first == std::string::npos || first == 0) invalid("expected id:mesh.obj:mask.pxt, got '" + spec + "'");
        const auto [mesh_path, mask_path] = split_pair(spec.substr(first + 1), "id:mesh.obj:mask.pxt");
        Mesh mesh = load_mesh(mesh_path);
        Tensor mask = load_tensor(mask_path);
        check(pxa_scene_add_object(scene.get(), spec.substr(0, first).c_str(), mesh.get(), mask.get()));
      }
      Tensor map = load_tensor(as_pointmap);
      align.trim = as_trim ? 1 : 0;
      pxa_mesh* composed = nullptr;
      String report;
      check(pxa_scene_align(scene.get(), map.get(), &align, nullptr, &composed, &report.p));
      Mesh holder(composed);
      check(pxa_mesh_save_obj(composed, as_out.c_str()));
      try {
        emit_report(as_report, report.str());
      } catch (...) {
        std::error_code ec;
        std::filesystem::remove(as_out, ec);
        throw;
      }
    };
  });

  // synth
  pxa_synth_case sc{};
  pxa_synth_case_default(&sc);
  std::string synth_shape = sc.shape;
  std::vector<double> synth_half(sc.half_extents, sc.half_extents + 3);
  bool synth_no_rotation = false;
  std::string synth_out;
  auto* synth = app.add_subcommand("synth", "write a synthetic multi-view case");
  synth->add_option("--shape", synth_shape, "sphere, box or torus");
  synth->add_option("--radius", sc.radius, "sphere radius");
  synth->add_option("--half-extents", synth_half, "box half extents x y z")->expected(3)->delimiter(',');
  synth->add_option("--major-radius", sc.major_radius, "torus ring radius");
  synth->add_option("--minor-radius", sc.minor_radius, "torus tube radius");
  synth->add_option("--subdivisions", sc.subdivisions, "tessellation level");
  synth->add_option("--views", sc.views, "number of views (view 0 is the reference)");
  synth->add_option("--fov", sc.fov_deg, "field of view in degrees");
  synth->add_option("--view-distance", sc.view_distance, "orbit distance of non-reference views (default: whole cube in view)");
  synth->add_option("--size", sc.image_size, "square image size in pixels");
  synth->add_option("--grid", sc.grid, "voxels per axis recorded in the placement");
  synth->add_option("--scale", sc.cube_scale, "cube edge length");
  synth->add_option("--pointmap-scale", sc.pointmap_scale, "scale applied to the point map");
  synth->add_flag("--no-rotation", synth_no_rotation, "keep the shape axis-aligned");
  synth->add_option("-o", synth_out, "output directory")->required();
  synth->callback([&] {
    action = [&] {
      sc.shape = synth_shape.c_str();
      for (int a = 0; a < 3; ++a) sc.half_extents[a] = synth_half[a];
      sc.seed = g.seed;
      sc.random_rotation = synth_no_rotation ? 0 : 1;
      check(pxa_synth_write(&sc, synth_out.c_str()));
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return PXA_ERR_INVALID;
  } catch (const Failure& f) {
    std::cerr << "error: " << f.message << "\n";
    return f.code;
  }

  try {
    pxa_set_threads(g.threads);
    if (action) action();
  } catch (const Failure& f) {
    std::cerr << "error: " << f.message << "\n";
    return f.code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return PXA_ERR_NUMERIC;
  }
  return 0;
}
