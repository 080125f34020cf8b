#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <cstring>
#include <numbers>

#include <json.hpp>

#include "cli_runner.hpp"

using nlohmann::json;

namespace {

// Independent PXT writer: header bytes spelled out by hand.
void write_f32(const std::string& path, const std::vector<std::uint64_t>& dims,
               const std::vector<float>& values) {
  std::string bytes = "PXT1";
  bytes += static_cast<char>(1);
  bytes += static_cast<char>(dims.size());
  bytes += std::string(2, '\0');
  for (std::uint64_t d : dims)
    for (int b = 0; b < 8; ++b) bytes += static_cast<char>((d >> (8 * b)) & 0xff);
  for (float v : values) {
    std::uint32_t u;
    std::memcpy(&u, &v, 4);
    for (int b = 0; b < 4; ++b) bytes += static_cast<char>((u >> (8 * b)) & 0xff);
  }
  std::ofstream(path, std::ios::binary) << bytes;
}

void write_u8(const std::string& path, std::uint64_t h, std::uint64_t w, std::uint8_t fill) {
  std::string bytes = "PXT1";
  bytes += static_cast<char>(2);
  bytes += static_cast<char>(2);
  bytes += std::string(2, '\0');
  for (std::uint64_t d : {h, w})
    for (int b = 0; b < 8; ++b) bytes += static_cast<char>((d >> (8 * b)) & 0xff);
  bytes += std::string(h * w, static_cast<char>(fill));
  std::ofstream(path, std::ios::binary) << bytes;
}

std::string synth_case(const cli::Sandbox& box, const std::string& name, int size = 48) {
  const auto r = box.run({"synth", "--views", "3", "--size", std::to_string(size), "--grid", "16",
                          "-o", box.path(name)});
  REQUIRE(r.code == 0);
  return box.path(name);
}

}  // namespace

TEST_CASE("version flag") {
  cli::Sandbox box("cli_version");
  const auto r = box.run({"--version"});
  CHECK(r.code == 0);
  CHECK(r.out.find('.') != std::string::npos);
}

TEST_CASE("place prints the placement and camera") {
  cli::Sandbox box("cli_place");
  auto r = box.run({"place", "--fov", "90"});
  REQUIRE(r.code == 0);
  auto j = json::parse(r.out);
  CHECK(j["d"].get<double>() == 0.0);
  CHECK(j["camera"]["fx"].get<double>() == j["camera"]["cx"].get<double>());

  r = box.run({"place", "--size", "518", "-o", box.path("cam.json")});
  REQUIRE(r.code == 0);
  j = json::parse(r.out);
  CHECK(std::abs(j["d"].get<double>() - 0.5 * (1.0 / std::tan(std::numbers::pi / 9) - 1.0)) < 1e-12);
  CHECK(std::abs(j["camera"]["fx"].get<double>() - 259.0 / std::tan(std::numbers::pi / 9)) < 1e-9);
  CHECK(json::parse(cli::slurp(box.path("cam.json")))["width"] == 518);
}

TEST_CASE("argument errors exit with code 2") {
  cli::Sandbox box("cli_args");
  for (const auto& args : std::vector<std::vector<std::string>>{
           {},
           {"place", "--bogus"},
           {"nosuch"},
           {"place", "--fov", "abc"},
           {"place", "--fov", "200"},
           {"eval-geo", "--pred", "a.obj"},
           {"eval-geo", "--pred", "a.obj", "--gt", "a.obj", "--emd-samples", "5000"}}) {
    const auto r = box.run(args);
    CHECK(r.code == 2);
    CHECK_FALSE(r.err.empty());
  }
  CHECK(box.file_count() == 0);
}

TEST_CASE("missing and malformed inputs exit 2 without writing") {
  cli::Sandbox box("cli_missing");
  const std::string dir = synth_case(box, "c");
  const std::size_t before = box.file_count();
  auto r = box.run({"genmesh", "--mask", dir + "/view0_mask.pxt:" + dir + "/view0.json", "--mask",
                    dir + "/view9_mask.pxt:" + dir + "/view1.json", "--grid", "16", "-o",
                    box.path("m.obj")});
  CHECK(r.code == 2);
  r = box.run({"render-normals", "--mesh", box.path("none.obj"), "--camera", dir + "/view0.json",
               "-o", box.path("n.pxt")});
  CHECK(r.code == 2);
  std::ofstream(box.path("bad.obj")) << "v 0 0 1\nv 1 0 1\nv 0 1 1\nv 1 1 1\nf 1 2 3 4\n";
  r = box.run({"render-normals", "--mesh", box.path("bad.obj"), "--camera", dir + "/view0.json",
               "-o", box.path("n.pxt")});
  CHECK(r.code == 2);
  CHECK(box.file_count() == before + 1);
}

TEST_CASE("numeric failures exit 3 without writing") {
  cli::Sandbox box("cli_numeric");
  const std::string dir = synth_case(box, "c");
  write_u8(box.path("empty.pxt"), 48, 48, 0);
  const std::size_t before = box.file_count();
  const auto r = box.run({"align-scene", "--object", "ball:" + dir + "/gt.obj:" + box.path("empty.pxt"),
                          "--camera", dir + "/view0.json", "--pointmap", dir + "/pointmap.pxt", "-o",
                          box.path("scene.obj"), "--report", box.path("align.json")});
  CHECK(r.code == 3);
  CHECK(r.err.find("pixels") != std::string::npos);
  CHECK(box.file_count() == before);
}

TEST_CASE("eval-geo on identical meshes") {
  cli::Sandbox box("cli_geo");
  const std::string dir = synth_case(box, "c");
  const auto r = box.run({"eval-geo", "--pred", dir + "/gt.obj", "--gt", dir + "/gt.obj", "--samples",
                          "2000", "--emd-samples", "256", "--seed", "7", "-o", box.path("geo.json")});
  REQUIRE(r.code == 0);
  const auto j = json::parse(cli::slurp(box.path("geo.json")));
  CHECK(j["cd"].get<double>() == 0.0);
  CHECK(j["emd"].get<double>() == 0.0);
  CHECK(j["fscore"].get<double>() == 100.0);
  CHECK(j["seed"].get<int>() == 7);
  CHECK(j.contains("conventions"));
}

TEST_CASE("synth, genmesh and eval-geo stay within the chamfer bound") {
  cli::Sandbox box("cli_chain");
  REQUIRE(box.run({"synth", "--shape", "sphere", "--radius", "0.3", "--views", "6", "--grid", "64",
                   "--seed", "1", "-o", box.path("c")})
              .code == 0);
  std::vector<std::string> args = {"genmesh", "--grid", "64", "-o", box.path("m.obj")};
  for (int v = 0; v < 6; ++v) {
    args.push_back("--mask");
    args.push_back(box.path("c/view" + std::to_string(v) + "_mask.pxt") + ":" +
                   box.path("c/view" + std::to_string(v) + ".json"));
  }
  REQUIRE(box.run(args).code == 0);
  const auto r = box.run({"eval-geo", "--pred", box.path("m.obj"), "--gt", box.path("c/gt.obj"),
                          "--samples", "5000", "--emd-samples", "512"});
  REQUIRE(r.code == 0);
  const auto j = json::parse(r.out);
  // Squared-distance CD against the squared bound 2 s / R.
  const double bound = 2.0 / 64.0;
  CHECK(j["cd"].get<double>() <= bound * bound);
  CHECK(j["fscore"].get<double>() > 50.0);
}

TEST_CASE("every subcommand runs on a small case") {
  cli::Sandbox box("cli_all");
  const std::string dir = synth_case(box, "c");
  const std::string cam0 = dir + "/view0.json", cam1 = dir + "/view1.json";
  std::vector<float> feats(48 * 48 * 2);
  for (std::size_t i = 0; i < feats.size(); ++i) feats[i] = static_cast<float>(i % 97) / 97.0f;
  write_f32(box.path("f0.pxt"), {48, 48, 2}, feats);
  write_f32(box.path("f0_half.pxt"), {24, 24, 2}, std::vector<float>(24 * 24 * 2, 0.5f));

  CHECK(box.run({"lift", "--features", box.path("f0.pxt") + "," + box.path("f0_half.pxt"), "--camera",
                 cam0, "--grid", "8", "-o", box.path("vol.pxt")})
            .code == 0);
  CHECK(box.run({"fuse", "--view", box.path("f0.pxt") + ":" + cam0, "--view",
                 box.path("f0.pxt") + ":" + cam1, "--grid", "8", "-o", box.path("fused.pxt")})
            .code == 0);
  CHECK(box.run({"carve", "--mask", dir + "/view0_mask.pxt:" + cam0, "--mask",
                 dir + "/view1_mask.pxt:" + cam1, "--grid", "16", "-o", box.path("occ.pxt")})
            .code == 0);
  CHECK(cli::fs::exists(box.path("occ.pxt.json")));
  CHECK(box.run({"voxelize", "--mesh", dir + "/gt.obj", "--grid", "16", "-o", box.path("sdf.pxt")})
            .code == 0);
  CHECK(box.run({"mesh", "--sdf", box.path("sdf.pxt"), "-o", box.path("iso.obj")}).code == 0);
  CHECK(box.run({"mesh", "--sdf", box.path("occ.pxt"), "-o", box.path("hull.obj")}).code == 0);
  CHECK(box.run({"render-normals", "--mesh", dir + "/gt.obj", "--camera", cam0, "-o",
                 box.path("n.pxt")})
            .code == 0);
  CHECK(box.run({"render-depth", "--mesh", dir + "/gt.obj", "--camera", cam0, "-o", box.path("d.pxt")})
            .code == 0);
  // Rendering through the CLI reproduces the synthetic ground truth.
  CHECK(cli::slurp(box.path("n.pxt")) == cli::slurp(dir + "/view0_normals.pxt"));
  CHECK(cli::slurp(box.path("d.pxt")) == cli::slurp(dir + "/view0_depth.pxt"));

  const auto r = box.run({"eval-normals", "--pred", box.path("n.pxt"), "--gt", dir + "/view0_normals.pxt"});
  REQUIRE(r.code == 0);
  const auto j = json::parse(r.out);
  CHECK(j["iou"].get<double>() == 100.0);
  CHECK(j["psnr"] == "inf");
  CHECK(j["conventions"]["boundary_width"] == 5);

  const auto a = box.run({"align-scene", "--object", "ball:" + dir + "/gt.obj:" + dir + "/view0_mask.pxt",
                          "--camera", cam0, "--pointmap", dir + "/pointmap.pxt", "-o",
                          box.path("scene.obj"), "--report", box.path("align.json")});
  REQUIRE(a.code == 0);
  const auto rep = json::parse(cli::slurp(box.path("align.json")));
  CHECK(std::abs(rep["objects"][0]["alpha"].get<double>() - 1.0) < 1e-6);
}

TEST_CASE("outputs do not depend on the thread count") {
  cli::Sandbox box("cli_threads");
  const std::string dir = synth_case(box, "c", 64);
  auto genmesh = [&](const std::string& threads, const std::string& out) {
    return box.run({"--threads", threads, "genmesh", "--mask", dir + "/view0_mask.pxt:" + dir + "/view0.json",
                    "--mask", dir + "/view1_mask.pxt:" + dir + "/view1.json", "--mask",
                    dir + "/view2_mask.pxt:" + dir + "/view2.json", "--grid", "24", "-o", box.path(out)});
  };
  REQUIRE(genmesh("1", "a.obj").code == 0);
  REQUIRE(genmesh("8", "b.obj").code == 0);
  CHECK(cli::slurp(box.path("a.obj")) == cli::slurp(box.path("b.obj")));

  const auto g1 = box.run({"eval-geo", "--threads", "1", "--pred", box.path("a.obj"), "--gt",
                           dir + "/gt.obj", "--samples", "1500", "--emd-samples", "200"});
  const auto g8 = box.run({"eval-geo", "--threads", "8", "--pred", box.path("a.obj"), "--gt",
                           dir + "/gt.obj", "--samples", "1500", "--emd-samples", "200"});
  REQUIRE(g1.code == 0);
  CHECK(g1.out == g8.out);
}
