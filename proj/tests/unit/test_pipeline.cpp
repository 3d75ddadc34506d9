#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "f2b/map_io.hpp"
#include "f2b/mesh_io.hpp"
#include "f2b/pipeline.hpp"
#include "f2b/render.hpp"
#include "f2b_test/shapes.hpp"

using namespace f2b;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("f2b_pipeline_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

// Small but complete settings so the end-to-end tests stay quick.
PipelineConfig quick_config(const fs::path& out, const KeyValues& extra = {}) {
  KeyValues kv{{"recon.grid_resolution", "64"},
               {"eval.samples", "20000"},
               {"symmetry.rounds", "6"},
               {"output_dir", out.string()}};
  for (const auto& [k, v] : extra) kv[k] = v;
  return make_config(kv);
}

std::string read_text(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("fnv1a reference values") {
  CHECK(fnv1a({}) == 0xcbf29ce484222325ull);
  const std::string a = "a";
  CHECK(fnv1a({reinterpret_cast<const std::uint8_t*>(a.data()), a.size()}) == 0xaf63dc4c8601ec8cull);
  const std::string foobar = "foobar";
  CHECK(fnv1a({reinterpret_cast<const std::uint8_t*>(foobar.data()), foobar.size()}) == 0x85944171f73967e8ull);
}

TEST_CASE("sphere with the oracle predictor") {
  const fs::path dir = scratch("sphere");
  save_obj(test::uv_sphere(Vec3(1, 2, 3), 2.0, 48, 96), dir / "sphere.obj");
  std::ostringstream log;
  const PipelineResult r =
      run_pipeline({dir / "sphere.obj", std::nullopt},
                   quick_config(dir / "out", {{"predictor.kind", "oracle"}, {"recon.grid_resolution", "128"}}), &log);
  REQUIRE(r.report);
  CHECK(r.report->md <= 0.03);
  for (const char* name : {artifact::config, artifact::truth, artifact::front, artifact::front_frame, artifact::plane,
                           artifact::back, artifact::back_frame, artifact::cloud, artifact::mesh, artifact::report}) {
    CHECK(fs::exists(dir / "out" / name));
  }
  const std::string text = log.str();
  for (const char* stage : {"normalize", "render", "symmetry", "predict-back", "fuse", "reconstruct", "evaluate"}) {
    CHECK(text.find(std::string("stage=") + stage + " ") != std::string::npos);
  }
  CHECK(r.stages.size() >= 7);
  for (const auto& s : r.stages) {
    INFO(s.artifact);
    CHECK_FALSE(s.resumed);
    // Map stages hash the raster followed by its frame sidecar, when it has one.
    std::vector<std::uint8_t> bytes = read_file_bytes(dir / "out" / s.artifact);
    const fs::path sidecar = dir / "out" / fs::path(s.artifact).replace_extension(".frame");
    if (fs::path(s.artifact).extension() == ".f2bm" && fs::exists(sidecar)) {
      const auto frame = read_file_bytes(sidecar);
      bytes.insert(bytes.end(), frame.begin(), frame.end());
    }
    CHECK(s.hash == fnv1a(bytes));
  }
  fs::remove_all(dir);
}

TEST_CASE("ingested front maps run without ground-truth stages") {
  const fs::path dir = scratch("ingest");
  const TriangleMesh m = normalize_mesh(test::chair(test::ChairParams{})).mesh;
  const ViewFrame f = fit_frame(m, direction_from_angles(30, 20), 137);
  write_f2bm(render_maps(m, f), dir / "front.f2bm");
  write_frame(f, dir / "front.frame");
  const PipelineResult r = run_pipeline({std::nullopt, dir / "front.f2bm"}, quick_config(dir / "out"));
  CHECK_FALSE(r.truth);
  CHECK_FALSE(r.report);
  CHECK_FALSE(fs::exists(dir / "out" / artifact::report));
  CHECK_FALSE(fs::exists(dir / "out" / artifact::truth));
  CHECK(fs::exists(dir / "out" / artifact::mesh));
  CHECK_FALSE(r.mesh.empty());

  // The oracle has nothing to render without a mesh.
  CHECK_THROWS_AS(run_pipeline({std::nullopt, dir / "front.f2bm"}, quick_config(dir / "out2", {{"predictor.kind", "oracle"}})),
                  StageError);
  fs::remove_all(dir);
}

TEST_CASE("asymmetric input skips the reflected maps") {
  const fs::path dir = scratch("asym");
  save_obj(test::asymmetric_corpus().front().mesh, dir / "chair.obj");
  const PipelineResult r = run_pipeline({dir / "chair.obj", std::nullopt}, quick_config(dir / "out"));
  CHECK_FALSE(r.plane);
  CHECK_FALSE(r.reflected);
  CHECK_FALSE(fs::exists(dir / "out" / artifact::reflected));
  CHECK(read_text(dir / "out" / artifact::plane).find("symmetric = 0") != std::string::npos);
  for (const auto& p : r.cloud.points) CHECK(p.tag != SourceTag::reflected);
  fs::remove_all(dir);
}

TEST_CASE("given symmetry plane is used as is") {
  const fs::path dir = scratch("given");
  save_obj(test::chair(test::ChairParams{}), dir / "chair.obj");
  const PipelineResult r = run_pipeline(
      {dir / "chair.obj", std::nullopt},
      quick_config(dir / "out", {{"symmetry.mode", "given"}, {"symmetry.plane", "1 0 0 0"}, {"predictor.kind", "oracle"}}));
  REQUIRE(r.plane);
  CHECK((r.plane->normal() - Vec3::UnitX()).norm() < 1e-12);
  REQUIRE(r.reflected);
  CHECK(r.reflected->defined_count() > 0);
  const PipelineResult none = run_pipeline({dir / "chair.obj", std::nullopt},
                                           quick_config(dir / "out_none", {{"symmetry.mode", "none"}}));
  CHECK_FALSE(none.plane);
  fs::remove_all(dir);
}

TEST_CASE("resume reproduces a clean run bit for bit") {
  const fs::path dir = scratch("resume");
  save_obj(test::torus(Vec3::Zero(), 1.0, 0.35), dir / "torus.obj");
  const PipelineConfig cfg = quick_config(dir / "out", {{"predictor.kind", "oracle"}});
  const PipelineResult clean = run_pipeline({dir / "torus.obj", std::nullopt}, cfg);

  const PipelineResult resumed = run_pipeline({dir / "torus.obj", std::nullopt}, cfg, nullptr, true);
  REQUIRE(resumed.stages.size() == clean.stages.size());
  for (std::size_t i = 0; i < clean.stages.size(); ++i) {
    CHECK(resumed.stages[i].resumed);
    CHECK(resumed.stages[i].hash == clean.stages[i].hash);
  }

  // Drop a middle artifact: that stage and everything after it recompute identically.
  fs::remove(dir / "out" / artifact::cloud);
  const PipelineResult partial = run_pipeline({dir / "torus.obj", std::nullopt}, cfg, nullptr, true);
  bool recomputing = false;
  for (std::size_t i = 0; i < clean.stages.size(); ++i) {
    if (partial.stages[i].stage == "fuse") recomputing = true;
    CHECK(partial.stages[i].resumed == !recomputing);
    CHECK(partial.stages[i].hash == clean.stages[i].hash);
  }

  // A different configuration invalidates everything.
  PipelineConfig other = cfg;
  other.fusion.outlier_threshold = 5.0;
  const PipelineResult changed = run_pipeline({dir / "torus.obj", std::nullopt}, other, nullptr, true);
  for (const auto& s : changed.stages) CHECK_FALSE(s.resumed);

  // A fresh directory with the same configuration repeats every artifact.
  PipelineConfig twin = cfg;
  twin.output_dir = dir / "twin";
  const PipelineResult again = run_pipeline({dir / "torus.obj", std::nullopt}, twin);
  for (std::size_t i = 0; i < clean.stages.size(); ++i) CHECK(again.stages[i].hash == clean.stages[i].hash);
  fs::remove_all(dir);
}

TEST_CASE("stage failures name the stage and keep earlier artifacts") {
  const fs::path dir = scratch("fail");
  save_obj(test::uv_sphere(Vec3::Zero(), 1.0), dir / "s.obj");
  const PipelineConfig cfg =
      quick_config(dir / "out", {{"predictor.kind", "external"}, {"predictor.command", "exit 3"}});
  try {
    run_pipeline({dir / "s.obj", std::nullopt}, cfg);
    FAIL("expected StageError");
  } catch (const StageError& e) {
    CHECK(e.stage() == "predict-back");
    CHECK(std::string(e.what()).find("predict-back") != std::string::npos);
  }
  CHECK(fs::exists(dir / "out" / artifact::front));
  CHECK(fs::exists(dir / "out" / artifact::plane));
  CHECK_FALSE(fs::exists(dir / "out" / artifact::cloud));

  fs::create_directories(dir / "bad");
  std::ofstream(dir / "bad" / "broken.obj") << "v 0 0 0\nf 1 2 3\n";
  CHECK_THROWS_AS(run_pipeline({dir / "bad" / "broken.obj", std::nullopt}, quick_config(dir / "out3")), StageError);
  fs::remove_all(dir);
}

TEST_CASE("manifest parsing") {
  const fs::path dir = scratch("manifest");
  std::ofstream(dir / "list.txt") << "# corpus\na.obj chairs\n\n  sub/b.off  \n/abs/c.obj tables # note\n";
  const auto entries = read_manifest(dir / "list.txt");
  REQUIRE(entries.size() == 3);
  CHECK(entries[0].path == dir / "a.obj");
  CHECK(entries[0].tag == "chairs");
  CHECK(entries[1].path == dir / "sub" / "b.off");
  CHECK(entries[1].tag == "default");
  CHECK(entries[2].path == fs::path("/abs/c.obj"));
  CHECK(entries[2].tag == "tables");
  CHECK_THROWS_AS(read_manifest(dir / "missing.txt"), IoError);
  fs::remove_all(dir);
}

TEST_CASE("corpus: ten meshes, one corrupt, empty manifest") {
  const fs::path dir = scratch("corpus");
  auto corpus = test::closed_corpus();
  std::vector<ManifestEntry> entries;
  for (std::size_t i = 0; i < 10; ++i) {
    const fs::path p = dir / (corpus[i].name + ".obj");
    save_obj(corpus[i].mesh, p);
    entries.push_back({p, i % 2 ? "odd" : "even"});
  }
  const PipelineConfig cfg = quick_config(dir / "out", {{"predictor.kind", "oracle"}, {"symmetry.mode", "none"}});

  SUBCASE("all good") {
    const CorpusResult r = run_corpus(entries, cfg);
    CHECK(r.complete());
    CHECK(r.rows.size() == 10);
    REQUIRE(r.summary.size() == 3);
    CHECK(r.summary.back().tag == "all");
    CHECK(r.summary.back().count == 10);
    for (std::size_t i = 0; i < r.rows.size(); ++i) CHECK(r.rows[i].model == entries[i].path.string());
    const std::string csv = read_text(dir / "out" / "results.csv");
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 11);
    CHECK(fs::exists(dir / "out" / "summary.csv"));
  }
  SUBCASE("one corrupt mesh") {
    std::ofstream(entries[4].path) << "this is not a mesh\nf 9 9 9\n";
    const CorpusResult r = run_corpus(entries, cfg);
    CHECK_FALSE(r.complete());
    CHECK(r.rows.size() == 9);
    CHECK(r.failures.size() == 1);
  }
  SUBCASE("empty manifest") {
    const CorpusResult r = run_corpus({}, cfg);
    CHECK(r.complete());
    CHECK(r.rows.empty());
    const std::string csv = read_text(dir / "out" / "results.csv");
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 1);
    CHECK(csv.rfind("model,tag,md", 0) == 0);
  }
  fs::remove_all(dir);
}
