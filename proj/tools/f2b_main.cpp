// Command line front end for the reconstruction pipeline and its individual stages.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "f2b/backpred.hpp"
#include "f2b/cloud_io.hpp"
#include "f2b/config.hpp"
#include "f2b/fusion.hpp"
#include "f2b/map_io.hpp"
#include "f2b/mesh_io.hpp"
#include "f2b/metrics.hpp"
#include "f2b/pipeline.hpp"
#include "f2b/poisson.hpp"
#include "f2b/render.hpp"
#include "f2b/symmetry.hpp"

namespace fs = std::filesystem;
using namespace f2b;

namespace {

struct Globals {
  std::optional<fs::path> config;
  std::vector<std::string> sets;
  std::optional<std::uint64_t> seed;
  std::optional<int> resolution;
};

PipelineConfig resolve(const Globals& g, std::vector<std::string> extra = {}) {
  std::vector<std::string> sets = g.sets;
  if (g.seed) sets.push_back("seed=" + std::to_string(*g.seed));
  if (g.resolution) sets.push_back("resolution=" + std::to_string(*g.resolution));
  sets.insert(sets.end(), extra.begin(), extra.end());
  return load_config(g.config, sets);
}

fs::path sidecar(const fs::path& f2bm) {
  fs::path p = f2bm;
  p.replace_extension(".frame");
  return p;
}

MapSet read_maps(const fs::path& f2bm) { return read_f2bm(f2bm, read_frame(sidecar(f2bm))); }

void write_maps(const MapSet& maps, const fs::path& f2bm) {
  if (f2bm.has_parent_path()) fs::create_directories(f2bm.parent_path());
  write_f2bm(maps, f2bm);
  write_frame(maps.frame, sidecar(f2bm));
}

std::string plane_line(const SymmetryPlane& p) {
  const Vec3 n = p.normal();
  return format_exact(n.x()) + " " + format_exact(n.y()) + " " + format_exact(n.z()) + " " + format_exact(p.offset);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Single-view shape reconstruction from front, reflected and back 2.5D maps"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--config", g.config, "key=value configuration file")->check(CLI::ExistingFile);
  app.add_option("--set", g.sets, "Override one configuration key (key=value)");
  app.add_option("--seed", g.seed, "Random seed");
  app.add_option("--resolution", g.resolution, "Map resolution")->check(CLI::IsMember({137, 256}));

  // render
  auto* render = app.add_subcommand("render", "Render front maps and ground-truth back maps of a mesh");
  fs::path render_mesh, render_out;
  bool render_normalize = false;
  render->add_option("mesh", render_mesh, "OBJ or OFF mesh")->required()->check(CLI::ExistingFile);
  render->add_option("-o,--out", render_out, "Output directory")->required();
  render->add_flag("--normalize", render_normalize, "Center the mesh and scale its diagonal to 1 first");

  // symmetry
  auto* symmetry = app.add_subcommand("symmetry", "Detect a reflective symmetry plane in front maps");
  fs::path sym_front;
  std::optional<fs::path> sym_reflected, sym_out;
  symmetry->add_option("front", sym_front, "Front maps (.f2bm with .frame sidecar)")->required()->check(CLI::ExistingFile);
  symmetry->add_option("--reflected", sym_reflected, "Write reflected maps here when symmetric");
  symmetry->add_option("-o,--out", sym_out, "Write the plane record here");

  // predict-back
  auto* predict = app.add_subcommand("predict-back", "Predict back maps from front (and reflected) maps");
  fs::path pb_front, pb_out;
  std::optional<fs::path> pb_reflected, pb_mesh;
  predict->add_option("front", pb_front, "Front maps")->required()->check(CLI::ExistingFile);
  predict->add_option("--reflected", pb_reflected, "Reflected maps")->check(CLI::ExistingFile);
  predict->add_option("--mesh", pb_mesh, "Mesh for the oracle predictor")->check(CLI::ExistingFile);
  predict->add_option("-o,--out", pb_out, "Output .f2bm")->required();

  // fuse
  auto* fuse_cmd = app.add_subcommand("fuse", "Fuse front, reflected and back maps into an oriented point cloud");
  fs::path fu_front, fu_back, fu_out;
  std::optional<fs::path> fu_reflected;
  fuse_cmd->add_option("front", fu_front, "Front maps")->required()->check(CLI::ExistingFile);
  fuse_cmd->add_option("back", fu_back, "Back maps")->required()->check(CLI::ExistingFile);
  fuse_cmd->add_option("--reflected", fu_reflected, "Reflected maps")->check(CLI::ExistingFile);
  fuse_cmd->add_option("-o,--out", fu_out, "Output point cloud")->required();

  // reconstruct
  auto* recon = app.add_subcommand("reconstruct", "Screened Poisson reconstruction of a point cloud");
  fs::path re_cloud, re_out;
  std::optional<int> grid_res;
  std::optional<double> screen_weight, tol;
  recon->add_option("cloud", re_cloud, "Point cloud (x y z nx ny nz tag)")->required()->check(CLI::ExistingFile);
  recon->add_option("-o,--out", re_out, "Output OBJ")->required();
  recon->add_option("--grid-res", grid_res, "Grid cells per side");
  recon->add_option("--screen-weight", screen_weight, "Screening weight");
  recon->add_option("--tol", tol, "Relative residual tolerance");

  // evaluate
  auto* eval = app.add_subcommand("evaluate", "Compare a reconstruction with its ground truth");
  fs::path ev_result, ev_truth;
  std::optional<fs::path> ev_csv;
  eval->add_option("result", ev_result, "Reconstructed mesh")->required()->check(CLI::ExistingFile);
  eval->add_option("truth", ev_truth, "Ground-truth mesh")->required()->check(CLI::ExistingFile);
  eval->add_option("--csv", ev_csv, "Append a CSV row to this file");

  // pipeline
  auto* pipe = app.add_subcommand("pipeline", "Run all stages on one input");
  std::optional<fs::path> pl_mesh, pl_maps, pl_out;
  bool pl_resume = false;
  auto* mesh_opt = pipe->add_option("--mesh", pl_mesh, "Input mesh")->check(CLI::ExistingFile);
  auto* maps_opt = pipe->add_option("--maps", pl_maps, "Input front maps (.f2bm)")->check(CLI::ExistingFile);
  mesh_opt->excludes(maps_opt);
  pipe->add_option("-o,--out", pl_out, "Output directory (overrides output_dir)");
  pipe->add_flag("--resume", pl_resume, "Reuse artifacts already present in the output directory");

  // corpus
  auto* corpus = app.add_subcommand("corpus", "Run the pipeline over a manifest and tabulate metrics");
  fs::path co_manifest;
  std::optional<fs::path> co_out;
  corpus->add_option("manifest", co_manifest, "Lines of 'path [tag]'")->required()->check(CLI::ExistingFile);
  corpus->add_option("-o,--out", co_out, "Output directory (overrides output_dir)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*render) {
      const PipelineConfig cfg = resolve(g);
      TriangleMesh mesh = load_mesh(render_mesh);
      if (render_normalize) mesh = normalize_mesh(mesh).mesh;
      const ViewFrame frame =
          fit_frame(mesh, direction_from_angles(cfg.azimuth_deg, cfg.elevation_deg), cfg.resolution);
      write_maps(render_maps(mesh, frame), render_out / "front.f2bm");
      write_maps(render_back_truth(mesh, frame), render_out / "back.f2bm");
      std::cout << "wrote " << (render_out / "front.f2bm").string() << " and " << (render_out / "back.f2bm").string()
                << '\n';
    } else if (*symmetry) {
      const PipelineConfig cfg = resolve(g);
      const MapSet front = read_maps(sym_front);
      const SymmetryVerdict v = detect_symmetry(front, cfg.symmetry);
      std::ostringstream rec;
      rec << "symmetric=" << (v.symmetric() ? 1 : 0) << '\n';
      if (v.symmetric()) {
        rec << "phi=" << format_exact(v.plane->phi) << '\n'
            << "theta=" << format_exact(v.plane->theta) << '\n'
            << "offset=" << format_exact(v.plane->offset) << '\n'
            << "plane=" << plane_line(*v.plane) << '\n';
      }
      rec << "coverage=" << format_exact(v.coverage) << '\n'
          << "hull_violation=" << format_exact(v.hull_violation) << '\n'
          << "visibility_violation=" << format_exact(v.visibility_violation) << '\n'
          << "icp_iterations=" << v.icp.iterations << '\n';
      std::cout << rec.str();
      if (sym_out) {
        std::ofstream out(*sym_out);
        out << rec.str();
      }
      if (sym_reflected && v.symmetric()) write_maps(reflect_maps(front, *v.plane), *sym_reflected);
    } else if (*predict) {
      const PipelineConfig cfg = resolve(g);
      PredictionInput in{read_maps(pb_front), std::nullopt};
      if (pb_reflected) in.reflected = read_maps(*pb_reflected);
      BackPredictorSpec spec;
      switch (cfg.predictor) {
        case PredictorKind::oracle:
          if (!pb_mesh) throw ConfigError("predictor.kind=oracle needs --mesh");
          spec = BackPredictorSpec::oracle(std::make_shared<const TriangleMesh>(load_mesh(*pb_mesh)));
          break;
        case PredictorKind::heuristic: spec = BackPredictorSpec::heuristic(); break;
        case PredictorKind::external: spec = BackPredictorSpec::external_process(cfg.external); break;
      }
      write_maps(predict_back(spec, in), pb_out);
    } else if (*fuse_cmd) {
      const PipelineConfig cfg = resolve(g);
      std::optional<MapSet> reflected;
      if (fu_reflected) reflected = read_maps(*fu_reflected);
      FusionStats stats;
      const OrientedPointCloud cloud = fuse(read_maps(fu_front), reflected, read_maps(fu_back), cfg.fusion, &stats);
      save_cloud(cloud, fu_out);
      std::cout << "points=" << cloud.size() << " displaced=" << stats.displaced << " outliers=" << stats.outliers
                << '\n';
    } else if (*recon) {
      std::vector<std::string> extra;
      if (grid_res) extra.push_back("recon.grid_resolution=" + std::to_string(*grid_res));
      if (screen_weight) extra.push_back("recon.screen_weight=" + format_exact(*screen_weight));
      if (tol) extra.push_back("recon.tolerance=" + format_exact(*tol));
      const PipelineConfig cfg = resolve(g, extra);
      SolveReport report;
      save_obj(reconstruct(load_cloud(re_cloud), cfg.recon, &report), re_out);
      std::cout << "iterations=" << report.iterations << " residual=" << format_exact(report.residual) << '\n';
    } else if (*eval) {
      const PipelineConfig cfg = resolve(g);
      const EvalReport report = evaluate(load_mesh(ev_result), load_mesh(ev_truth), cfg.eval_samples, cfg.seed);
      std::cout << format_report(report);
      if (ev_csv) {
        const bool fresh = !fs::exists(*ev_csv);
        std::ofstream out(*ev_csv, std::ios::app);
        if (fresh) out << "result,truth," << report_csv_header() << '\n';
        out << ev_result.string() << ',' << ev_truth.string() << ',' << report_csv_row(report) << '\n';
      }
    } else if (*pipe) {
      if (!pl_mesh && !pl_maps) throw ConfigError("pipeline needs --mesh or --maps");
      std::vector<std::string> extra;
      if (pl_out) extra.push_back("output_dir=" + pl_out->string());
      const PipelineConfig cfg = resolve(g, extra);
      const PipelineResult r = run_pipeline(PipelineInput{pl_mesh, pl_maps}, cfg, &std::cerr, pl_resume);
      if (r.report) std::cout << format_report(*r.report);
      std::cout << "output_dir=" << r.directory.string() << '\n';
    } else if (*corpus) {
      std::vector<std::string> extra;
      if (co_out) extra.push_back("output_dir=" + co_out->string());
      const PipelineConfig cfg = resolve(g, extra);
      const CorpusResult r = run_corpus(read_manifest(co_manifest), cfg, &std::cerr);
      for (const CorpusSummary& s : r.summary) {
        std::cout << "tag=" << s.tag << " count=" << s.count << " md=" << format_exact(s.md)
                  << " cd=" << format_exact(s.cd) << " nc=" << format_exact(s.normal_consistency) << '\n';
      }
      if (!r.complete()) {
        std::cerr << r.failures.size() << " of " << (r.failures.size() + r.rows.size()) << " models failed\n";
        return 2;
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
