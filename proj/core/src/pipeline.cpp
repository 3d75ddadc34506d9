#include "f2b/pipeline.hpp"

#include <chrono>
#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include "f2b/cloud_io.hpp"
#include "f2b/map_io.hpp"
#include "f2b/mesh_io.hpp"
#include "f2b/render.hpp"

namespace f2b {

namespace fs = std::filesystem;

StageError::StageError(std::string stage, const std::string& cause)
    : Error("stage '" + stage + "': " + cause), stage_(std::move(stage)) {}

std::uint64_t fnv1a(std::span<const std::uint8_t> bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::uint8_t b : bytes) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t file_hash(const fs::path& path) { return fnv1a(read_file_bytes(path)); }

namespace {

KeyValues stored_config(const PipelineConfig& config) {
  KeyValues kv = to_key_values(config);
  kv.erase("output_dir");
  return kv;
}

void write_plane(const std::optional<SymmetryPlane>& plane, const fs::path& path) {
  KeyValues kv;
  kv["symmetric"] = plane ? "1" : "0";
  if (plane) {
    const Vec3 n = plane->normal();
    kv["phi"] = format_exact(plane->phi);
    kv["theta"] = format_exact(plane->theta);
    kv["offset"] = format_exact(plane->offset);
    kv["normal"] = format_exact(n.x()) + " " + format_exact(n.y()) + " " + format_exact(n.z());
  }
  write_key_values(kv, path);
}

std::optional<SymmetryPlane> read_plane(const fs::path& path) {
  const KeyValues kv = read_key_values(path);
  const auto sym = kv.find("symmetric");
  if (sym == kv.end()) throw ParseError(path.string(), 0, "missing key 'symmetric'");
  if (!parse_bool(sym->second, "symmetric")) return std::nullopt;
  SymmetryPlane plane;
  plane.phi = parse_number(kv.at("phi"), "phi");
  plane.theta = parse_number(kv.at("theta"), "theta");
  plane.offset = parse_number(kv.at("offset"), "offset");
  return plane;
}

class StageRunner {
 public:
  StageRunner(const fs::path& dir, std::ostream* log, bool resume, PipelineResult& result)
      : dir_(dir), log_(log), chain_(resume), result_(result) {}

  /// Runs `compute` unless every listed artifact exists and the chain is unbroken;
  /// `load` then reads the artifacts back in both cases.
  template <class Compute, class Load>
  void stage(const std::string& name, const std::vector<std::string>& files, Compute&& compute, Load&& load) {
    const auto start = std::chrono::steady_clock::now();
    bool reuse = chain_;
    for (const auto& f : files) reuse = reuse && fs::exists(dir_ / f);
    try {
      if (!reuse) {
        chain_ = false;
        compute();
      }
      load();
    } catch (const StageError&) {
      throw;
    } catch (const PredictorError& e) {
      throw StageError(name, std::string(e.what()) + "\n" + e.diagnostics());
    } catch (const std::exception& e) {
      throw StageError(name, e.what());
    }
    StageRecord rec;
    rec.stage = name;
    rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    rec.resumed = reuse;
    if (!files.empty()) {
      rec.artifact = files.front();
      std::vector<std::uint8_t> all;
      for (const auto& f : files) {
        if (!fs::exists(dir_ / f)) continue;
        const auto bytes = read_file_bytes(dir_ / f);
        all.insert(all.end(), bytes.begin(), bytes.end());
      }
      rec.hash = fnv1a(all);
    }
    if (log_) {
      char line[512];
      std::snprintf(line, sizeof line, "stage=%s seconds=%.3f artifact=%s fnv1a=%016" PRIx64 " resumed=%d\n",
                    rec.stage.c_str(), rec.seconds, rec.artifact.empty() ? "-" : rec.artifact.c_str(), rec.hash,
                    rec.resumed ? 1 : 0);
      *log_ << line << std::flush;
    }
    result_.stages.push_back(rec);
  }

 private:
  fs::path dir_;
  std::ostream* log_;
  bool chain_;
  PipelineResult& result_;
};

}  // namespace

PipelineResult run_pipeline(const PipelineInput& input, const PipelineConfig& config, std::ostream* log,
                            bool resume) {
  config.validate();
  if (input.mesh.has_value() == input.front_maps.has_value()) {
    throw ConfigError("pipeline needs exactly one of a mesh or front maps");
  }
  const fs::path dir = config.output_dir;
  fs::create_directories(dir);
  PipelineResult result;
  result.directory = dir;

  const KeyValues cfg = stored_config(config);
  if (resume && fs::exists(dir / artifact::config)) {
    try {
      resume = read_key_values(dir / artifact::config) == cfg;
    } catch (const Error&) {
      resume = false;
    }
  } else {
    resume = false;
  }
  write_key_values(cfg, dir / artifact::config);

  StageRunner run(dir, log, resume, result);
  auto path = [&](const char* name) { return dir / name; };

  if (input.mesh) {
    run.stage(
        "normalize", {artifact::truth},
        [&] { save_obj(normalize_mesh(load_mesh(*input.mesh)).mesh, path(artifact::truth)); },
        [&] { result.truth = load_mesh(path(artifact::truth)); });
    run.stage(
        "render", {artifact::front, artifact::front_frame},
        [&] {
          const Vec3 dir_world = direction_from_angles(config.azimuth_deg, config.elevation_deg);
          const ViewFrame frame = fit_frame(*result.truth, dir_world, config.resolution);
          write_f2bm(render_maps(*result.truth, frame), path(artifact::front));
          write_frame(frame, path(artifact::front_frame));
        },
        [&] { result.front = read_f2bm(path(artifact::front), read_frame(path(artifact::front_frame))); });
  } else {
    run.stage(
        "ingest", {artifact::front, artifact::front_frame},
        [&] {
          fs::path frame_path = *input.front_maps;
          frame_path.replace_extension(".frame");
          const ViewFrame frame = read_frame(frame_path);
          frame.validate();
          write_f2bm(mask_with_silhouette(read_f2bm(*input.front_maps, frame)), path(artifact::front));
          write_frame(frame, path(artifact::front_frame));
        },
        [&] { result.front = read_f2bm(path(artifact::front), read_frame(path(artifact::front_frame))); });
  }

  run.stage(
      "symmetry", {artifact::plane},
      [&] {
        std::optional<SymmetryPlane> plane;
        if (config.symmetry_mode == SymmetryMode::detect) {
          plane = detect_symmetry(result.front, config.symmetry).plane;
        } else if (config.symmetry_mode == SymmetryMode::given) {
          plane = config.given_plane->canonical();
        }
        write_plane(plane, path(artifact::plane));
      },
      [&] { result.plane = read_plane(path(artifact::plane)); });

  if (result.plane) {
    run.stage(
        "reflect", {artifact::reflected},
        [&] { write_f2bm(reflect_maps(result.front, *result.plane), path(artifact::reflected)); },
        [&] { result.reflected = read_f2bm(path(artifact::reflected), result.front.frame); });
  } else {
    std::error_code ec;
    fs::remove(path(artifact::reflected), ec);
  }

  run.stage(
      "predict-back", {artifact::back, artifact::back_frame},
      [&] {
        BackPredictorSpec spec;
        switch (config.predictor) {
          case PredictorKind::oracle:
            if (!result.truth) throw ConfigError("oracle predictor needs a ground-truth mesh");
            spec = BackPredictorSpec::oracle(std::make_shared<const TriangleMesh>(*result.truth));
            break;
          case PredictorKind::heuristic: spec = BackPredictorSpec::heuristic(); break;
          case PredictorKind::external: spec = BackPredictorSpec::external_process(config.external); break;
        }
        const MapSet back = predict_back(spec, PredictionInput{result.front, result.reflected});
        write_f2bm(back, path(artifact::back));
        write_frame(back.frame, path(artifact::back_frame));
      },
      [&] { result.back = read_f2bm(path(artifact::back), read_frame(path(artifact::back_frame))); });

  run.stage(
      "fuse", {artifact::cloud},
      [&] { save_cloud(fuse(result.front, result.reflected, result.back, config.fusion, &result.fusion), path(artifact::cloud)); },
      [&] { result.cloud = load_cloud(path(artifact::cloud)); });

  run.stage(
      "reconstruct", {artifact::mesh},
      [&] { save_obj(reconstruct(result.cloud, config.recon, &result.solve), path(artifact::mesh)); },
      [&] { result.mesh = load_mesh(path(artifact::mesh)); });

  if (result.truth) {
    run.stage(
        "evaluate", {artifact::report},
        [&] {
          std::ofstream out(path(artifact::report));
          out << format_report(evaluate(result.mesh, *result.truth, config.eval_samples, config.seed));
          if (!out) throw IoError("cannot write " + path(artifact::report).string());
        },
        [&] {
          const KeyValues kv = read_key_values(path(artifact::report));
          EvalReport r;
          r.md = parse_number(kv.at("md"), "md");
          r.md_max = parse_number(kv.at("md_max"), "md_max");
          r.cd = parse_number(kv.at("cd"), "cd");
          r.cd_x10 = parse_number(kv.at("cd_x10"), "cd_x10");
          r.normal_consistency = parse_number(kv.at("normal_consistency"), "normal_consistency");
          r.samples = static_cast<std::size_t>(parse_integer(kv.at("samples"), "samples"));
          r.seed = static_cast<std::uint64_t>(std::stoull(kv.at("seed")));
          result.report = r;
        });
  }
  return result;
}

std::vector<ManifestEntry> read_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<ManifestEntry> entries;
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::istringstream fields(line);
    ManifestEntry e;
    std::string file;
    if (!(fields >> file)) continue;
    fields >> e.tag;
    if (e.tag.empty()) e.tag = "default";
    e.path = fs::path(file).is_absolute() ? fs::path(file) : path.parent_path() / file;
    entries.push_back(std::move(e));
  }
  return entries;
}

CorpusResult run_corpus(const std::vector<ManifestEntry>& entries, const PipelineConfig& config, std::ostream* log) {
  config.validate();
  fs::create_directories(config.output_dir);
  CorpusResult result;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const ManifestEntry& e = entries[i];
    PipelineConfig cfg = config;
    char prefix[16];
    std::snprintf(prefix, sizeof prefix, "%04zu_", i);
    cfg.output_dir = config.output_dir / (prefix + e.path.stem().string());
    try {
      PipelineInput input;
      if (e.path.extension() == ".f2bm") input.front_maps = e.path;
      else input.mesh = e.path;
      if (log) *log << "model=" << e.path.string() << '\n';
      const PipelineResult r = run_pipeline(input, cfg, log);
      if (!r.report) throw ConfigError("no ground truth to evaluate against");
      result.rows.push_back({e.path.string(), e.tag, *r.report});
    } catch (const std::exception& ex) {
      result.failures.push_back(e.path.string() + ": " + ex.what());
      if (log) *log << "failed model=" << e.path.string() << " error=" << ex.what() << '\n';
    }
  }

  std::map<std::string, CorpusSummary> by_tag;
  CorpusSummary all{"all"};
  for (const CorpusRow& row : result.rows) {
    for (CorpusSummary* s : {&by_tag[row.tag], &all}) {
      ++s->count;
      s->md += row.report.md;
      s->cd += row.report.cd;
      s->normal_consistency += row.report.normal_consistency;
    }
  }
  auto finish = [](CorpusSummary s, const std::string& tag) {
    s.tag = tag;
    if (s.count) {
      s.md /= static_cast<double>(s.count);
      s.cd /= static_cast<double>(s.count);
      s.normal_consistency /= static_cast<double>(s.count);
    }
    return s;
  };
  for (const auto& [tag, s] : by_tag) result.summary.push_back(finish(s, tag));
  result.summary.push_back(finish(all, "all"));

  std::ofstream rows(config.output_dir / "results.csv");
  rows << "model,tag," << report_csv_header() << '\n';
  for (const CorpusRow& row : result.rows) rows << row.model << ',' << row.tag << ',' << report_csv_row(row.report) << '\n';
  std::ofstream summary(config.output_dir / "summary.csv");
  summary << "tag,count,md,cd,normal_consistency\n";
  for (const CorpusSummary& s : result.summary) {
    summary << s.tag << ',' << s.count << ',' << format_exact(s.md) << ',' << format_exact(s.cd) << ','
            << format_exact(s.normal_consistency) << '\n';
  }
  if (!rows || !summary) throw IoError("cannot write corpus results under " + config.output_dir.string());
  return result;
}

}  // namespace f2b
