// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <memory>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "f2b/backpred.hpp"
#include "f2b/fusion.hpp"
#include "f2b/metrics.hpp"
#include "f2b/mesh_io.hpp"
#include "f2b/pipeline.hpp"
#include "f2b/poisson.hpp"
#include "f2b/random.hpp"
#include "f2b/render.hpp"
#include "f2b/symmetry.hpp"
#include "f2b_test/shapes.hpp"

using namespace f2b;
namespace fs = std::filesystem;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

fs::path work_dir() {
  const fs::path dir = temp_root() / "f2b_acceptance";
  fs::create_directories(dir);
  return dir;
}

// ---------------------------------------------------------------------------------
// 1. Front and opposite silhouettes align.

Outcome silhouette_alignment() {
  double worst = 0.0;
  std::size_t views = 0;
  for (const auto& c : test::closed_corpus()) {
    const TriangleMesh m = normalize_mesh(c.mesh).mesh;
    for (std::uint64_t v = 0; v < 5; ++v) {
      const ViewFrame f = fit_frame(m, test::random_direction(mix_seed(1000, views)), 256);
      const MapSet front = render_maps(m, f);
      const MapSet back = render_back_truth(m, f);
      std::size_t differ = 0, either = 0;
      for (std::size_t i = 0; i < front.pixel_count(); ++i) {
        differ += front.silhouette[i] != back.silhouette[i] ? 1 : 0;
        either += (front.silhouette[i] || back.silhouette[i]) ? 1 : 0;
      }
      worst = std::max(worst, static_cast<double>(differ) / static_cast<double>(std::max<std::size_t>(either, 1)));
      ++views;
    }
  }
  return {worst <= 0.01, std::to_string(views) + " views, worst disagreement " + fmt("%.4f%%", 100 * worst) +
                             " of silhouette pixels (limit 1%)"};
}

// ---------------------------------------------------------------------------------
// 2. Symmetry recovery and rejection.

Outcome symmetry_recovery() {
  const SymmetryPlane truth = SymmetryPlane::from_normal_offset(Vec3::UnitX(), 0.0);
  const auto views = test::random_views(5, 77);
  SymmetryConfig cfg;
  std::size_t runs = 0, recovered = 0, non_monotone = 0;
  double worst_angle = 0.0, worst_offset = 0.0;
  for (const auto& c : test::chair_corpus()) {
    const TriangleMesh m = normalize_mesh(c.mesh).mesh;
    for (const auto& v : views) {
      const MapSet maps = render_maps(m, fit_frame(m, direction_from_angles(v.azimuth_deg, v.elevation_deg), 137));
      cfg.seed = mix_seed(5, runs);
      const SymmetryVerdict verdict = detect_symmetry(maps, cfg);
      ++runs;
      if (verdict.initial_plane && !verdict.icp.monotone) ++non_monotone;
      if (!verdict.symmetric()) continue;
      const double angle = plane_angle(*verdict.plane, truth);
      const double offset = std::abs(verdict.plane->offset);
      const double ps = maps.frame.pixel_size();
      if (angle <= 2 * kDeg && offset <= ps) {
        ++recovered;
        worst_angle = std::max(worst_angle, angle);
        worst_offset = std::max(worst_offset, offset / ps);
      }
    }
  }
  std::size_t neg_runs = 0, rejected = 0;
  for (const auto& c : test::asymmetric_corpus()) {
    const TriangleMesh m = normalize_mesh(c.mesh).mesh;
    for (const auto& v : views) {
      const MapSet maps = render_maps(m, fit_frame(m, direction_from_angles(v.azimuth_deg, v.elevation_deg), 137));
      cfg.seed = mix_seed(6, neg_runs);
      const SymmetryVerdict verdict = detect_symmetry(maps, cfg);
      ++neg_runs;
      if (verdict.initial_plane && !verdict.icp.monotone) ++non_monotone;
      if (!verdict.symmetric()) ++rejected;
    }
  }
  const double pos = static_cast<double>(recovered) / static_cast<double>(runs);
  const double neg = static_cast<double>(rejected) / static_cast<double>(neg_runs);
  std::ostringstream d;
  d << "recovered " << recovered << "/" << runs << " (" << fmt("%.1f%%", 100 * pos) << ", worst "
    << fmt("%.3f", worst_angle / kDeg) << " deg / " << fmt("%.3f", worst_offset) << " px), rejected " << rejected
    << "/" << neg_runs << " asymmetric (" << fmt("%.1f%%", 100 * neg) << "), non-monotone ICP runs " << non_monotone;
  return {pos >= 0.9 && neg >= 0.9 && non_monotone == 0, d.str()};
}

// ---------------------------------------------------------------------------------
// 3. Analytic gradient of the reflection objective.

Outcome gradient_check() {
  Rng rng(31337);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<Correspondence> pairs;
    const std::size_t n = 3 + rng.below(200);
    for (std::size_t i = 0; i < n; ++i) {
      pairs.push_back({Vec3(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)),
                       Vec3(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1))});
    }
    const SymmetryPlane plane{rng.uniform(-3.1, 3.1), rng.uniform(0.15, 3.0), rng.uniform(-0.8, 0.8)};
    Vec3 grad;
    reflection_objective(plane, pairs, &grad);
    Vec3 fd;
    const double h = 1e-6;
    for (int k = 0; k < 3; ++k) {
      SymmetryPlane lo = plane, hi = plane;
      (k == 0 ? lo.phi : k == 1 ? lo.theta : lo.offset) -= h;
      (k == 0 ? hi.phi : k == 1 ? hi.theta : hi.offset) += h;
      fd[k] = (reflection_objective(hi, pairs) - reflection_objective(lo, pairs)) / (2 * h);
    }
    worst = std::max(worst, (grad - fd).norm() / std::max(grad.norm(), 1e-12));
  }
  return {worst <= 1e-5, "100 configurations, worst relative error " + fmt("%.2e", worst) + " (limit 1e-5)"};
}

// ---------------------------------------------------------------------------------
// 4. Fusion rules and the depth-ordering invariant.

ViewFrame pixel_frame() { return make_frame(Vec3(0, 0, -1), Vec3::Zero(), 8.0, 16, -20.0, 20.0); }

MapSet constant_layer(const ViewFrame& front, bool back, double t, const Vec3& world_normal) {
  const ViewFrame frame = back ? opposite_frame(front) : front;
  MapSet m = MapSet::background(frame);
  const double d = back ? -t - 2.0 * front.near : t;
  for (std::size_t i = 0; i < m.pixel_count(); ++i) m.set(i, static_cast<float>(d), frame.to_view(world_normal));
  return m;
}

std::size_t ordering_violations(const OrientedPointCloud& cloud, const ViewFrame& f) {
  std::vector<double> front_t(f.pixel_count(), std::nan(""));
  for (const auto& p : cloud.points) {
    if (p.tag == SourceTag::front) front_t[p.pixel] = f.depth_of(p.position);
  }
  std::size_t bad = 0;
  for (const auto& p : cloud.points) {
    if (p.tag == SourceTag::back && !std::isnan(front_t[p.pixel]) && f.depth_of(p.position) < front_t[p.pixel]) ++bad;
  }
  return bad;
}

Outcome fusion_rules() {
  std::vector<std::string> failed;
  const ViewFrame f = pixel_frame();
  const Vec3 toward = f.toward_viewer();
  const Vec3 away = f.direction;
  const auto count_tag = [](const OrientedPointCloud& c, SourceTag tag) {
    return static_cast<std::size_t>(std::count_if(c.points.begin(), c.points.end(), [&](const auto& p) { return p.tag == tag; }));
  };
  {  // rule 3
    const auto cloud = fuse(constant_layer(f, false, 10.0, toward), std::nullopt, constant_layer(f, true, 10.8, away));
    bool ok = count_tag(cloud, SourceTag::back) == f.pixel_count();
    for (const auto& p : cloud.points) {
      if (p.tag == SourceTag::back) ok = ok && p.position == f.pixel_center(p.pixel % 16, p.pixel / 16, 12.0);
    }
    if (!ok) failed.push_back("rule3");
  }
  {  // rule 1
    MapSet refl = constant_layer(f, false, 15.0, away);
    refl.set(refl.index(7, 7), 9.0f, f.to_view(away));
    FusionStats st;
    fuse(constant_layer(f, false, 10.0, toward), refl, constant_layer(f, true, 18.0, away), {}, &st);
    if (st.culled_reflected != 1) failed.push_back("rule1");
  }
  {  // rule 2
    FusionStats st;
    const auto cloud = fuse(constant_layer(f, false, 8.0, toward), constant_layer(f, false, 12.0, away),
                            constant_layer(f, true, 11.0, away), {}, &st);
    if (st.culled_back_reflected != f.pixel_count() || count_tag(cloud, SourceTag::back) != 0) failed.push_back("rule2");
  }
  {  // outliers
    MapSet plane = constant_layer(f, false, 20.0, toward);
    MapSet spike = plane;
    spike.depth[spike.index(5, 5)] = 30.0f;
    MapSet three = spike;
    three.depth[three.index(6, 5)] = 27.0f;
    if (remove_outliers(plane, 4.0).defined_count() != plane.pixel_count()) failed.push_back("smooth");
    if (remove_outliers(spike, 4.0).defined(spike.index(5, 5))) failed.push_back("spike");
    if (!remove_outliers(three, 4.0).defined(three.index(5, 5))) failed.push_back("all-four");
  }
  // Depth ordering over oracle and heuristic runs on both corpora.
  std::size_t runs = 0, violations = 0;
  auto corpus = test::closed_corpus();
  for (auto& c : test::chair_corpus()) corpus.push_back(std::move(c));
  const SymmetryPlane yz = SymmetryPlane::from_normal_offset(Vec3::UnitX(), 0.0);
  for (const auto& c : corpus) {
    const auto mesh = std::make_shared<const TriangleMesh>(normalize_mesh(c.mesh).mesh);
    const MapSet front = render_maps(*mesh, fit_frame(*mesh, direction_from_angles(30, 20), 137));
    const MapSet reflected = reflect_maps(front, yz);
    for (const auto& spec : {BackPredictorSpec::oracle(mesh), BackPredictorSpec::heuristic()}) {
      const MapSet back = predict_back(spec, {front, reflected});
      violations += ordering_violations(fuse(front, reflected, back), front.frame);
      violations += ordering_violations(fuse(front, std::nullopt, back), front.frame);
      runs += 2;
    }
  }
  std::ostringstream d;
  d << "rule examples " << (failed.empty() ? "exact" : "FAILED:");
  for (const auto& s : failed) d << ' ' << s;
  d << ", depth-ordering violations " << violations << " over " << runs << " fusions";
  return {failed.empty() && violations == 0, d.str()};
}

// ---------------------------------------------------------------------------------
// 5. Poisson oracle.

Outcome poisson_oracle() {
  const auto cloud = test::sphere_cloud(Vec3::Zero(), 1.0, 10000, 5);
  ReconParams p;
  p.grid_resolution = 64;
  const TriangleMesh m64 = reconstruct(cloud, p);
  const double cell = ReconGrid::fit(cloud, 64).cell_size();
  double dev = 0.0;
  for (const Vec3& v : m64.vertices) dev = std::max(dev, std::abs(v.norm() - 1.0));
  const TriangleMesh truth = test::uv_sphere(Vec3::Zero(), 1.0, 256, 512);
  const double md64 = mesh_distance_md(m64, truth, 100000, 1);
  p.grid_resolution = 128;
  const double md128 = mesh_distance_md(reconstruct(cloud, p), truth, 100000, 1);

  const TriangleMesh torus = test::torus(Vec3::Zero(), 1.0, 0.4, 128, 64);
  OrientedPointCloud tc;
  for (const auto& s : sample_surface(torus, 20000, 3)) tc.points.push_back({s.position, s.normal, SourceTag::front, -1});
  p.grid_resolution = 64;
  const long chi = test::euler_characteristic(reconstruct(tc, p));

  const double ratio = md64 / md128;
  std::ostringstream d;
  d << "max deviation " << fmt("%.3f", dev / cell) << " cells (limit 1), MD 64->128 ratio " << fmt("%.2f", ratio)
    << " (limit 1.5), torus Euler characteristic " << chi;
  return {dev <= cell && ratio >= 1.5 && chi == 0, d.str()};
}

// ---------------------------------------------------------------------------------
// 6 and 9. End-to-end oracle pipeline and determinism.

struct EndToEnd {
  std::vector<double> md;
  std::vector<std::vector<std::uint64_t>> hashes;  // per model: map and cloud artifacts
  std::size_t failures = 0;
};

EndToEnd run_oracle_corpus(const fs::path& root) {
  auto corpus = test::chair_corpus();
  for (auto& c : test::closed_corpus()) corpus.push_back(std::move(c));
  EndToEnd out;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const fs::path dir = root / (std::to_string(i) + "_" + corpus[i].name);
    fs::create_directories(dir);
    save_obj(corpus[i].mesh, dir / "input.obj");
    const PipelineConfig cfg = make_config({{"symmetry.mode", "given"},
                                            {"symmetry.plane", "1 0 0 0"},
                                            {"predictor.kind", "oracle"},
                                            {"seed", std::to_string(100 + i)},
                                            {"output_dir", (dir / "out").string()}});
    try {
      const PipelineResult r = run_pipeline({dir / "input.obj", std::nullopt}, cfg);
      out.md.push_back(r.report ? r.report->md : std::numeric_limits<double>::infinity());
      std::vector<std::uint64_t> h;
      for (const char* a : {artifact::front, artifact::reflected, artifact::back, artifact::cloud, artifact::plane}) {
        h.push_back(fs::exists(dir / "out" / a) ? file_hash(dir / "out" / a) : 0);
      }
      out.hashes.push_back(h);
    } catch (const std::exception& e) {
      std::fprintf(stderr, "  %s: %s\n", corpus[i].name.c_str(), e.what());
      ++out.failures;
      out.md.push_back(std::numeric_limits<double>::infinity());
      out.hashes.push_back({});
    }
  }
  return out;
}

EndToEnd first_run;

Outcome end_to_end() {
  const fs::path root = work_dir() / "e2e_a";
  fs::remove_all(root);
  first_run = run_oracle_corpus(root);
  const auto worst_of = [](auto begin, auto end) { return *std::max_element(begin, end); };
  const double chairs = worst_of(first_run.md.begin(), first_run.md.begin() + 20);
  const double closed = worst_of(first_run.md.begin() + 20, first_run.md.end());
  double mean = 0.0;
  for (double v : first_run.md) mean += v;
  mean /= static_cast<double>(first_run.md.size());
  std::ostringstream d;
  d << first_run.md.size() << " meshes, worst MD " << fmt("%.5f", chairs) << " (chairs) / " << fmt("%.5f", closed)
    << " (closed shapes), mean " << fmt("%.5f", mean) << " (limit 0.03), failures " << first_run.failures;
  return {chairs <= 0.03 && closed <= 0.03 && first_run.failures == 0, d.str()};
}

Outcome determinism() {
  const fs::path root = work_dir() / "e2e_b";
  fs::remove_all(root);
  const EndToEnd second = run_oracle_corpus(root);
  std::size_t compared = 0, differ = 0;
  for (std::size_t i = 0; i < first_run.hashes.size(); ++i) {
    if (first_run.hashes[i].empty() || second.hashes[i].size() != first_run.hashes[i].size()) {
      ++differ;
      continue;
    }
    for (std::size_t k = 0; k < first_run.hashes[i].size(); ++k) {
      ++compared;
      differ += first_run.hashes[i][k] != second.hashes[i][k] ? 1 : 0;
    }
  }
  std::ostringstream d;
  d << compared << " F2BM/cloud/plane artifacts compared, " << differ << " differ";
  return {differ == 0 && compared > 0, d.str()};
}

// ---------------------------------------------------------------------------------
// 7. Reflected maps help the heuristic predictor.

Outcome ablation() {
  const fs::path root = work_dir() / "ablation";
  fs::remove_all(root);
  std::size_t models = 0, better = 0, score_better = 0, md_better = 0;
  const auto chairs = test::chair_corpus();
  for (std::size_t i = 0; i < chairs.size(); ++i) {
    const fs::path dir = root / std::to_string(i);
    fs::create_directories(dir);
    save_obj(chairs[i].mesh, dir / "input.obj");
    const auto run = [&](bool with_symmetry) {
      KeyValues kv{{"predictor.kind", "heuristic"}, {"output_dir", (dir / (with_symmetry ? "with" : "without")).string()}};
      if (with_symmetry) {
        kv["symmetry.mode"] = "given";
        kv["symmetry.plane"] = "1 0 0 0";
      } else {
        kv["symmetry.mode"] = "none";
      }
      return run_pipeline({dir / "input.obj", std::nullopt}, make_config(kv));
    };
    const PipelineResult with = run(true);
    const PipelineResult without = run(false);
    const MapSet truth = render_back_truth(*with.truth, with.front.frame);
    const double s_with = similarity_score(with.back, truth);
    const double s_without = similarity_score(without.back, truth);
    const bool score_ok = s_with <= s_without;
    const bool md_ok = with.report->md <= without.report->md;
    score_better += score_ok ? 1 : 0;
    md_better += md_ok ? 1 : 0;
    better += score_ok && md_ok ? 1 : 0;
    ++models;
  }
  const double share = static_cast<double>(better) / static_cast<double>(models);
  std::ostringstream d;
  d << "with-symmetry no worse on " << better << "/" << models << " models (" << fmt("%.0f%%", 100 * share)
    << ", limit 80%); score alone " << score_better << ", MD alone " << md_better;
  return {share >= 0.8, d.str()};
}

// ---------------------------------------------------------------------------------
// 8. Metric sanity.

// Mean distance from the unit sphere to the unit sphere offset by t (Simpson's rule).
double sphere_offset_distance(double t) {
  const int n = 20000;
  const double h = 2.0 / n;
  double sum = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double u = -1.0 + i * h;
    const double f = std::abs(std::sqrt(1.0 + t * t - 2.0 * t * u) - 1.0);
    sum += f * (i == 0 || i == n ? 1.0 : (i % 2 ? 4.0 : 2.0));
  }
  return 0.5 * sum * h / 3.0;
}

Outcome metric_sanity() {
  const TriangleMesh s = test::uv_sphere(Vec3::Zero(), 1.0, 128, 256);
  const double self_md = mesh_distance_md(s, s, 100000, 1);
  std::vector<Vec3> a, b;
  for (const auto& p : sample_surface(s, 100000, 11)) a.push_back(p.position);
  for (const auto& p : sample_surface(s, 100000, 12)) b.push_back(p.position);
  const double floor = chamfer_l1_samples(a, b);
  const double nc = normal_consistency(s, s, 100000, 2);
  const double t = 0.5;
  TriangleMesh moved = s;
  for (auto& v : moved.vertices) v.x() += t;
  const double cd = chamfer_l1(s, moved, 100000, 3);
  const double analytic = sphere_offset_distance(t);
  const double rel = std::abs(cd - analytic) / analytic;
  std::ostringstream d;
  d << "MD(A,A) " << fmt("%.1e", self_md) << ", CD floor " << fmt("%.5f", floor) << " (limit 0.01), NC(A,A) "
    << fmt("%.5f", nc) << ", translated-sphere CD " << fmt("%.5f", cd) << " vs analytic " << fmt("%.5f", analytic)
    << " (" << fmt("%.2f%%", 100 * rel) << ", limit 5%; offset t=" << fmt("%.2f", t) << ", CD/t " << fmt("%.3f", cd / t) << ")";
  return {self_md <= 1e-9 && floor <= 0.01 && nc >= 0.999 && rel <= 0.05, d.str()};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double budget_s;  // 0 = none stated
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {1, "silhouette alignment", 60, silhouette_alignment},
      {2, "symmetry recovery", 300, symmetry_recovery},
      {3, "gradient check", 0, gradient_check},
      {4, "fusion rules", 0, fusion_rules},
      {5, "poisson oracle", 120, poisson_oracle},
      {6, "end-to-end oracle pipeline", 600, end_to_end},
      {7, "ablation direction", 0, ablation},
      {8, "metric sanity", 0, metric_sanity},
      {9, "determinism", 0, determinism},
  };
  int failures = 0;
  for (const Criterion& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = c.budget_s <= 0 || secs <= c.budget_s;
    const bool pass = o.pass && in_time;
    failures += pass ? 0 : 1;
    std::printf("criterion %d %s: %s - %s [%.1f s%s]\n", c.id, c.name, pass ? "PASS" : "FAIL", o.detail.c_str(), secs,
                c.budget_s > 0 ? (in_time ? " within budget" : " OVER BUDGET") : "");
    std::fflush(stdout);
  }
  fs::remove_all(work_dir());
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
