#include <benchmark/benchmark.h>

#include <memory>

#include "f2b/backpred.hpp"
#include "f2b/fusion.hpp"
#include "f2b/metrics.hpp"
#include "f2b/poisson.hpp"
#include "f2b/render.hpp"
#include "f2b/symmetry.hpp"
#include "f2b_test/shapes.hpp"

using namespace f2b;

namespace {

const TriangleMesh& chair() {
  static const TriangleMesh m = normalize_mesh(test::chair_corpus().front().mesh).mesh;
  return m;
}

MapSet front_maps(int resolution) { return render_maps(chair(), fit_frame(chair(), direction_from_angles(30, 20), resolution)); }

void BM_Render(benchmark::State& state) {
  const ViewFrame f = fit_frame(chair(), direction_from_angles(30, 20), static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(render_maps(chair(), f));
}
BENCHMARK(BM_Render)->Arg(137)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_DetectSymmetry(benchmark::State& state) {
  const MapSet maps = front_maps(137);
  SymmetryConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(detect_symmetry(maps, cfg));
}
BENCHMARK(BM_DetectSymmetry)->Unit(benchmark::kMillisecond);

void BM_Fuse(benchmark::State& state) {
  const MapSet front = front_maps(static_cast<int>(state.range(0)));
  const MapSet reflected = reflect_maps(front, SymmetryPlane::from_normal_offset(Vec3::UnitX(), 0.0));
  const MapSet back = render_back_truth(chair(), front.frame);
  for (auto _ : state) benchmark::DoNotOptimize(fuse(front, reflected, back));
}
BENCHMARK(BM_Fuse)->Arg(137)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_Reconstruct(benchmark::State& state) {
  const auto cloud = test::sphere_cloud(Vec3::Zero(), 1.0, 20000, 5);
  ReconParams p;
  p.grid_resolution = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(reconstruct(cloud, p));
}
BENCHMARK(BM_Reconstruct)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_ChamferL1(benchmark::State& state) {
  const TriangleMesh s = test::uv_sphere(Vec3::Zero(), 1.0, 64, 128);
  for (auto _ : state) benchmark::DoNotOptimize(chamfer_l1(s, chair(), static_cast<std::size_t>(state.range(0)), 1));
}
BENCHMARK(BM_ChamferL1)->Arg(10000)->Arg(100000)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
