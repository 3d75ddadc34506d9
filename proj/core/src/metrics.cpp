#include "f2b/metrics.hpp"

#include <cmath>
#include <sstream>

#include "f2b/errors.hpp"
#include "f2b/keyvalue.hpp"
#include "f2b/random.hpp"
#include "f2b/spatial.hpp"

namespace f2b {
namespace {

void require_nonempty(const TriangleMesh& a, const TriangleMesh& b) {
  if (a.empty() || b.empty() || !(a.surface_area() > 0.0) || !(b.surface_area() > 0.0)) {
    throw EmptyInputError("metric needs two meshes with surface area");
  }
}

double mean_surface_distance(const std::vector<SurfaceSample>& samples, const TriangleBvh& bvh) {
  double sum = 0.0;
  for (const SurfaceSample& s : samples) sum += bvh.closest(s.position).distance;
  return sum / static_cast<double>(samples.size());
}

std::vector<Vec3> positions(const std::vector<SurfaceSample>& samples) {
  std::vector<Vec3> out;
  out.reserve(samples.size());
  for (const SurfaceSample& s : samples) out.push_back(s.position);
  return out;
}

double mean_point_distance(const std::vector<Vec3>& from, const PointKdTree& to) {
  double sum = 0.0;
  for (const Vec3& p : from) sum += to.nearest(p)->distance;
  return sum / static_cast<double>(from.size());
}

double mean_abs_cos(const std::vector<SurfaceSample>& from, const TriangleMesh& other, const TriangleBvh& bvh) {
  double sum = 0.0;
  for (const SurfaceSample& s : from) {
    const auto hit = bvh.closest(s.position);
    sum += std::abs(s.normal.dot(other.face_normal(hit.face)));
  }
  return sum / static_cast<double>(from.size());
}

}  // namespace

MeshDistance mesh_distance(const TriangleMesh& a, const TriangleMesh& b, std::size_t n, std::uint64_t seed) {
  require_nonempty(a, b);
  if (n == 0) throw ConfigError("sample count must be positive");
  const double diag = b.bounds().diagonal();
  if (!(diag > 0.0)) throw DegenerateGeometryError("reference mesh has zero diagonal");
  const TriangleBvh bvh_a(a), bvh_b(b);
  MeshDistance out;
  out.forward = mean_surface_distance(sample_surface(a, n, mix_seed(seed, 1)), bvh_b);
  out.backward = mean_surface_distance(sample_surface(b, n, mix_seed(seed, 2)), bvh_a);
  out.md = 0.5 * (out.forward + out.backward) / diag;
  out.md_max = std::max(out.forward, out.backward) / diag;
  return out;
}

double mesh_distance_md(const TriangleMesh& a, const TriangleMesh& b, std::size_t n, std::uint64_t seed) {
  return mesh_distance(a, b, n, seed).md;
}

double chamfer_l1(const TriangleMesh& a, const TriangleMesh& b, std::size_t n, std::uint64_t seed) {
  require_nonempty(a, b);
  if (n == 0) throw ConfigError("sample count must be positive");
  // Same stream on both sides: identical meshes give identical sample sets.
  return chamfer_l1_samples(positions(sample_surface(a, n, mix_seed(seed, 3))),
                            positions(sample_surface(b, n, mix_seed(seed, 3))));
}

double chamfer_l1_samples(const std::vector<Vec3>& a, const std::vector<Vec3>& b) {
  if (a.empty() || b.empty()) throw EmptyInputError("chamfer distance needs two non-empty sample sets");
  const PointKdTree ta(a), tb(b);
  return 0.5 * (mean_point_distance(a, tb) + mean_point_distance(b, ta));
}

double normal_consistency(const TriangleMesh& a, const TriangleMesh& b, std::size_t n, std::uint64_t seed) {
  require_nonempty(a, b);
  if (n == 0) throw ConfigError("sample count must be positive");
  const TriangleBvh bvh_a(a), bvh_b(b);
  const double ab = mean_abs_cos(sample_surface(a, n, mix_seed(seed, 5)), b, bvh_b);
  const double ba = mean_abs_cos(sample_surface(b, n, mix_seed(seed, 6)), a, bvh_a);
  return 0.5 * (ab + ba);
}

EvalReport evaluate(const TriangleMesh& result, const TriangleMesh& truth, std::size_t n, std::uint64_t seed) {
  require_nonempty(result, truth);
  const NormalizedMesh gt = normalize_mesh(truth);
  const TriangleMesh res = transformed(result, gt.transform);
  const MeshDistance md = mesh_distance(res, gt.mesh, n, seed);
  EvalReport report;
  report.md = md.md;
  report.md_max = md.md_max;
  report.cd = chamfer_l1(res, gt.mesh, n, seed);
  report.cd_x10 = 10.0 * report.cd;
  report.normal_consistency = normal_consistency(res, gt.mesh, n, seed);
  report.samples = n;
  report.seed = seed;
  return report;
}

std::string format_report(const EvalReport& r) {
  std::ostringstream out;
  out << "md=" << format_exact(r.md) << '\n'
      << "md_max=" << format_exact(r.md_max) << '\n'
      << "cd=" << format_exact(r.cd) << '\n'
      << "cd_x10=" << format_exact(r.cd_x10) << '\n'
      << "normal_consistency=" << format_exact(r.normal_consistency) << '\n'
      << "samples=" << r.samples << '\n'
      << "seed=" << r.seed << '\n';
  return out.str();
}

std::string report_csv_header() { return "md,md_max,cd,cd_x10,normal_consistency,samples,seed"; }

std::string report_csv_row(const EvalReport& r) {
  std::ostringstream out;
  out << format_exact(r.md) << ',' << format_exact(r.md_max) << ',' << format_exact(r.cd) << ','
      << format_exact(r.cd_x10) << ',' << format_exact(r.normal_consistency) << ',' << r.samples << ',' << r.seed;
  return out.str();
}

}  // namespace f2b
