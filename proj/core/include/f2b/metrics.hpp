#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "f2b/geometry.hpp"

namespace f2b {

inline constexpr std::size_t kDefaultMetricSamples = 100000;

struct MeshDistance {
  /// Mean of the two one-sided means, in units of the reference diagonal.
  double md = 0.0;
  /// Larger one-sided mean, same units.
  double md_max = 0.0;
  double forward = 0.0;   // a -> b, raw units
  double backward = 0.0;  // b -> a, raw units
};

/// Exact sample-to-triangle distances between `a` and reference `b`, normalized by the
/// bounding-box diagonal of `b`. Throws EmptyInputError for an empty mesh.
MeshDistance mesh_distance(const TriangleMesh& a, const TriangleMesh& b, std::size_t n, std::uint64_t seed);
double mesh_distance_md(const TriangleMesh& a, const TriangleMesh& b, std::size_t n, std::uint64_t seed);

/// Half the sum of the two mean nearest-sample Euclidean distances between n samples
/// drawn from each mesh, in the meshes' own units.
double chamfer_l1(const TriangleMesh& a, const TriangleMesh& b, std::size_t n = kDefaultMetricSamples,
                  std::uint64_t seed = 0);

/// Chamfer-L1 between two explicit sample sets.
double chamfer_l1_samples(const std::vector<Vec3>& a, const std::vector<Vec3>& b);

/// Mean |cos| between each sample's face normal and the normal of the closest triangle
/// on the other mesh, averaged over both directions.
double normal_consistency(const TriangleMesh& a, const TriangleMesh& b, std::size_t n, std::uint64_t seed);

struct EvalReport {
  double md = 0.0;
  double md_max = 0.0;
  double cd = 0.0;
  double cd_x10 = 0.0;
  double normal_consistency = 0.0;
  std::size_t samples = 0;
  std::uint64_t seed = 0;
};

/// All metrics with both meshes first mapped by the normalization of `truth`
/// (bounding box centered, diagonal 1).
EvalReport evaluate(const TriangleMesh& result, const TriangleMesh& truth, std::size_t n = kDefaultMetricSamples,
                    std::uint64_t seed = 0);

/// key=value lines.
std::string format_report(const EvalReport& report);
std::string report_csv_header();
std::string report_csv_row(const EvalReport& report);

}  // namespace f2b
