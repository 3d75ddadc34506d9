#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "f2b/maps.hpp"
#include "f2b/spatial.hpp"

namespace f2b {

/// Reflection plane {x : n(phi, theta) . x = offset} with
/// n = (sin theta cos phi, sin theta sin phi, cos theta).
///
/// (n, d) and (-n, -d) describe the same plane; the canonical representative has
/// offset >= 0, and for offset == 0 a normal in the upper half space
/// (z > 0, then y > 0, then x > 0 on ties).
struct SymmetryPlane {
  double phi = 0.0;
  double theta = 0.0;
  double offset = 0.0;

  /// Canonical plane through the given (not necessarily unit) normal and offset.
  static SymmetryPlane from_normal_offset(const Vec3& normal, double offset);

  Vec3 normal() const;
  SymmetryPlane canonical() const { return from_normal_offset(normal(), offset); }
  double signed_distance(const Vec3& p) const { return normal().dot(p) - offset; }
  Vec3 reflect_point(const Vec3& p) const;
  Vec3 reflect_direction(const Vec3& v) const;

  friend bool operator==(const SymmetryPlane&, const SymmetryPlane&) = default;
};

/// Distance between planes: sqrt(|n_a - s n_b|^2 / pi^2 + (d_a - s d_b)^2 / scale^2)
/// minimised over the sign s, so antipodal representatives coincide. `scale` is the
/// data's bounding-box diagonal.
double plane_distance(const SymmetryPlane& a, const SymmetryPlane& b, double scale);

/// Angle in radians between the two planes' normals, ignoring orientation.
double plane_angle(const SymmetryPlane& a, const SymmetryPlane& b);

inline constexpr double kDefaultNormalTolerance = 1.0471975511965976;  // 60 degrees

/// Bisector plane reflecting a onto b; nullopt for coincident points or when the
/// reflected normal of `a` is more than `max_normal_angle` away from b's normal.
std::optional<SymmetryPlane> pair_plane(const OrientedPoint& a, const OrientedPoint& b,
                                        double max_normal_angle = kDefaultNormalTolerance);

struct PlaneVote {
  SymmetryPlane plane;
  double weight = 1.0;
};

/// Planes from `n_pairs` seeded random point pairs; invalid pairs produce no vote.
std::vector<PlaneVote> collect_votes(const OrientedPointCloud& points, std::size_t n_pairs, std::uint64_t seed,
                                     double max_normal_angle = kDefaultNormalTolerance);

struct PlaneCluster {
  SymmetryPlane center;
  double score = 0.0;  // total vote weight in the center's Voronoi cell
};

/// Mean-shift (Epanechnikov kernel) over plane space under plane_distance, modes
/// merged within bandwidth / 2, each vote then assigned to its nearest center.
/// Sorted by descending score.
std::vector<PlaneCluster> cluster_planes(std::span<const PlaneVote> votes, double bandwidth, double scale);

struct ConstraintCheck {
  double violation = 0.0;
  bool pass = true;
};

/// Euclidean distance (pixels) from each pixel center to the nearest silhouette pixel.
std::vector<double> distance_to_silhouette(const std::vector<std::uint8_t>& silhouette, int resolution);

/// Share of reflected front points landing at least `px_slack` pixels outside the silhouette.
ConstraintCheck check_visual_hull(const SymmetryPlane& plane, const MapSet& maps, double px_slack,
                                  double frac_limit);

/// Share of reflected front points landing on the silhouette more than one pixel
/// size in front of the observed depth.
ConstraintCheck check_visibility(const SymmetryPlane& plane, const MapSet& maps, double frac_limit);

/// Point/target pair used by the reflection objective.
struct Correspondence {
  Vec3 point;
  Vec3 target;
};

/// sum ||reflect(point) - target||^2; optionally writes d/d(phi, theta, offset).
double reflection_objective(const SymmetryPlane& plane, std::span<const Correspondence> pairs,
                            Vec3* gradient = nullptr);

struct IcpParams {
  int max_iterations = 400;
  double max_distance_px = 4.0;
  double max_normal_angle = kDefaultNormalTolerance;
  double tolerance = 1e-6;
  int max_line_search_steps = 200;
  /// World size of one pixel; converts max_distance_px.
  double pixel_size = 1.0;
};

struct IcpResult {
  SymmetryPlane plane;
  int iterations = 0;
  bool converged = false;
  bool no_correspondences = false;
  /// False if any accepted descent step increased the objective.
  bool monotone = true;
  std::size_t correspondences = 0;
  double final_objective = 0.0;
  std::size_t accepted_steps = 0;
};

/// Correspondences for the current plane after distance / normal pruning.
std::vector<Correspondence> reflection_correspondences(const OrientedPointCloud& points, const PointKdTree& tree,
                                                       const SymmetryPlane& plane, double max_distance,
                                                       double max_normal_angle);

IcpResult refine_plane_icp(const OrientedPointCloud& points, const SymmetryPlane& initial, const IcpParams& params);

/// Front maps reflected across `plane`: per pixel the farthest reflected point that does
/// not sit in front of the observed surface.
MapSet reflect_maps(const MapSet& maps, const SymmetryPlane& plane);

struct SymmetryConfig {
  int rounds = 20;
  std::size_t pairs_per_round = 8000;
  double bandwidth = 0.15;
  double hull_px = 5.0;
  double hull_frac = 0.05;
  double visibility_frac = 0.15;
  double coverage_min = 0.40;
  /// Multiplier turning the tight thresholds into the candidate pre-filter.
  double loose_factor = 2.0;
  double max_normal_angle = kDefaultNormalTolerance;
  IcpParams icp{};
  std::uint64_t seed = 1;
};

struct SymmetryVerdict {
  std::optional<SymmetryPlane> plane;
  std::optional<SymmetryPlane> initial_plane;
  double initial_score = 0.0;
  double coverage = 0.0;
  double hull_violation = 0.0;
  double visibility_violation = 0.0;
  std::size_t candidates = 0;
  IcpResult icp{};

  bool symmetric() const { return plane.has_value(); }
};

SymmetryVerdict detect_symmetry(const MapSet& maps, const SymmetryConfig& config);

/// Reflected silhouette pixels over front silhouette pixels.
double reflected_coverage(const MapSet& front, const MapSet& reflected);

}  // namespace f2b
