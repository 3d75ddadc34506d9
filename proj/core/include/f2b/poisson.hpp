#pragma once

#include <vector>

#include "f2b/maps.hpp"

namespace f2b {

/// Regular node lattice over a cube: (resolution + 1)^3 nodes, node (i, j, k) at
/// origin + cell_size * (i, j, k). Boundary nodes carry the Dirichlet value 0.
struct ReconGrid {
  int resolution = 128;
  Vec3 origin = Vec3::Zero();
  double side = 1.0;
  /// Splatted normals per node, density normalized.
  std::vector<Vec3> field;
  /// Raw trilinear weight per node (sums to the point count).
  std::vector<double> weight;
  /// Indicator values per node.
  std::vector<double> chi;

  /// Empty fields over the given cube. Throws ConfigError for resolution < 32 or side <= 0.
  ReconGrid(int resolution, const Vec3& origin, double side);
  ReconGrid() : ReconGrid(128, Vec3::Zero(), 1.0) {}

  /// Cube centered on the cloud's bounding box with side 1.2 times its largest extent.
  static ReconGrid fit(const OrientedPointCloud& cloud, int resolution);

  int nodes_per_side() const { return resolution + 1; }
  std::size_t node_count() const;
  double cell_size() const { return side / resolution; }
  std::size_t index(int i, int j, int k) const {
    const auto n = static_cast<std::size_t>(resolution + 1);
    return static_cast<std::size_t>(i) + n * (static_cast<std::size_t>(j) + n * static_cast<std::size_t>(k));
  }
  Vec3 node_position(int i, int j, int k) const { return origin + cell_size() * Vec3(i, j, k); }
  bool contains(const Vec3& p) const;
};

struct ReconParams {
  int grid_resolution = 128;
  /// Screening (interpolation) weight.
  double screen_weight = 4.0;
  /// Relative residual target for each linear solve.
  double tolerance = 1e-7;
  int max_iterations = 2000;

  /// Throws ConfigError on out-of-range values.
  void validate() const;
};

struct SolveReport {
  int iterations = 0;
  double residual = 0.0;
  /// Relative residual after every iteration of the final (screened) solve.
  std::vector<double> residual_history;
  /// Value the screening term pulls the samples toward.
  double target = 0.0;
};

/// Trilinear splat of the cloud's normals; each point's contribution is divided by the
/// number of points sharing its cell. Throws EmptyInputError for an empty cloud and
/// ShapeError for points outside the grid.
void splat_normals(const OrientedPointCloud& cloud, ReconGrid& grid);

/// Solves the Dirichlet problem  L chi + beta S'S chi = b + beta S' t  for chi, with L the
/// 7-point graph Laplacian, b the negative central-difference divergence of the field,
/// S trilinear sample interpolation and t the sample mean of the unscreened solution.
/// Throws SolverError when a solve misses the tolerance.
void solve_indicator(ReconGrid& grid, const OrientedPointCloud& cloud, const ReconParams& params,
                     SolveReport* report = nullptr);

/// Density-weighted mean of chi at the sample positions.
double iso_level(const ReconGrid& grid, const OrientedPointCloud& cloud);

/// Marching-tetrahedra iso-surface at iso_level(); triangles face increasing chi.
/// Throws EmptySurfaceError when the level is not strictly inside the range of chi.
TriangleMesh extract_mesh(const ReconGrid& grid, const OrientedPointCloud& cloud);

/// Iso-surface of `chi` at `level` on the grid, without the level rule.
TriangleMesh extract_level(const ReconGrid& grid, double level);

TriangleMesh reconstruct(const OrientedPointCloud& cloud, const ReconParams& params = {},
                         SolveReport* report = nullptr);

}  // namespace f2b
