#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "f2b/geometry.hpp"

namespace f2b {

/// Axis-aligned bounding volume hierarchy over a mesh's triangles. Holds a copy of
/// the triangle corners, so it stays valid after the mesh goes away.
class TriangleBvh {
 public:
  struct Closest {
    Vec3 point = Vec3::Zero();
    double distance = std::numeric_limits<double>::infinity();
    std::uint32_t face = 0;
  };

  explicit TriangleBvh(const TriangleMesh& mesh);

  /// Exact nearest point on the surface.
  Closest closest(const Vec3& query) const;

  /// True if the ray origin + t * dir hits any triangle other than `skip_face` for
  /// t in (t_min, t_max).
  bool occluded(const Vec3& origin, const Vec3& dir, double t_min, double t_max,
                std::optional<std::uint32_t> skip_face = std::nullopt) const;

  std::size_t size() const { return corners_.size(); }

 private:
  struct Node {
    Eigen::Vector3d lo, hi;
    std::uint32_t first = 0;  // leaf: first primitive; inner: right child
    std::uint32_t count = 0;  // 0 for inner nodes
  };

  std::uint32_t build(std::uint32_t begin, std::uint32_t end);

  std::vector<std::array<Vec3, 3>> corners_;
  std::vector<std::uint32_t> order_;
  std::vector<Node> nodes_;
};

/// Static 3D k-d tree for nearest-neighbour queries.
class PointKdTree {
 public:
  struct Nearest {
    std::uint32_t index = 0;
    double distance = std::numeric_limits<double>::infinity();
  };

  PointKdTree() = default;
  explicit PointKdTree(std::vector<Vec3> points);

  /// Nearest point within `max_distance`; nullopt when none.
  std::optional<Nearest> nearest(const Vec3& query,
                                 double max_distance = std::numeric_limits<double>::infinity()) const;

  std::size_t size() const { return points_.size(); }
  const Vec3& point(std::uint32_t index) const { return points_[index]; }

 private:
  struct Node {
    std::uint32_t point = 0;
    std::int32_t left = -1;
    std::int32_t right = -1;
    std::uint8_t axis = 0;
  };

  std::int32_t build(std::uint32_t begin, std::uint32_t end, int depth);
  void search(std::int32_t node, const Vec3& q, Nearest& best, double& best_sq) const;

  std::vector<Vec3> points_;
  std::vector<std::uint32_t> order_;
  std::vector<Node> nodes_;
  std::int32_t root_ = -1;
};

}  // namespace f2b
