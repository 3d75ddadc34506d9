#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace f2b {

using Vec3 = Eigen::Vector3d;
using Triangle = std::array<std::uint32_t, 3>;

/// Triangles whose area is at or below this are dropped on construction.
inline constexpr double kDegenerateArea = 1e-12;

struct BoundingBox {
  Vec3 min = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 max = Vec3::Constant(-std::numeric_limits<double>::infinity());

  static BoundingBox of(std::span<const Vec3> points);

  void extend(const Vec3& p) {
    min = min.cwiseMin(p);
    max = max.cwiseMax(p);
  }
  bool valid() const { return (min.array() <= max.array()).all(); }
  Vec3 center() const { return 0.5 * (min + max); }
  Vec3 extent() const { return max - min; }
  double diagonal() const { return valid() ? (max - min).norm() : 0.0; }
};

/// Indexed triangle soup. Open and non-manifold inputs are kept as given.
struct TriangleMesh {
  std::vector<Vec3> vertices;
  std::vector<Triangle> triangles;
  /// Either empty or one unit normal per vertex.
  std::vector<Vec3> normals;

  bool empty() const { return triangles.empty(); }
  std::size_t vertex_count() const { return vertices.size(); }
  std::size_t triangle_count() const { return triangles.size(); }

  /// Unnormalized face normal (cross product of the CCW edges); length is twice the area.
  Vec3 face_cross(std::size_t face) const;
  /// Unit face normal from counter-clockwise winding; zero for degenerate faces.
  Vec3 face_normal(std::size_t face) const;
  double face_area(std::size_t face) const;
  double surface_area() const;
  BoundingBox bounds() const;
};

/// Builds a mesh, validating indices (throws ShapeError) and dropping degenerate faces.
TriangleMesh make_mesh(std::vector<Vec3> vertices, std::vector<Triangle> triangles,
                       std::vector<Vec3> normals = {});

/// Uniform scale followed by translation: x -> scale * x + translation.
struct Similarity {
  double scale = 1.0;
  Vec3 translation = Vec3::Zero();

  Vec3 apply(const Vec3& p) const { return scale * p + translation; }
  Vec3 invert(const Vec3& p) const { return (p - translation) / scale; }
  Similarity inverse() const { return {1.0 / scale, -translation / scale}; }
};

TriangleMesh transformed(const TriangleMesh& mesh, const Similarity& transform);

struct NormalizedMesh {
  TriangleMesh mesh;
  /// Maps input coordinates to normalized coordinates.
  Similarity transform;
};

/// Centers the bounding box at the origin and scales its diagonal to 1.
NormalizedMesh normalize_mesh(const TriangleMesh& mesh);

struct SurfaceSample {
  Vec3 position;
  Vec3 normal;
  std::uint32_t face = 0;
};

/// Area-uniform samples; identical output for identical (mesh, n, seed).
std::vector<SurfaceSample> sample_surface(const TriangleMesh& mesh, std::size_t n, std::uint64_t seed);

/// Closest point to `p` on triangle (a, b, c).
Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c);

/// Rigid rotation + translation applied to positions and normals.
TriangleMesh rigid_transformed(const TriangleMesh& mesh, const Eigen::Matrix3d& rotation,
                               const Vec3& translation);

}  // namespace f2b
