#pragma once

#include <cstdint>

#include "f2b/geometry.hpp"

namespace f2b {

/// Orthographic camera with a square pixel lattice.
///
/// World <-> pixel mapping for pixel column i and row j (row 0 at the top):
///
///   position = center + s * (i + 0.5 - R/2) * pixel_size * right
///                     + (R/2 - j - 0.5) * pixel_size * up
///                     + (near + depth) * direction
///
/// where R is the resolution and s = -1 when `mirrored_columns` is set, +1
/// otherwise. The opposite frame flips `direction` and `right` and toggles
/// `mirrored_columns`, so pixel (i, j) sees the same world-space ray column in
/// both frames and front/back silhouettes align without flipping images.
struct ViewFrame {
  Vec3 direction{0.0, 0.0, -1.0};  // look direction, away from the viewer
  Vec3 right{1.0, 0.0, 0.0};
  Vec3 up{0.0, 1.0, 0.0};
  Vec3 center = Vec3::Zero();
  double half_width = 1.0;
  int resolution = 137;
  /// Depth range as signed offsets from `center` along `direction`.
  double near = -1.0;
  double far = 1.0;
  bool mirrored_columns = false;

  double pixel_size() const { return 2.0 * half_width / resolution; }
  double depth_range() const { return far - near; }
  std::size_t pixel_count() const {
    return static_cast<std::size_t>(resolution) * static_cast<std::size_t>(resolution);
  }
  Vec3 toward_viewer() const { return -direction; }
  double column_sign() const { return mirrored_columns ? -1.0 : 1.0; }

  /// Depth of `p` measured from the near plane along `direction`.
  double depth_of(const Vec3& p) const { return (p - center).dot(direction) - near; }
  /// Continuous image coordinates (x = column, y = row); pixel centers sit at +0.5.
  Eigen::Vector2d project(const Vec3& p) const;
  Vec3 pixel_point(double col, double row, double depth) const;
  /// World position of pixel (i, j)'s center at the given depth.
  Vec3 pixel_center(int i, int j, double depth) const {
    return pixel_point(i + 0.5, j + 0.5, depth);
  }

  /// World vector <-> view coordinates (right, up, toward viewer).
  Vec3 to_view(const Vec3& world) const {
    return {world.dot(right), world.dot(up), world.dot(toward_viewer())};
  }
  Vec3 to_world(const Vec3& view) const {
    return view.x() * right + view.y() * up + view.z() * toward_viewer();
  }

  /// Throws DegenerateGeometryError unless {right, up, direction} is an orthonormal
  /// right-handed frame within 1e-9, half_width > 0, resolution >= 16 and near < far.
  void validate() const;

  friend bool operator==(const ViewFrame&, const ViewFrame&) = default;
};

/// Frame looking along `direction` with image-up as close to `up_hint` as possible.
ViewFrame make_frame(const Vec3& direction, const Vec3& center, double half_width, int resolution,
                     double near, double far, const Vec3& up_hint = Vec3::UnitY());

/// Frame centered on the mesh bounding box with half_width = 0.5 * diagonal * 1.05 and a
/// depth range enclosing the bounding sphere with the same margin.
ViewFrame fit_frame(const TriangleMesh& mesh, const Vec3& direction, int resolution,
                    const Vec3& up_hint = Vec3::UnitY());

ViewFrame opposite_frame(const ViewFrame& frame);

/// Look direction for a camera placed at the given azimuth/elevation (degrees) with y up.
Vec3 direction_from_angles(double azimuth_deg, double elevation_deg);

/// Geometric comparison used to reject maps rendered from different cameras.
bool same_lattice(const ViewFrame& a, const ViewFrame& b, double tol = 1e-9);

}  // namespace f2b
