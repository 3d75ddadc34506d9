#include "f2b/view_frame.hpp"

#include <cmath>
#include <numbers>

#include "f2b/errors.hpp"

namespace f2b {

Eigen::Vector2d ViewFrame::project(const Vec3& p) const {
  const Vec3 rel = p - center;
  const double ps = pixel_size();
  const double half = 0.5 * resolution;
  return {column_sign() * rel.dot(right) / ps + half, half - rel.dot(up) / ps};
}

Vec3 ViewFrame::pixel_point(double col, double row, double depth) const {
  const double ps = pixel_size();
  const double half = 0.5 * resolution;
  return center + (column_sign() * (col - half) * ps) * right + ((half - row) * ps) * up +
         (near + depth) * direction;
}

void ViewFrame::validate() const {
  constexpr double tol = 1e-9;
  const bool unit = std::abs(direction.norm() - 1.0) < tol && std::abs(right.norm() - 1.0) < tol &&
                    std::abs(up.norm() - 1.0) < tol;
  const bool orthogonal = std::abs(direction.dot(right)) < tol && std::abs(direction.dot(up)) < tol &&
                          std::abs(right.dot(up)) < tol;
  const bool right_handed = (right.cross(up) + direction).norm() < tol;
  if (!unit || !orthogonal || !right_handed) {
    throw DegenerateGeometryError("view frame axes are not orthonormal and right-handed");
  }
  if (!(half_width > 0.0)) throw DegenerateGeometryError("view frame half_width must be positive");
  if (resolution < 16) throw DegenerateGeometryError("view frame resolution must be at least 16");
  if (!(near < far)) throw DegenerateGeometryError("view frame needs near < far");
}

ViewFrame make_frame(const Vec3& direction, const Vec3& center, double half_width, int resolution,
                     double near, double far, const Vec3& up_hint) {
  ViewFrame f;
  f.direction = direction.normalized();
  Vec3 hint = up_hint.normalized();
  if (std::abs(hint.dot(f.direction)) > 0.999) {
    hint = std::abs(f.direction.z()) < 0.9 ? Vec3::UnitZ() : Vec3::UnitX();
  }
  f.right = f.direction.cross(hint).normalized();
  f.up = f.right.cross(f.direction).normalized();
  f.center = center;
  f.half_width = half_width;
  f.resolution = resolution;
  f.near = near;
  f.far = far;
  f.validate();
  return f;
}

ViewFrame fit_frame(const TriangleMesh& mesh, const Vec3& direction, int resolution, const Vec3& up_hint) {
  const BoundingBox box = mesh.bounds();
  const double diag = box.diagonal();
  if (!(diag > 0.0)) throw DegenerateGeometryError("cannot fit a frame to a zero-size mesh");
  const double half = 0.5 * diag * 1.05;
  return make_frame(direction, box.center(), half, resolution, -half, half, up_hint);
}

ViewFrame opposite_frame(const ViewFrame& frame) {
  ViewFrame out = frame;
  out.direction = -frame.direction;
  out.right = -frame.right;
  out.mirrored_columns = !frame.mirrored_columns;
  return out;
}

Vec3 direction_from_angles(double azimuth_deg, double elevation_deg) {
  const double az = azimuth_deg * std::numbers::pi / 180.0;
  const double el = elevation_deg * std::numbers::pi / 180.0;
  const Vec3 eye(std::cos(el) * std::sin(az), std::sin(el), std::cos(el) * std::cos(az));
  return -eye;
}

bool same_lattice(const ViewFrame& a, const ViewFrame& b, double tol) {
  if (a.resolution != b.resolution) return false;
  if (std::abs(a.half_width - b.half_width) > tol) return false;
  if ((a.center - b.center).norm() > tol) return false;
  // Column axis in world space must coincide.
  if ((a.column_sign() * a.right - b.column_sign() * b.right).norm() > tol) return false;
  if ((a.up - b.up).norm() > tol) return false;
  return std::abs(std::abs(a.direction.dot(b.direction)) - 1.0) < tol;
}

}  // namespace f2b
