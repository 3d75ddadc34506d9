#include "f2b/render.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace f2b {

namespace {

inline double edge(double ax, double ay, double bx, double by, double px, double py) {
  return (bx - ax) * (py - ay) - (by - ay) * (px - ax);
}

}  // namespace

MapSet render_maps(const TriangleMesh& mesh, const ViewFrame& frame) {
  frame.validate();
  MapSet maps = MapSet::background(frame);
  const int res = frame.resolution;
  const double range = frame.depth_range();
  std::vector<double> zbuf(frame.pixel_count(), std::numeric_limits<double>::infinity());
  const Vec3 toward = frame.toward_viewer();

  for (std::size_t f = 0; f < mesh.triangle_count(); ++f) {
    Vec3 n = mesh.face_normal(f);
    if (n.isZero()) continue;
    if (n.dot(toward) < 0.0) n = -n;
    const Vec3 view_normal = frame.to_view(n);

    const Triangle& t = mesh.triangles[f];
    double x[3], y[3], z[3];
    for (int k = 0; k < 3; ++k) {
      const Vec3& p = mesh.vertices[t[k]];
      const Eigen::Vector2d xy = frame.project(p);
      x[k] = xy.x();
      y[k] = xy.y();
      z[k] = frame.depth_of(p);
    }
    const double area = edge(x[0], y[0], x[1], y[1], x[2], y[2]);
    if (std::abs(area) < 1e-14) continue;  // edge-on

    const double xmin = std::min({x[0], x[1], x[2]});
    const double xmax = std::max({x[0], x[1], x[2]});
    const double ymin = std::min({y[0], y[1], y[2]});
    const double ymax = std::max({y[0], y[1], y[2]});
    const int i0 = std::max(0, static_cast<int>(std::floor(xmin - 0.5)));
    const int i1 = std::min(res - 1, static_cast<int>(std::ceil(xmax - 0.5)));
    const int j0 = std::max(0, static_cast<int>(std::floor(ymin - 0.5)));
    const int j1 = std::min(res - 1, static_cast<int>(std::ceil(ymax - 0.5)));
    if (i0 > i1 || j0 > j1) continue;

    const double inv_area = 1.0 / area;
    constexpr double eps = -1e-10;
    for (int j = j0; j <= j1; ++j) {
      const double py = j + 0.5;
      for (int i = i0; i <= i1; ++i) {
        const double px = i + 0.5;
        const double l0 = edge(x[1], y[1], x[2], y[2], px, py) * inv_area;
        const double l1 = edge(x[2], y[2], x[0], y[0], px, py) * inv_area;
        const double l2 = edge(x[0], y[0], x[1], y[1], px, py) * inv_area;
        if (l0 < eps || l1 < eps || l2 < eps) continue;
        const double depth = l0 * z[0] + l1 * z[1] + l2 * z[2];
        if (depth < 0.0 || depth > range) continue;
        const std::size_t idx = maps.index(i, j);
        if (depth < zbuf[idx]) {
          zbuf[idx] = depth;
          maps.set(idx, static_cast<float>(depth), view_normal);
        }
      }
    }
  }
  return maps;
}

MapSet render_back_truth(const TriangleMesh& mesh, const ViewFrame& frame) {
  return render_maps(mesh, opposite_frame(frame));
}

}  // namespace f2b
