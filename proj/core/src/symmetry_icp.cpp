#include <algorithm>
#include <cmath>

#include "f2b/spatial.hpp"
#include "f2b/symmetry.hpp"

namespace f2b {

double reflection_objective(const SymmetryPlane& plane, std::span<const Correspondence> pairs, Vec3* gradient) {
  const double st = std::sin(plane.theta), ct = std::cos(plane.theta);
  const double sp = std::sin(plane.phi), cp = std::cos(plane.phi);
  const Vec3 n(st * cp, st * sp, ct);
  const Vec3 dn_dphi(-st * sp, st * cp, 0.0);
  const Vec3 dn_dtheta(ct * cp, ct * sp, -st);

  double value = 0.0;
  Vec3 grad_n = Vec3::Zero();
  double grad_d = 0.0;
  for (const Correspondence& c : pairs) {
    const double t = n.dot(c.point) - plane.offset;
    const Vec3 e = c.point - 2.0 * t * n - c.target;
    value += e.squaredNorm();
    if (gradient) {
      const double en = e.dot(n);
      // d/dn of |p - 2 (n.p - d) n - r|^2
      grad_n += -4.0 * (en * c.point + t * e);
      grad_d += 4.0 * en;
    }
  }
  if (gradient) *gradient = Vec3(grad_n.dot(dn_dphi), grad_n.dot(dn_dtheta), grad_d);
  return value;
}

std::vector<Correspondence> reflection_correspondences(const OrientedPointCloud& points, const PointKdTree& tree,
                                                       const SymmetryPlane& plane, double max_distance,
                                                       double max_normal_angle) {
  std::vector<Correspondence> pairs;
  const double min_cos = std::cos(max_normal_angle);
  for (const OrientedPoint& p : points.points) {
    const Vec3 q = plane.reflect_point(p.position);
    const auto hit = tree.nearest(q, max_distance);
    if (!hit || hit->distance > max_distance) continue;
    const OrientedPoint& r = points.points[hit->index];
    if (plane.reflect_direction(p.normal).dot(r.normal) < min_cos) continue;
    pairs.push_back({p.position, r.position});
  }
  return pairs;
}

namespace {

SymmetryPlane from_params(const Vec3& x) { return SymmetryPlane{x[0], x[1], x[2]}; }
Vec3 to_params(const SymmetryPlane& p) { return {p.phi, p.theta, p.offset}; }

}  // namespace

IcpResult refine_plane_icp(const OrientedPointCloud& points, const SymmetryPlane& initial, const IcpParams& params) {
  IcpResult result;
  result.plane = initial.canonical();
  if (points.size() < 3) {
    result.no_correspondences = true;
    return result;
  }
  const PointKdTree tree(points.positions());
  const double max_distance = params.max_distance_px * params.pixel_size;

  Vec3 x = to_params(initial);
  double alpha = 1.0;
  for (int iter = 0; iter < params.max_iterations; ++iter) {
    const auto pairs = reflection_correspondences(points, tree, from_params(x), max_distance, params.max_normal_angle);
    result.iterations = iter + 1;
    result.correspondences = pairs.size();
    if (pairs.empty()) {
      result.no_correspondences = true;
      break;
    }

    // Gradient descent with Armijo backtracking on the fixed correspondence set.
    const Vec3 start = x;
    Vec3 grad;
    double value = reflection_objective(from_params(x), pairs, &grad);
    for (int step = 0; step < params.max_line_search_steps; ++step) {
      const double gg = grad.squaredNorm();
      if (!(gg > 1e-30)) break;
      bool accepted = false;
      Vec3 trial;
      double trial_value = value;
      for (int halvings = 0; halvings < 80; ++halvings) {
        trial = x - alpha * grad;
        trial_value = reflection_objective(from_params(trial), pairs);
        if (trial_value <= value - 1e-4 * alpha * gg) {
          accepted = true;
          break;
        }
        alpha *= 0.5;
      }
      if (!accepted) break;
      if (trial_value > value) result.monotone = false;
      ++result.accepted_steps;
      const double decrease = value - trial_value;
      const double moved = (trial - x).cwiseAbs().maxCoeff();
      x = trial;
      value = reflection_objective(from_params(x), pairs, &grad);
      alpha *= 2.0;
      if (moved < 1e-12 || decrease <= 1e-15 * std::max(value, 1e-300)) break;
    }
    result.final_objective = value;

    if ((x - start).cwiseAbs().maxCoeff() < params.tolerance) {
      result.converged = true;
      break;
    }
  }
  result.plane = from_params(x).canonical();
  return result;
}

}  // namespace f2b
