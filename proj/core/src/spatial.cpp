#include "f2b/spatial.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace f2b {

namespace {

constexpr std::uint32_t kLeafSize = 4;

double box_distance_sq(const Vec3& q, const Vec3& lo, const Vec3& hi) {
  const Vec3 d = (lo - q).cwiseMax(q - hi).cwiseMax(0.0);
  return d.squaredNorm();
}

bool ray_box(const Vec3& origin, const Vec3& inv_dir, const Vec3& lo, const Vec3& hi, double t_min,
             double t_max) {
  for (int k = 0; k < 3; ++k) {
    double t0 = (lo[k] - origin[k]) * inv_dir[k];
    double t1 = (hi[k] - origin[k]) * inv_dir[k];
    if (std::isnan(t0) || std::isnan(t1)) {
      // Ray parallel to the slab and starting on its boundary.
      if (origin[k] < lo[k] || origin[k] > hi[k]) return false;
      continue;
    }
    if (t0 > t1) std::swap(t0, t1);
    t_min = std::max(t_min, t0);
    t_max = std::min(t_max, t1);
    if (t_max < t_min) return false;
  }
  return true;
}

// Moller-Trumbore; returns the hit parameter or a negative value.
double ray_triangle(const Vec3& origin, const Vec3& dir, const std::array<Vec3, 3>& tri) {
  const Vec3 e1 = tri[1] - tri[0];
  const Vec3 e2 = tri[2] - tri[0];
  const Vec3 p = dir.cross(e2);
  const double det = e1.dot(p);
  if (std::abs(det) < 1e-300) return -1.0;
  const double inv = 1.0 / det;
  const Vec3 s = origin - tri[0];
  const double u = s.dot(p) * inv;
  if (u < 0.0 || u > 1.0) return -1.0;
  const Vec3 q = s.cross(e1);
  const double v = dir.dot(q) * inv;
  if (v < 0.0 || u + v > 1.0) return -1.0;
  return e2.dot(q) * inv;
}

}  // namespace

TriangleBvh::TriangleBvh(const TriangleMesh& mesh) {
  corners_.reserve(mesh.triangle_count());
  for (const Triangle& t : mesh.triangles) {
    corners_.push_back({mesh.vertices[t[0]], mesh.vertices[t[1]], mesh.vertices[t[2]]});
  }
  order_.resize(corners_.size());
  std::iota(order_.begin(), order_.end(), 0u);
  if (!corners_.empty()) {
    nodes_.reserve(2 * corners_.size() / kLeafSize + 2);
    build(0, static_cast<std::uint32_t>(corners_.size()));
  }
}

std::uint32_t TriangleBvh::build(std::uint32_t begin, std::uint32_t end) {
  const auto index = static_cast<std::uint32_t>(nodes_.size());
  nodes_.push_back({});
  Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 hi = -lo;
  Vec3 clo = lo, chi = hi;
  for (std::uint32_t i = begin; i < end; ++i) {
    const auto& tri = corners_[order_[i]];
    for (const Vec3& p : tri) {
      lo = lo.cwiseMin(p);
      hi = hi.cwiseMax(p);
    }
    const Vec3 c = (tri[0] + tri[1] + tri[2]) / 3.0;
    clo = clo.cwiseMin(c);
    chi = chi.cwiseMax(c);
  }
  nodes_[index].lo = lo;
  nodes_[index].hi = hi;
  if (end - begin <= kLeafSize) {
    nodes_[index].first = begin;
    nodes_[index].count = end - begin;
    return index;
  }
  int axis = 0;
  (chi - clo).maxCoeff(&axis);
  const std::uint32_t mid = begin + (end - begin) / 2;
  auto centroid = [&](std::uint32_t f) {
    const auto& tri = corners_[f];
    return tri[0][axis] + tri[1][axis] + tri[2][axis];
  };
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](std::uint32_t a, std::uint32_t b) {
                     const double ca = centroid(a), cb = centroid(b);
                     return ca < cb || (ca == cb && a < b);
                   });
  build(begin, mid);
  const std::uint32_t right = build(mid, end);
  nodes_[index].first = right;
  nodes_[index].count = 0;
  return index;
}

TriangleBvh::Closest TriangleBvh::closest(const Vec3& query) const {
  Closest best;
  if (nodes_.empty()) return best;
  double best_sq = std::numeric_limits<double>::infinity();
  std::vector<std::uint32_t> stack{0};
  while (!stack.empty()) {
    const std::uint32_t ni = stack.back();
    stack.pop_back();
    const Node& node = nodes_[ni];
    if (box_distance_sq(query, node.lo, node.hi) >= best_sq) continue;
    if (node.count > 0) {
      for (std::uint32_t i = node.first; i < node.first + node.count; ++i) {
        const std::uint32_t f = order_[i];
        const auto& tri = corners_[f];
        const Vec3 p = closest_point_on_triangle(query, tri[0], tri[1], tri[2]);
        const double dsq = (p - query).squaredNorm();
        if (dsq < best_sq || (dsq == best_sq && f < best.face)) {
          best_sq = dsq;
          best.point = p;
          best.face = f;
        }
      }
      continue;
    }
    const std::uint32_t left = ni + 1;
    const std::uint32_t right = node.first;
    const double dl = box_distance_sq(query, nodes_[left].lo, nodes_[left].hi);
    const double dr = box_distance_sq(query, nodes_[right].lo, nodes_[right].hi);
    // Visit the nearer child first.
    if (dl <= dr) {
      stack.push_back(right);
      stack.push_back(left);
    } else {
      stack.push_back(left);
      stack.push_back(right);
    }
  }
  best.distance = std::sqrt(best_sq);
  return best;
}

bool TriangleBvh::occluded(const Vec3& origin, const Vec3& dir, double t_min, double t_max,
                           std::optional<std::uint32_t> skip_face) const {
  if (nodes_.empty()) return false;
  const Vec3 inv_dir = dir.cwiseInverse();
  std::vector<std::uint32_t> stack{0};
  while (!stack.empty()) {
    const std::uint32_t ni = stack.back();
    stack.pop_back();
    const Node& node = nodes_[ni];
    if (!ray_box(origin, inv_dir, node.lo, node.hi, t_min, t_max)) continue;
    if (node.count > 0) {
      for (std::uint32_t i = node.first; i < node.first + node.count; ++i) {
        const std::uint32_t f = order_[i];
        if (skip_face && *skip_face == f) continue;
        const double t = ray_triangle(origin, dir, corners_[f]);
        if (t > t_min && t < t_max) return true;
      }
      continue;
    }
    stack.push_back(ni + 1);
    stack.push_back(node.first);
  }
  return false;
}

PointKdTree::PointKdTree(std::vector<Vec3> points) : points_(std::move(points)) {
  order_.resize(points_.size());
  std::iota(order_.begin(), order_.end(), 0u);
  nodes_.reserve(points_.size());
  root_ = build(0, static_cast<std::uint32_t>(points_.size()), 0);
}

std::int32_t PointKdTree::build(std::uint32_t begin, std::uint32_t end, int depth) {
  if (begin >= end) return -1;
  // Split on the widest axis of this subset.
  Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 hi = -lo;
  for (std::uint32_t i = begin; i < end; ++i) {
    lo = lo.cwiseMin(points_[order_[i]]);
    hi = hi.cwiseMax(points_[order_[i]]);
  }
  int axis = 0;
  (hi - lo).maxCoeff(&axis);
  (void)depth;
  const std::uint32_t mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](std::uint32_t a, std::uint32_t b) {
                     const double ca = points_[a][axis], cb = points_[b][axis];
                     return ca < cb || (ca == cb && a < b);
                   });
  const auto index = static_cast<std::int32_t>(nodes_.size());
  nodes_.push_back({order_[mid], -1, -1, static_cast<std::uint8_t>(axis)});
  const std::int32_t left = build(begin, mid, depth + 1);
  const std::int32_t right = build(mid + 1, end, depth + 1);
  nodes_[index].left = left;
  nodes_[index].right = right;
  return index;
}

void PointKdTree::search(std::int32_t ni, const Vec3& q, Nearest& best, double& best_sq) const {
  if (ni < 0) return;
  const Node& node = nodes_[ni];
  const Vec3& p = points_[node.point];
  const double dsq = (p - q).squaredNorm();
  if (dsq < best_sq || (dsq == best_sq && node.point < best.index)) {
    best_sq = dsq;
    best.index = node.point;
  }
  const double delta = q[node.axis] - p[node.axis];
  search(delta < 0.0 ? node.left : node.right, q, best, best_sq);
  if (delta * delta <= best_sq) search(delta < 0.0 ? node.right : node.left, q, best, best_sq);
}

std::optional<PointKdTree::Nearest> PointKdTree::nearest(const Vec3& query, double max_distance) const {
  if (root_ < 0) return std::nullopt;
  Nearest best;
  best.index = std::numeric_limits<std::uint32_t>::max();
  double best_sq = std::isfinite(max_distance) ? max_distance * max_distance
                                               : std::numeric_limits<double>::infinity();
  search(root_, query, best, best_sq);
  if (best.index == std::numeric_limits<std::uint32_t>::max()) return std::nullopt;
  best.distance = std::sqrt(best_sq);
  return best;
}

}  // namespace f2b
