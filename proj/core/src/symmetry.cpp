#include "f2b/symmetry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "f2b/random.hpp"

namespace f2b {

SymmetryPlane SymmetryPlane::from_normal_offset(const Vec3& normal, double offset) {
  Vec3 n = normal.normalized();
  const bool upper = n.z() > 0.0 || (n.z() == 0.0 && (n.y() > 0.0 || (n.y() == 0.0 && n.x() > 0.0)));
  if (offset < 0.0 || (offset == 0.0 && !upper)) {
    n = -n;
    offset = -offset;
  }
  SymmetryPlane p;
  p.theta = std::acos(std::clamp(n.z(), -1.0, 1.0));
  p.phi = std::atan2(n.y(), n.x());
  p.offset = offset;
  return p;
}

Vec3 SymmetryPlane::normal() const {
  const double st = std::sin(theta);
  return {st * std::cos(phi), st * std::sin(phi), std::cos(theta)};
}

Vec3 SymmetryPlane::reflect_point(const Vec3& p) const {
  const Vec3 n = normal();
  return p - 2.0 * (n.dot(p) - offset) * n;
}

Vec3 SymmetryPlane::reflect_direction(const Vec3& v) const {
  const Vec3 n = normal();
  return v - 2.0 * n.dot(v) * n;
}

double plane_distance(const SymmetryPlane& a, const SymmetryPlane& b, double scale) {
  const Vec3 na = a.normal();
  const Vec3 nb = b.normal();
  const double inv_pi2 = 1.0 / (std::numbers::pi * std::numbers::pi);
  const double inv_s2 = 1.0 / (scale * scale);
  const double same = (na - nb).squaredNorm() * inv_pi2 + (a.offset - b.offset) * (a.offset - b.offset) * inv_s2;
  const double flip = (na + nb).squaredNorm() * inv_pi2 + (a.offset + b.offset) * (a.offset + b.offset) * inv_s2;
  return std::sqrt(std::min(same, flip));
}

double plane_angle(const SymmetryPlane& a, const SymmetryPlane& b) {
  return std::acos(std::clamp(std::abs(a.normal().dot(b.normal())), 0.0, 1.0));
}

std::optional<SymmetryPlane> pair_plane(const OrientedPoint& a, const OrientedPoint& b, double max_normal_angle) {
  const Vec3 diff = b.position - a.position;
  const double len = diff.norm();
  if (!(len > 0.0)) return std::nullopt;
  const Vec3 m = diff / len;
  const Vec3 reflected = a.normal - 2.0 * a.normal.dot(m) * m;
  if (reflected.dot(b.normal) < std::cos(max_normal_angle)) return std::nullopt;
  const double offset = m.dot(0.5 * (a.position + b.position));
  return SymmetryPlane::from_normal_offset(m, offset);
}

std::vector<PlaneVote> collect_votes(const OrientedPointCloud& points, std::size_t n_pairs, std::uint64_t seed,
                                     double max_normal_angle) {
  std::vector<PlaneVote> votes;
  const std::size_t n = points.size();
  if (n < 2) return votes;
  Rng rng(seed);
  votes.reserve(n_pairs);
  for (std::size_t k = 0; k < n_pairs; ++k) {
    const std::size_t i = rng.below(n);
    std::size_t j = rng.below(n - 1);
    if (j >= i) ++j;
    if (auto plane = pair_plane(points.points[i], points.points[j], max_normal_angle)) {
      votes.push_back({*plane, 1.0});
    }
  }
  return votes;
}

// Felzenszwalb & Huttenlocher squared distance transform, 1D pass.
static void edt_1d(const std::vector<double>& f, std::vector<double>& d, std::vector<int>& v, std::vector<double>& z) {
  const int n = static_cast<int>(f.size());
  constexpr double inf = std::numeric_limits<double>::infinity();
  int k = 0;
  v[0] = 0;
  z[0] = -inf;
  z[1] = inf;
  for (int q = 1; q < n; ++q) {
    if (f[q] == inf) continue;
    if (f[v[k]] == inf) {
      v[k] = q;
      continue;
    }
    double s = ((f[q] + q * q) - (f[v[k]] + v[k] * v[k])) / (2.0 * q - 2.0 * v[k]);
    while (k > 0 && s <= z[k]) {
      --k;
      s = ((f[q] + q * q) - (f[v[k]] + v[k] * v[k])) / (2.0 * q - 2.0 * v[k]);
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = inf;
  }
  k = 0;
  for (int q = 0; q < n; ++q) {
    while (z[k + 1] < q) ++k;
    const double dq = q - v[k];
    d[q] = f[v[k]] == inf ? inf : dq * dq + f[v[k]];
  }
}

std::vector<double> distance_to_silhouette(const std::vector<std::uint8_t>& silhouette, int resolution) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  const auto n = static_cast<std::size_t>(resolution);
  std::vector<double> grid(n * n);
  for (std::size_t i = 0; i < n * n; ++i) grid[i] = silhouette[i] ? 0.0 : inf;
  std::vector<double> f(n), d(n), z(n + 1);
  std::vector<int> v(n);
  for (std::size_t col = 0; col < n; ++col) {
    for (std::size_t row = 0; row < n; ++row) f[row] = grid[row * n + col];
    edt_1d(f, d, v, z);
    for (std::size_t row = 0; row < n; ++row) grid[row * n + col] = d[row];
  }
  for (std::size_t row = 0; row < n; ++row) {
    for (std::size_t col = 0; col < n; ++col) f[col] = grid[row * n + col];
    edt_1d(f, d, v, z);
    for (std::size_t col = 0; col < n; ++col) grid[row * n + col] = std::sqrt(d[col]);
  }
  return grid;
}

namespace {

struct PixelHit {
  bool inside = false;
  int col = 0;
  int row = 0;
};

PixelHit locate(const ViewFrame& frame, const Vec3& p) {
  const Eigen::Vector2d xy = frame.project(p);
  PixelHit hit;
  hit.col = static_cast<int>(std::floor(xy.x()));
  hit.row = static_cast<int>(std::floor(xy.y()));
  hit.inside = hit.col >= 0 && hit.row >= 0 && hit.col < frame.resolution && hit.row < frame.resolution;
  return hit;
}

}  // namespace

ConstraintCheck check_visual_hull(const SymmetryPlane& plane, const MapSet& maps, double px_slack, double frac_limit) {
  const OrientedPointCloud points = to_oriented_points(maps, SourceTag::front);
  if (points.empty()) return {0.0, true};
  const std::vector<double> dist = distance_to_silhouette(maps.silhouette, maps.resolution());
  const int res = maps.resolution();
  std::size_t outside = 0;
  for (const OrientedPoint& p : points.points) {
    const Vec3 q = plane.reflect_point(p.position);
    const Eigen::Vector2d xy = maps.frame.project(q);
    const int col = std::clamp(static_cast<int>(std::floor(xy.x())), 0, res - 1);
    const int row = std::clamp(static_cast<int>(std::floor(xy.y())), 0, res - 1);
    // Off-image points add their distance to the nearest in-image pixel center.
    const double extra = (xy - Eigen::Vector2d(col + 0.5, row + 0.5)).norm();
    const bool off_image = xy.x() < 0.0 || xy.y() < 0.0 || xy.x() >= res || xy.y() >= res;
    const double d = dist[maps.index(col, row)] + (off_image ? extra : 0.0);
    if (d >= px_slack) ++outside;
  }
  const double violation = static_cast<double>(outside) / static_cast<double>(points.size());
  return {violation, violation <= frac_limit};
}

ConstraintCheck check_visibility(const SymmetryPlane& plane, const MapSet& maps, double frac_limit) {
  const OrientedPointCloud points = to_oriented_points(maps, SourceTag::front);
  if (points.empty()) return {0.0, true};
  const double ps = maps.frame.pixel_size();
  std::size_t in_front = 0;
  for (const OrientedPoint& p : points.points) {
    const Vec3 q = plane.reflect_point(p.position);
    const PixelHit hit = locate(maps.frame, q);
    if (!hit.inside) continue;
    const std::size_t idx = maps.index(hit.col, hit.row);
    if (!maps.defined(idx)) continue;
    if (maps.frame.depth_of(q) < maps.depth[idx] - ps) ++in_front;
  }
  const double violation = static_cast<double>(in_front) / static_cast<double>(points.size());
  return {violation, violation <= frac_limit};
}

MapSet reflect_maps(const MapSet& maps, const SymmetryPlane& plane) {
  const MapSet front = mask_with_silhouette(maps);
  MapSet out = MapSet::background(front.frame);
  const double ps = front.frame.pixel_size();
  const double range = front.frame.depth_range();
  const OrientedPointCloud points = to_oriented_points(front, SourceTag::front);
  for (const OrientedPoint& p : points.points) {
    const Vec3 q = plane.reflect_point(p.position);
    const PixelHit hit = locate(front.frame, q);
    if (!hit.inside) continue;
    const std::size_t idx = front.index(hit.col, hit.row);
    if (!front.defined(idx)) continue;
    const double depth = front.frame.depth_of(q);
    if (depth < front.depth[idx] - ps || depth < 0.0 || depth > range) continue;
    if (out.defined(idx) && depth <= out.depth[idx]) continue;
    out.set(idx, static_cast<float>(depth), front.frame.to_view(plane.reflect_direction(p.normal)));
  }
  return out;
}

double reflected_coverage(const MapSet& front, const MapSet& reflected) {
  const std::size_t denom = front.defined_count();
  if (denom == 0) return 0.0;
  return static_cast<double>(reflected.defined_count()) / static_cast<double>(denom);
}

SymmetryVerdict detect_symmetry(const MapSet& maps, const SymmetryConfig& config) {
  SymmetryVerdict verdict;
  const MapSet front = mask_with_silhouette(maps);
  const OrientedPointCloud points = to_oriented_points(front, SourceTag::front);
  if (points.size() < 2) return verdict;
  double scale = points.bounds().diagonal();
  if (!(scale > 0.0)) scale = 1.0;

  struct Candidate {
    PlaneCluster cluster;
    int round;
  };
  std::vector<Candidate> pool;
  for (int round = 0; round < config.rounds; ++round) {
    const auto votes = collect_votes(points, config.pairs_per_round, mix_seed(config.seed, static_cast<std::uint64_t>(round)),
                                     config.max_normal_angle);
    if (votes.empty()) continue;
    for (const PlaneCluster& c : cluster_planes(votes, config.bandwidth, scale)) pool.push_back({c, round});
  }
  verdict.candidates = pool.size();
  std::stable_sort(pool.begin(), pool.end(),
                   [](const Candidate& a, const Candidate& b) { return a.cluster.score > b.cluster.score; });

  const double loose_hull_px = config.hull_px * config.loose_factor;
  const double loose_hull_frac = config.hull_frac * config.loose_factor;
  const double loose_vis_frac = config.visibility_frac * config.loose_factor;
  const Candidate* chosen = nullptr;
  for (const Candidate& c : pool) {
    if (!check_visual_hull(c.cluster.center, front, loose_hull_px, loose_hull_frac).pass) continue;
    if (!check_visibility(c.cluster.center, front, loose_vis_frac).pass) continue;
    chosen = &c;
    break;
  }
  if (chosen == nullptr) return verdict;
  verdict.initial_plane = chosen->cluster.center;
  verdict.initial_score = chosen->cluster.score;

  IcpParams icp = config.icp;
  icp.pixel_size = front.frame.pixel_size();
  verdict.icp = refine_plane_icp(points, chosen->cluster.center, icp);
  const SymmetryPlane refined = verdict.icp.plane;

  const ConstraintCheck hull = check_visual_hull(refined, front, config.hull_px, config.hull_frac);
  const ConstraintCheck vis = check_visibility(refined, front, config.visibility_frac);
  verdict.hull_violation = hull.violation;
  verdict.visibility_violation = vis.violation;
  verdict.coverage = reflected_coverage(front, reflect_maps(front, refined));
  if (hull.pass && vis.pass && verdict.coverage >= config.coverage_min) verdict.plane = refined;
  return verdict;
}

}  // namespace f2b
