#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <limits>
#include <numbers>
#include <optional>
#include <vector>

#include "f2b/symmetry.hpp"

namespace f2b {

namespace {

constexpr std::size_t kMaxSeeds = 64;
constexpr int kMaxShiftIterations = 200;
constexpr double kAbsorbRadius = 0.1;

using Embedded = Eigen::Vector4d;

Embedded embed(const SymmetryPlane& p, double scale) {
  const Vec3 n = p.normal();
  return {n.x() / std::numbers::pi, n.y() / std::numbers::pi, n.z() / std::numbers::pi, p.offset / scale};
}

struct Mode {
  SymmetryPlane plane;
  double strength = 0.0;
  std::size_t seed = 0;
};

using BinKey = std::array<long, 4>;

BinKey bin_of(const Embedded& e, double bandwidth) {
  BinKey key{};
  for (int c = 0; c < 4; ++c) key[c] = static_cast<long>(std::floor(e[c] / bandwidth));
  return key;
}

// Votes bucketed into bandwidth-sized cells: anything within the kernel support of x
// lives in one of the 3^4 cells around x's own.
class VoteGrid {
 public:
  VoteGrid(const std::vector<Embedded>& embedded, double bandwidth) : bandwidth_(bandwidth) {
    for (std::size_t k = 0; k < embedded.size(); ++k) cells_[bin_of(embedded[k], bandwidth)].push_back(k);
  }

  template <typename Fn>
  void for_each_near(const Embedded& x, Fn&& fn) const {
    const BinKey base = bin_of(x, bandwidth_);
    BinKey key{};
    for (int code = 0; code < 81; ++code) {
      int rest = code;
      for (int c = 0; c < 4; ++c) {
        key[c] = base[c] + rest % 3 - 1;
        rest /= 3;
      }
      const auto it = cells_.find(key);
      if (it == cells_.end()) continue;
      for (std::size_t k : it->second) fn(k);
    }
  }

 private:
  double bandwidth_;
  std::map<BinKey, std::vector<std::size_t>> cells_;
};

// One mean-shift trajectory. With the Epanechnikov kernel the shift is the weighted
// mean of all votes inside the bandwidth, each taken with the sign closest to the mode.
// A trajectory entering the basin of an earlier mode is abandoned: it would converge
// there and be merged anyway.
std::optional<Mode> shift_to_mode(SymmetryPlane start, std::span<const PlaneVote> votes,
                                  const std::vector<Embedded>& embedded, const VoteGrid& grid,
                                  const std::vector<Mode>& found, double bandwidth, double scale) {
  SymmetryPlane current = start;
  double strength = 0.0;
  std::vector<std::size_t> near;
  std::vector<std::uint32_t> stamp(votes.size(), 0);
  for (int it = 0; it < kMaxShiftIterations; ++it) {
    for (const Mode& m : found) {
      if (plane_distance(m.plane, current, scale) < kAbsorbRadius * bandwidth) return std::nullopt;
    }
    const Embedded x = embed(current, scale);
    // Antipodal representatives: look around both x and -x, visiting each vote once.
    near.clear();
    const auto visit = [&](std::size_t k) {
      if (stamp[k] == static_cast<std::uint32_t>(it + 1)) return;
      stamp[k] = static_cast<std::uint32_t>(it + 1);
      near.push_back(k);
    };
    grid.for_each_near(x, visit);
    grid.for_each_near(-x, visit);
    Embedded sum = Embedded::Zero();
    double weight = 0.0;
    for (std::size_t k : near) {
      const Embedded& e = embedded[k];
      const double same = (x - e).squaredNorm();
      const double flip = (x + e).squaredNorm();
      const double d2 = std::min(same, flip);
      if (d2 >= bandwidth * bandwidth) continue;
      sum += (same <= flip ? 1.0 : -1.0) * votes[k].weight * e;
      weight += votes[k].weight;
    }
    if (weight <= 0.0) return std::nullopt;
    const Embedded mean = sum / weight;
    const Vec3 n = mean.head<3>() * std::numbers::pi;
    if (n.norm() < 1e-12) return std::nullopt;
    const SymmetryPlane next = SymmetryPlane::from_normal_offset(n, mean[3] * scale);
    const double moved = plane_distance(current, next, scale);
    current = next;
    strength = weight;
    if (moved < 1e-4 * bandwidth) break;
  }
  return Mode{current, strength, 0};
}

}  // namespace

std::vector<PlaneCluster> cluster_planes(std::span<const PlaneVote> votes, double bandwidth, double scale) {
  std::vector<PlaneCluster> clusters;
  if (votes.empty()) return clusters;
  std::vector<Embedded> embedded;
  embedded.reserve(votes.size());
  for (const PlaneVote& v : votes) embedded.push_back(embed(v.plane.canonical(), scale));

  // Seeds: centroids of the most populated bandwidth-sized bins.
  struct Bin {
    Embedded sum = Embedded::Zero();
    double weight = 0.0;
    std::size_t first = 0;
  };
  std::map<BinKey, Bin> bins;
  for (std::size_t k = 0; k < votes.size(); ++k) {
    auto [it, inserted] = bins.try_emplace(bin_of(embedded[k], bandwidth));
    if (inserted) it->second.first = k;
    it->second.sum += votes[k].weight * embedded[k];
    it->second.weight += votes[k].weight;
  }
  std::vector<const Bin*> ranked;
  ranked.reserve(bins.size());
  for (const auto& [key, bin] : bins) ranked.push_back(&bin);
  std::stable_sort(ranked.begin(), ranked.end(), [](const Bin* a, const Bin* b) {
    return a->weight > b->weight || (a->weight == b->weight && a->first < b->first);
  });
  if (ranked.size() > kMaxSeeds) ranked.resize(kMaxSeeds);

  const VoteGrid grid(embedded, bandwidth);
  std::vector<Mode> modes;
  for (std::size_t s = 0; s < ranked.size(); ++s) {
    const Embedded c = ranked[s]->sum / ranked[s]->weight;
    Vec3 n = c.head<3>() * std::numbers::pi;
    if (n.norm() < 1e-12) n = votes[ranked[s]->first].plane.normal();
    const SymmetryPlane seed = SymmetryPlane::from_normal_offset(n, c[3] * scale);
    if (auto mode = shift_to_mode(seed, votes, embedded, grid, modes, bandwidth, scale)) {
      mode->seed = s;
      modes.push_back(*mode);
    }
  }
  std::stable_sort(modes.begin(), modes.end(), [](const Mode& a, const Mode& b) { return a.strength > b.strength; });

  std::vector<SymmetryPlane> centers;
  for (const Mode& m : modes) {
    const bool duplicate = std::any_of(centers.begin(), centers.end(), [&](const SymmetryPlane& c) {
      return plane_distance(c, m.plane, scale) < 0.5 * bandwidth;
    });
    if (!duplicate) centers.push_back(m.plane);
  }
  if (centers.empty()) return clusters;

  // Voronoi cell weights.
  std::vector<double> score(centers.size(), 0.0);
  for (const PlaneVote& v : votes) {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < centers.size(); ++c) {
      const double d = plane_distance(centers[c], v.plane, scale);
      if (d < best_d) {
        best_d = d;
        best = c;
      }
    }
    score[best] += v.weight;
  }
  for (std::size_t c = 0; c < centers.size(); ++c) clusters.push_back({centers[c], score[c]});
  std::stable_sort(clusters.begin(), clusters.end(),
                   [](const PlaneCluster& a, const PlaneCluster& b) { return a.score > b.score; });
  return clusters;
}

}  // namespace f2b
