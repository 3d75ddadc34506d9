#include <algorithm>
#include <array>
#include <cmath>
#include <unordered_map>

#include "f2b/errors.hpp"
#include "f2b/poisson.hpp"

namespace f2b {
namespace {

// Kuhn split of the unit cube into six tetrahedra along the 000-111 diagonal. Corners
// are bit-coded (x | y << 1 | z << 2); neighbouring cubes share face diagonals, so the
// tetrahedral mesh is conforming.
constexpr std::array<std::array<int, 4>, 6> kTets = {{
    {0, 1, 3, 7},
    {0, 1, 5, 7},
    {0, 2, 3, 7},
    {0, 2, 6, 7},
    {0, 4, 5, 7},
    {0, 4, 6, 7},
}};

constexpr std::array<std::array<int, 2>, 6> kTetEdges = {{{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}}};

int edge_slot(int a, int b) {
  if (a > b) std::swap(a, b);
  for (int e = 0; e < 6; ++e) {
    if (kTetEdges[e][0] == a && kTetEdges[e][1] == b) return e;
  }
  return -1;
}

class Extractor {
 public:
  Extractor(const ReconGrid& grid, double level) : grid_(grid), level_(level) {}

  TriangleMesh run() {
    const int r = grid_.resolution;
    std::array<std::size_t, 8> node{};
    std::array<Vec3, 8> pos{};
    for (int k = 0; k < r; ++k) {
      for (int j = 0; j < r; ++j) {
        for (int i = 0; i < r; ++i) {
          int above = 0;
          for (int c = 0; c < 8; ++c) {
            const int di = c & 1, dj = (c >> 1) & 1, dk = (c >> 2) & 1;
            node[c] = grid_.index(i + di, j + dj, k + dk);
            above += grid_.chi[node[c]] > level_ ? 1 : 0;
          }
          if (above == 0 || above == 8) continue;
          for (int c = 0; c < 8; ++c) {
            pos[c] = grid_.node_position(i + (c & 1), j + ((c >> 1) & 1), k + ((c >> 2) & 1));
          }
          for (const auto& tet : kTets) polygonize(tet, node, pos);
        }
      }
    }
    return std::move(mesh_);
  }

 private:
  std::uint32_t vertex_on(std::size_t a, std::size_t b, const Vec3& pa, const Vec3& pb) {
    // Interpolate from the lower node id so both orientations of the field agree bitwise.
    if (a > b) return vertex_on(b, a, pb, pa);
    const std::uint64_t key = static_cast<std::uint64_t>(a) * grid_.node_count() + b;
    const auto [it, inserted] = vertices_.try_emplace(key, static_cast<std::uint32_t>(mesh_.vertices.size()));
    if (inserted) {
      const double va = grid_.chi[a], vb = grid_.chi[b];
      const double s = std::clamp((level_ - va) / (vb - va), 0.0, 1.0);
      mesh_.vertices.push_back(pa + s * (pb - pa));
    }
    return it->second;
  }

  void emit(std::uint32_t a, std::uint32_t b, std::uint32_t c, const Vec3& toward_above) {
    const Vec3& pa = mesh_.vertices[a];
    const Vec3 n = (mesh_.vertices[b] - pa).cross(mesh_.vertices[c] - pa);
    if (n.dot(toward_above) < 0.0) std::swap(b, c);
    mesh_.triangles.push_back({a, b, c});
  }

  void polygonize(const std::array<int, 4>& tet, const std::array<std::size_t, 8>& node,
                  const std::array<Vec3, 8>& pos) {
    bool up[4];
    int count = 0;
    Vec3 above_sum = Vec3::Zero(), below_sum = Vec3::Zero();
    for (int v = 0; v < 4; ++v) {
      up[v] = grid_.chi[node[tet[v]]] > level_;
      count += up[v] ? 1 : 0;
      (up[v] ? above_sum : below_sum) += pos[tet[v]];
    }
    if (count == 0 || count == 4) return;
    const Vec3 toward_above = above_sum / count - below_sum / (4 - count);

    std::array<std::uint32_t, 6> vid{};
    std::array<std::uint64_t, 6> key{};
    for (int e = 0; e < 6; ++e) {
      const int a = kTetEdges[e][0], b = kTetEdges[e][1];
      if (up[a] == up[b]) continue;
      const std::size_t na = node[tet[a]], nb = node[tet[b]];
      vid[e] = vertex_on(na, nb, pos[tet[a]], pos[tet[b]]);
      key[e] = static_cast<std::uint64_t>(std::min(na, nb)) * grid_.node_count() + std::max(na, nb);
    }

    if (count == 1 || count == 3) {
      int lone = 0;
      for (int v = 0; v < 4; ++v) {
        if (up[v] == (count == 1)) lone = v;
      }
      std::array<std::uint32_t, 3> tri{};
      int t = 0;
      for (int v = 0; v < 4; ++v) {
        if (v != lone) tri[t++] = vid[edge_slot(lone, v)];
      }
      emit(tri[0], tri[1], tri[2], toward_above);
      return;
    }

    // Pairs are named by membership, not by side, so a negated field yields the same
    // triangles with reversed winding.
    int a = 0, b = -1, c = -1, d = -1;
    for (int v = 1; v < 4; ++v) {
      if (up[v] == up[0]) b = v;
      else (c < 0 ? c : d) = v;
    }
    // Cycle ac - ad - bd - bc; split along the diagonal owning the smallest edge key.
    const int q[4] = {edge_slot(a, c), edge_slot(a, d), edge_slot(b, d), edge_slot(b, c)};
    const std::uint64_t diag02 = std::min(key[q[0]], key[q[2]]);
    const std::uint64_t diag13 = std::min(key[q[1]], key[q[3]]);
    if (diag02 < diag13) {
      emit(vid[q[0]], vid[q[1]], vid[q[2]], toward_above);
      emit(vid[q[0]], vid[q[2]], vid[q[3]], toward_above);
    } else {
      emit(vid[q[1]], vid[q[2]], vid[q[3]], toward_above);
      emit(vid[q[1]], vid[q[3]], vid[q[0]], toward_above);
    }
  }

  const ReconGrid& grid_;
  double level_;
  TriangleMesh mesh_;
  std::unordered_map<std::uint64_t, std::uint32_t> vertices_;
};

}  // namespace

TriangleMesh extract_level(const ReconGrid& grid, double level) {
  if (grid.chi.size() != grid.node_count()) throw ShapeError("indicator grid has the wrong size");
  const auto [lo, hi] = std::minmax_element(grid.chi.begin(), grid.chi.end());
  if (!(level > *lo && level < *hi)) throw EmptySurfaceError("iso-level lies outside the indicator range");
  TriangleMesh mesh = Extractor(grid, level).run();
  if (mesh.triangles.empty()) throw EmptySurfaceError("iso-surface is empty");
  return mesh;
}

}  // namespace f2b
