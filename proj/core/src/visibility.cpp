#include "f2b/visibility.hpp"

#include <cmath>
#include <limits>

#include "f2b/errors.hpp"
#include "f2b/spatial.hpp"

namespace f2b {

double visible_fraction(const TriangleMesh& mesh, const ViewFrame& view, std::size_t n, std::uint64_t seed) {
  if (mesh.empty()) throw EmptyInputError("visible_fraction needs a non-empty mesh");
  if (n < 100) throw Error("visible_fraction needs at least 100 samples");
  view.validate();

  const TriangleBvh bvh(mesh);
  const auto samples = sample_surface(mesh, n, seed);
  const double t_min = 1e-9 * std::max(mesh.bounds().diagonal(), 1e-12);
  constexpr double inf = std::numeric_limits<double>::infinity();
  const Vec3 toward = view.toward_viewer();

  std::size_t visible = 0;
  for (const SurfaceSample& s : samples) {
    const Vec3 face_n = mesh.face_normal(s.face);
    if (std::abs(face_n.dot(toward)) < 1e-9) continue;
    if (!bvh.occluded(s.position, toward, t_min, inf, s.face) ||
        !bvh.occluded(s.position, -toward, t_min, inf, s.face)) {
      ++visible;
    }
  }
  return static_cast<double>(visible) / static_cast<double>(samples.size());
}

}  // namespace f2b
