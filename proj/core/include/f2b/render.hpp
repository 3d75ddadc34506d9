#pragma once

#include "f2b/maps.hpp"

namespace f2b {

/// Z-buffer rasterization of `mesh` into depth, normal and silhouette maps.
///
/// Coverage is sampled at pixel centers with inclusive edges. The nearest fragment
/// wins; at equal depth the lower triangle index wins. Normals are geometric face
/// normals turned toward the viewer. A mesh entirely outside the frustum yields an
/// all-background result.
MapSet render_maps(const TriangleMesh& mesh, const ViewFrame& frame);

/// Maps rendered from the opposite view: ground-truth back maps on the front lattice.
MapSet render_back_truth(const TriangleMesh& mesh, const ViewFrame& frame);

}  // namespace f2b
