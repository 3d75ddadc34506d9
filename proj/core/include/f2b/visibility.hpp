#pragma once

#include <cstdint>

#include "f2b/geometry.hpp"
#include "f2b/view_frame.hpp"

namespace f2b {

/// Area-weighted share of the surface that is visible from `view` or from its
/// opposite, estimated from `n` seeded surface samples with exact ray tests.
/// Faces seen exactly edge-on count as hidden.
double visible_fraction(const TriangleMesh& mesh, const ViewFrame& view, std::size_t n, std::uint64_t seed);

}  // namespace f2b
