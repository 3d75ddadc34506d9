#pragma once

#include <optional>

#include "f2b/maps.hpp"

namespace f2b {

struct FusionParams {
  /// Minimum depth gap between opposite-oriented neighbours, in pixels.
  double min_separation = 2.0;
  /// Outlier depth threshold against the four image neighbours, in pixels.
  double outlier_threshold = 4.0;
  /// Opposite pairs are searched at image distance < neighbor_radius (Chebyshev).
  int neighbor_radius = 2;

  /// Throws ConfigError unless every field is positive.
  void validate() const;
};

struct FusionStats {
  std::size_t culled_reflected = 0;  // rule 1
  std::size_t culled_back_front = 0;  // rule 1
  std::size_t culled_back_reflected = 0;  // rule 2
  std::size_t displaced = 0;  // rule 3
  std::size_t outliers = 0;
};

/// Merges the three map sets into one world-space cloud.
///
/// In order: reflected and back points nearer than the front surface are dropped;
/// back points nearer than the reflected surface are dropped; back-facing points are
/// pushed away from the viewer until every front-facing point within the neighbour
/// radius is at least min_separation pixels away in depth; finally each source map
/// loses its outliers. Output is sorted by (source, pixel index).
OrientedPointCloud fuse(const MapSet& front, const std::optional<MapSet>& reflected, const MapSet& back,
                        const FusionParams& params = {}, FusionStats* stats = nullptr);

/// Drops pixels whose depth differs by more than threshold_px * pixel_size from every
/// defined 4-neighbour. Pixels without defined neighbours are dropped too. Decisions
/// are made on the input, so the result does not depend on scan order.
MapSet remove_outliers(const MapSet& maps, double threshold_px);

}  // namespace f2b
