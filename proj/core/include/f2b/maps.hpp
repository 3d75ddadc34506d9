#pragma once

#include <array>
#include <cstdint>
#include <string_view>
#include <vector>

#include "f2b/view_frame.hpp"

namespace f2b {

/// Aligned depth / normal / silhouette rasters for one view, stored row-major.
///
/// Depth is in world units from the frame's near plane. Normals are unit vectors in
/// view coordinates (right, up, toward viewer). Both are NaN on background pixels.
struct MapSet {
  ViewFrame frame;
  std::vector<float> depth;
  std::vector<std::array<float, 3>> normal;
  std::vector<std::uint8_t> silhouette;

  /// All-background maps for `frame`.
  static MapSet background(const ViewFrame& frame);

  int resolution() const { return frame.resolution; }
  std::size_t pixel_count() const { return silhouette.size(); }
  std::size_t index(int col, int row) const {
    return static_cast<std::size_t>(row) * static_cast<std::size_t>(frame.resolution) +
           static_cast<std::size_t>(col);
  }
  bool defined(std::size_t idx) const { return silhouette[idx] != 0; }
  std::size_t defined_count() const;
  Vec3 normal_view(std::size_t idx) const { return {normal[idx][0], normal[idx][1], normal[idx][2]}; }

  void set(std::size_t idx, float d, const Vec3& view_normal);
  void clear(std::size_t idx);

  /// Throws ShapeError when raster sizes disagree with the frame resolution.
  void check_shape() const;
};

/// Background wherever the silhouette is false.
MapSet mask_with_silhouette(const MapSet& maps);

/// Silhouette grown by `pixels` in the 8-neighbourhood sense.
std::vector<std::uint8_t> dilate(const std::vector<std::uint8_t>& mask, int resolution, int pixels);

enum class SourceTag : std::uint8_t { front = 0, reflected = 1, back = 2 };

std::string_view to_string(SourceTag tag);
SourceTag parse_source_tag(std::string_view text);

struct OrientedPoint {
  Vec3 position;
  Vec3 normal;
  SourceTag tag = SourceTag::front;
  /// Lattice index the point came from, or -1 when unknown.
  std::int64_t pixel = -1;
};

struct OrientedPointCloud {
  std::vector<OrientedPoint> points;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
  std::vector<Vec3> positions() const;
  BoundingBox bounds() const;
};

/// One point per defined pixel, un-projected at the pixel center with its normal in
/// world coordinates.
OrientedPointCloud to_oriented_points(const MapSet& maps, SourceTag tag);

}  // namespace f2b
