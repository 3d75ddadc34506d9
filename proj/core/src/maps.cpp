#include "f2b/maps.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "f2b/errors.hpp"

namespace f2b {

namespace {
constexpr float kNaN = std::numeric_limits<float>::quiet_NaN();
}

MapSet MapSet::background(const ViewFrame& frame) {
  MapSet m;
  m.frame = frame;
  const std::size_t n = frame.pixel_count();
  m.depth.assign(n, kNaN);
  m.normal.assign(n, {kNaN, kNaN, kNaN});
  m.silhouette.assign(n, 0);
  return m;
}

std::size_t MapSet::defined_count() const {
  std::size_t count = 0;
  for (std::uint8_t s : silhouette) count += s != 0;
  return count;
}

void MapSet::set(std::size_t idx, float d, const Vec3& view_normal) {
  depth[idx] = d;
  normal[idx] = {static_cast<float>(view_normal.x()), static_cast<float>(view_normal.y()),
                 static_cast<float>(view_normal.z())};
  silhouette[idx] = 1;
}

void MapSet::clear(std::size_t idx) {
  depth[idx] = kNaN;
  normal[idx] = {kNaN, kNaN, kNaN};
  silhouette[idx] = 0;
}

void MapSet::check_shape() const {
  const std::size_t n = frame.pixel_count();
  if (depth.size() != n || normal.size() != n || silhouette.size() != n) {
    throw ShapeError("map rasters do not match resolution " + std::to_string(frame.resolution));
  }
}

MapSet mask_with_silhouette(const MapSet& maps) {
  maps.check_shape();
  MapSet out = maps;
  for (std::size_t i = 0; i < out.pixel_count(); ++i) {
    if (!out.defined(i)) out.clear(i);
  }
  return out;
}

std::vector<std::uint8_t> dilate(const std::vector<std::uint8_t>& mask, int resolution, int pixels) {
  std::vector<std::uint8_t> current = mask;
  for (int step = 0; step < pixels; ++step) {
    std::vector<std::uint8_t> next = current;
    for (int j = 0; j < resolution; ++j) {
      for (int i = 0; i < resolution; ++i) {
        if (current[static_cast<std::size_t>(j) * resolution + i]) continue;
        bool hit = false;
        for (int dj = -1; dj <= 1 && !hit; ++dj) {
          for (int di = -1; di <= 1 && !hit; ++di) {
            const int ni = i + di, nj = j + dj;
            if (ni < 0 || nj < 0 || ni >= resolution || nj >= resolution) continue;
            hit = current[static_cast<std::size_t>(nj) * resolution + ni] != 0;
          }
        }
        if (hit) next[static_cast<std::size_t>(j) * resolution + i] = 1;
      }
    }
    current.swap(next);
  }
  return current;
}

std::string_view to_string(SourceTag tag) {
  switch (tag) {
    case SourceTag::front: return "front";
    case SourceTag::reflected: return "reflected";
    case SourceTag::back: return "back";
  }
  return "front";
}

SourceTag parse_source_tag(std::string_view text) {
  if (text == "front") return SourceTag::front;
  if (text == "reflected") return SourceTag::reflected;
  if (text == "back") return SourceTag::back;
  throw ParseError("<cloud>", 0, "unknown source tag '" + std::string(text) + "'");
}

std::vector<Vec3> OrientedPointCloud::positions() const {
  std::vector<Vec3> out;
  out.reserve(points.size());
  for (const auto& p : points) out.push_back(p.position);
  return out;
}

BoundingBox OrientedPointCloud::bounds() const {
  BoundingBox box;
  for (const auto& p : points) box.extend(p.position);
  return box;
}

OrientedPointCloud to_oriented_points(const MapSet& maps, SourceTag tag) {
  maps.check_shape();
  OrientedPointCloud cloud;
  const int res = maps.resolution();
  for (int j = 0; j < res; ++j) {
    for (int i = 0; i < res; ++i) {
      const std::size_t idx = maps.index(i, j);
      if (!maps.defined(idx) || !std::isfinite(maps.depth[idx])) continue;
      OrientedPoint p;
      p.position = maps.frame.pixel_center(i, j, maps.depth[idx]);
      Vec3 n = maps.frame.to_world(maps.normal_view(idx));
      const double len = n.norm();
      p.normal = len > 0.0 ? Vec3(n / len) : maps.frame.toward_viewer();
      p.tag = tag;
      p.pixel = static_cast<std::int64_t>(idx);
      cloud.points.push_back(p);
    }
  }
  return cloud;
}

}  // namespace f2b
