#include "f2b/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "f2b/errors.hpp"

namespace f2b {

void FusionParams::validate() const {
  if (!(min_separation > 0.0) || !(outlier_threshold > 0.0) || neighbor_radius <= 0) {
    throw ConfigError("fusion parameters must be positive");
  }
}

namespace {

constexpr double kNone = std::numeric_limits<double>::quiet_NaN();

// One source map re-expressed on the front lattice: depth measured along the front
// view direction from the front near plane, normals in world space.
struct Layer {
  SourceTag tag;
  std::vector<double> t;
  std::vector<Vec3> normal;

  bool has(std::size_t i) const { return !std::isnan(t[i]); }
};

Layer make_layer(const MapSet& maps, SourceTag tag, const ViewFrame& front_frame) {
  Layer layer{tag, std::vector<double>(maps.pixel_count(), kNone), std::vector<Vec3>(maps.pixel_count(), Vec3::Zero())};
  const bool flipped = tag == SourceTag::back;
  for (std::size_t i = 0; i < maps.pixel_count(); ++i) {
    if (!maps.defined(i) || !std::isfinite(maps.depth[i])) continue;
    const double d = maps.depth[i];
    layer.t[i] = flipped ? -d - 2.0 * front_frame.near : d;
    const Vec3 n = maps.frame.to_world(maps.normal_view(i));
    const double len = n.norm();
    layer.normal[i] = len > 0.0 ? Vec3(n / len) : Vec3::Zero();
  }
  return layer;
}

// Same-map outlier test on a depth raster (NaN = absent), decided simultaneously.
std::vector<std::uint8_t> outlier_mask(const std::vector<double>& depth, int res, double limit) {
  std::vector<std::uint8_t> drop(depth.size(), 0);
  for (int j = 0; j < res; ++j) {
    for (int i = 0; i < res; ++i) {
      const std::size_t idx = static_cast<std::size_t>(j) * res + i;
      if (std::isnan(depth[idx])) continue;
      int neighbours = 0;
      bool close = false;
      const int di[4] = {-1, 1, 0, 0};
      const int dj[4] = {0, 0, -1, 1};
      for (int k = 0; k < 4; ++k) {
        const int ni = i + di[k], nj = j + dj[k];
        if (ni < 0 || nj < 0 || ni >= res || nj >= res) continue;
        const double nd = depth[static_cast<std::size_t>(nj) * res + ni];
        if (std::isnan(nd)) continue;
        ++neighbours;
        if (std::abs(nd - depth[idx]) <= limit) close = true;
      }
      if (neighbours == 0 || !close) drop[idx] = 1;
    }
  }
  return drop;
}

// Smallest t' >= t outside every open interval (c - gap, c + gap).
double push_clear(double t, std::vector<double>& centers, double gap) {
  std::sort(centers.begin(), centers.end());
  bool moved = true;
  while (moved) {
    moved = false;
    for (double c : centers) {
      if (t > c - gap && t < c + gap) {
        t = c + gap;
        moved = true;
      }
    }
  }
  return t;
}

}  // namespace

OrientedPointCloud fuse(const MapSet& front, const std::optional<MapSet>& reflected, const MapSet& back,
                        const FusionParams& params, FusionStats* stats) {
  params.validate();
  front.check_shape();
  back.check_shape();
  const ViewFrame& frame = front.frame;
  if (!same_lattice(back.frame, opposite_frame(frame)) || back.frame.direction.dot(frame.direction) > 0.0) {
    throw ShapeError("back maps are not on the opposite lattice");
  }
  if (reflected) {
    reflected->check_shape();
    if (!same_lattice(reflected->frame, frame) || reflected->frame.direction.dot(frame.direction) < 0.0) throw ShapeError("reflected maps are not on the front lattice");
  }

  FusionStats local;
  FusionStats& st = stats ? *stats : local;
  st = {};

  const int res = frame.resolution;
  const std::size_t n = frame.pixel_count();
  const double ps = frame.pixel_size();

  std::vector<Layer> layers;
  layers.push_back(make_layer(front, SourceTag::front, frame));
  if (reflected) layers.push_back(make_layer(*reflected, SourceTag::reflected, frame));
  layers.push_back(make_layer(back, SourceTag::back, frame));
  Layer& f = layers.front();
  Layer& b = layers.back();
  Layer* r = reflected ? &layers[1] : nullptr;

  // Rule 1: nothing may sit in front of the front surface.
  for (std::size_t i = 0; i < n; ++i) {
    if (!f.has(i)) continue;
    if (r && r->has(i) && r->t[i] < f.t[i]) {
      r->t[i] = kNone;
      ++st.culled_reflected;
    }
    if (b.has(i) && b.t[i] < f.t[i]) {
      b.t[i] = kNone;
      ++st.culled_back_front;
    }
  }
  // Rule 2: reflected data outranks predicted back data.
  if (r) {
    for (std::size_t i = 0; i < n; ++i) {
      if (r->has(i) && b.has(i) && b.t[i] < r->t[i]) {
        b.t[i] = kNone;
        ++st.culled_back_reflected;
      }
    }
  }

  // Rule 3: separate opposite-oriented neighbours. Orientation is judged against the
  // front view; only back-facing points move, so the pass is order independent.
  const Vec3 toward = frame.toward_viewer();
  auto facing = [&](const Layer& l, std::size_t i) {
    const double c = l.normal[i].dot(toward);
    return c > 0.0 ? 1 : (c < 0.0 ? -1 : 0);
  };
  const int reach = params.neighbor_radius - 1;
  const double gap = params.min_separation * ps;
  std::vector<std::vector<double>> pushed(layers.size());
  std::vector<double> centers;
  for (std::size_t li = 0; li < layers.size(); ++li) {
    const Layer& l = layers[li];
    pushed[li] = l.t;
    for (int j = 0; j < res; ++j) {
      for (int i = 0; i < res; ++i) {
        const std::size_t idx = static_cast<std::size_t>(j) * res + i;
        if (!l.has(idx) || facing(l, idx) >= 0) continue;
        centers.clear();
        for (int dj = -reach; dj <= reach; ++dj) {
          for (int di = -reach; di <= reach; ++di) {
            const int ni = i + di, nj = j + dj;
            if (ni < 0 || nj < 0 || ni >= res || nj >= res) continue;
            const std::size_t nidx = static_cast<std::size_t>(nj) * res + ni;
            for (const Layer& o : layers) {
              if (o.has(nidx) && facing(o, nidx) > 0) centers.push_back(o.t[nidx]);
            }
          }
        }
        if (centers.empty()) continue;
        const double moved = push_clear(l.t[idx], centers, gap);
        if (moved != l.t[idx]) {
          pushed[li][idx] = moved;
          ++st.displaced;
        }
      }
    }
  }
  for (std::size_t li = 0; li < layers.size(); ++li) layers[li].t = std::move(pushed[li]);

  // Outliers, per source map.
  const double limit = params.outlier_threshold * ps;
  for (Layer& l : layers) {
    const auto drop = outlier_mask(l.t, res, limit);
    for (std::size_t i = 0; i < n; ++i) {
      if (drop[i]) {
        l.t[i] = kNone;
        ++st.outliers;
      }
    }
  }

  OrientedPointCloud cloud;
  for (const SourceTag tag : {SourceTag::front, SourceTag::reflected, SourceTag::back}) {
    for (const Layer& l : layers) {
      if (l.tag != tag) continue;
      for (int j = 0; j < res; ++j) {
        for (int i = 0; i < res; ++i) {
          const std::size_t idx = static_cast<std::size_t>(j) * res + i;
          if (!l.has(idx)) continue;
          OrientedPoint p;
          p.position = frame.pixel_center(i, j, l.t[idx]);
          p.normal = l.normal[idx].squaredNorm() > 0.0 ? l.normal[idx] : toward;
          p.tag = tag;
          p.pixel = static_cast<std::int64_t>(idx);
          cloud.points.push_back(p);
        }
      }
    }
  }
  return cloud;
}

MapSet remove_outliers(const MapSet& maps, double threshold_px) {
  maps.check_shape();
  std::vector<double> depth(maps.pixel_count(), kNone);
  for (std::size_t i = 0; i < maps.pixel_count(); ++i) {
    if (maps.defined(i) && std::isfinite(maps.depth[i])) depth[i] = maps.depth[i];
  }
  const auto drop = outlier_mask(depth, maps.resolution(), threshold_px * maps.frame.pixel_size());
  MapSet out = maps;
  for (std::size_t i = 0; i < out.pixel_count(); ++i) {
    if (drop[i]) out.clear(i);
  }
  return out;
}

}  // namespace f2b
