#include "f2b/map_io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "f2b/errors.hpp"
#include "f2b/keyvalue.hpp"

namespace f2b {

namespace {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int k = 0; k < 4; ++k) out.push_back(static_cast<std::uint8_t>(v >> (8 * k)));
}

void put_f32(std::vector<std::uint8_t>& out, float f) { put_u32(out, std::bit_cast<std::uint32_t>(f)); }

std::uint32_t get_u32(std::span<const std::uint8_t> bytes, std::size_t at) {
  std::uint32_t v = 0;
  for (int k = 0; k < 4; ++k) v |= static_cast<std::uint32_t>(bytes[at + k]) << (8 * k);
  return v;
}

float get_f32(std::span<const std::uint8_t> bytes, std::size_t at) {
  return std::bit_cast<float>(get_u32(bytes, at));
}

Vec3 parse_vec3(const KeyValues& kv, const std::string& key) {
  const auto it = kv.find(key);
  if (it == kv.end()) throw ParseError("<frame>", 0, "missing key '" + key + "'");
  Vec3 v;
  std::size_t start = 0;
  for (int k = 0; k < 3; ++k) {
    const std::size_t comma = it->second.find(',', start);
    if ((k < 2) != (comma != std::string::npos)) throw ParseError("<frame>", 0, "'" + key + "' needs 3 components");
    v[k] = parse_number(it->second.substr(start, comma == std::string::npos ? std::string::npos : comma - start), key);
    start = comma + 1;
  }
  return v;
}

std::string format_vec3(const Vec3& v) {
  return format_exact(v.x()) + "," + format_exact(v.y()) + "," + format_exact(v.z());
}

const std::string& require(const KeyValues& kv, const std::string& key) {
  const auto it = kv.find(key);
  if (it == kv.end()) throw ParseError("<frame>", 0, "missing key '" + key + "'");
  return it->second;
}

}  // namespace

std::vector<std::uint8_t> encode_f2bm(const MapSet& maps) {
  maps.check_shape();
  const auto res = static_cast<std::uint32_t>(maps.resolution());
  std::vector<std::uint8_t> out = {'F', '2', 'B', 'M'};
  out.reserve(20 + maps.pixel_count() * kF2bmChannels * 4);
  put_u32(out, kF2bmVersion);
  put_u32(out, res);
  put_u32(out, res);
  put_u32(out, kF2bmChannels);
  for (std::size_t i = 0; i < maps.pixel_count(); ++i) {
    if (maps.defined(i)) {
      put_f32(out, maps.depth[i]);
      for (float c : maps.normal[i]) put_f32(out, c);
      put_f32(out, 1.0f);
    } else {
      for (std::uint32_t c = 0; c < kF2bmChannels; ++c) put_f32(out, 0.0f);
    }
  }
  return out;
}

MapSet decode_f2bm(std::span<const std::uint8_t> bytes, const ViewFrame& frame, const std::string& source) {
  if (bytes.size() < 20 || std::memcmp(bytes.data(), "F2BM", 4) != 0) {
    throw ParseError(source, 0, "not an F2BM file");
  }
  const std::uint32_t version = get_u32(bytes, 4);
  const std::uint32_t width = get_u32(bytes, 8);
  const std::uint32_t height = get_u32(bytes, 12);
  const std::uint32_t channels = get_u32(bytes, 16);
  if (version != kF2bmVersion) throw ParseError(source, 0, "unsupported F2BM version " + std::to_string(version));
  if (channels != kF2bmChannels) throw ParseError(source, 0, "expected 5 channels, got " + std::to_string(channels));
  const std::size_t expected = 20 + static_cast<std::size_t>(width) * height * channels * 4;
  if (bytes.size() != expected) throw ParseError(source, 0, "F2BM payload size mismatch");
  if (width != height || static_cast<int>(width) != frame.resolution) {
    throw ShapeError(source + ": raster " + std::to_string(width) + "x" + std::to_string(height) +
                     " does not match frame resolution " + std::to_string(frame.resolution));
  }
  MapSet maps = MapSet::background(frame);
  std::size_t at = 20;
  for (std::size_t i = 0; i < maps.pixel_count(); ++i, at += 20) {
    const float mask = get_f32(bytes, at + 16);
    if (mask == 1.0f) {
      maps.depth[i] = get_f32(bytes, at);
      maps.normal[i] = {get_f32(bytes, at + 4), get_f32(bytes, at + 8), get_f32(bytes, at + 12)};
      maps.silhouette[i] = 1;
    } else if (mask != 0.0f) {
      throw ParseError(source, 0, "mask channel must be 0 or 1 at pixel " + std::to_string(i));
    }
  }
  return maps;
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file_bytes(std::span<const std::uint8_t> bytes, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

void write_f2bm(const MapSet& maps, const std::filesystem::path& path) {
  write_file_bytes(encode_f2bm(maps), path);
}

MapSet read_f2bm(const std::filesystem::path& path, const ViewFrame& frame) {
  return decode_f2bm(read_file_bytes(path), frame, path.string());
}

void write_frame(const ViewFrame& frame, const std::filesystem::path& path) {
  KeyValues kv;
  kv["direction"] = format_vec3(frame.direction);
  kv["right"] = format_vec3(frame.right);
  kv["up"] = format_vec3(frame.up);
  kv["center"] = format_vec3(frame.center);
  kv["half_width"] = format_exact(frame.half_width);
  kv["resolution"] = std::to_string(frame.resolution);
  kv["near"] = format_exact(frame.near);
  kv["far"] = format_exact(frame.far);
  kv["mirrored_columns"] = frame.mirrored_columns ? "true" : "false";
  write_key_values(kv, path);
}

ViewFrame read_frame(const std::filesystem::path& path) {
  const KeyValues kv = read_key_values(path);
  ViewFrame f;
  f.direction = parse_vec3(kv, "direction");
  f.right = parse_vec3(kv, "right");
  f.up = parse_vec3(kv, "up");
  f.center = parse_vec3(kv, "center");
  f.half_width = parse_number(require(kv, "half_width"), "half_width");
  f.resolution = static_cast<int>(parse_integer(require(kv, "resolution"), "resolution"));
  f.near = parse_number(require(kv, "near"), "near");
  f.far = parse_number(require(kv, "far"), "far");
  f.mirrored_columns = parse_bool(require(kv, "mirrored_columns"), "mirrored_columns");
  f.validate();
  return f;
}

void write_depth_pfm(const MapSet& maps, const std::filesystem::path& path) {
  maps.check_shape();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  const int res = maps.resolution();
  out << "Pf\n" << res << ' ' << res << "\n-1.0\n";
  std::vector<std::uint8_t> row;
  // PFM stores rows bottom-to-top.
  for (int j = res - 1; j >= 0; --j) {
    row.clear();
    for (int i = 0; i < res; ++i) {
      const std::size_t idx = maps.index(i, j);
      put_f32(row, maps.defined(idx) ? maps.depth[idx] : 0.0f);
    }
    out.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size()));
  }
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace f2b
