#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "f2b/maps.hpp"

namespace f2b {

/// F2BM raster file:
///
///   bytes 0-3   "F2BM"
///   u32         version (1)
///   u32         width
///   u32         height
///   u32         channels (5: depth, nx, ny, nz, mask)
///   f32[...]    pixel-interleaved, row-major samples, little-endian
///
/// The mask channel is exactly 0.0 or 1.0; background depth and normal channels are 0.0.
/// The file carries no camera; the frame travels in a `.frame` sidecar.
inline constexpr std::uint32_t kF2bmVersion = 1;
inline constexpr std::uint32_t kF2bmChannels = 5;

std::vector<std::uint8_t> encode_f2bm(const MapSet& maps);
MapSet decode_f2bm(std::span<const std::uint8_t> bytes, const ViewFrame& frame,
                   const std::string& source = "<f2bm>");

void write_f2bm(const MapSet& maps, const std::filesystem::path& path);
MapSet read_f2bm(const std::filesystem::path& path, const ViewFrame& frame);

/// Camera sidecar as exact key=value text.
void write_frame(const ViewFrame& frame, const std::filesystem::path& path);
ViewFrame read_frame(const std::filesystem::path& path);

/// Depth channel as a little-endian greyscale PFM (background written as 0).
void write_depth_pfm(const MapSet& maps, const std::filesystem::path& path);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(std::span<const std::uint8_t> bytes, const std::filesystem::path& path);

}  // namespace f2b
