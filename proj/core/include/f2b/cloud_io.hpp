#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "f2b/maps.hpp"

namespace f2b {

/// Oriented point cloud text: one `x y z nx ny nz tag` line per point, 9 significant
/// digits, tag one of front / reflected / back. Blank lines and `#` comments are skipped.
void write_cloud(std::ostream& out, const OrientedPointCloud& cloud);
void save_cloud(const OrientedPointCloud& cloud, const std::filesystem::path& path);
std::string format_cloud(const OrientedPointCloud& cloud);

OrientedPointCloud parse_cloud(std::istream& in, const std::string& source = "<cloud>");
OrientedPointCloud load_cloud(const std::filesystem::path& path);

}  // namespace f2b
