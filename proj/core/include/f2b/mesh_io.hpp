#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "f2b/geometry.hpp"

namespace f2b {

/// Reads an OBJ or OFF file (chosen by extension, falling back to content sniffing).
/// Polygons are fan-triangulated and degenerate triangles dropped.
TriangleMesh load_mesh(const std::filesystem::path& path);

TriangleMesh parse_obj(std::istream& in, const std::string& source_name = "<obj>");
TriangleMesh parse_off(std::istream& in, const std::string& source_name = "<off>");

/// Writes positions with 9 significant digits; vertex normals are written when present.
void save_obj(const TriangleMesh& mesh, const std::filesystem::path& path);
void write_obj(const TriangleMesh& mesh, std::ostream& out);

}  // namespace f2b
