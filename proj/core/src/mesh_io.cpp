#include "f2b/mesh_io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <sstream>
#include <string_view>
#include <vector>

#include "f2b/errors.hpp"

namespace f2b {

namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> tokens;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    const std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i > start) tokens.push_back(line.substr(start, i - start));
  }
  return tokens;
}

// Values are held at f32 precision so that 9-digit output reloads bit-exactly.
bool parse_double(std::string_view token, double& out) {
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  float value = 0.0f;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  out = value;
  return ec == std::errc() && ptr == token.data() + token.size();
}

bool parse_long(std::string_view token, long& out) {
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), out);
  return ec == std::errc() && ptr == token.data() + token.size();
}

std::string_view strip_comment(std::string_view line) {
  const auto hash = line.find('#');
  return hash == std::string_view::npos ? line : line.substr(0, hash);
}

struct PendingFace {
  std::vector<long> corners;
  std::size_t line;
};

TriangleMesh finish(std::vector<Vec3> vertices, const std::vector<PendingFace>& faces,
                    const std::string& source) {
  const auto count = static_cast<long>(vertices.size());
  std::vector<Triangle> triangles;
  for (const PendingFace& face : faces) {
    for (long idx : face.corners) {
      if (idx < 0 || idx >= count) {
        throw ParseError(source, face.line,
                         "face references vertex " + std::to_string(idx + 1) + " but only " +
                             std::to_string(count) + " vertices exist");
      }
    }
    for (std::size_t k = 1; k + 1 < face.corners.size(); ++k) {
      triangles.push_back({static_cast<std::uint32_t>(face.corners[0]),
                           static_cast<std::uint32_t>(face.corners[k]),
                           static_cast<std::uint32_t>(face.corners[k + 1])});
    }
  }
  TriangleMesh mesh = make_mesh(std::move(vertices), std::move(triangles));
  if (mesh.empty()) throw EmptyInputError(source + ": mesh has no non-degenerate triangles");
  return mesh;
}

}  // namespace

TriangleMesh parse_obj(std::istream& in, const std::string& source) {
  std::vector<Vec3> vertices;
  std::vector<PendingFace> faces;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto tokens = split_ws(strip_comment(raw));
    if (tokens.empty()) continue;
    if (tokens[0] == "v") {
      if (tokens.size() < 4) throw ParseError(source, line_no, "vertex needs 3 coordinates");
      Vec3 p;
      for (int k = 0; k < 3; ++k) {
        if (!parse_double(tokens[k + 1], p[k])) {
          throw ParseError(source, line_no, "bad vertex coordinate '" + std::string(tokens[k + 1]) + "'");
        }
      }
      vertices.push_back(p);
    } else if (tokens[0] == "f") {
      if (tokens.size() < 4) throw ParseError(source, line_no, "face needs at least 3 corners");
      PendingFace face{{}, line_no};
      for (std::size_t k = 1; k < tokens.size(); ++k) {
        const std::string_view corner = tokens[k].substr(0, tokens[k].find('/'));
        long idx = 0;
        if (!parse_long(corner, idx) || idx == 0) {
          throw ParseError(source, line_no, "bad face index '" + std::string(tokens[k]) + "'");
        }
        // Negative indices are relative to the vertices read so far.
        face.corners.push_back(idx > 0 ? idx - 1 : static_cast<long>(vertices.size()) + idx);
      }
      faces.push_back(std::move(face));
    }
  }
  if (vertices.empty() || faces.empty()) throw EmptyInputError(source + ": no geometry");
  return finish(std::move(vertices), faces, source);
}

TriangleMesh parse_off(std::istream& in, const std::string& source) {
  std::string raw;
  std::size_t line_no = 0;
  // Returns the next non-empty line's tokens, or an empty vector at EOF.
  auto next_tokens = [&]() {
    while (std::getline(in, raw)) {
      ++line_no;
      auto tokens = split_ws(strip_comment(raw));
      if (!tokens.empty()) return tokens;
    }
    return std::vector<std::string_view>{};
  };

  auto tokens = next_tokens();
  if (tokens.empty()) throw EmptyInputError(source + ": empty file");
  std::string_view header = tokens[0];
  if (header.size() < 3 || header.substr(header.size() - 3) != "OFF") {
    throw ParseError(source, line_no, "missing OFF header");
  }
  tokens.erase(tokens.begin());
  if (tokens.empty()) tokens = next_tokens();
  long nv = 0, nf = 0;
  if (tokens.size() < 2 || !parse_long(tokens[0], nv) || !parse_long(tokens[1], nf) || nv < 0 || nf < 0) {
    throw ParseError(source, line_no, "bad OFF counts line");
  }

  std::vector<Vec3> vertices;
  vertices.reserve(static_cast<std::size_t>(nv));
  for (long v = 0; v < nv; ++v) {
    tokens = next_tokens();
    if (tokens.size() < 3) throw ParseError(source, line_no, "vertex needs 3 coordinates");
    Vec3 p;
    for (int k = 0; k < 3; ++k) {
      if (!parse_double(tokens[k], p[k])) {
        throw ParseError(source, line_no, "bad vertex coordinate '" + std::string(tokens[k]) + "'");
      }
    }
    vertices.push_back(p);
  }
  std::vector<PendingFace> faces;
  for (long f = 0; f < nf; ++f) {
    tokens = next_tokens();
    long k = 0;
    if (tokens.empty() || !parse_long(tokens[0], k) || k < 3 ||
        tokens.size() < static_cast<std::size_t>(k) + 1) {
      throw ParseError(source, line_no, "bad face record");
    }
    PendingFace face{{}, line_no};
    for (long c = 0; c < k; ++c) {
      long idx = 0;
      if (!parse_long(tokens[static_cast<std::size_t>(c) + 1], idx)) {
        throw ParseError(source, line_no, "bad face index");
      }
      face.corners.push_back(idx);
    }
    faces.push_back(std::move(face));
  }
  if (vertices.empty() || faces.empty()) throw EmptyInputError(source + ": no geometry");
  return finish(std::move(vertices), faces, source);
}

TriangleMesh load_mesh(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open mesh file " + path.string());
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  if (ext == ".obj") return parse_obj(in, path.string());
  if (ext == ".off") return parse_off(in, path.string());

  std::string first;
  std::getline(in, first);
  in.clear();
  in.seekg(0);
  if (first.find("OFF") != std::string::npos) return parse_off(in, path.string());
  return parse_obj(in, path.string());
}

void write_obj(const TriangleMesh& mesh, std::ostream& out) {
  char buf[128];
  for (const Vec3& v : mesh.vertices) {
    std::snprintf(buf, sizeof buf, "v %.9g %.9g %.9g\n", v.x(), v.y(), v.z());
    out << buf;
  }
  const bool with_normals = !mesh.normals.empty();
  for (const Vec3& n : mesh.normals) {
    std::snprintf(buf, sizeof buf, "vn %.9g %.9g %.9g\n", n.x(), n.y(), n.z());
    out << buf;
  }
  for (const Triangle& t : mesh.triangles) {
    if (with_normals) {
      out << "f " << t[0] + 1 << "//" << t[0] + 1 << ' ' << t[1] + 1 << "//" << t[1] + 1 << ' '
          << t[2] + 1 << "//" << t[2] + 1 << '\n';
    } else {
      out << "f " << t[0] + 1 << ' ' << t[1] + 1 << ' ' << t[2] + 1 << '\n';
    }
  }
}

void save_obj(const TriangleMesh& mesh, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  write_obj(mesh, out);
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace f2b
