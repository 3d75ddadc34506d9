#include "f2b/cloud_io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string_view>

#include "f2b/errors.hpp"

namespace f2b {

void write_cloud(std::ostream& out, const OrientedPointCloud& cloud) {
  char buf[256];
  for (const OrientedPoint& p : cloud.points) {
    const int len = std::snprintf(buf, sizeof buf, "%.9g %.9g %.9g %.9g %.9g %.9g ", p.position.x(),
                                  p.position.y(), p.position.z(), p.normal.x(), p.normal.y(), p.normal.z());
    out.write(buf, len);
    out << to_string(p.tag) << '\n';
  }
}

std::string format_cloud(const OrientedPointCloud& cloud) {
  std::ostringstream out;
  write_cloud(out, cloud);
  return out.str();
}

void save_cloud(const OrientedPointCloud& cloud, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  write_cloud(out, cloud);
  if (!out) throw IoError("failed writing " + path.string());
}

OrientedPointCloud parse_cloud(std::istream& in, const std::string& source) {
  OrientedPointCloud cloud;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view(line);
    if (const auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    std::istringstream fields{std::string(view)};
    std::string tokens[8];
    int count = 0;
    while (count < 8 && fields >> tokens[count]) ++count;
    if (count == 0) continue;
    if (count != 7) throw ParseError(source, line_no, "expected 'x y z nx ny nz tag'");
    double v[6];
    for (int k = 0; k < 6; ++k) {
      std::string_view t = tokens[k];
      if (!t.empty() && t.front() == '+') t.remove_prefix(1);
      const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v[k]);
      if (ec != std::errc() || ptr != t.data() + t.size()) {
        throw ParseError(source, line_no, "bad number '" + tokens[k] + "'");
      }
    }
    OrientedPoint p;
    p.position = Vec3(v[0], v[1], v[2]);
    p.normal = Vec3(v[3], v[4], v[5]);
    try {
      p.tag = parse_source_tag(tokens[6]);
    } catch (const ParseError&) {
      throw ParseError(source, line_no, "unknown source tag '" + tokens[6] + "'");
    }
    cloud.points.push_back(p);
  }
  return cloud;
}

OrientedPointCloud load_cloud(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return parse_cloud(in, path.string());
}

}  // namespace f2b
