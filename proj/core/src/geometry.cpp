#include "f2b/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "f2b/errors.hpp"
#include "f2b/random.hpp"

namespace f2b {

BoundingBox BoundingBox::of(std::span<const Vec3> points) {
  BoundingBox box;
  for (const Vec3& p : points) box.extend(p);
  return box;
}

Vec3 TriangleMesh::face_cross(std::size_t face) const {
  const Triangle& t = triangles[face];
  const Vec3& a = vertices[t[0]];
  return (vertices[t[1]] - a).cross(vertices[t[2]] - a);
}

Vec3 TriangleMesh::face_normal(std::size_t face) const {
  const Vec3 c = face_cross(face);
  const double len = c.norm();
  return len > 0.0 ? Vec3(c / len) : Vec3::Zero();
}

double TriangleMesh::face_area(std::size_t face) const { return 0.5 * face_cross(face).norm(); }

double TriangleMesh::surface_area() const {
  double total = 0.0;
  for (std::size_t f = 0; f < triangles.size(); ++f) total += face_area(f);
  return total;
}

BoundingBox TriangleMesh::bounds() const { return BoundingBox::of(vertices); }

TriangleMesh make_mesh(std::vector<Vec3> vertices, std::vector<Triangle> triangles,
                       std::vector<Vec3> normals) {
  if (!normals.empty() && normals.size() != vertices.size()) {
    throw ShapeError("vertex normal count " + std::to_string(normals.size()) +
                     " does not match vertex count " + std::to_string(vertices.size()));
  }
  TriangleMesh mesh;
  mesh.vertices = std::move(vertices);
  mesh.normals = std::move(normals);
  for (Vec3& n : mesh.normals) {
    const double len = n.norm();
    if (len > 0.0) n /= len;
  }
  mesh.triangles.reserve(triangles.size());
  const auto count = static_cast<std::uint32_t>(mesh.vertices.size());
  for (std::size_t f = 0; f < triangles.size(); ++f) {
    const Triangle& t = triangles[f];
    for (std::uint32_t idx : t) {
      if (idx >= count) {
        throw ShapeError("triangle " + std::to_string(f) + " references vertex " +
                         std::to_string(idx) + " of " + std::to_string(count));
      }
    }
    const Vec3& a = mesh.vertices[t[0]];
    const double area = 0.5 * (mesh.vertices[t[1]] - a).cross(mesh.vertices[t[2]] - a).norm();
    if (area > kDegenerateArea) mesh.triangles.push_back(t);
  }
  return mesh;
}

TriangleMesh transformed(const TriangleMesh& mesh, const Similarity& transform) {
  TriangleMesh out = mesh;
  for (Vec3& v : out.vertices) v = transform.apply(v);
  if (transform.scale < 0.0) {
    for (Vec3& n : out.normals) n = -n;
  }
  return out;
}

TriangleMesh rigid_transformed(const TriangleMesh& mesh, const Eigen::Matrix3d& rotation,
                               const Vec3& translation) {
  TriangleMesh out = mesh;
  for (Vec3& v : out.vertices) v = rotation * v + translation;
  for (Vec3& n : out.normals) n = rotation * n;
  return out;
}

NormalizedMesh normalize_mesh(const TriangleMesh& mesh) {
  if (mesh.vertices.empty()) throw EmptyInputError("cannot normalize an empty mesh");
  const BoundingBox box = mesh.bounds();
  const double diag = box.diagonal();
  if (!(diag > 0.0) || !std::isfinite(diag)) {
    throw DegenerateGeometryError("mesh bounding box has zero diagonal");
  }
  Similarity t;
  t.scale = 1.0 / diag;
  t.translation = -box.center() * t.scale;
  return {transformed(mesh, t), t};
}

std::vector<SurfaceSample> sample_surface(const TriangleMesh& mesh, std::size_t n, std::uint64_t seed) {
  if (mesh.empty()) throw EmptyInputError("cannot sample an empty mesh");
  std::vector<double> cumulative(mesh.triangle_count());
  double total = 0.0;
  for (std::size_t f = 0; f < mesh.triangle_count(); ++f) {
    total += mesh.face_area(f);
    cumulative[f] = total;
  }
  if (!(total > 0.0)) throw EmptyInputError("mesh has zero surface area");

  Rng rng(seed);
  std::vector<SurfaceSample> samples;
  samples.reserve(n);
  for (std::size_t s = 0; s < n; ++s) {
    const double target = rng.uniform() * total;
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), target);
    if (it == cumulative.end()) --it;
    const auto face = static_cast<std::uint32_t>(it - cumulative.begin());

    const double r1 = std::sqrt(rng.uniform());
    const double r2 = rng.uniform();
    const double wa = 1.0 - r1;
    const double wb = r1 * (1.0 - r2);
    const double wc = r1 * r2;
    const Triangle& t = mesh.triangles[face];
    SurfaceSample sample;
    sample.face = face;
    sample.position = wa * mesh.vertices[t[0]] + wb * mesh.vertices[t[1]] + wc * mesh.vertices[t[2]];
    if (!mesh.normals.empty()) {
      Vec3 nrm = wa * mesh.normals[t[0]] + wb * mesh.normals[t[1]] + wc * mesh.normals[t[2]];
      const double len = nrm.norm();
      sample.normal = len > 0.0 ? Vec3(nrm / len) : mesh.face_normal(face);
    } else {
      sample.normal = mesh.face_normal(face);
    }
    samples.push_back(sample);
  }
  return samples;
}

// Ericson, Real-Time Collision Detection, 5.1.5.
Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
  const Vec3 ab = b - a;
  const Vec3 ac = c - a;
  const Vec3 ap = p - a;
  const double d1 = ab.dot(ap);
  const double d2 = ac.dot(ap);
  if (d1 <= 0.0 && d2 <= 0.0) return a;

  const Vec3 bp = p - b;
  const double d3 = ab.dot(bp);
  const double d4 = ac.dot(bp);
  if (d3 >= 0.0 && d4 <= d3) return b;

  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) {
    const double v = d1 / (d1 - d3);
    return a + v * ab;
  }

  const Vec3 cp = p - c;
  const double d5 = ab.dot(cp);
  const double d6 = ac.dot(cp);
  if (d6 >= 0.0 && d5 <= d6) return c;

  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) {
    const double w = d2 / (d2 - d6);
    return a + w * ac;
  }

  const double va = d3 * d6 - d5 * d4;
  if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
    const double w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
    return b + w * (c - b);
  }

  const double denom = 1.0 / (va + vb + vc);
  const double v = vb * denom;
  const double w = vc * denom;
  return a + ab * v + ac * w;
}

}  // namespace f2b
