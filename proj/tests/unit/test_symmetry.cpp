#include <doctest.h>

#include <cmath>
#include <numbers>

#include "f2b/random.hpp"
#include "f2b/render.hpp"
#include "f2b/symmetry.hpp"
#include "f2b_test/shapes.hpp"

using namespace f2b;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

OrientedPoint op(const Vec3& p, const Vec3& n) { return {p, n.normalized(), SourceTag::front, -1}; }

const SymmetryPlane kYz = SymmetryPlane::from_normal_offset(Vec3::UnitX(), 0.0);

// Two small patches facing away from each other across x = 0: every cross pair is
// (nearly) a mirror pair.
OrientedPointCloud mirrored_patches(std::size_t half, std::uint64_t seed) {
  Rng rng(seed);
  OrientedPointCloud cloud;
  for (std::size_t i = 0; i < half; ++i) {
    const double y = rng.uniform(-0.05, 0.05);
    const double z = rng.uniform(-0.05, 0.05);
    cloud.points.push_back(op(Vec3(1, y, z), Vec3(1, 0.2 * y, 0.2 * z)));
    cloud.points.push_back(op(Vec3(-1, y, z), Vec3(-1, 0.2 * y, 0.2 * z)));
  }
  return cloud;
}

bool near_plane(const SymmetryPlane& p, const SymmetryPlane& truth, double angle, double offset) {
  if (plane_angle(p, truth) > angle) return false;
  const double s = p.normal().dot(truth.normal()) >= 0.0 ? 1.0 : -1.0;
  return std::abs(s * p.offset - truth.offset) <= offset;
}

struct Rendered {
  TriangleMesh mesh;
  MapSet maps;
};

Rendered render_view(const TriangleMesh& raw, double az, double el, int res = 137) {
  Rendered r;
  r.mesh = normalize_mesh(raw).mesh;
  r.maps = render_maps(r.mesh, fit_frame(r.mesh, direction_from_angles(az, el), res));
  return r;
}

}  // namespace

TEST_CASE("plane parameterization and canonical form") {
  const SymmetryPlane p = SymmetryPlane::from_normal_offset(Vec3(0, 0, -2), -0.5);
  CHECK(p.offset == 0.5);
  CHECK((p.normal() - Vec3(0, 0, 1)).norm() < 1e-15);
  const SymmetryPlane q = SymmetryPlane::from_normal_offset(Vec3(-1, 0, 0), 0.0);
  CHECK((q.normal() - Vec3(1, 0, 0)).norm() < 1e-15);
  for (std::uint64_t s = 0; s < 50; ++s) {
    const Vec3 n = test::random_direction(s);
    const SymmetryPlane a = SymmetryPlane::from_normal_offset(n, 0.3 - 0.01 * static_cast<double>(s));
    CHECK(a.offset >= 0.0);
    CHECK(std::abs(a.normal().norm() - 1.0) < 1e-14);
    CHECK(plane_distance(a, SymmetryPlane::from_normal_offset(-n, -(0.3 - 0.01 * static_cast<double>(s))), 1.0) <
          1e-12);
  }
}

TEST_CASE("reflection is an involution") {
  Rng rng(3);
  for (std::uint64_t s = 0; s < 100; ++s) {
    const SymmetryPlane plane = SymmetryPlane::from_normal_offset(test::random_direction(s), rng.uniform(-1, 1));
    const Vec3 p(rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2));
    CHECK((plane.reflect_point(plane.reflect_point(p)) - p).norm() <= 1e-12);
    CHECK(std::abs(plane.signed_distance(plane.reflect_point(p)) + plane.signed_distance(p)) <= 1e-12);
  }
}

TEST_CASE("pair_plane examples") {
  SUBCASE("midplane") {
    const auto p = pair_plane(op(Vec3(1, 0, 0), Vec3(1, 0, 0)), op(Vec3(-1, 0, 0), Vec3(-1, 0, 0)));
    REQUIRE(p);
    CHECK(std::abs(std::abs(p->normal().x()) - 1.0) < 1e-15);
    CHECK(p->offset == 0.0);
  }
  SUBCASE("offset plane") {
    const auto p = pair_plane(op(Vec3(0, 1, 2), Vec3(0, -1, 0)), op(Vec3(0, 3, 2), Vec3(0, 1, 0)));
    REQUIRE(p);
    CHECK((p->normal() - Vec3(0, 1, 0)).norm() < 1e-15);
    CHECK(p->offset == doctest::Approx(2.0).epsilon(1e-15));
  }
  SUBCASE("anti-consistent normals are pruned") {
    CHECK_FALSE(pair_plane(op(Vec3(1, 0, 0), Vec3(1, 0, 0)), op(Vec3(-1, 0, 0), Vec3(1, 0, 0))));
  }
  SUBCASE("coincident points") {
    CHECK_FALSE(pair_plane(op(Vec3(1, 2, 3), Vec3(1, 0, 0)), op(Vec3(1, 2, 3), Vec3(1, 0, 0))));
  }
  SUBCASE("60 degree normal tolerance") {
    const Vec3 b_normal = Vec3(-std::cos(59 * kDeg), std::sin(59 * kDeg), 0);
    CHECK(pair_plane(op(Vec3(1, 0, 0), Vec3(1, 0, 0)), op(Vec3(-1, 0, 0), b_normal)));
    const Vec3 c_normal = Vec3(-std::cos(61 * kDeg), std::sin(61 * kDeg), 0);
    CHECK_FALSE(pair_plane(op(Vec3(1, 0, 0), Vec3(1, 0, 0)), op(Vec3(-1, 0, 0), c_normal)));
  }
}

TEST_CASE("pair_plane is symmetric in its arguments") {
  Rng rng(9);
  for (std::uint64_t s = 0; s < 200; ++s) {
    const OrientedPoint a = op(Vec3(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)), test::random_direction(s));
    const OrientedPoint b = op(Vec3(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)), test::random_direction(s + 1000));
    const auto ab = pair_plane(a, b, std::numbers::pi);
    const auto ba = pair_plane(b, a, std::numbers::pi);
    REQUIRE(ab);
    REQUIRE(ba);
    CHECK(*ab == *ba);
  }
}

TEST_CASE("votes concentrate on the mirror plane") {
  const OrientedPointCloud cloud = mirrored_patches(200, 17);
  const double ps = 0.01;

  // Exhaustive share over all ordered pairs, independent of the sampler.
  std::size_t valid = 0, good = 0;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    for (std::size_t j = 0; j < cloud.size(); ++j) {
      if (i == j) continue;
      if (auto p = pair_plane(cloud.points[i], cloud.points[j])) {
        ++valid;
        good += near_plane(*p, kYz, 5 * kDeg, 2 * ps) ? 1 : 0;
      }
    }
  }
  const double exact_share = static_cast<double>(good) / static_cast<double>(valid);

  const auto votes = collect_votes(cloud, 8000, 5);
  std::size_t near = 0;
  for (const auto& v : votes) near += near_plane(v.plane, kYz, 5 * kDeg, 2 * ps) ? 1 : 0;
  const double share = static_cast<double>(near) / static_cast<double>(votes.size());
  CHECK(share >= 0.30);
  // Binomial standard error at 8000 draws is below 0.006.
  CHECK(std::abs(share - exact_share) < 0.03);
}

TEST_CASE("vote collection edge cases") {
  OrientedPointCloud two;
  two.points = {op(Vec3(1, 0, 0), Vec3(1, 0, 0)), op(Vec3(-1, 0, 0), Vec3(-1, 0, 0))};
  const auto votes = collect_votes(two, 1, 1);
  CHECK(votes.size() <= 1);
  CHECK(collect_votes(OrientedPointCloud{}, 100, 1).empty());

  const OrientedPointCloud cloud = mirrored_patches(100, 2);
  const auto a = collect_votes(cloud, 500, 42);
  const auto b = collect_votes(cloud, 500, 42);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].plane == b[i].plane);
  for (const auto& v : a) CHECK(v.weight >= 1.0);
}

TEST_CASE("clustering identical votes") {
  const SymmetryPlane p = SymmetryPlane::from_normal_offset(Vec3(0.3, 0.1, 1), 0.2);
  const std::vector<PlaneVote> votes(57, PlaneVote{p, 1.0});
  const auto clusters = cluster_planes(votes, 0.15, 1.0);
  REQUIRE(clusters.size() == 1);
  CHECK(plane_distance(clusters[0].center, p, 1.0) < 1e-12);
  CHECK(clusters[0].score == 57.0);
}

TEST_CASE("clustering two separated blobs 70/30") {
  const double bw = 0.1;
  const SymmetryPlane a = SymmetryPlane::from_normal_offset(Vec3(1, 0, 0), 0.0);
  const SymmetryPlane b = SymmetryPlane::from_normal_offset(Vec3(0, 0, 1), 0.1);
  REQUIRE(plane_distance(a, b, 1.0) > 4 * bw);
  Rng rng(4);
  std::vector<PlaneVote> votes;
  const auto jitter = [&](const SymmetryPlane& p, int count) {
    for (int i = 0; i < count; ++i) {
      const Vec3 n = p.normal() + 0.02 * Vec3(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
      votes.push_back({SymmetryPlane::from_normal_offset(n, p.offset + rng.uniform(-0.01, 0.01)), 1.0});
    }
  };
  jitter(a, 70);
  jitter(b, 30);
  const auto clusters = cluster_planes(votes, bw, 1.0);
  REQUIRE(clusters.size() == 2);
  CHECK(clusters[0].score == 70.0);
  CHECK(clusters[1].score == 30.0);
  CHECK(plane_distance(clusters[0].center, a, 1.0) < 0.02);
  CHECK(plane_distance(clusters[1].center, b, 1.0) < 0.02);
}

TEST_CASE("cluster scores partition the votes") {
  const OrientedPointCloud cloud = mirrored_patches(300, 8);
  const auto votes = collect_votes(cloud, 3000, 8);
  const auto clusters = cluster_planes(votes, 0.15, cloud.bounds().diagonal());
  double total = 0.0;
  for (const auto& c : clusters) total += c.score;
  CHECK(total == static_cast<double>(votes.size()));
  for (std::size_t i = 1; i < clusters.size(); ++i) CHECK(clusters[i - 1].score >= clusters[i].score);
}

TEST_CASE("distance transform") {
  std::vector<std::uint8_t> sil(16 * 16, 0);
  sil[5 * 16 + 5] = 1;
  const auto d = distance_to_silhouette(sil, 16);
  CHECK(d[5 * 16 + 5] == 0.0);
  CHECK(d[5 * 16 + 8] == doctest::Approx(3.0));
  CHECK(d[9 * 16 + 8] == doctest::Approx(5.0));
}

TEST_CASE("visual hull and visibility checks on a symmetric chair") {
  const Rendered r = render_view(test::chair(test::ChairParams{}), 30, 20);
  const auto hull = check_visual_hull(kYz, r.maps, 5.0, 0.05);
  CHECK(hull.violation <= 0.01);
  CHECK(hull.pass);
  const auto vis = check_visibility(kYz, r.maps, 0.15);
  CHECK(vis.pass);

  const SymmetryPlane far = SymmetryPlane::from_normal_offset(Vec3::UnitX(), 10.0);
  const auto off = check_visual_hull(far, r.maps, 5.0, 0.05);
  CHECK(off.violation > 0.99);
  CHECK_FALSE(off.pass);
}

TEST_CASE("visibility on a convex symmetric object and a plane in front of it") {
  const Rendered r = render_view(test::ellipsoid(Vec3::Zero(), Vec3(1.0, 0.6, 0.4)), 25, 15);
  CHECK(check_visibility(kYz, r.maps, 0.15).violation < 0.02);

  // A plane across the view axis between the viewer and the object mirrors the visible
  // surface onto the viewer's side of the same pixels.
  const ViewFrame& f = r.maps.frame;
  const Vec3 toward = f.toward_viewer();
  const SymmetryPlane front_plane = SymmetryPlane::from_normal_offset(toward, toward.dot(f.center) + 0.8);
  const auto vis = check_visibility(front_plane, r.maps, 0.15);
  CHECK(vis.violation > 0.95);
  CHECK_FALSE(vis.pass);
}

TEST_CASE("reflect_maps: sphere through the view plane reproduces the back") {
  const TriangleMesh s = test::uv_sphere(Vec3::Zero(), 1.0, 96, 192);
  const ViewFrame f = fit_frame(s, test::random_direction(21), 137);
  const MapSet front = render_maps(s, f);
  const MapSet truth = render_back_truth(s, f);
  const SymmetryPlane plane = SymmetryPlane::from_normal_offset(f.direction, f.direction.dot(f.center));
  const MapSet reflected = reflect_maps(front, plane);
  const double ps = f.pixel_size();
  std::size_t shared = 0, close = 0;
  for (std::size_t i = 0; i < front.pixel_count(); ++i) {
    if (!reflected.defined(i) || !truth.defined(i)) continue;
    ++shared;
    // The back map measures depth from the opposite side.
    const double back_as_front = -static_cast<double>(truth.depth[i]) - 2.0 * f.near;
    close += std::abs(reflected.depth[i] - back_as_front) <= 2 * ps ? 1 : 0;
  }
  REQUIRE(shared > front.defined_count() / 2);
  CHECK(static_cast<double>(close) >= 0.9 * static_cast<double>(shared));
}

TEST_CASE("reflect_maps: quad mirrored onto itself covers its silhouette") {
  const TriangleMesh q = test::quad(0.5, 0.0);
  const ViewFrame f = make_frame(Vec3(0, 0, -1), Vec3::Zero(), 0.7, 64, -0.7, 0.7);
  const MapSet front = render_maps(q, f);
  const MapSet reflected = reflect_maps(front, SymmetryPlane::from_normal_offset(Vec3::UnitZ(), 0.0));
  CHECK(reflected.silhouette == front.silhouette);
  CHECK(reflected_coverage(front, reflected) == 1.0);
}

TEST_CASE("reflect_maps keeps only points behind the observed surface") {
  const Rendered r = render_view(test::chair(test::ChairParams{}), -25, 30);
  const MapSet reflected = reflect_maps(r.maps, kYz);
  const double ps = r.maps.frame.pixel_size();
  for (std::size_t i = 0; i < reflected.pixel_count(); ++i) {
    if (!reflected.defined(i)) continue;
    CHECK(r.maps.defined(i));
    CHECK(reflected.depth[i] >= r.maps.depth[i] - ps);
  }
}

TEST_CASE("detect_symmetry: symmetric chair") {
  const Rendered r = render_view(test::chair(test::ChairParams{}), 30, 20);
  const SymmetryVerdict v = detect_symmetry(r.maps, SymmetryConfig{});
  REQUIRE(v.symmetric());
  CHECK(plane_angle(*v.plane, kYz) <= 2 * kDeg);
  CHECK(std::abs(v.plane->offset) <= r.maps.frame.pixel_size());
  CHECK(v.coverage >= 0.40);
  CHECK(v.hull_violation <= 0.05);
  CHECK(v.visibility_violation <= 0.15);
  CHECK(v.icp.monotone);

  // Reflected maps of a symmetric verdict respect the tight hull threshold.
  CHECK(check_visual_hull(*v.plane, r.maps, 5.0, 0.05).pass);
}

TEST_CASE("detect_symmetry: one-armed chair is asymmetric") {
  const auto negatives = test::asymmetric_corpus();
  REQUIRE(negatives.front().name == "one_armed_chair");
  const Rendered r = render_view(negatives.front().mesh, 30, 20);
  CHECK_FALSE(detect_symmetry(r.maps, SymmetryConfig{}).symmetric());
}

TEST_CASE("detect_symmetry: empty maps and determinism") {
  const ViewFrame f = make_frame(Vec3(0, 0, -1), Vec3::Zero(), 1.0, 64, -1, 1);
  const SymmetryVerdict empty = detect_symmetry(MapSet::background(f), SymmetryConfig{});
  CHECK_FALSE(empty.symmetric());
  CHECK(empty.coverage == 0.0);
  CHECK(empty.hull_violation == 0.0);
  CHECK(empty.visibility_violation == 0.0);

  const Rendered r = render_view(test::box(Vec3(-1, -0.5, -0.3), Vec3(1, 0.5, 0.3)), 20, 30, 96);
  SymmetryConfig cfg;
  cfg.rounds = 4;
  const auto a = detect_symmetry(r.maps, cfg);
  const auto b = detect_symmetry(r.maps, cfg);
  CHECK(a.plane == b.plane);
  CHECK(a.coverage == b.coverage);
  CHECK(a.icp.iterations == b.icp.iterations);
}
