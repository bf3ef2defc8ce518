#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"

using namespace spex;

namespace {

Vec3 random_point(std::mt19937_64& rng, double scale) {
  std::uniform_real_distribution<double> u(-scale, scale);
  return {u(rng), u(rng), u(rng)};
}

// Dense parameter sweep; an upper bound on the true distance.
double sampled_distance(const Vec3& p0, const Vec3& p1, const Vec3& q0, const Vec3& q1) {
  double best = 1e300;
  constexpr int n = 400;
  for (int i = 0; i <= n; ++i) {
    const Vec3 p = p0 + (p1 - p0) * (double(i) / n);
    // exact inner minimisation over the second segment
    const Vec3 d = q1 - q0;
    const double len2 = d.squaredNorm();
    const double t = len2 > 0 ? std::clamp((p - q0).dot(d) / len2, 0.0, 1.0) : 0.0;
    best = std::min(best, (p - (q0 + t * d)).norm());
  }
  return best;
}

}  // namespace

TEST_CASE("direction lattice") {
  const DirectionSet d = sample_directions(72);
  REQUIRE(d.size() == 72);
  double min_gap = 1e9;
  for (int a = 0; a < d.size(); ++a) {
    CHECK(d[a].norm() == doctest::Approx(1.0).epsilon(1e-12));
    for (int b = a + 1; b < d.size(); ++b) min_gap = std::min(min_gap, (d[a] - d[b]).norm());
  }
  // 72 points spread over the sphere keep a healthy separation
  CHECK(min_gap > 0.2);
  const DirectionSet again = sample_directions(72);
  for (int a = 0; a < d.size(); ++a) CHECK(again[a] == d[a]);
  CHECK_THROWS(sample_directions(3));
}

TEST_CASE("segment distance agrees with a sampled oracle") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 300; ++trial) {
    const Vec3 p0 = random_point(rng, 10), p1 = random_point(rng, 10);
    const Vec3 q0 = random_point(rng, 10), q1 = random_point(rng, 10);
    const double exact = segment_segment_distance(p0, p1, q0, q1);
    const double sampled = sampled_distance(p0, p1, q0, q1);
    CHECK(exact <= sampled + 1e-9);
    CHECK(exact >= sampled - 0.06);  // sweep resolution 20/400 along p
    CHECK(segment_segment_distance(q0, q1, p0, p1) == doctest::Approx(exact).epsilon(1e-9));
  }
  // parallel and degenerate segments
  CHECK(segment_segment_distance({0, 0, 0}, {1, 0, 0}, {0, 2, 0}, {1, 2, 0}) == doctest::Approx(2.0));
  CHECK(segment_segment_distance({0, 0, 0}, {0, 0, 0}, {3, 4, 0}, {3, 4, 0}) == doctest::Approx(5.0));
  CHECK(point_segment_distance({5, 1, 0}, {0, 0, 0}, {2, 0, 0}) == doctest::Approx(std::sqrt(10.0)));
}

TEST_CASE("capsule overlap uses radii and clearance") {
  const CapsuleShape a{{0, 0, 0}, {10, 0, 0}, 1.0};
  const CapsuleShape b{{0, 3, 0}, {10, 3, 0}, 1.5};
  CHECK_FALSE(capsules_overlap(a, b));
  CHECK(capsules_overlap(a, b, 0.6));
}

TEST_CASE("tool frame and roll are inverse") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> r(0.0, 2.0 * kPi);
  const DirectionSet d = sample_directions(72);
  for (int a = 0; a < d.size(); ++a) {
    const double roll = r(rng);
    const Frame f = tool_frame(Vec3(1, 2, 3), d[a], roll);
    const Mat3 R = f.linear();
    CHECK((R.transpose() * R - Mat3::Identity()).norm() < 1e-12);
    CHECK(R.determinant() == doctest::Approx(1.0));
    CHECK((R.col(2) - d[a]).norm() < 1e-12);
    CHECK((f.translation() - Vec3(1, 2, 3)).norm() == 0.0);
    CHECK(rotation_of(R) == doctest::Approx(roll).epsilon(1e-9));
    CHECK(std::abs(reference_x_axis(d[a]).dot(d[a])) < 1e-12);
  }
}

TEST_CASE("roll envelope never reports free when some roll collides") {
  std::mt19937_64 rng(9);
  const EEGeometry ee = EEGeometry::default_extruder();
  const EEGeometry env = roll_envelope(ee);
  const DirectionSet dirs = sample_directions(72);
  int colliding = 0;
  for (int trial = 0; trial < 400; ++trial) {
    const std::vector<Vec3> path = {Vec3::Zero(), Vec3(0, 0, 30)};
    const CapsuleShape obstacle{random_point(rng, 120), random_point(rng, 120), 1.5};
    const Vec3& dir = dirs[trial % dirs.size()];
    bool any = false;
    for (int k = 0; k < 32 && !any; ++k) {
      any = ee_element_collision(path, dir, 2.0 * kPi * k / 32, obstacle, ee, 2.0);
    }
    colliding += any;
    if (any) CHECK(ee_direction_blocked(path, dir, obstacle, env, 2.0));
  }
  CHECK(colliding > 20);
}

TEST_CASE("convex hull against a brute-force edge test") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-10, 10);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Vec2> pts;
    for (int k = 0; k < 25; ++k) pts.emplace_back(u(rng), u(rng));
    const auto hull = convex_hull_2d(pts);
    REQUIRE(hull.size() >= 3);
    for (std::size_t i = 0; i < hull.size(); ++i) {
      const Vec2 a = hull[i], b = hull[(i + 1) % hull.size()];
      for (const Vec2& p : pts) {
        const double cross = (b - a).x() * (p - a).y() - (b - a).y() * (p - a).x();
        CHECK(cross >= -1e-9);
      }
    }
    for (const Vec2& p : pts) CHECK(point_in_hull(p, hull));
    CHECK_FALSE(point_in_hull(Vec2(11, 11), hull));
  }
  CHECK(convex_hull_2d({Vec2(1, 1), Vec2(1, 1)}).size() == 1);
  CHECK(convex_hull_2d({Vec2(0, 0), Vec2(1, 1), Vec2(2, 2)}).size() == 2);
}
