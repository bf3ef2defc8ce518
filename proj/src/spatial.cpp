#include "spex/spatial.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace spex {

DirectionSet sample_directions(int count) {
  if (count < 4) throw std::invalid_argument("sample_directions: need at least 4 directions");
  const double golden_angle = kPi * (3.0 - std::sqrt(5.0));
  DirectionSet set;
  set.directions.reserve(count);
  for (int i = 0; i < count; ++i) {
    const double z = 1.0 - (2.0 * i + 1.0) / count;
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double phi = golden_angle * i;
    set.directions.push_back(Vec3(r * std::cos(phi), r * std::sin(phi), z).normalized());
  }
  return set;
}

double point_segment_distance(const Vec3& p, const Vec3& a, const Vec3& b) {
  const Vec3 ab = b - a;
  const double len2 = ab.squaredNorm();
  double t = len2 > 0.0 ? (p - a).dot(ab) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return (a + t * ab - p).norm();
}

// Closest points between segments, clamped parametric form.
double segment_segment_distance(const Vec3& p0, const Vec3& p1, const Vec3& q0, const Vec3& q1) {
  constexpr double eps = 1e-14;
  const Vec3 d1 = p1 - p0;
  const Vec3 d2 = q1 - q0;
  const Vec3 r = p0 - q0;
  const double a = d1.squaredNorm();
  const double e = d2.squaredNorm();
  const double f = d2.dot(r);

  double s = 0.0;
  double t = 0.0;
  if (a <= eps && e <= eps) return r.norm();
  if (a <= eps) {
    t = std::clamp(f / e, 0.0, 1.0);
  } else {
    const double c = d1.dot(r);
    if (e <= eps) {
      s = std::clamp(-c / a, 0.0, 1.0);
    } else {
      const double b = d1.dot(d2);
      const double denom = a * e - b * b;
      s = denom > eps * a * e ? std::clamp((b * f - c * e) / denom, 0.0, 1.0) : 0.0;
      t = (b * s + f) / e;
      if (t < 0.0) {
        t = 0.0;
        s = std::clamp(-c / a, 0.0, 1.0);
      } else if (t > 1.0) {
        t = 1.0;
        s = std::clamp((b - c) / a, 0.0, 1.0);
      }
    }
  }
  const double dist = ((p0 + s * d1) - (q0 + t * d2)).norm();
  // parallel segments: the s = 0 choice can miss a closer endpoint pair
  return std::min({dist, point_segment_distance(p1, q0, q1), point_segment_distance(q0, p0, p1),
                   point_segment_distance(q1, p0, p1), point_segment_distance(p0, q0, q1)});
}

bool capsules_overlap(const CapsuleShape& a, const CapsuleShape& b, double clearance) {
  const double reach = a.radius + b.radius + clearance;
  return segment_segment_distance(a.p0, a.p1, b.p0, b.p1) < reach;
}

EEGeometry EEGeometry::default_extruder() {
  EEGeometry ee;
  ee.capsules.push_back({Vec3(0, 0, -10), Vec3(0, 0, -45), 2.5});    // nozzle
  ee.capsules.push_back({Vec3(0, 0, -50), Vec3(0, 0, -120), 15.0});  // heater body
  ee.capsules.push_back({Vec3(0, 0, -125), Vec3(0, 0, -160), 25.0});  // mount
  return ee;
}

Vec3 reference_x_axis(const Vec3& direction) {
  const Vec3 z = direction.normalized();
  // world axis least aligned with z, first index wins ties
  int best = 0;
  for (int k = 1; k < 3; ++k) {
    if (std::abs(z[k]) < std::abs(z[best]) - 1e-12) best = k;
  }
  const Vec3 axis = Vec3::Unit(best);
  return (axis - axis.dot(z) * z).normalized();
}

Frame tool_frame(const Vec3& tip, const Vec3& direction, double rotation) {
  const Vec3 z = direction.normalized();
  const Vec3 x0 = reference_x_axis(z);
  const Vec3 y0 = z.cross(x0);
  const Vec3 x = std::cos(rotation) * x0 + std::sin(rotation) * y0;
  Frame f = Frame::Identity();
  f.linear().col(0) = x;
  f.linear().col(1) = z.cross(x);
  f.linear().col(2) = z;
  f.translation() = tip;
  return f;
}

double rotation_of(const Mat3& orientation) {
  const Vec3 z = orientation.col(2).normalized();
  const Vec3 x0 = reference_x_axis(z);
  const Vec3 y0 = z.cross(x0);
  const Vec3 x = orientation.col(0);
  double r = std::atan2(x.dot(y0), x.dot(x0));
  if (r < 0.0) r += kTwoPi;
  if (r >= kTwoPi) r -= kTwoPi;
  return r;
}

bool ee_element_collision(std::span<const Vec3> path_points, const Vec3& direction, double rotation,
                          const CapsuleShape& obstacle, const EEGeometry& ee, double clearance) {
  const Frame base = tool_frame(Vec3::Zero(), direction, rotation);
  for (const CapsuleShape& c : ee.capsules) {
    const CapsuleShape oriented = c.transformed(base);
    for (const Vec3& p : path_points) {
      const CapsuleShape posed{oriented.p0 + p, oriented.p1 + p, oriented.radius};
      if (capsules_overlap(posed, obstacle, clearance)) return true;
    }
  }
  return false;
}

EEGeometry roll_envelope(const EEGeometry& ee) {
  EEGeometry env;
  for (const CapsuleShape& c : ee.capsules) {
    const double rho = std::max(c.p0.head<2>().norm(), c.p1.head<2>().norm());
    env.capsules.push_back({Vec3(0, 0, c.p0.z()), Vec3(0, 0, c.p1.z()), c.radius + rho});
  }
  return env;
}

bool ee_direction_blocked(std::span<const Vec3> path_points, const Vec3& direction,
                          const CapsuleShape& obstacle, const EEGeometry& ee, double clearance) {
  // envelope capsules are coaxial, so the roll does not matter
  return ee_element_collision(path_points, direction, 0.0, obstacle, ee, clearance);
}

std::vector<Vec2> convex_hull_2d(std::vector<Vec2> points) {
  if (points.empty()) throw std::invalid_argument("convex_hull_2d: no points");
  std::sort(points.begin(), points.end(), [](const Vec2& a, const Vec2& b) {
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
  });
  points.erase(std::unique(points.begin(), points.end(),
                           [](const Vec2& a, const Vec2& b) { return (a - b).norm() < 1e-12; }),
               points.end());
  if (points.size() < 3) return points;

  auto cross = [](const Vec2& o, const Vec2& a, const Vec2& b) {
    return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
  };
  // Andrew's monotone chain
  std::vector<Vec2> hull(2 * points.size());
  std::size_t k = 0;
  for (const Vec2& p : points) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0) --k;
    hull[k++] = p;
  }
  for (std::size_t i = points.size() - 1, t = k + 1; i-- > 0;) {
    while (k >= t && cross(hull[k - 2], hull[k - 1], points[i]) <= 0) --k;
    hull[k++] = points[i];
  }
  hull.resize(k - 1);
  if (hull.size() == 2 && (hull[0] - hull[1]).norm() < 1e-12) hull.resize(1);
  return hull;
}

bool point_in_hull(const Vec2& p, const std::vector<Vec2>& hull, double tol) {
  if (hull.empty()) return false;
  if (hull.size() == 1) return (p - hull[0]).norm() <= tol;
  if (hull.size() == 2) {
    const Vec3 a(hull[0].x(), hull[0].y(), 0.0);
    const Vec3 b(hull[1].x(), hull[1].y(), 0.0);
    return point_segment_distance(Vec3(p.x(), p.y(), 0.0), a, b) <= tol;
  }
  for (std::size_t i = 0; i < hull.size(); ++i) {
    const Vec2& a = hull[i];
    const Vec2& b = hull[(i + 1) % hull.size()];
    const Vec2 edge = b - a;
    const double cross = edge.x() * (p.y() - a.y()) - edge.y() * (p.x() - a.x());
    if (cross < -tol * edge.norm()) return false;
  }
  return true;
}

}  // namespace spex
