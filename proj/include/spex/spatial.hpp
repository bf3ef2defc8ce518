#pragma once

#include <span>
#include <vector>

#include "spex/types.hpp"

namespace spex {

// Ordered unit vectors on the sphere. Index a is the direction id used by the
// sequence planner's feasibility bits and by the Cartesian planner.
struct DirectionSet {
  std::vector<Vec3> directions;

  int size() const { return static_cast<int>(directions.size()); }
  const Vec3& operator[](int a) const { return directions[a]; }
};

// Fibonacci spiral lattice, deterministic. Requires count >= 4.
DirectionSet sample_directions(int count);

// Segment with a radius (a swept sphere).
struct CapsuleShape {
  Vec3 p0 = Vec3::Zero();
  Vec3 p1 = Vec3::Zero();
  double radius = 0.0;

  CapsuleShape transformed(const Frame& f) const { return {f * p0, f * p1, radius}; }
};

double segment_segment_distance(const Vec3& p0, const Vec3& p1, const Vec3& q0, const Vec3& q1);
double point_segment_distance(const Vec3& p, const Vec3& a, const Vec3& b);

// Overlap when the axis distance is below r_a + r_b + clearance.
bool capsules_overlap(const CapsuleShape& a, const CapsuleShape& b, double clearance = 0.0);

// Solid body of the extruder, in the tool frame: z is the extrusion
// (nozzle-pointing) direction, the tip sits at the origin, the body extends
// along -z.
struct EEGeometry {
  std::vector<CapsuleShape> capsules;

  // nozzle, body and mount capsules with the nozzle set back from the tip
  static EEGeometry default_extruder();
};

// Tool frame for a tip position, nozzle direction and roll about it. The zero
// roll reference axis is a deterministic function of the direction.
Frame tool_frame(const Vec3& tip, const Vec3& direction, double rotation);
Vec3 reference_x_axis(const Vec3& direction);
// Inverse of tool_frame's roll: angle in [0, 2pi) of the frame's x axis.
double rotation_of(const Mat3& orientation);

// True iff the EE body, posed at any of the path points with the given
// orientation, overlaps the obstacle capsule (radii grown by clearance).
bool ee_element_collision(std::span<const Vec3> path_points, const Vec3& direction, double rotation,
                          const CapsuleShape& obstacle, const EEGeometry& ee, double clearance);

// Direction-level test backing the feasibility bits: true iff the roll
// envelope of the EE body (every capsule swept about z) overlaps the obstacle
// at any path point. Never reports free when some roll collides.
bool ee_direction_blocked(std::span<const Vec3> path_points, const Vec3& direction,
                          const CapsuleShape& obstacle, const EEGeometry& ee, double clearance);

// Coaxial capsules containing each EE capsule swept through every roll.
EEGeometry roll_envelope(const EEGeometry& ee);

// Convex hull in counter-clockwise order; degenerate inputs give a point or a
// two-point segment.
std::vector<Vec2> convex_hull_2d(std::vector<Vec2> points);

// Boundary counts as inside (within tol).
bool point_in_hull(const Vec2& p, const std::vector<Vec2>& hull, double tol = 1e-9);

}  // namespace spex
