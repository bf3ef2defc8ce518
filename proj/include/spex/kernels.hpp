#pragma once

// Data-parallel inner loops of the planners. Each kernel has a serial
// reference next to the OpenMP version; both return identical results in
// identical order, and the tests hold them to that.

#include <span>
#include <vector>

#include "spex/kinematics.hpp"
#include "spex/spatial.hpp"

namespace spex::kernels {

// One (element, direction) pair to test against a newly placed obstacle.
struct BlockQuery {
  int element = 0;
  int direction = 0;
};

struct PropagationInput {
  std::span<const std::vector<Vec3>> paths;  // path points per element id
  const DirectionSet* directions = nullptr;
  const EEGeometry* envelope = nullptr;      // roll envelope of the EE body
  double clearance = 0.0;
};

// flags[k] = 1 iff query k's direction is blocked by the obstacle.
std::vector<char> blocked_serial(const PropagationInput& in, const CapsuleShape& obstacle,
                                 std::span<const BlockQuery> queries);
std::vector<char> blocked_parallel(const PropagationInput& in, const CapsuleShape& obstacle,
                                   std::span<const BlockQuery> queries);

// Collision-free IK family for every pose.
std::vector<std::vector<JointConfig>> ik_families_serial(const RobotModel& robot, std::span<const Frame> poses,
                                                         const CollisionScene& scene);
std::vector<std::vector<JointConfig>> ik_families_parallel(const RobotModel& robot, std::span<const Frame> poses,
                                                           const CollisionScene& scene);

// Dispatch on the global switch below.
std::vector<char> blocked(const PropagationInput& in, const CapsuleShape& obstacle, std::span<const BlockQuery> queries);
std::vector<std::vector<JointConfig>> ik_families(const RobotModel& robot, std::span<const Frame> poses,
                                                  const CollisionScene& scene);

void set_parallel(bool enabled);
bool parallel_enabled();
void set_threads(int threads);  // <= 0 keeps the OpenMP default

}  // namespace spex::kernels
