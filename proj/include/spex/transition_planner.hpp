#pragma once

#include <functional>
#include <random>
#include <string>
#include <vector>

#include "spex/kinematics.hpp"
#include "spex/planner_config.hpp"

namespace spex {

// Box-bounded joint space. `resolution` is the per-joint collision-check
// spacing; `weights` define the path cost (weighted L1).
struct JointSpace {
  JointConfig lower;
  JointConfig upper;
  JointConfig weights;
  JointConfig resolution;
  JointConfig jump_limit;  // output waypoints are densified to this spacing

  int dof() const { return static_cast<int>(lower.size()); }
};

using ValidityFn = std::function<bool(const JointConfig&)>;

JointSpace robot_joint_space(const RobotModel& robot, const PlannerConfig& config);

// Validity of the straight segment a -> b checked at the space resolution.
bool segment_valid(const JointSpace& space, const ValidityFn& valid, const JointConfig& a, const JointConfig& b);
bool path_valid(const JointSpace& space, const ValidityFn& valid, const std::vector<JointConfig>& path);
double path_cost(const JointSpace& space, const std::vector<JointConfig>& path);

struct TransitionBudget {
  double timeout = 5.0;
  int iterations = 4000;
  // max-norm tree step in the last joint's units; other joints scale with
  // their resolution relative to it
  double extend_step = 0.3;
  int smoothing_iterations = 100;
};

struct TransitionResult {
  bool success = false;
  bool used_fallback = false;
  bool timed_out = false;
  int iterations = 0;
  std::vector<JointConfig> path;
  std::string message;
};

// Straight line, else RRT-Connect, then shortcut smoothing and densification.
TransitionResult plan_transition(const JointSpace& space, const ValidityFn& valid, const JointConfig& start,
                                 const JointConfig& goal, const TransitionBudget& budget, std::mt19937_64& rng);

// Direct attempt first; on failure plan start -> home -> goal.
TransitionResult plan_with_home_fallback(const JointSpace& space, const ValidityFn& valid, const JointConfig& start,
                                         const JointConfig& goal, const JointConfig& home,
                                         const TransitionBudget& direct, const TransitionBudget& fallback,
                                         std::mt19937_64& rng);

// Robot query in a scene using the config's transition settings.
TransitionResult plan_robot_transition(const RobotModel& robot, const PlannerConfig& config,
                                       const CollisionScene& scene, const JointConfig& start,
                                       const JointConfig& goal, std::mt19937_64& rng);

}  // namespace spex
