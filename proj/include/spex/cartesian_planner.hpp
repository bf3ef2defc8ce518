#pragma once

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "spex/kinematics.hpp"
#include "spex/ladder_graph.hpp"
#include "spex/planner_config.hpp"
#include "spex/sequence_planner.hpp"

namespace spex {

// One extrusion task of the Cartesian stage: oriented path points, the
// directions the sequence stage left feasible and the collision scene of the
// elements printed before it.
struct ExtrusionTask {
  int element_id = 0;
  int start_node = 0;
  int end_node = 0;
  std::vector<Vec3> path;
  std::vector<int> directions;  // indices into the direction set
  CollisionScene scene;
};

std::vector<ExtrusionTask> make_tasks(const TrussModel& model, const PlannerConfig& config, const SequencePlan& plan);

// Planning capsule: a fixed EE orientation for a whole task plus the IK
// families of its first and last path pose.
struct Capsule {
  int task = 0;
  int direction = 0;  // index into the direction set
  double rotation = 0.0;
  std::vector<JointConfig> first;
  std::vector<JointConfig> last;
};

// IK families at every path pose of `task` with orientation (direction,
// rotation), collision-free against the task scene. Empty result when some
// pose has no solution.
std::vector<std::vector<JointConfig>> pose_families(const RobotModel& robot, const ExtrusionTask& task,
                                                    const Vec3& direction, double rotation);

// Keep only configs lying on some chain through every pose whose consecutive
// configs respect the jump limits. Returns -1 when chains exist, otherwise the
// first pose index no chain reaches (all families are then cleared).
int prune_to_chains(std::vector<std::vector<JointConfig>>& families, const JointConfig& jump_limit);

bool within_jump(const JointConfig& a, const JointConfig& b, const JointConfig& jump_limit);

// Capsule for (direction, rotation), or nullopt when some pose is unreachable
// or no jump-limited chain crosses the task.
std::optional<Capsule> build_capsule(const RobotModel& robot, const DirectionSet& dirs, const ExtrusionTask& task,
                                     int task_index, int direction, double rotation, const JointConfig& jump_limit);

// min over first x second of the weighted L1 joint distance.
double capsule_edge_cost(const RobotModel& robot, const std::vector<JointConfig>& last,
                         const std::vector<JointConfig>& first);

struct SparseStats {
  int samples = 0;
  int feasible_capsules = 0;
  int deepest_task = -1;  // highest task index holding a finite-cost capsule
  std::vector<int> capsules_per_task;
  std::size_t stored_configs = 0;
  std::size_t max_family = 0;
  double best_cost = kInf;
  double time = 0.0;
};

struct SparseResult {
  bool success = false;
  std::vector<Capsule> path;  // one capsule per task
  SparseStats stats;
  std::string message;
};

// RRT* over capsules, tasks ordered in time. Each sample picks a task, one
// of its feasible directions and a roll; a new capsule connects to the
// cheapest capsule of the previous task and then rewires the next task (and
// onward) through itself.
SparseResult rrt_star_sparse(const RobotModel& robot, const PlannerConfig& config,
                             const std::vector<ExtrusionTask>& tasks, int iterations, std::uint64_t seed);

// Joint trajectory of one task.
struct TaskMotion {
  int element_id = 0;
  int start_node = 0;
  int end_node = 0;
  int direction = 0;
  double rotation = 0.0;
  std::vector<Vec3> path;
  std::vector<JointConfig> configs;  // one per path point
};

struct CartesianTrajectory {
  double cost = kInf;  // in-task plus between-task weighted L1 cost
  std::vector<TaskMotion> tasks;
};

struct ExpansionResult {
  bool success = false;
  CartesianTrajectory trajectory;
  std::size_t vertices = 0;
  std::size_t edges = 0;
  std::string message;
};

// Expand capsule candidates per task into a ladder graph (all path poses,
// in-task edges limited by the jump limit, all-pairs edges between tasks) and
// take its shortest path. A capsule path is the one-capsule-per-task case.
ExpansionResult expand_and_search(const RobotModel& robot, const PlannerConfig& config,
                                  const std::vector<ExtrusionTask>& tasks,
                                  const std::vector<std::vector<Capsule>>& candidates);

// Every (feasible direction, grid roll) capsule of every task.
std::vector<std::vector<Capsule>> exhaustive_capsules(const RobotModel& robot, const PlannerConfig& config,
                                                      const std::vector<ExtrusionTask>& tasks, int rotation_grid);

struct FullLadderResult {
  bool success = false;
  double cost = kInf;
  std::size_t vertices = 0;
  std::string message;
};

// Dense ladder graph over a fixed orientation grid solved by rung-by-rung
// dynamic programming. Orientation is constant within a task. Refuses when
// the projected vertex count exceeds config.full_graph_vertex_cap.
FullLadderResult full_ladder_graph(const RobotModel& robot, const PlannerConfig& config,
                                   const std::vector<ExtrusionTask>& tasks, int rotation_grid);

// Closed-form size of a dense ladder graph. Every vertex is one IK solution
// of one orientation at one path pose; edges join solutions of neighbouring
// orientations at consecutive poses.
struct FullGraphScenario {
  int elements = 300;
  int points_per_element = 20;
  int directions = 72;
  int rotations = 36;
  int family_size = 8;
  int direction_neighbours = 6;
  int rotation_neighbours = 2;
  int dof = 6;
};

struct GraphSizeEstimate {
  double vertices = 0.0;
  double edges = 0.0;
  double bytes = 0.0;
};

GraphSizeEstimate estimate_full_graph(const FullGraphScenario& s);

// Linear constant-orientation segment leaving the boundary pose along -v for
// one of the feasible directions v, tried in a seeded random order.
struct Retraction {
  bool success = false;
  int direction = -1;
  std::vector<JointConfig> configs;  // boundary config first
  std::vector<Vec3> tips;
};

Retraction plan_retraction(const RobotModel& robot, const PlannerConfig& config, const DirectionSet& dirs,
                           const CollisionScene& scene, const JointConfig& boundary,
                           const std::vector<int>& directions, double length, std::mt19937_64& rng,
                           const CollisionScene* final_scene = nullptr);

nlohmann::json capsule_path_to_json(const std::vector<Capsule>& path, const std::vector<ExtrusionTask>& tasks,
                                    const RobotModel& robot);
nlohmann::json sparse_stats_to_json(const SparseStats& stats);

}  // namespace spex
