#pragma once

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "spex/kinematics.hpp"
#include "spex/structural.hpp"
#include "spex/truss_model.hpp"

namespace spex {

struct TransitionSettings {
  double direct_timeout = 5.0;      // s
  double fallback_timeout = 10.0;   // s, shared by both home legs
  int direct_iterations = 4000;
  int fallback_iterations = 8000;
  double extend_step = 0.3;         // rad (weighted max-norm) per tree extension
  int smoothing_iterations = 100;
};

// Every tunable of the pipeline. Loaded from the planner config document;
// missing keys keep these defaults.
struct PlannerConfig {
  // model and geometry
  int directions = 72;
  double spacing = kDefaultSpacing;  // mm between path points
  double clearance = 2.0;            // mm added to capsule radii
  std::optional<double> floor_z = 0.0;
  std::vector<CapsuleShape> static_obstacles;
  StructuralSettings structural;

  // sequence search
  double kinematics_timeout = 2.0;  // s per candidate
  int rotation_samples = 16;        // roll samples per direction inside the kinematics check
  double search_timeout = 6.0 * 3600.0;
  bool use_decomposition = true;
  bool collision_cost = false;
  bool propagation = true;

  // Cartesian planning
  int rrt_samples_per_task = 30;
  int rrt_min_samples = 200;
  double rrt_timeout = 3600.0;
  int rotation_grid = 0;            // 0: continuous roll sampling, k: k-point grid
  double jump_limit = 0.15;         // rad per revolute joint between path points
  double track_jump_limit = 20.0;   // mm per path point
  double retraction_length = 25.0;  // mm
  std::size_t full_graph_vertex_cap = 2'000'000;

  TransitionSettings transition;

  std::uint64_t seed = 0;
  int threads = 0;  // 0: OpenMP default
};

PlannerConfig load_planner_config(const nlohmann::json& document);
PlannerConfig load_planner_config_file(const std::string& path);
nlohmann::json planner_config_to_json(const PlannerConfig& config);

// Per-joint jump limit vector for a robot (track entry in mm).
JointConfig jump_limits(const RobotModel& robot, const PlannerConfig& config);

// Element as a collision capsule (section radius).
CapsuleShape element_capsule(const TrussModel& model, int element_id);

// Static obstacles plus the listed elements.
CollisionScene build_scene(const TrussModel& model, const PlannerConfig& config, std::span<const int> elements);

// 64-bit FNV-1a over the canonical JSON dump.
std::uint64_t content_hash(const nlohmann::json& document);
std::string hash_hex(std::uint64_t h);

}  // namespace spex
