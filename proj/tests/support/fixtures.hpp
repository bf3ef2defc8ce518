#pragma once

#include <random>
#include <string>

#include "spex/pipeline.hpp"

namespace spex::test {

std::string data_path(const std::string& relative);

TrussModel fixture_model(const std::string& name);  // data/models/<name>.json
const nlohmann::json& robot_document();
const RobotModel& robot();

// Random in-limit configuration.
JointConfig random_config(const RobotModel& robot, std::mt19937_64& rng);

// Random connected truss of n elements grown from a grounded base near the
// robot. Every new element attaches to an existing node.
TrussModel random_truss(int n, std::mt19937_64& rng);

// Planner config with the given direction count and small search budgets.
PlannerConfig fast_config(int directions = 72);

// Layered DAG: consecutive rungs joined by sparse random edges.
struct LadderInstance {
  Dag dag;
  std::vector<int> sources;
  std::vector<int> targets;
};
LadderInstance random_ladder(std::mt19937_64& rng, int max_rungs = 10, int max_width = 20);

// Cheapest source-to-target path cost by enumerating every path.
double enumerate_best_path(const LadderInstance& instance);

// Toy extrusion instance of at most three elements with its sequence.
struct ToyInstance {
  TrussModel model;
  SequencePlan sequence;
  std::vector<ExtrusionTask> tasks;
};
std::optional<ToyInstance> toy_instance(std::mt19937_64& rng, const PlannerConfig& config);

}  // namespace spex::test
