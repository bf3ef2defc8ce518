#pragma once

#include <json.hpp>

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "spex/cartesian_planner.hpp"
#include "spex/planner_config.hpp"
#include "spex/postprocess.hpp"
#include "spex/sequence_planner.hpp"

namespace spex {

struct StageTimes {
  double sequence = 0.0;
  double cartesian = 0.0;
  double retraction = 0.0;
  double transition = 0.0;
};

struct PipelineResult {
  bool success = false;
  std::string stage;  // failing stage on failure
  std::string message;
  std::optional<SequencePlan> sequence;
  SearchStats search;
  SparseStats sparse;
  nlohmann::json capsule_path;
  std::optional<TaggedPlan> plan;
  StageTimes times;
  int fallback_transitions = 0;
  std::vector<std::string> warnings;
};

// Model, robot and config fingerprints recorded in the plan.
std::map<std::string, std::string> input_fingerprints(const TrussModel& model, const nlohmann::json& robot_document,
                                                      const PlannerConfig& config);

PipelineResult run_sequence_stage(const TrussModel& model, const RobotModel& robot, const PlannerConfig& config);

// Cartesian, retraction and transition stages from a saved sequence.
PipelineResult run_motion_stages(const TrussModel& model, const RobotModel& robot, const PlannerConfig& config,
                                 const SequencePlan& sequence, const std::map<std::string, std::string>& fingerprints);

PipelineResult run_pipeline(const TrussModel& model, const RobotModel& robot, const PlannerConfig& config,
                            const std::map<std::string, std::string>& fingerprints);

struct ValidationCheck {
  std::string name;
  bool passed = true;
  std::vector<std::string> failures;  // located messages, capped
};

struct ValidationReport {
  std::vector<ValidationCheck> checks;
  double max_tip_error = 0.0;  // mm over all extrusion waypoints
  double max_seam_gap = 0.0;

  bool passed() const;
  const ValidationCheck* find(const std::string& name) const;
  std::string render() const;
  nlohmann::json to_json() const;
};

// Re-checks an exported plan from scratch against the model, robot and the
// planner settings it was produced with.
ValidationReport validate_plan(const nlohmann::json& plan_document, const TrussModel& model, const RobotModel& robot,
                               const PlannerConfig& config);
ValidationReport validate_plan(const TaggedPlan& plan, const TrussModel& model, const RobotModel& robot,
                               const PlannerConfig& config);

// Stats sidecar written next to every run.
nlohmann::json run_stats_json(const std::string& model_name, const TrussModel& model, const PlannerConfig& config,
                              const PipelineResult& result);

// Per-stage timing table: model, node/element/layer counts, the four stage
// times and the bounding box size.
std::string render_stage_table(const std::vector<nlohmann::json>& stats);

// Search statistics table of one or more stats sidecars.
std::string render_search_table(const std::vector<nlohmann::json>& stats);

// TCP polylines per subprocess for external viewers.
nlohmann::json export_geometry(const TaggedPlan& plan);

}  // namespace spex
