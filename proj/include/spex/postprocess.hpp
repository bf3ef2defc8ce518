#pragma once

#include <json.hpp>

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "spex/kinematics.hpp"

namespace spex {

constexpr int kPlanSchemaVersion = 1;
constexpr double kSeamTolerance = 1e-9;

enum class SubprocessType { kTransition, kRetractionApproach, kExtrusion, kRetractionDepart };

const char* subprocess_type_name(SubprocessType t);
SubprocessType subprocess_type_from_name(const std::string& name);  // throws InputError

struct TcpFrame {
  Vec3 origin = Vec3::Zero();
  Vec3 zaxis = Vec3::UnitZ();
  double rotation = 0.0;
};

TcpFrame tcp_of(const RobotModel& robot, const JointConfig& q);

// Declarative marker between two subprocesses, e.g. switching the extruder.
struct IoAnchor {
  int waypoint = 0;
  std::string command;
};

struct Subprocess {
  int id = 0;
  SubprocessType type = SubprocessType::kTransition;
  std::string data_kind;  // "tcp" or "joint"
  std::vector<JointConfig> joints;
  std::vector<TcpFrame> tcp;
  std::vector<IoAnchor> io_anchors;
};

struct TaskProcess {
  int task_id = 0;
  int element_id = 0;
  std::vector<Subprocess> subprocesses;
};

struct TaggedPlan {
  int version = kPlanSchemaVersion;
  std::map<std::string, std::string> fingerprints;
  std::vector<TaskProcess> tasks;
};

// Joint paths of one task. approach ends at extrusion.front(), depart starts
// at extrusion.back(), transition ends at approach.front().
struct TaskSegments {
  int element_id = 0;
  std::vector<JointConfig> transition;
  std::vector<JointConfig> approach;
  std::vector<JointConfig> extrusion;
  std::vector<JointConfig> depart;
};

class AssemblyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Four subprocesses per task; throws AssemblyError naming the first seam whose
// joints differ by more than kSeamTolerance.
TaggedPlan assemble_plan(const RobotModel& robot, const std::vector<TaskSegments>& segments,
                         const std::map<std::string, std::string>& fingerprints);

// Largest per-joint jump across all subprocess boundaries.
double max_seam_gap(const TaggedPlan& plan);

nlohmann::json plan_to_json(const TaggedPlan& plan);
TaggedPlan plan_from_json(const nlohmann::json& document);  // throws InputError
void export_plan(const TaggedPlan& plan, const std::string& path);
TaggedPlan import_plan(const std::string& path);

// Structural checks of a plan document against the published schema. Empty
// when valid.
std::vector<std::string> plan_schema_errors(const nlohmann::json& document);

}  // namespace spex
