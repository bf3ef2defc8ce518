#pragma once

#include <json.hpp>

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "spex/kernels.hpp"
#include "spex/kinematics.hpp"
#include "spex/planner_config.hpp"
#include "spex/spatial.hpp"
#include "spex/truss_model.hpp"

namespace spex {

// Per-element direction feasibility: a set bit marks direction a infeasible.
class DirectionMask {
 public:
  DirectionMask() = default;
  explicit DirectionMask(int size) : size_(size), words_((size + 63) / 64, 0) {}

  int size() const { return size_; }
  bool infeasible(int a) const { return (words_[a >> 6] >> (a & 63)) & 1U; }
  void mark_infeasible(int a) { words_[a >> 6] |= std::uint64_t{1} << (a & 63); }
  void mark_feasible(int a) { words_[a >> 6] &= ~(std::uint64_t{1} << (a & 63)); }
  int feasible_count() const;

  bool operator==(const DirectionMask&) const = default;

 private:
  int size_ = 0;
  std::vector<std::uint64_t> words_;
};

// Search counters, one time/count pair per check kind.
struct SearchStats {
  double total_time = 0.0;
  int partial_states = 0;
  int consistency_tests = 0;
  double stiffness_time = 0.0;
  int stiffness_count = 0;
  double kinematics_time = 0.0;
  int kinematics_count = 0;
  double ee_update_time = 0.0;
  int ee_update_count = 0;
  long long ee_update_checks = 0;  // (element, direction) collision tests done by propagation
  double collision_cost_time = 0.0;
  int collision_cost_count = 0;
  int backtracks = 0;
  int deepest = 0;
};

nlohmann::json stats_to_json(const SearchStats& stats);
SearchStats stats_from_json(const nlohmann::json& j);

struct SequenceStep {
  int element_id = 0;
  int layer = 0;
  std::vector<int> feasible_directions;  // indices into the direction set
  int start_node = -1;                   // routed extrusion start
  int end_node = -1;
};

struct SequencePlan {
  int direction_count = 0;
  std::vector<SequenceStep> steps;

  std::vector<int> order() const;
};

nlohmann::json sequence_plan_to_json(const SequencePlan& plan);
SequencePlan sequence_plan_from_json(const nlohmann::json& j);

enum class SearchStatus { kSuccess, kExhausted, kTimeout };

struct SearchResult {
  SearchStatus status = SearchStatus::kExhausted;
  std::optional<SequencePlan> plan;
  SearchStats stats;
  std::string message;
};

// Undo record of one propagation step.
struct InferenceRecord {
  std::vector<kernels::BlockQuery> flipped;
};

// Immutable inputs shared by every search step.
class SequenceContext {
 public:
  SequenceContext(const TrussModel& model, const RobotModel& robot, const PlannerConfig& config);

  const TrussModel& model() const { return *model_; }
  const RobotModel& robot() const { return *robot_; }
  const PlannerConfig& config() const { return *config_; }
  const DirectionSet& directions() const { return directions_; }
  const EEGeometry& envelope() const { return envelope_; }
  const std::vector<std::vector<Vec3>>& paths() const { return paths_; }
  const std::vector<std::vector<char>>& adjacency() const { return adjacency_; }
  const std::vector<char>& grounded() const { return grounded_; }
  const std::vector<int>& layer_of() const { return layer_of_; }
  int layer_count() const { return layer_count_; }
  kernels::PropagationInput propagation_input() const;

 private:
  const TrussModel* model_;
  const RobotModel* robot_;
  const PlannerConfig* config_;
  DirectionSet directions_;
  EEGeometry envelope_;
  std::vector<std::vector<Vec3>> paths_;
  std::vector<std::vector<char>> adjacency_;
  std::vector<char> grounded_;
  std::vector<int> layer_of_;
  int layer_count_ = 1;
};

// Mutable search state: assignment, direction domains, and the caches/stats
// the consistency checks update.
class SearchState {
 public:
  explicit SearchState(const SequenceContext& ctx);

  const std::vector<int>& assignment() const { return assignment_; }
  bool placed(int e) const { return placed_[e] != 0; }
  const std::vector<DirectionMask>& domains() const { return domains_; }
  std::vector<DirectionMask>& domains() { return domains_; }
  SearchStats& stats() { return stats_; }
  const SearchStats& stats() const { return stats_; }

  // Layer whose elements are currently assignable (lowest layer with an
  // unassigned element), always 0 without decomposition.
  int current_layer() const;
  // Unassigned elements that propagation after placing `element` updates:
  // its own layer, or every unassigned element without decomposition.
  std::vector<int> propagation_scope(int element) const;

  // Cached EE-vs-element test T: true iff extruding `element` with direction
  // a collides with `obstacle`.
  bool direction_blocked_by(int element, int obstacle, int direction);
  void record_blocked(int element, int obstacle, int direction, bool blocked);
  // -1 when not yet computed, otherwise 0 or 1.
  int cached_blocked(int element, int obstacle, int direction) const;

  void place(int element);
  void unplace(int element);

 private:
  const SequenceContext* ctx_;
  std::vector<int> assignment_;
  std::vector<char> placed_;
  std::vector<DirectionMask> domains_;
  std::vector<std::int8_t> blocked_cache_;
  SearchStats stats_;
};

bool connect_ok(const SequenceContext& ctx, const SearchState& state, int candidate);

// Directions of the candidate that are still feasible and not blocked by any
// placed element.
std::vector<int> candidate_directions(const SequenceContext& ctx, SearchState& state, int candidate);

// Whether every path pose of the element admits a collision-free IK solution
// with direction a and roll r, against the currently placed elements.
bool kinematics_feasible(const SequenceContext& ctx, const SearchState& state, int element, int direction,
                         double rotation);

// Roll sample k of the low-discrepancy sequence over [0, 2pi).
double rotation_sample(int k);

// Exists a direction passing the feasibility bits, the EE-vs-placed test and
// the kinematics check. On success `surviving` lists directions passing the
// first two tests.
bool exist_valid_ee_pose(const SequenceContext& ctx, SearchState& state, int candidate,
                         std::vector<int>* surviving = nullptr);

// Independent re-check of a plan from scratch: permutation, layer order and,
// on every prefix, Connect, stiffness, stability and a collision-free EE pose.
// Returns an empty string when valid, otherwise the first violation.
std::string validate_sequence(const TrussModel& model, const RobotModel& robot, const PlannerConfig& config,
                              const SequencePlan& plan);

bool test_consistency(const SequenceContext& ctx, SearchState& state, int candidate,
                      std::vector<int>* surviving = nullptr);

// Flip bits of scope elements blocked by the newly placed element.
InferenceRecord update_ee_direction_state(const SequenceContext& ctx, SearchState& state, int placed_element);
void undo_inferences(SearchState& state, const InferenceRecord& record);

enum class OrderingMode { kStatic, kCollisionCost };
std::vector<int> order_values(const SequenceContext& ctx, SearchState& state, std::vector<int> candidates,
                              OrderingMode mode);

// Unassigned elements of the current layer that pass Connect.
std::vector<int> candidate_values(const SequenceContext& ctx, const SearchState& state);

SearchResult backtrack_search(const TrussModel& model, const RobotModel& robot, const PlannerConfig& config);

// Orient every step: new nodes are reached from the existing node, otherwise
// start at the higher-degree node of the built prefix, lower id on ties.
void route_nodal_order(SequencePlan& plan, const TrussModel& model);

struct StatsRow {
  std::string model;
  int element_count = 0;
  bool decomposition = false;
  bool collision_cost = false;
  SearchStats stats;
};

// Fixed-width table: totals, partial states, then time|count pairs for the
// structural, kinematics, EE-update and collision-cost work.
std::string render_stats_table(const std::vector<StatsRow>& rows);

}  // namespace spex
