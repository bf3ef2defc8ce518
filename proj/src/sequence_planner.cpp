#include "spex/sequence_planner.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "spex/structural.hpp"

namespace spex {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

class ScopedTimer {
 public:
  explicit ScopedTimer(double& sink) : sink_(sink), t0_(Clock::now()) {}
  ~ScopedTimer() { sink_ += seconds_since(t0_); }

 private:
  double& sink_;
  Clock::time_point t0_;
};

// Path point indices with both endpoints first, then the interior.
std::vector<int> endpoint_first_order(int count) {
  std::vector<int> order;
  order.push_back(0);
  if (count > 1) order.push_back(count - 1);
  for (int k = 1; k + 1 < count; ++k) order.push_back(k);
  return order;
}

bool pose_reachable(const RobotModel& robot, const Frame& pose, const CollisionScene& scene) {
  for (const JointConfig& q : ik(robot, pose)) {
    if (!config_collides(robot, q, scene)) return true;
  }
  return false;
}

bool path_reachable(const RobotModel& robot, const std::vector<Vec3>& path, const Vec3& direction, double rotation,
                    const CollisionScene& scene) {
  for (int k : endpoint_first_order(static_cast<int>(path.size()))) {
    if (!pose_reachable(robot, tool_frame(path[k], direction, rotation), scene)) return false;
  }
  return true;
}

}  // namespace

int DirectionMask::feasible_count() const {
  int infeasible = 0;
  for (std::uint64_t w : words_) infeasible += std::popcount(w);
  return size_ - infeasible;
}

std::vector<int> SequencePlan::order() const {
  std::vector<int> ids;
  ids.reserve(steps.size());
  for (const auto& s : steps) ids.push_back(s.element_id);
  return ids;
}

nlohmann::json stats_to_json(const SearchStats& s) {
  return {
      {"total_time", s.total_time},
      {"partial_states", s.partial_states},
      {"consistency_tests", s.consistency_tests},
      {"stiffness_time", s.stiffness_time},
      {"stiffness_count", s.stiffness_count},
      {"kinematics_time", s.kinematics_time},
      {"kinematics_count", s.kinematics_count},
      {"ee_update_time", s.ee_update_time},
      {"ee_update_count", s.ee_update_count},
      {"ee_update_checks", s.ee_update_checks},
      {"collision_cost_time", s.collision_cost_time},
      {"collision_cost_count", s.collision_cost_count},
      {"backtracks", s.backtracks},
      {"deepest", s.deepest},
  };
}

SearchStats stats_from_json(const nlohmann::json& j) {
  SearchStats s;
  try {
    s.total_time = j.at("total_time").get<double>();
    s.partial_states = j.at("partial_states").get<int>();
    s.consistency_tests = j.value("consistency_tests", 0);
    s.stiffness_time = j.at("stiffness_time").get<double>();
    s.stiffness_count = j.at("stiffness_count").get<int>();
    s.kinematics_time = j.at("kinematics_time").get<double>();
    s.kinematics_count = j.at("kinematics_count").get<int>();
    s.ee_update_time = j.at("ee_update_time").get<double>();
    s.ee_update_count = j.at("ee_update_count").get<int>();
    s.ee_update_checks = j.value("ee_update_checks", 0LL);
    s.collision_cost_time = j.at("collision_cost_time").get<double>();
    s.collision_cost_count = j.at("collision_cost_count").get<int>();
    s.backtracks = j.value("backtracks", 0);
    s.deepest = j.value("deepest", 0);
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("stats: schema violation: ") + e.what());
  }
  return s;
}

nlohmann::json sequence_plan_to_json(const SequencePlan& plan) {
  nlohmann::json steps = nlohmann::json::array();
  for (const auto& s : plan.steps) {
    steps.push_back({{"element", s.element_id},
                     {"layer", s.layer},
                     {"directions", s.feasible_directions},
                     {"start_node", s.start_node},
                     {"end_node", s.end_node}});
  }
  return {{"version", 1}, {"direction_count", plan.direction_count}, {"steps", steps}};
}

SequencePlan sequence_plan_from_json(const nlohmann::json& j) {
  SequencePlan plan;
  try {
    plan.direction_count = j.at("direction_count").get<int>();
    for (const auto& s : j.at("steps")) {
      SequenceStep step;
      step.element_id = s.at("element").get<int>();
      step.layer = s.value("layer", 0);
      step.feasible_directions = s.at("directions").get<std::vector<int>>();
      step.start_node = s.value("start_node", -1);
      step.end_node = s.value("end_node", -1);
      plan.steps.push_back(std::move(step));
    }
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("sequence: schema violation: ") + e.what());
  }
  for (const auto& s : plan.steps) {
    for (int a : s.feasible_directions) {
      if (a < 0 || a >= plan.direction_count) throw InputError("sequence: direction index out of range");
    }
  }
  return plan;
}

// ---------------------------------------------------------------------------

SequenceContext::SequenceContext(const TrussModel& model, const RobotModel& robot, const PlannerConfig& config)
    : model_(&model),
      robot_(&robot),
      config_(&config),
      directions_(sample_directions(config.directions)),
      envelope_(roll_envelope(robot.end_effector)),
      adjacency_(spex::adjacency(model)),
      grounded_(grounded_vector(model)) {
  paths_.reserve(model.element_count());
  for (int e = 0; e < model.element_count(); ++e) paths_.push_back(discretize_element(model, e, config.spacing).points);
  layer_of_.assign(model.element_count(), 0);
  if (config.use_decomposition && model.has_layers()) {
    layer_of_ = model_layers(model);
    layer_count_ = static_cast<int>(validate_decomposition(model, layer_of_).groups.size());
  }
}

kernels::PropagationInput SequenceContext::propagation_input() const {
  return {paths_, &directions_, &envelope_, config_->clearance};
}

SearchState::SearchState(const SequenceContext& ctx)
    : ctx_(&ctx),
      placed_(ctx.model().element_count(), 0),
      domains_(ctx.model().element_count(), DirectionMask(ctx.directions().size())) {
  const std::size_t n = ctx.model().element_count();
  blocked_cache_.assign(n * n * ctx.directions().size(), -1);
}

int SearchState::current_layer() const {
  int layer = ctx_->layer_count();
  for (int e = 0; e < static_cast<int>(placed_.size()); ++e) {
    if (!placed_[e]) layer = std::min(layer, ctx_->layer_of()[e]);
  }
  return layer;
}

std::vector<int> SearchState::propagation_scope(int element) const {
  const int layer = ctx_->layer_of()[element];
  std::vector<int> scope;
  for (int e = 0; e < static_cast<int>(placed_.size()); ++e) {
    if (e != element && !placed_[e] && ctx_->layer_of()[e] == layer) scope.push_back(e);
  }
  return scope;
}

bool SearchState::direction_blocked_by(int element, int obstacle, int direction) {
  const std::size_t n = placed_.size();
  std::int8_t& slot = blocked_cache_[(static_cast<std::size_t>(element) * n + obstacle) * ctx_->directions().size() +
                                     direction];
  if (slot < 0) {
    slot = ee_direction_blocked(ctx_->paths()[element], ctx_->directions()[direction],
                                element_capsule(ctx_->model(), obstacle), ctx_->envelope(), ctx_->config().clearance)
               ? 1
               : 0;
  }
  return slot == 1;
}

void SearchState::record_blocked(int element, int obstacle, int direction, bool blocked) {
  const std::size_t n = placed_.size();
  blocked_cache_[(static_cast<std::size_t>(element) * n + obstacle) * ctx_->directions().size() + direction] =
      blocked ? 1 : 0;
}

int SearchState::cached_blocked(int element, int obstacle, int direction) const {
  const std::size_t n = placed_.size();
  return blocked_cache_[(static_cast<std::size_t>(element) * n + obstacle) * ctx_->directions().size() + direction];
}

void SearchState::place(int element) {
  placed_[element] = 1;
  assignment_.push_back(element);
}

void SearchState::unplace(int element) {
  placed_[element] = 0;
  auto it = std::find(assignment_.begin(), assignment_.end(), element);
  if (it != assignment_.end()) assignment_.erase(it);
}

// ---------------------------------------------------------------------------

bool connect_ok(const SequenceContext& ctx, const SearchState& state, int candidate) {
  if (ctx.grounded()[candidate]) return true;
  for (int e : state.assignment()) {
    if (ctx.adjacency()[candidate][e]) return true;
  }
  return false;
}

std::vector<int> candidate_directions(const SequenceContext&, SearchState& state, int candidate) {
  std::vector<int> out;
  const DirectionMask& mask = state.domains()[candidate];
  for (int a = 0; a < mask.size(); ++a) {
    if (mask.infeasible(a)) continue;
    bool blocked = false;
    for (int j : state.assignment()) {
      if (state.direction_blocked_by(candidate, j, a)) {
        blocked = true;
        break;
      }
    }
    if (!blocked) out.push_back(a);
  }
  return out;
}

double rotation_sample(int k) {
  // base-2 van der Corput radical inverse
  double r = 0.0;
  double f = 0.5;
  for (unsigned v = static_cast<unsigned>(k); v; v >>= 1U, f *= 0.5) {
    if (v & 1U) r += f;
  }
  return r * kTwoPi;
}

bool kinematics_feasible(const SequenceContext& ctx, const SearchState& state, int element, int direction,
                         double rotation) {
  const CollisionScene scene = build_scene(ctx.model(), ctx.config(), state.assignment());
  return path_reachable(ctx.robot(), ctx.paths()[element], ctx.directions()[direction], rotation, scene);
}

bool exist_valid_ee_pose(const SequenceContext& ctx, SearchState& state, int candidate, std::vector<int>* surviving) {
  std::vector<int> dirs = candidate_directions(ctx, state, candidate);
  if (surviving) *surviving = dirs;
  if (dirs.empty()) return false;

  ScopedTimer timer(state.stats().kinematics_time);
  ++state.stats().kinematics_count;
  const auto t0 = Clock::now();
  const CollisionScene scene = build_scene(ctx.model(), ctx.config(), state.assignment());
  const auto& path = ctx.paths()[candidate];
  for (int k = 0; k < ctx.config().rotation_samples; ++k) {
    const double r = rotation_sample(k);
    for (int a : dirs) {
      if (path_reachable(ctx.robot(), path, ctx.directions()[a], r, scene)) return true;
      if (seconds_since(t0) > ctx.config().kinematics_timeout) return false;
    }
  }
  return false;
}

bool test_consistency(const SequenceContext& ctx, SearchState& state, int candidate, std::vector<int>* surviving) {
  ++state.stats().consistency_tests;
  if (!connect_ok(ctx, state, candidate)) return false;

  std::vector<int> prefix = state.assignment();
  prefix.push_back(candidate);
  StructuralVerdict verdict;
  {
    ScopedTimer timer(state.stats().stiffness_time);
    ++state.stats().stiffness_count;
    verdict = check_structure(ctx.model(), prefix, ctx.config().structural);
  }
  if (!verdict.stiff || !verdict.stable) return false;
  return exist_valid_ee_pose(ctx, state, candidate, surviving);
}

// ---------------------------------------------------------------------------

namespace {

// Resolve every (element, direction) query against `obstacle` through the
// cache, batching the unknown ones through the kernel.
std::vector<char> resolve_blocked(const SequenceContext& ctx, SearchState& state, int obstacle,
                                  const std::vector<kernels::BlockQuery>& queries) {
  std::vector<char> flags(queries.size(), 0);
  std::vector<kernels::BlockQuery> unknown;
  std::vector<std::size_t> unknown_at;
  for (std::size_t k = 0; k < queries.size(); ++k) {
    const int cached = state.cached_blocked(queries[k].element, obstacle, queries[k].direction);
    if (cached >= 0) {
      flags[k] = static_cast<char>(cached);
    } else {
      unknown.push_back(queries[k]);
      unknown_at.push_back(k);
    }
  }
  const CapsuleShape obs = element_capsule(ctx.model(), obstacle);
  const std::vector<char> computed = kernels::blocked(ctx.propagation_input(), obs, unknown);
  for (std::size_t k = 0; k < unknown.size(); ++k) {
    flags[unknown_at[k]] = computed[k];
    state.record_blocked(unknown[k].element, obstacle, unknown[k].direction, computed[k] != 0);
  }
  return flags;
}

std::vector<kernels::BlockQuery> feasible_queries(const SearchState& state, const std::vector<int>& scope) {
  std::vector<kernels::BlockQuery> queries;
  for (int u : scope) {
    const DirectionMask& mask = state.domains()[u];
    for (int a = 0; a < mask.size(); ++a) {
      if (!mask.infeasible(a)) queries.push_back({u, a});
    }
  }
  return queries;
}

}  // namespace

InferenceRecord update_ee_direction_state(const SequenceContext& ctx, SearchState& state, int placed_element) {
  ScopedTimer timer(state.stats().ee_update_time);
  ++state.stats().ee_update_count;
  InferenceRecord record;
  const auto queries = feasible_queries(state, state.propagation_scope(placed_element));
  state.stats().ee_update_checks += static_cast<long long>(queries.size());
  const auto flags = resolve_blocked(ctx, state, placed_element, queries);
  for (std::size_t k = 0; k < queries.size(); ++k) {
    if (flags[k]) {
      state.domains()[queries[k].element].mark_infeasible(queries[k].direction);
      record.flipped.push_back(queries[k]);
    }
  }
  return record;
}

void undo_inferences(SearchState& state, const InferenceRecord& record) {
  for (auto it = record.flipped.rbegin(); it != record.flipped.rend(); ++it) {
    state.domains()[it->element].mark_feasible(it->direction);
  }
}

std::vector<int> order_values(const SequenceContext& ctx, SearchState& state, std::vector<int> candidates,
                              OrderingMode mode) {
  std::sort(candidates.begin(), candidates.end());
  if (mode == OrderingMode::kStatic || candidates.size() < 2) return candidates;

  ScopedTimer timer(state.stats().collision_cost_time);
  std::vector<std::pair<long long, int>> scored;
  for (int c : candidates) {
    ++state.stats().collision_cost_count;
    const auto queries = feasible_queries(state, state.propagation_scope(c));
    const auto flags = resolve_blocked(ctx, state, c, queries);
    long long remaining = 0;
    for (char f : flags) remaining += f ? 0 : 1;
    scored.emplace_back(remaining, c);
  }
  std::stable_sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  std::vector<int> out;
  for (const auto& [score, c] : scored) out.push_back(c);
  return out;
}

std::vector<int> candidate_values(const SequenceContext& ctx, const SearchState& state) {
  const int layer = state.current_layer();
  std::vector<int> out;
  for (int e = 0; e < ctx.model().element_count(); ++e) {
    if (!state.placed(e) && ctx.layer_of()[e] == layer && connect_ok(ctx, state, e)) out.push_back(e);
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

enum class Outcome { kFound, kFailed, kAbort };

struct Search {
  const SequenceContext& ctx;
  SearchState& state;
  Clock::time_point t0;
  std::vector<SequenceStep> steps;
  bool timed_out = false;

  Outcome recurse(int k) {
    const int n = ctx.model().element_count();
    if (k == n) return Outcome::kFound;
    if (seconds_since(t0) > ctx.config().search_timeout) {
      timed_out = true;
      return Outcome::kAbort;
    }
    const int layer = state.current_layer();
    // the first variable of a new layer: a failure here is final because
    // completed layers are never reopened
    const bool layer_start = k > 0 && ctx.layer_of()[steps[k - 1].element_id] != layer;

    const auto mode = ctx.config().collision_cost ? OrderingMode::kCollisionCost : OrderingMode::kStatic;
    for (int c : order_values(ctx, state, candidate_values(ctx, state), mode)) {
      std::vector<int> surviving;
      if (!test_consistency(ctx, state, c, &surviving)) continue;
      state.place(c);
      ++state.stats().partial_states;
      state.stats().deepest = std::max(state.stats().deepest, k + 1);
      steps.push_back({c, ctx.layer_of()[c], surviving, -1, -1});
      InferenceRecord record;
      if (ctx.config().propagation) record = update_ee_direction_state(ctx, state, c);

      const Outcome next = recurse(k + 1);
      if (next == Outcome::kFound) return next;
      undo_inferences(state, record);
      steps.pop_back();
      state.unplace(c);
      if (next == Outcome::kAbort) return next;
      ++state.stats().backtracks;
    }
    return layer_start ? Outcome::kAbort : Outcome::kFailed;
  }
};

}  // namespace

SearchResult backtrack_search(const TrussModel& model, const RobotModel& robot, const PlannerConfig& config) {
  const auto t0 = Clock::now();
  SequenceContext ctx(model, robot, config);
  SearchState state(ctx);
  Search search{ctx, state, t0, {}, false};
  const Outcome outcome = search.recurse(0);

  SearchResult result;
  state.stats().total_time = seconds_since(t0);
  result.stats = state.stats();
  if (outcome == Outcome::kFound) {
    SequencePlan plan;
    plan.direction_count = ctx.directions().size();
    plan.steps = std::move(search.steps);
    route_nodal_order(plan, model);
    result.status = SearchStatus::kSuccess;
    result.plan = std::move(plan);
    result.message = "sequence found";
  } else if (search.timed_out) {
    result.status = SearchStatus::kTimeout;
    result.message = "search timed out at depth " + std::to_string(result.stats.deepest);
  } else {
    result.status = SearchStatus::kExhausted;
    result.message = "search exhausted; deepest depth reached " + std::to_string(result.stats.deepest) + " of " +
                     std::to_string(model.element_count());
  }
  return result;
}

void route_nodal_order(SequencePlan& plan, const TrussModel& model) {
  std::vector<int> degree(model.node_count(), 0);
  std::vector<char> exists(model.node_count(), 0);
  for (const Node& nd : model.nodes()) exists[nd.id] = nd.grounded ? 1 : 0;
  for (auto& step : plan.steps) {
    const Element& el = model.element(step.element_id);
    const int a = el.start_node;
    const int b = el.end_node;
    int from;
    if (exists[a] != exists[b]) {
      from = exists[a] ? a : b;
    } else if (degree[a] != degree[b]) {
      from = degree[a] > degree[b] ? a : b;
    } else {
      from = std::min(a, b);
    }
    step.start_node = from;
    step.end_node = from == a ? b : a;
    exists[a] = exists[b] = 1;
    ++degree[a];
    ++degree[b];
  }
}

std::string validate_sequence(const TrussModel& model, const RobotModel& robot, const PlannerConfig& config,
                              const SequencePlan& plan) {
  const int n = model.element_count();
  if (static_cast<int>(plan.steps.size()) != n) return "plan does not cover every element";
  if (plan.direction_count != config.directions) return "direction count differs from the configuration";
  std::vector<char> seen(n, 0);
  for (const auto& s : plan.steps) {
    if (s.element_id < 0 || s.element_id >= n || seen[s.element_id]) return "plan is not a permutation";
    seen[s.element_id] = 1;
  }
  if (config.use_decomposition && model.has_layers()) {
    const std::vector<int> layers = model_layers(model);
    for (std::size_t k = 1; k < plan.steps.size(); ++k) {
      if (layers[plan.steps[k].element_id] < layers[plan.steps[k - 1].element_id]) {
        return "layer order violated at step " + std::to_string(k);
      }
    }
  }

  const DirectionSet dirs = sample_directions(config.directions);
  const EEGeometry envelope = roll_envelope(robot.end_effector);
  std::vector<int> prefix;
  std::vector<char> node_present(model.node_count(), 0);
  for (const Node& nd : model.nodes()) node_present[nd.id] = nd.grounded ? 1 : 0;

  for (std::size_t k = 0; k < plan.steps.size(); ++k) {
    const auto& step = plan.steps[k];
    const Element& el = model.element(step.element_id);
    const std::string at = " at step " + std::to_string(k) + " (element " + std::to_string(step.element_id) + ")";
    if (!node_present[el.start_node] && !node_present[el.end_node]) return "Connect violated" + at;

    const CollisionScene scene = build_scene(model, config, prefix);
    prefix.push_back(step.element_id);
    const StructuralVerdict v = check_structure(model, prefix, config.structural);
    if (!v.stiff) return "stiffness violated" + at;
    if (!v.stable) return "stability violated" + at;

    if (step.feasible_directions.empty()) return "empty EE direction set" + at;
    const std::vector<Vec3> path = discretize_element(model, step.element_id, config.spacing).points;
    for (int a : step.feasible_directions) {
      for (std::size_t j = 0; j + 1 < prefix.size(); ++j) {
        if (ee_direction_blocked(path, dirs[a], element_capsule(model, prefix[j]), envelope, config.clearance)) {
          return "listed EE direction collides with a printed element" + at;
        }
      }
    }
    bool reachable = false;
    for (int r = 0; r < config.rotation_samples && !reachable; ++r) {
      for (int a : step.feasible_directions) {
        if (path_reachable(robot, path, dirs[a], rotation_sample(r), scene)) {
          reachable = true;
          break;
        }
      }
    }
    if (!reachable) return "no collision-free kinematic solution" + at;
    node_present[el.start_node] = node_present[el.end_node] = 1;
  }
  return {};
}

std::string render_stats_table(const std::vector<StatsRow>& rows) {
  std::ostringstream out;
  char line[512];
  std::snprintf(line, sizeof(line), "%-14s %5s %7s %9s %11s %9s %22s %22s %22s %22s\n", "model", "|E|", "decomp",
                "coll.cost", "total[s]", "states", "stiff&stab[s]|cnt", "kinematics[s]|cnt", "EE update[s]|cnt",
                "coll.cost[s]|cnt");
  out << line;
  auto pair = [](double t, long long c) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.3f|%lld", t, c);
    return std::string(buf);
  };
  for (const auto& r : rows) {
    const SearchStats& s = r.stats;
    std::snprintf(line, sizeof(line), "%-14s %5d %7s %9s %11.3f %9d %22s %22s %22s %22s\n", r.model.c_str(),
                  r.element_count, r.decomposition ? "yes" : "no", r.collision_cost ? "yes" : "no", s.total_time,
                  s.partial_states, pair(s.stiffness_time, s.stiffness_count).c_str(),
                  pair(s.kinematics_time, s.kinematics_count).c_str(), pair(s.ee_update_time, s.ee_update_count).c_str(),
                  pair(s.collision_cost_time, s.collision_cost_count).c_str());
    out << line;
  }
  return out.str();
}

}  // namespace spex
