#include "spex/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "spex/structural.hpp"
#include "spex/transition_planner.hpp"

namespace spex {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

constexpr std::size_t kMaxFailuresPerCheck = 20;

void fail(ValidationCheck& c, const std::string& message) {
  c.passed = false;
  if (c.failures.size() < kMaxFailuresPerCheck) c.failures.push_back(message);
}

std::mt19937_64 stream(std::uint64_t seed, std::uint64_t salt) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(salt)};
  return std::mt19937_64(seq);
}

}  // namespace

std::map<std::string, std::string> input_fingerprints(const TrussModel& model, const nlohmann::json& robot_document,
                                                      const PlannerConfig& config) {
  return {{"model", hash_hex(content_hash(serialize_model(model)))},
          {"robot", hash_hex(content_hash(robot_document))},
          {"config", hash_hex(content_hash(planner_config_to_json(config)))}};
}

PipelineResult run_sequence_stage(const TrussModel& model, const RobotModel& robot, const PlannerConfig& config) {
  PipelineResult r;
  const auto t0 = Clock::now();
  SearchResult search = backtrack_search(model, robot, config);
  r.times.sequence = seconds_since(t0);
  r.search = search.stats;
  r.message = search.message;
  if (search.status != SearchStatus::kSuccess) {
    r.stage = search.status == SearchStatus::kTimeout ? "sequence (timeout)" : "sequence";
    return r;
  }
  r.sequence = std::move(search.plan);
  r.success = true;
  return r;
}

PipelineResult run_motion_stages(const TrussModel& model, const RobotModel& robot, const PlannerConfig& config,
                                 const SequencePlan& sequence, const std::map<std::string, std::string>& fingerprints) {
  PipelineResult r;
  r.sequence = sequence;
  const int n = static_cast<int>(sequence.steps.size());
  if (n != model.element_count()) {
    r.stage = "motion";
    r.message = "sequence does not cover the model";
    return r;
  }

  // semi-constrained Cartesian planning
  auto t0 = Clock::now();
  const std::vector<ExtrusionTask> tasks = make_tasks(model, config, sequence);
  const int budget = std::max(config.rrt_min_samples, config.rrt_samples_per_task * n);
  SparseResult sparse = rrt_star_sparse(robot, config, tasks, budget, config.seed);
  r.sparse = sparse.stats;
  if (!sparse.success) {
    r.times.cartesian = seconds_since(t0);
    r.stage = "cartesian";
    r.message = sparse.message;
    return r;
  }
  r.capsule_path = capsule_path_to_json(sparse.path, tasks, robot);
  std::vector<std::vector<Capsule>> chosen;
  for (const Capsule& c : sparse.path) chosen.push_back({c});
  ExpansionResult expanded = expand_and_search(robot, config, tasks, chosen);
  r.times.cartesian = seconds_since(t0);
  if (!expanded.success) {
    r.stage = "cartesian";
    r.message = expanded.message;
    return r;
  }
  const CartesianTrajectory& traj = expanded.trajectory;

  // retraction
  t0 = Clock::now();
  const DirectionSet dirs = sample_directions(config.directions);
  std::mt19937_64 retract_rng = stream(config.seed, 1);
  std::vector<TaskSegments> segments(n);
  for (int i = 0; i < n; ++i) {
    const TaskMotion& m = traj.tasks[i];
    TaskSegments& s = segments[i];
    s.element_id = m.element_id;
    s.extrusion = m.configs;
    Retraction approach = plan_retraction(robot, config, dirs, tasks[i].scene, m.configs.front(), tasks[i].directions,
                                          config.retraction_length, retract_rng);
    if (!approach.success) r.warnings.push_back("task " + std::to_string(i) + ": approach retraction degenerate");
    s.approach.assign(approach.configs.rbegin(), approach.configs.rend());

    std::vector<int> printed;
    for (int k = 0; k <= i; ++k) printed.push_back(sequence.steps[k].element_id);
    const CollisionScene after = build_scene(model, config, printed);
    Retraction depart = plan_retraction(robot, config, dirs, tasks[i].scene, m.configs.back(), tasks[i].directions,
                                        config.retraction_length, retract_rng, &after);
    if (!depart.success) r.warnings.push_back("task " + std::to_string(i) + ": depart retraction degenerate");
    s.depart = std::move(depart.configs);
  }
  r.times.retraction = seconds_since(t0);

  // transitions
  t0 = Clock::now();
  std::mt19937_64 transit_rng = stream(config.seed, 2);
  for (int i = 0; i < n; ++i) {
    const JointConfig start = i == 0 ? robot.home : segments[i - 1].depart.back();
    TransitionResult tr =
        plan_robot_transition(robot, config, tasks[i].scene, start, segments[i].approach.front(), transit_rng);
    if (!tr.success) {
      r.times.transition = seconds_since(t0);
      r.stage = "transition";
      r.message = "task " + std::to_string(i) + " (element " + std::to_string(tasks[i].element_id) + "): " + tr.message;
      return r;
    }
    if (tr.used_fallback) ++r.fallback_transitions;
    segments[i].transition = std::move(tr.path);
  }
  r.times.transition = seconds_since(t0);

  try {
    r.plan = assemble_plan(robot, segments, fingerprints);
  } catch (const AssemblyError& e) {
    r.stage = "postprocess";
    r.message = e.what();
    return r;
  }
  r.success = true;
  r.message = "plan complete";
  return r;
}

PipelineResult run_pipeline(const TrussModel& model, const RobotModel& robot, const PlannerConfig& config,
                            const std::map<std::string, std::string>& fingerprints) {
  PipelineResult seq = run_sequence_stage(model, robot, config);
  if (!seq.success) return seq;
  PipelineResult r = run_motion_stages(model, robot, config, *seq.sequence, fingerprints);
  r.search = seq.search;
  r.times.sequence = seq.times.sequence;
  return r;
}

// ---------------------------------------------------------------------------

bool ValidationReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const ValidationCheck& c) { return c.passed; });
}

const ValidationCheck* ValidationReport::find(const std::string& name) const {
  for (const auto& c : checks) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

std::string ValidationReport::render() const {
  std::ostringstream out;
  for (const auto& c : checks) {
    out << (c.passed ? "PASS " : "FAIL ") << c.name << '\n';
    for (const auto& f : c.failures) out << "     " << f << '\n';
  }
  char line[128];
  std::snprintf(line, sizeof(line), "max extrusion tip error %.3e mm, max seam gap %.3e\n", max_tip_error, max_seam_gap);
  out << line << (passed() ? "plan valid\n" : "plan INVALID\n");
  return out.str();
}

nlohmann::json ValidationReport::to_json() const {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& c : checks) arr.push_back({{"name", c.name}, {"passed", c.passed}, {"failures", c.failures}});
  return {{"passed", passed()}, {"checks", arr}, {"max_tip_error", max_tip_error}, {"max_seam_gap", max_seam_gap}};
}

ValidationReport validate_plan(const nlohmann::json& document, const TrussModel& model, const RobotModel& robot,
                               const PlannerConfig& config) {
  const auto errors = plan_schema_errors(document);
  if (!errors.empty()) {
    ValidationReport report;
    ValidationCheck schema{"schema", true, {}};
    for (const auto& e : errors) fail(schema, e);
    report.checks.push_back(std::move(schema));
    return report;
  }
  return validate_plan(plan_from_json(document), model, robot, config);
}

ValidationReport validate_plan(const TaggedPlan& plan, const TrussModel& model, const RobotModel& robot,
                               const PlannerConfig& config) {
  ValidationReport report;
  ValidationCheck schema{"schema", true, {}};
  for (const auto& e : plan_schema_errors(plan_to_json(plan))) fail(schema, e);

  ValidationCheck permutation{"permutation", true, {}};
  ValidationCheck connect{"connect", true, {}};
  ValidationCheck stiffness{"stiffness", true, {}};
  ValidationCheck stability{"stability", true, {}};
  ValidationCheck ee_direction{"ee-direction", true, {}};
  ValidationCheck tcp{"tcp-consistency", true, {}};
  ValidationCheck tip{"extrusion-tip", true, {}};
  ValidationCheck orientation{"constant-orientation", true, {}};
  ValidationCheck limits{"joint-limits", true, {}};
  ValidationCheck jumps{"jump-limits", true, {}};
  ValidationCheck collision{"collision", true, {}};
  ValidationCheck seams{"seams", true, {}};

  const int n = model.element_count();
  std::vector<char> seen(n, 0);
  for (const auto& t : plan.tasks) {
    if (t.element_id < 0 || t.element_id >= n || seen[t.element_id]) {
      fail(permutation, "task " + std::to_string(t.task_id) + ": element " + std::to_string(t.element_id) +
                            " out of range or repeated");
    } else {
      seen[t.element_id] = 1;
    }
  }
  if (static_cast<int>(plan.tasks.size()) != n) {
    fail(permutation, "plan has " + std::to_string(plan.tasks.size()) + " tasks for " + std::to_string(n) + " elements");
  }
  if (!permutation.passed) {
    report.checks = {schema, permutation};
    return report;
  }

  report.max_seam_gap = max_seam_gap(plan);
  if (report.max_seam_gap > kSeamTolerance) fail(seams, "joint gap across a subprocess boundary exceeds 1e-9");
  if (!plan.tasks.empty() && !plan.tasks.front().subprocesses.empty()) {
    const JointConfig& first = plan.tasks.front().subprocesses.front().joints.front();
    if (first.size() != robot.home.size() || (first - robot.home).cwiseAbs().maxCoeff() > kSeamTolerance) {
      fail(seams, "first transition does not start at the home configuration");
    }
  }

  const JointConfig jump = jump_limits(robot, config);
  const EEGeometry& ee = robot.end_effector;
  std::vector<int> printed;
  std::vector<char> node_present(model.node_count(), 0);
  for (const Node& nd : model.nodes()) node_present[nd.id] = nd.grounded ? 1 : 0;

  for (const auto& task : plan.tasks) {
    const std::string at_task = "task " + std::to_string(task.task_id);
    const Element& el = model.element(task.element_id);
    if (!node_present[el.start_node] && !node_present[el.end_node]) fail(connect, at_task + ": element is floating");

    const CollisionScene before = build_scene(model, config, printed);
    printed.push_back(task.element_id);
    const CollisionScene after = build_scene(model, config, printed);
    const StructuralVerdict verdict = check_structure(model, printed, config.structural);
    if (!verdict.stiff) fail(stiffness, at_task + ": partial structure exceeds the displacement tolerance");
    if (!verdict.stable) fail(stability, at_task + ": partial structure is unstable");
    node_present[el.start_node] = node_present[el.end_node] = 1;

    for (const Subprocess& sp : task.subprocesses) {
      const std::string at_sp = at_task + " " + subprocess_type_name(sp.type);
      if (sp.joints.size() != sp.tcp.size()) continue;  // reported by the schema check
      for (std::size_t k = 0; k < sp.joints.size(); ++k) {
        const JointConfig& q = sp.joints[k];
        const std::string at_wp = at_sp + " waypoint " + std::to_string(k);
        if (q.size() != robot.dof()) {
          fail(limits, at_wp + ": wrong joint count");
          continue;
        }
        if (!robot.within_limits(q, 1e-9)) fail(limits, at_wp + ": outside joint limits");
        const TcpFrame f = tcp_of(robot, q);
        if ((f.origin - sp.tcp[k].origin).norm() > 1e-9 || (f.zaxis - sp.tcp[k].zaxis).norm() > 1e-9) {
          fail(tcp, at_wp + ": TCP frame disagrees with forward kinematics");
        }
        if (k > 0 && !within_jump(sp.joints[k - 1], q, jump)) fail(jumps, at_wp + ": joint jump above the limit");
      }
      if (sp.joints.empty() || sp.joints.front().size() != robot.dof()) continue;

      // scene rules: everything runs amid the elements printed before the
      // task, the depart segment must also end clear of the new element
      for (std::size_t k = 0; k + 1 < sp.joints.size(); ++k) {
        if (motion_collides(robot, sp.joints[k], sp.joints[k + 1], before)) {
          fail(collision, at_sp + " segment " + std::to_string(k) + "->" + std::to_string(k + 1) + ": collision");
        }
      }
      if (sp.joints.size() == 1 && config_collides(robot, sp.joints.front(), before)) {
        fail(collision, at_sp + " waypoint 0: collision");
      }
      if (sp.type == SubprocessType::kRetractionDepart && config_collides(robot, sp.joints.back(), after)) {
        fail(collision, at_sp + ": final waypoint collides with the printed element");
      }

      if (sp.type != SubprocessType::kTransition) {
        const Frame f0 = fk(robot, sp.joints.front());
        for (std::size_t k = 1; k < sp.joints.size(); ++k) {
          const auto [dp, dr] = pose_error(f0, fk(robot, sp.joints[k]));
          (void)dp;
          if (dr > 1e-9) {
            fail(orientation, at_sp + " waypoint " + std::to_string(k) + ": orientation changes");
            break;
          }
        }
      }
      if (sp.type == SubprocessType::kExtrusion) {
        const Vec3 origin = fk(robot, sp.joints.front()).translation();
        const Vec3 a = model.node(el.start_node).position;
        const Vec3 b = model.node(el.end_node).position;
        const int from = (origin - a).norm() <= (origin - b).norm() ? el.start_node : el.end_node;
        const auto path = discretize_element(model, task.element_id, config.spacing, from).points;
        if (path.size() != sp.joints.size()) {
          fail(tip, at_sp + ": " + std::to_string(sp.joints.size()) + " waypoints for " + std::to_string(path.size()) +
                        " path points");
        } else {
          for (std::size_t k = 0; k < path.size(); ++k) {
            const double e = (fk(robot, sp.joints[k]).translation() - path[k]).norm();
            report.max_tip_error = std::max(report.max_tip_error, e);
            if (e > 1e-6) fail(tip, at_sp + " waypoint " + std::to_string(k) + ": tip error " + std::to_string(e) + " mm");
          }
        }
        const Frame f = fk(robot, sp.joints.front());
        const Vec3 z = f.linear().col(2);
        const double roll = rotation_of(f.linear());
        for (std::size_t j = 0; j + 1 < printed.size(); ++j) {
          if (ee_element_collision(path, z, roll, element_capsule(model, printed[j]), ee, config.clearance)) {
            fail(ee_direction, at_sp + ": EE orientation collides with element " + std::to_string(printed[j]));
          }
        }
      }
    }
  }
  report.checks = {schema, permutation, connect, stiffness, stability, ee_direction, tcp,
                   tip,    orientation, limits,  jumps,     collision, seams};
  return report;
}

// ---------------------------------------------------------------------------

nlohmann::json run_stats_json(const std::string& model_name, const TrussModel& model, const PlannerConfig& config,
                              const PipelineResult& result) {
  Vec3 lo = Vec3::Constant(kInf), hi = Vec3::Constant(-kInf);
  for (const Node& nd : model.nodes()) {
    lo = lo.cwiseMin(nd.position);
    hi = hi.cwiseMax(nd.position);
  }
  const Vec3 size = model.node_count() ? Vec3(hi - lo) : Vec3::Zero();
  int layers = 1;
  if (model.has_layers()) {
    const auto l = model_layers(model);
    layers = *std::max_element(l.begin(), l.end()) + 1;
  }
  return {{"model", model_name},
          {"nodes", model.node_count()},
          {"elements", model.element_count()},
          {"layers", layers},
          {"size", {size.x(), size.y(), size.z()}},
          {"decomposition", config.use_decomposition && model.has_layers()},
          {"collision_cost", config.collision_cost},
          {"success", result.success},
          {"stage", result.stage},
          {"message", result.message},
          {"search", stats_to_json(result.search)},
          {"sparse", sparse_stats_to_json(result.sparse)},
          {"times",
           {{"sequence", result.times.sequence},
            {"cartesian", result.times.cartesian},
            {"retraction", result.times.retraction},
            {"transition", result.times.transition}}},
          {"fallback_transitions", result.fallback_transitions},
          {"warnings", result.warnings}};
}

std::string render_stage_table(const std::vector<nlohmann::json>& stats) {
  std::ostringstream out;
  char line[512];
  std::snprintf(line, sizeof(line), "%-14s %6s %8s %6s %12s %14s %14s %14s  %s\n", "model", "nodes", "elements",
                "layers", "sequence[s]", "cartesian[s]", "retraction[s]", "transition[s]", "size[mm]");
  out << line;
  for (const auto& s : stats) {
    const auto& t = s.at("times");
    const auto& sz = s.at("size");
    std::snprintf(line, sizeof(line), "%-14s %6d %8d %6d %12.3f %14.3f %14.3f %14.3f  %.0fx%.0fx%.0f\n",
                  s.at("model").get<std::string>().c_str(), s.at("nodes").get<int>(), s.at("elements").get<int>(),
                  s.at("layers").get<int>(), t.at("sequence").get<double>(), t.at("cartesian").get<double>(),
                  t.at("retraction").get<double>(), t.at("transition").get<double>(), sz[0].get<double>(),
                  sz[1].get<double>(), sz[2].get<double>());
    out << line;
  }
  return out.str();
}

std::string render_search_table(const std::vector<nlohmann::json>& stats) {
  std::vector<StatsRow> rows;
  for (const auto& s : stats) {
    rows.push_back({s.at("model").get<std::string>(), s.at("elements").get<int>(), s.at("decomposition").get<bool>(),
                    s.at("collision_cost").get<bool>(), stats_from_json(s.at("search"))});
  }
  return render_stats_table(rows);
}

nlohmann::json export_geometry(const TaggedPlan& plan) {
  nlohmann::json polylines = nlohmann::json::array();
  for (const auto& t : plan.tasks) {
    for (const auto& sp : t.subprocesses) {
      nlohmann::json pts = nlohmann::json::array();
      for (const auto& f : sp.tcp) pts.push_back({f.origin.x(), f.origin.y(), f.origin.z()});
      polylines.push_back({{"task_id", t.task_id},
                           {"element_id", t.element_id},
                           {"type", subprocess_type_name(sp.type)},
                           {"points", pts}});
    }
  }
  return {{"version", kPlanSchemaVersion}, {"polylines", polylines}};
}

}  // namespace spex
