#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "spex/kernels.hpp"
#include "spex/pipeline.hpp"

namespace fs = std::filesystem;
using namespace spex;

namespace {

enum Exit { kOk = 0, kPlanningFailure = 2, kValidationFailure = 3, kConfigError = 4 };

struct Options {
  std::string model;
  std::string robot;
  std::string config;
  std::string out;
  std::string from_sequence;
  std::string input;
  std::vector<std::string> inputs;
  std::optional<std::uint64_t> seed;
  std::optional<double> timeout;
  bool no_decomposition = false;
  bool collision_cost = false;
};

nlohmann::json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw InputError(path + " is not valid JSON: " + e.what());
  }
}

void write_json(const std::string& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path);
  out << j.dump(1) << '\n';
}

// plan.json -> plan.<suffix>.json
std::string sidecar(const std::string& out, const std::string& suffix) {
  fs::path p(out);
  const std::string stem = p.extension() == ".json" ? p.stem().string() : p.filename().string();
  return (p.parent_path() / (stem + "." + suffix + ".json")).string();
}

struct Inputs {
  TrussModel model;
  nlohmann::json robot_document;
  RobotModel robot;
  PlannerConfig config;
  std::string model_name;
};

Inputs load_inputs(const Options& o) {
  if (o.model.empty()) throw InputError("--model is required");
  if (o.robot.empty()) throw InputError("--robot is required");
  Inputs in{load_model_file(o.model), read_json(o.robot), {}, {}, fs::path(o.model).stem().string()};
  in.robot = load_robot(in.robot_document);
  if (!o.config.empty()) in.config = load_planner_config(read_json(o.config));
  if (o.seed) in.config.seed = *o.seed;
  if (o.timeout) in.config.search_timeout = *o.timeout;
  if (o.no_decomposition) in.config.use_decomposition = false;
  if (o.collision_cost) in.config.collision_cost = true;
  kernels::set_threads(in.config.threads);
  return in;
}

void report_failure(const PipelineResult& r) {
  std::cerr << "planning failed at " << r.stage << ": " << r.message << '\n';
  if (r.stage.rfind("sequence", 0) == 0) {
    std::cerr << "deepest assignment " << r.search.deepest << ", partial states " << r.search.partial_states << '\n';
  } else if (r.stage == "cartesian") {
    std::cerr << "deepest task reached " << r.sparse.deepest_task << '\n';
  }
}

void write_motion_outputs(const Options& o, const PipelineResult& r) {
  if (!r.capsule_path.is_null()) write_json(sidecar(o.out, "capsules"), r.capsule_path);
  if (r.plan) export_plan(*r.plan, o.out);
}

int cmd_plan(const Options& o) {
  const Inputs in = load_inputs(o);
  const PipelineResult r = run_pipeline(in.model, in.robot, in.config, input_fingerprints(in.model, in.robot_document, in.config));
  const nlohmann::json stats = run_stats_json(in.model_name, in.model, in.config, r);
  write_json(sidecar(o.out, "stats"), stats);
  if (r.sequence) write_json(sidecar(o.out, "sequence"), sequence_plan_to_json(*r.sequence));
  for (const auto& w : r.warnings) std::cerr << "warning: " << w << '\n';
  if (!r.success) {
    report_failure(r);
    return kPlanningFailure;
  }
  write_motion_outputs(o, r);
  std::cout << render_stage_table({stats}) << "plan written to " << o.out << '\n';
  return kOk;
}

int cmd_sequence(const Options& o) {
  const Inputs in = load_inputs(o);
  const PipelineResult r = run_sequence_stage(in.model, in.robot, in.config);
  const nlohmann::json stats = run_stats_json(in.model_name, in.model, in.config, r);
  write_json(sidecar(o.out, "stats"), stats);
  if (!r.success) {
    report_failure(r);
    return kPlanningFailure;
  }
  write_json(o.out, sequence_plan_to_json(*r.sequence));
  std::cout << render_search_table({stats}) << "sequence written to " << o.out << '\n';
  return kOk;
}

int cmd_motion(const Options& o) {
  const Inputs in = load_inputs(o);
  const SequencePlan sequence = sequence_plan_from_json(read_json(o.from_sequence));
  if (const std::string problem = validate_sequence(in.model, in.robot, in.config, sequence); !problem.empty()) {
    throw InputError("sequence " + o.from_sequence + " is unusable: " + problem);
  }
  const PipelineResult r = run_motion_stages(in.model, in.robot, in.config, sequence,
                                             input_fingerprints(in.model, in.robot_document, in.config));
  const nlohmann::json stats = run_stats_json(in.model_name, in.model, in.config, r);
  write_json(sidecar(o.out, "stats"), stats);
  for (const auto& w : r.warnings) std::cerr << "warning: " << w << '\n';
  if (!r.success) {
    report_failure(r);
    return kPlanningFailure;
  }
  write_motion_outputs(o, r);
  std::cout << render_stage_table({stats}) << "plan written to " << o.out << '\n';
  return kOk;
}

int cmd_validate(const Options& o) {
  const Inputs in = load_inputs(o);
  const ValidationReport report = validate_plan(read_json(o.input), in.model, in.robot, in.config);
  std::cout << report.render();
  if (!o.out.empty()) write_json(o.out, report.to_json());
  return report.passed() ? kOk : kValidationFailure;
}

int cmd_stats(const Options& o) {
  std::vector<nlohmann::json> rows;
  for (const auto& path : o.inputs) rows.push_back(read_json(path));
  try {
    std::cout << render_stage_table(rows) << '\n' << render_search_table(rows);
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed stats file: ") + e.what());
  }
  return kOk;
}

int cmd_export_geometry(const Options& o) {
  const nlohmann::json geometry = export_geometry(import_plan(o.input));
  if (o.out.empty()) {
    std::cout << geometry.dump(1) << '\n';
  } else {
    write_json(o.out, geometry);
  }
  return kOk;
}

void add_inputs(CLI::App* cmd, Options& o) {
  cmd->add_option("--model", o.model, "truss model document");
  cmd->add_option("--robot", o.robot, "robot document");
  cmd->add_option("--config", o.config, "planner config document");
}

void add_planning(CLI::App* cmd, Options& o) {
  cmd->add_option("--seed", o.seed, "random seed");
  cmd->add_option("--timeout", o.timeout, "sequence search timeout [s]");
  cmd->add_flag("--no-decomposition", o.no_decomposition, "ignore layer decomposition");
  cmd->add_flag("--collision-cost", o.collision_cost, "order candidates by collision cost");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"spatial extrusion sequence and motion planner"};
  app.require_subcommand(1);
  Options o;

  auto* plan = app.add_subcommand("plan", "full pipeline");
  add_inputs(plan, o);
  add_planning(plan, o);
  plan->add_option("--out", o.out, "plan output path")->default_val("plan.json");

  auto* sequence = app.add_subcommand("sequence", "sequence search only");
  add_inputs(sequence, o);
  add_planning(sequence, o);
  sequence->add_option("--out", o.out, "sequence output path")->default_val("sequence.json");

  auto* motion = app.add_subcommand("motion", "motion stages from a saved sequence");
  add_inputs(motion, o);
  add_planning(motion, o);
  motion->add_option("--from-sequence", o.from_sequence, "sequence document")->required();
  motion->add_option("--out", o.out, "plan output path")->default_val("plan.json");

  auto* validate = app.add_subcommand("validate", "check a plan from scratch");
  validate->add_option("plan", o.input, "plan document")->required();
  add_inputs(validate, o);
  validate->add_option("--out", o.out, "report output path");

  auto* stats = app.add_subcommand("stats", "tabulate stats sidecars");
  stats->add_option("statsfile", o.inputs, "stats documents")->required();

  auto* geometry = app.add_subcommand("export-geometry", "TCP polylines of a plan");
  geometry->add_option("plan", o.input, "plan document")->required();
  geometry->add_option("--out", o.out, "output path (stdout if omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (plan->parsed()) return cmd_plan(o);
    if (sequence->parsed()) return cmd_sequence(o);
    if (motion->parsed()) return cmd_motion(o);
    if (validate->parsed()) return cmd_validate(o);
    if (stats->parsed()) return cmd_stats(o);
    if (geometry->parsed()) return cmd_export_geometry(o);
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfigError;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfigError;
  }
  return kConfigError;
}
