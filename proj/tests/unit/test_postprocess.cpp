#include <doctest.h>

#include <cstdio>
#include <filesystem>

#include "fixtures.hpp"

using namespace spex;

namespace {

// Straight joint path from a to b with n waypoints.
std::vector<JointConfig> ramp(const JointConfig& a, const JointConfig& b, int n) {
  std::vector<JointConfig> out;
  for (int k = 0; k < n; ++k) out.push_back(a + (b - a) * (n == 1 ? 0.0 : double(k) / (n - 1)));
  if (n > 1) out.back() = b;
  return out;
}

std::vector<TaskSegments> synthetic_segments(const RobotModel& robot, int tasks) {
  std::mt19937_64 rng(3);
  std::vector<TaskSegments> out;
  JointConfig cursor = robot.home;
  for (int i = 0; i < tasks; ++i) {
    TaskSegments s;
    s.element_id = tasks - 1 - i;
    const JointConfig a = test::random_config(robot, rng), b = test::random_config(robot, rng);
    const JointConfig c = test::random_config(robot, rng), d = test::random_config(robot, rng);
    s.transition = ramp(cursor, a, 4);
    s.approach = ramp(a, b, 3);
    s.extrusion = ramp(b, c, 5);
    s.depart = ramp(c, d, 2);
    cursor = d;
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace

TEST_CASE("assembly lays out four tagged subprocesses per task") {
  const RobotModel& robot = test::robot();
  const auto segs = synthetic_segments(robot, 3);
  const TaggedPlan plan = assemble_plan(robot, segs, {{"model", "abc"}});
  REQUIRE(plan.tasks.size() == 3);
  const SubprocessType order[] = {SubprocessType::kTransition, SubprocessType::kRetractionApproach,
                                  SubprocessType::kExtrusion, SubprocessType::kRetractionDepart};
  for (int i = 0; i < 3; ++i) {
    const auto& t = plan.tasks[i];
    CHECK(t.task_id == i);
    CHECK(t.element_id == segs[i].element_id);
    REQUIRE(t.subprocesses.size() == 4);
    for (int k = 0; k < 4; ++k) {
      const Subprocess& sp = t.subprocesses[k];
      CHECK(sp.id == 4 * i + k);
      CHECK(sp.type == order[k]);
      CHECK(sp.data_kind == (k == 0 ? "joint" : "tcp"));
      REQUIRE(sp.tcp.size() == sp.joints.size());
      for (std::size_t w = 0; w < sp.joints.size(); ++w) {
        const Frame f = fk(robot, sp.joints[w]);
        CHECK((sp.tcp[w].origin - f.translation()).norm() == 0.0);
        CHECK((sp.tcp[w].zaxis - f.linear().col(2)).norm() == 0.0);
      }
    }
    const auto& anchors = t.subprocesses[2].io_anchors;
    REQUIRE(anchors.size() == 2);
    CHECK(anchors[0].waypoint == 0);
    CHECK(anchors[0].command == "extruder_on");
    CHECK(anchors[1].waypoint == 4);
    CHECK(anchors[1].command == "extruder_off");
    CHECK(t.subprocesses[0].io_anchors.empty());
  }
  CHECK(max_seam_gap(plan) == 0.0);
}

TEST_CASE("a seam gap is named") {
  const RobotModel& robot = test::robot();
  auto segs = synthetic_segments(robot, 2);
  segs[1].approach.front()[2] += 1e-6;
  try {
    assemble_plan(robot, segs, {});
    FAIL("expected an assembly error");
  } catch (const AssemblyError& e) {
    CHECK(std::string(e.what()).find("task 1 transition") != std::string::npos);
    CHECK(std::string(e.what()).find("task 1 retraction-approach") != std::string::npos);
  }
  auto empty = synthetic_segments(robot, 1);
  empty[0].depart.clear();
  CHECK_THROWS_AS(assemble_plan(robot, empty, {}), AssemblyError);
}

TEST_CASE("json round trip is lossless") {
  const RobotModel& robot = test::robot();
  const TaggedPlan plan = assemble_plan(robot, synthetic_segments(robot, 3), {{"model", "1"}, {"robot", "2"}});
  const nlohmann::json doc = plan_to_json(plan);
  CHECK(plan_schema_errors(doc).empty());
  CHECK(plan_to_json(plan_from_json(doc)) == doc);
  CHECK(plan_to_json(plan_from_json(nlohmann::json::parse(doc.dump(1)))) == doc);
  for (const auto& t : doc.at("tasks")) {
    for (const auto& sp : t.at("subprocesses")) CHECK(sp.at("velocities").is_null());
  }

  const auto path = (std::filesystem::temp_directory_path() / "spex_postprocess_roundtrip.json").string();
  export_plan(plan, path);
  CHECK(plan_to_json(import_plan(path)) == doc);
  std::remove(path.c_str());
}

TEST_CASE("schema violations are caught") {
  const RobotModel& robot = test::robot();
  const nlohmann::json doc = plan_to_json(assemble_plan(robot, synthetic_segments(robot, 2), {}));

  auto bad_type = doc;
  bad_type["tasks"][0]["subprocesses"][2]["type"] = "extrude";
  CHECK_FALSE(plan_schema_errors(bad_type).empty());
  CHECK_THROWS_AS(plan_from_json(bad_type), InputError);

  auto swapped = doc;
  std::swap(swapped["tasks"][1]["subprocesses"][0], swapped["tasks"][1]["subprocesses"][1]);
  CHECK_FALSE(plan_schema_errors(swapped).empty());

  auto three = doc;
  three["tasks"][0]["subprocesses"].erase(3);
  CHECK_FALSE(plan_schema_errors(three).empty());

  auto lengths = doc;
  lengths["tasks"][0]["subprocesses"][1]["tcp"].erase(0);
  CHECK_FALSE(plan_schema_errors(lengths).empty());

  auto velocity = doc;
  velocity["tasks"][0]["subprocesses"][1]["velocities"] = "fast";
  CHECK_FALSE(plan_schema_errors(velocity).empty());
  auto assigned = doc;
  assigned["tasks"][0]["subprocesses"][1]["velocities"] = {1.0, 2.0, 3.0};
  CHECK(plan_schema_errors(assigned).empty());

  auto version = doc;
  version["version"] = 2;
  CHECK_FALSE(plan_schema_errors(version).empty());

  auto kind = doc;
  kind["tasks"][0]["subprocesses"][0]["data_kind"] = "pose";
  CHECK_FALSE(plan_schema_errors(kind).empty());

  CHECK_FALSE(plan_schema_errors(nlohmann::json::array()).empty());
}

TEST_CASE("subprocess type names") {
  for (auto t : {SubprocessType::kTransition, SubprocessType::kRetractionApproach, SubprocessType::kExtrusion,
                 SubprocessType::kRetractionDepart}) {
    CHECK(subprocess_type_from_name(subprocess_type_name(t)) == t);
  }
  CHECK_THROWS_AS(subprocess_type_from_name("extrude"), InputError);
}
