#include "spex/postprocess.hpp"

#include <fstream>
#include <limits>

#include "spex/spatial.hpp"

namespace spex {

namespace {

constexpr SubprocessType kOrder[] = {SubprocessType::kTransition, SubprocessType::kRetractionApproach,
                                     SubprocessType::kExtrusion, SubprocessType::kRetractionDepart};

nlohmann::json vec_json(const Vec3& v) { return {v.x(), v.y(), v.z()}; }

Vec3 vec_from(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 3) throw InputError("plan: expected a 3-vector");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

double joint_gap(const JointConfig& a, const JointConfig& b) {
  if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
  return (a - b).cwiseAbs().maxCoeff();
}

}  // namespace

const char* subprocess_type_name(SubprocessType t) {
  switch (t) {
    case SubprocessType::kTransition:
      return "transition";
    case SubprocessType::kRetractionApproach:
      return "retraction-approach";
    case SubprocessType::kExtrusion:
      return "extrusion";
    case SubprocessType::kRetractionDepart:
      return "retraction-depart";
  }
  return "";
}

SubprocessType subprocess_type_from_name(const std::string& name) {
  for (SubprocessType t : kOrder) {
    if (name == subprocess_type_name(t)) return t;
  }
  throw InputError("plan: unknown subprocess type \"" + name + "\"");
}

TcpFrame tcp_of(const RobotModel& robot, const JointConfig& q) {
  const Frame f = fk(robot, q);
  return {f.translation(), f.linear().col(2), rotation_of(f.linear())};
}

TaggedPlan assemble_plan(const RobotModel& robot, const std::vector<TaskSegments>& segments,
                         const std::map<std::string, std::string>& fingerprints) {
  TaggedPlan plan;
  plan.fingerprints = fingerprints;
  const JointConfig* previous_end = nullptr;
  std::string previous_name = "home";
  for (std::size_t i = 0; i < segments.size(); ++i) {
    const TaskSegments& s = segments[i];
    TaskProcess task;
    task.task_id = static_cast<int>(i);
    task.element_id = s.element_id;
    const std::vector<JointConfig>* parts[] = {&s.transition, &s.approach, &s.extrusion, &s.depart};
    for (int k = 0; k < 4; ++k) {
      const auto& joints = *parts[k];
      const std::string name = "task " + std::to_string(i) + " " + subprocess_type_name(kOrder[k]);
      if (joints.empty()) throw AssemblyError(name + " has no waypoints");
      if (previous_end && joint_gap(*previous_end, joints.front()) > kSeamTolerance) {
        throw AssemblyError("seam mismatch between " + previous_name + " and " + name);
      }
      Subprocess sp;
      sp.id = static_cast<int>(i) * 4 + k;
      sp.type = kOrder[k];
      sp.data_kind = kOrder[k] == SubprocessType::kTransition ? "joint" : "tcp";
      sp.joints = joints;
      for (const auto& q : joints) sp.tcp.push_back(tcp_of(robot, q));
      if (sp.type == SubprocessType::kExtrusion) {
        sp.io_anchors = {{0, "extruder_on"}, {static_cast<int>(joints.size()) - 1, "extruder_off"}};
      }
      task.subprocesses.push_back(std::move(sp));
      previous_end = &joints.back();
      previous_name = name;
    }
    plan.tasks.push_back(std::move(task));
  }
  return plan;
}

double max_seam_gap(const TaggedPlan& plan) {
  double gap = 0.0;
  const JointConfig* prev = nullptr;
  for (const auto& t : plan.tasks) {
    for (const auto& sp : t.subprocesses) {
      if (sp.joints.empty()) continue;
      if (prev) gap = std::max(gap, joint_gap(*prev, sp.joints.front()));
      prev = &sp.joints.back();
    }
  }
  return gap;
}

nlohmann::json plan_to_json(const TaggedPlan& plan) {
  nlohmann::json tasks = nlohmann::json::array();
  for (const auto& t : plan.tasks) {
    nlohmann::json subs = nlohmann::json::array();
    for (const auto& sp : t.subprocesses) {
      nlohmann::json joints = nlohmann::json::array();
      for (const auto& q : sp.joints) joints.push_back(joint_config_to_json(q));
      nlohmann::json tcp = nlohmann::json::array();
      for (const auto& f : sp.tcp) {
        tcp.push_back({{"origin", vec_json(f.origin)}, {"zaxis", vec_json(f.zaxis)}, {"rotation", f.rotation}});
      }
      nlohmann::json anchors = nlohmann::json::array();
      for (const auto& a : sp.io_anchors) anchors.push_back({{"waypoint", a.waypoint}, {"command", a.command}});
      subs.push_back({{"id", sp.id},
                      {"type", subprocess_type_name(sp.type)},
                      {"data_kind", sp.data_kind},
                      {"joints", joints},
                      {"tcp", tcp},
                      {"io_anchors", anchors},
                      {"velocities", nullptr}});
    }
    tasks.push_back({{"task_id", t.task_id}, {"element_id", t.element_id}, {"subprocesses", subs}});
  }
  return {{"version", plan.version}, {"fingerprints", plan.fingerprints}, {"tasks", tasks}};
}

TaggedPlan plan_from_json(const nlohmann::json& doc) {
  const auto errors = plan_schema_errors(doc);
  if (!errors.empty()) throw InputError("plan: " + errors.front());
  TaggedPlan plan;
  plan.version = doc.at("version").get<int>();
  plan.fingerprints = doc.at("fingerprints").get<std::map<std::string, std::string>>();
  for (const auto& jt : doc.at("tasks")) {
    TaskProcess t;
    t.task_id = jt.at("task_id").get<int>();
    t.element_id = jt.at("element_id").get<int>();
    for (const auto& js : jt.at("subprocesses")) {
      Subprocess sp;
      sp.id = js.at("id").get<int>();
      sp.type = subprocess_type_from_name(js.at("type").get<std::string>());
      sp.data_kind = js.at("data_kind").get<std::string>();
      for (const auto& q : js.at("joints")) sp.joints.push_back(joint_config_from_json(q));
      for (const auto& f : js.at("tcp")) {
        sp.tcp.push_back({vec_from(f.at("origin")), vec_from(f.at("zaxis")), f.at("rotation").get<double>()});
      }
      for (const auto& a : js.at("io_anchors")) {
        sp.io_anchors.push_back({a.at("waypoint").get<int>(), a.at("command").get<std::string>()});
      }
      t.subprocesses.push_back(std::move(sp));
    }
    plan.tasks.push_back(std::move(t));
  }
  return plan;
}

void export_plan(const TaggedPlan& plan, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write plan file " + path);
  out << plan_to_json(plan).dump(1) << '\n';
}

TaggedPlan import_plan(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open plan file " + path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw InputError("plan file " + path + " is not valid JSON: " + e.what());
  }
  return plan_from_json(doc);
}

std::vector<std::string> plan_schema_errors(const nlohmann::json& doc) {
  std::vector<std::string> errors;
  auto need = [&](const nlohmann::json& j, const char* key, auto pred, const std::string& where) {
    if (!j.is_object() || !j.contains(key) || !pred(j.at(key))) {
      errors.push_back(where + ": missing or malformed \"" + key + "\"");
      return false;
    }
    return true;
  };
  auto is_int = [](const nlohmann::json& j) { return j.is_number_integer(); };
  auto is_array = [](const nlohmann::json& j) { return j.is_array(); };
  auto is_string = [](const nlohmann::json& j) { return j.is_string(); };
  auto is_vec3 = [](const nlohmann::json& j) {
    return j.is_array() && j.size() == 3 && j[0].is_number() && j[1].is_number() && j[2].is_number();
  };

  if (!doc.is_object()) return {"document is not an object"};
  if (need(doc, "version", is_int, "plan") && doc.at("version").get<int>() != kPlanSchemaVersion) {
    errors.push_back("plan: unsupported version " + doc.at("version").dump());
  }
  if (need(doc, "fingerprints", [](const nlohmann::json& j) { return j.is_object(); }, "plan")) {
    for (const auto& [k, v] : doc.at("fingerprints").items()) {
      if (!v.is_string()) errors.push_back("plan: fingerprint " + k + " is not a string");
    }
  }
  if (!need(doc, "tasks", is_array, "plan")) return errors;
  for (std::size_t i = 0; i < doc.at("tasks").size(); ++i) {
    const auto& t = doc.at("tasks")[i];
    const std::string where = "tasks[" + std::to_string(i) + "]";
    need(t, "task_id", is_int, where);
    need(t, "element_id", is_int, where);
    if (!need(t, "subprocesses", is_array, where)) continue;
    const auto& subs = t.at("subprocesses");
    if (subs.size() != 4) errors.push_back(where + ": expected 4 subprocesses, found " + std::to_string(subs.size()));
    for (std::size_t k = 0; k < subs.size(); ++k) {
      const auto& s = subs[k];
      const std::string sw = where + ".subprocesses[" + std::to_string(k) + "]";
      need(s, "id", is_int, sw);
      if (need(s, "type", is_string, sw)) {
        const std::string type = s.at("type").get<std::string>();
        if (k < 4 && type != subprocess_type_name(kOrder[k])) {
          errors.push_back(sw + ": type \"" + type + "\" where \"" + subprocess_type_name(kOrder[k]) + "\" is expected");
        }
      }
      if (need(s, "data_kind", is_string, sw)) {
        const std::string kind = s.at("data_kind").get<std::string>();
        if (kind != "tcp" && kind != "joint") errors.push_back(sw + ": data_kind must be tcp or joint");
      }
      const bool joints_ok = need(s, "joints", is_array, sw);
      const bool tcp_ok = need(s, "tcp", is_array, sw);
      need(s, "io_anchors", is_array, sw);
      if (s.contains("velocities") && !s.at("velocities").is_null() && !s.at("velocities").is_array()) {
        errors.push_back(sw + ": velocities must be null or an array");
      }
      if (joints_ok) {
        if (s.at("joints").empty()) errors.push_back(sw + ": no waypoints");
        for (const auto& q : s.at("joints")) {
          bool ok = q.is_array() && !q.empty() && q.size() <= static_cast<std::size_t>(kMaxDof);
          if (ok) {
            for (const auto& v : q) ok = ok && v.is_number();
          }
          if (!ok) {
            errors.push_back(sw + ": malformed joint waypoint");
            break;
          }
        }
      }
      if (tcp_ok) {
        for (const auto& f : s.at("tcp")) {
          if (!f.is_object() || !f.contains("origin") || !is_vec3(f.at("origin")) || !f.contains("zaxis") ||
              !is_vec3(f.at("zaxis")) || !f.contains("rotation") || !f.at("rotation").is_number()) {
            errors.push_back(sw + ": malformed tcp frame");
            break;
          }
        }
      }
      if (joints_ok && tcp_ok && s.at("joints").size() != s.at("tcp").size()) {
        errors.push_back(sw + ": joints and tcp differ in length");
      }
    }
  }
  return errors;
}

}  // namespace spex
