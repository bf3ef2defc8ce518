#include "spex/planner_config.hpp"

#include <cstdio>
#include <fstream>

namespace spex {

namespace {

template <typename T>
void read(const nlohmann::json& doc, const char* key, T& out) {
  if (doc.contains(key) && !doc.at(key).is_null()) out = doc.at(key).get<T>();
}

Vec3 vec3(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 3) throw InputError("config: expected a 3-vector");
  return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

void require(bool ok, const std::string& message) {
  if (!ok) throw InputError("config: " + message);
}

}  // namespace

PlannerConfig load_planner_config(const nlohmann::json& doc) {
  PlannerConfig c;
  if (doc.is_null()) return c;
  require(doc.is_object(), "document must be an object");
  try {
    read(doc, "directions", c.directions);
    read(doc, "spacing", c.spacing);
    read(doc, "clearance", c.clearance);
    if (doc.contains("floor_z")) {
      c.floor_z = doc.at("floor_z").is_null() ? std::nullopt : std::optional<double>(doc.at("floor_z").get<double>());
    }
    if (doc.contains("static_obstacles")) {
      for (const auto& o : doc.at("static_obstacles")) {
        c.static_obstacles.push_back({vec3(o.at("p0")), vec3(o.at("p1")), o.at("radius").get<double>()});
      }
    }
    if (doc.contains("gravity")) c.structural.gravity = vec3(doc.at("gravity"));
    read(doc, "stiffness_tolerance", c.structural.displacement_tolerance);
    read(doc, "tension_tolerance", c.structural.tension_tolerance);

    read(doc, "kinematics_timeout", c.kinematics_timeout);
    read(doc, "rotation_samples", c.rotation_samples);
    read(doc, "search_timeout", c.search_timeout);
    read(doc, "use_decomposition", c.use_decomposition);
    read(doc, "collision_cost", c.collision_cost);
    read(doc, "propagation", c.propagation);

    read(doc, "rrt_samples_per_task", c.rrt_samples_per_task);
    read(doc, "rrt_min_samples", c.rrt_min_samples);
    read(doc, "rrt_timeout", c.rrt_timeout);
    read(doc, "rotation_grid", c.rotation_grid);
    read(doc, "jump_limit", c.jump_limit);
    read(doc, "track_jump_limit", c.track_jump_limit);
    read(doc, "retraction_length", c.retraction_length);
    read(doc, "full_graph_vertex_cap", c.full_graph_vertex_cap);

    if (doc.contains("transition")) {
      const auto& t = doc.at("transition");
      read(t, "direct_timeout", c.transition.direct_timeout);
      read(t, "fallback_timeout", c.transition.fallback_timeout);
      read(t, "direct_iterations", c.transition.direct_iterations);
      read(t, "fallback_iterations", c.transition.fallback_iterations);
      read(t, "extend_step", c.transition.extend_step);
      read(t, "smoothing_iterations", c.transition.smoothing_iterations);
    }
    read(doc, "seed", c.seed);
    read(doc, "threads", c.threads);
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("config: schema violation: ") + e.what());
  }

  require(c.directions >= 4, "directions must be at least 4");
  require(c.spacing > 0, "spacing must be positive");
  require(c.clearance >= 0, "clearance must be non-negative");
  require(c.structural.displacement_tolerance > 0, "stiffness_tolerance must be positive");
  require(c.kinematics_timeout > 0 && c.search_timeout > 0, "timeouts must be positive");
  require(c.rotation_samples >= 1, "rotation_samples must be at least 1");
  require(c.rrt_samples_per_task >= 1, "rrt_samples_per_task must be at least 1");
  require(c.rotation_grid >= 0, "rotation_grid must be non-negative");
  require(c.jump_limit > 0 && c.track_jump_limit > 0, "jump limits must be positive");
  require(c.retraction_length >= 0, "retraction_length must be non-negative");
  require(c.transition.direct_timeout > 0 && c.transition.fallback_timeout > 0, "transition timeouts must be positive");
  require(c.transition.extend_step > 0, "transition.extend_step must be positive");
  return c;
}

PlannerConfig load_planner_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config file " + path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw InputError("config file " + path + " is not valid JSON: " + e.what());
  }
  return load_planner_config(doc);
}

nlohmann::json planner_config_to_json(const PlannerConfig& c) {
  nlohmann::json obstacles = nlohmann::json::array();
  for (const auto& o : c.static_obstacles) {
    obstacles.push_back({{"p0", {o.p0.x(), o.p0.y(), o.p0.z()}}, {"p1", {o.p1.x(), o.p1.y(), o.p1.z()}}, {"radius", o.radius}});
  }
  const Vec3& g = c.structural.gravity;
  return {
      {"directions", c.directions},
      {"spacing", c.spacing},
      {"clearance", c.clearance},
      {"floor_z", c.floor_z ? nlohmann::json(*c.floor_z) : nlohmann::json(nullptr)},
      {"static_obstacles", obstacles},
      {"gravity", {g.x(), g.y(), g.z()}},
      {"stiffness_tolerance", c.structural.displacement_tolerance},
      {"tension_tolerance", c.structural.tension_tolerance},
      {"kinematics_timeout", c.kinematics_timeout},
      {"rotation_samples", c.rotation_samples},
      {"search_timeout", c.search_timeout},
      {"use_decomposition", c.use_decomposition},
      {"collision_cost", c.collision_cost},
      {"propagation", c.propagation},
      {"rrt_samples_per_task", c.rrt_samples_per_task},
      {"rrt_min_samples", c.rrt_min_samples},
      {"rrt_timeout", c.rrt_timeout},
      {"rotation_grid", c.rotation_grid},
      {"jump_limit", c.jump_limit},
      {"track_jump_limit", c.track_jump_limit},
      {"retraction_length", c.retraction_length},
      {"full_graph_vertex_cap", c.full_graph_vertex_cap},
      {"transition",
       {{"direct_timeout", c.transition.direct_timeout},
        {"fallback_timeout", c.transition.fallback_timeout},
        {"direct_iterations", c.transition.direct_iterations},
        {"fallback_iterations", c.transition.fallback_iterations},
        {"extend_step", c.transition.extend_step},
        {"smoothing_iterations", c.transition.smoothing_iterations}}},
      {"seed", c.seed},
      {"threads", c.threads},
  };
}

JointConfig jump_limits(const RobotModel& robot, const PlannerConfig& config) {
  JointConfig lim(robot.dof());
  for (int j = 0; j < robot.dof(); ++j) lim[j] = robot.is_prismatic(j) ? config.track_jump_limit : config.jump_limit;
  return lim;
}

CapsuleShape element_capsule(const TrussModel& model, int element_id) {
  return {model.start_point(element_id), model.end_point(element_id), model.section().radius};
}

CollisionScene build_scene(const TrussModel& model, const PlannerConfig& config, std::span<const int> elements) {
  CollisionScene scene;
  scene.clearance = config.clearance;
  scene.floor_z = config.floor_z;
  scene.obstacles = config.static_obstacles;
  for (int e : elements) scene.obstacles.push_back(element_capsule(model, e));
  return scene;
}

std::uint64_t content_hash(const nlohmann::json& document) {
  const std::string text = document.dump();
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string hash_hex(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace spex
