// Serial vs OpenMP timings for the planner kernels. Exits 1 if the two
// versions ever disagree.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <fstream>

#include "spex/kernels.hpp"
#include "spex/pipeline.hpp"

using namespace spex;

namespace {

template <class F>
double best_of(int reps, F&& f) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  }
  return best;
}

void row(const char* name, std::size_t work, double serial, double parallel, bool same) {
  std::printf("%-22s %10zu %12.4f %12.4f %8.2fx %s\n", name, work, serial, parallel, serial / parallel,
              same ? "match" : "MISMATCH");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app("kernel benchmark");
  std::string model_path = std::string(SPEX_DATA_DIR) + "/models/tower52.json";
  std::string robot_path = std::string(SPEX_DATA_DIR) + "/robots/kr6_r900_like.json";
  int reps = 3;
  int threads = 0;
  app.add_option("--model", model_path);
  app.add_option("--robot", robot_path);
  app.add_option("--reps", reps)->check(CLI::PositiveNumber);
  app.add_option("--threads", threads);
  CLI11_PARSE(app, argc, argv);
  kernels::set_threads(threads);

  const TrussModel model = load_model_file(model_path);
  std::ifstream in(robot_path);
  const RobotModel robot = load_robot(nlohmann::json::parse(in));
  const PlannerConfig config;
  const DirectionSet dirs = sample_directions(config.directions);
  const EEGeometry envelope = roll_envelope(robot.end_effector);

  std::vector<std::vector<Vec3>> paths;
  for (int e = 0; e < model.element_count(); ++e) paths.push_back(discretize_element(model, e, config.spacing).points);
  const kernels::PropagationInput pin{paths, &dirs, &envelope, config.clearance};
  std::vector<kernels::BlockQuery> queries;
  for (int e = 0; e < model.element_count(); ++e) {
    for (int a = 0; a < dirs.size(); ++a) queries.push_back({e, a});
  }

  std::vector<Frame> poses;
  for (int e = 0; e < model.element_count(); ++e) {
    for (int a = 0; a < dirs.size(); a += 7) {
      if (dirs[a].z() > -0.3) continue;
      for (const Vec3& p : paths[e]) poses.push_back(tool_frame(p, dirs[a], 0.0));
    }
  }
  const CollisionScene scene = build_scene(model, config, std::vector<int>{0, 1, 2, 3});

  std::printf("%-22s %10s %12s %12s %9s\n", "kernel", "work", "serial[s]", "parallel[s]", "speedup");
  bool all_same = true;

  std::vector<char> bs, bp;
  const CapsuleShape obstacle = element_capsule(model, model.element_count() / 2);
  const double ts = best_of(reps, [&] { bs = kernels::blocked_serial(pin, obstacle, queries); });
  const double tp = best_of(reps, [&] { bp = kernels::blocked_parallel(pin, obstacle, queries); });
  row("ee-direction blocked", queries.size(), ts, tp, bs == bp);
  all_same = all_same && bs == bp;

  std::vector<std::vector<JointConfig>> is, ip;
  const double ks = best_of(reps, [&] { is = kernels::ik_families_serial(robot, poses, scene); });
  const double kp = best_of(reps, [&] { ip = kernels::ik_families_parallel(robot, poses, scene); });
  row("ik families", poses.size(), ks, kp, is == ip);
  all_same = all_same && is == ip;

  return all_same ? 0 : 1;
}
