#include "spex/kernels.hpp"

#include <omp.h>

#include <atomic>

namespace spex::kernels {

namespace {

std::atomic<bool> g_parallel{true};

bool blocked_one(const PropagationInput& in, const CapsuleShape& obstacle, const BlockQuery& q) {
  return ee_direction_blocked(in.paths[static_cast<std::size_t>(q.element)], (*in.directions)[q.direction], obstacle,
                              *in.envelope, in.clearance);
}

std::vector<JointConfig> free_family(const RobotModel& robot, const Frame& pose, const CollisionScene& scene) {
  std::vector<JointConfig> family;
  for (JointConfig& q : ik(robot, pose)) {
    if (!config_collides(robot, q, scene)) family.push_back(std::move(q));
  }
  return family;
}

}  // namespace

std::vector<char> blocked_serial(const PropagationInput& in, const CapsuleShape& obstacle,
                                 std::span<const BlockQuery> queries) {
  std::vector<char> flags(queries.size(), 0);
  for (std::size_t k = 0; k < queries.size(); ++k) flags[k] = blocked_one(in, obstacle, queries[k]);
  return flags;
}

std::vector<char> blocked_parallel(const PropagationInput& in, const CapsuleShape& obstacle,
                                   std::span<const BlockQuery> queries) {
  std::vector<char> flags(queries.size(), 0);
  const auto n = static_cast<long long>(queries.size());
#pragma omp parallel for schedule(dynamic, 16)
  for (long long k = 0; k < n; ++k) flags[k] = blocked_one(in, obstacle, queries[k]);
  return flags;
}

std::vector<std::vector<JointConfig>> ik_families_serial(const RobotModel& robot, std::span<const Frame> poses,
                                                         const CollisionScene& scene) {
  std::vector<std::vector<JointConfig>> out(poses.size());
  for (std::size_t k = 0; k < poses.size(); ++k) out[k] = free_family(robot, poses[k], scene);
  return out;
}

std::vector<std::vector<JointConfig>> ik_families_parallel(const RobotModel& robot, std::span<const Frame> poses,
                                                           const CollisionScene& scene) {
  std::vector<std::vector<JointConfig>> out(poses.size());
  const auto n = static_cast<long long>(poses.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (long long k = 0; k < n; ++k) out[k] = free_family(robot, poses[k], scene);
  return out;
}

std::vector<char> blocked(const PropagationInput& in, const CapsuleShape& obstacle, std::span<const BlockQuery> queries) {
  // small batches are not worth a parallel region
  if (g_parallel && queries.size() >= 64) return blocked_parallel(in, obstacle, queries);
  return blocked_serial(in, obstacle, queries);
}

std::vector<std::vector<JointConfig>> ik_families(const RobotModel& robot, std::span<const Frame> poses,
                                                  const CollisionScene& scene) {
  if (g_parallel && poses.size() >= 8) return ik_families_parallel(robot, poses, scene);
  return ik_families_serial(robot, poses, scene);
}

void set_parallel(bool enabled) { g_parallel = enabled; }
bool parallel_enabled() { return g_parallel; }

void set_threads(int threads) {
  if (threads > 0) omp_set_num_threads(threads);
}

}  // namespace spex::kernels
