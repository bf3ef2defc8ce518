#include "spex/cartesian_planner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "spex/kernels.hpp"

namespace spex {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::vector<JointConfig> free_solutions(const RobotModel& robot, const Frame& pose, const CollisionScene& scene) {
  std::vector<JointConfig> out;
  for (JointConfig& q : ik(robot, pose)) {
    if (!config_collides(robot, q, scene)) out.push_back(std::move(q));
  }
  return out;
}

}  // namespace

std::vector<ExtrusionTask> make_tasks(const TrussModel& model, const PlannerConfig& config, const SequencePlan& plan) {
  std::vector<ExtrusionTask> tasks;
  std::vector<int> printed;
  for (const auto& step : plan.steps) {
    ExtrusionTask t;
    t.element_id = step.element_id;
    const Element& el = model.element(step.element_id);
    t.start_node = step.start_node >= 0 ? step.start_node : el.start_node;
    t.end_node = t.start_node == el.start_node ? el.end_node : el.start_node;
    t.path = discretize_element(model, step.element_id, config.spacing, t.start_node).points;
    t.directions = step.feasible_directions;
    t.scene = build_scene(model, config, printed);
    printed.push_back(step.element_id);
    tasks.push_back(std::move(t));
  }
  return tasks;
}

std::vector<std::vector<JointConfig>> pose_families(const RobotModel& robot, const ExtrusionTask& task,
                                                    const Vec3& direction, double rotation) {
  const int n = static_cast<int>(task.path.size());
  std::vector<std::vector<JointConfig>> families(n);
  // endpoints first: most infeasible orientations fail there
  for (int k : {0, n - 1}) {
    families[k] = free_solutions(robot, tool_frame(task.path[k], direction, rotation), task.scene);
    if (families[k].empty()) return {};
  }
  std::vector<Frame> poses;
  for (int k = 1; k + 1 < n; ++k) poses.push_back(tool_frame(task.path[k], direction, rotation));
  auto interior = kernels::ik_families(robot, poses, task.scene);
  for (int k = 1; k + 1 < n; ++k) {
    families[k] = std::move(interior[k - 1]);
    if (families[k].empty()) return {};
  }
  return families;
}

bool within_jump(const JointConfig& a, const JointConfig& b, const JointConfig& jump_limit) {
  for (Eigen::Index j = 0; j < a.size(); ++j) {
    if (std::abs(a[j] - b[j]) > jump_limit[j]) return false;
  }
  return true;
}

int prune_to_chains(std::vector<std::vector<JointConfig>>& families, const JointConfig& jump_limit) {
  const int n = static_cast<int>(families.size());
  if (n == 0) return 0;
  std::vector<std::vector<char>> fwd(n), bwd(n);
  fwd[0].assign(families[0].size(), 1);
  int broken = families[0].empty() ? 0 : -1;
  for (int k = 1; k < n && broken < 0; ++k) {
    fwd[k].assign(families[k].size(), 0);
    bool any = false;
    for (std::size_t j = 0; j < families[k].size(); ++j) {
      for (std::size_t i = 0; i < families[k - 1].size(); ++i) {
        if (fwd[k - 1][i] && within_jump(families[k - 1][i], families[k][j], jump_limit)) {
          fwd[k][j] = 1;
          any = true;
          break;
        }
      }
    }
    if (!any) broken = k;
  }
  if (broken >= 0) {
    for (auto& f : families) f.clear();
    return broken;
  }
  bwd[n - 1] = fwd[n - 1];
  for (int k = n - 2; k >= 0; --k) {
    bwd[k].assign(families[k].size(), 0);
    for (std::size_t i = 0; i < families[k].size(); ++i) {
      if (!fwd[k][i]) continue;
      for (std::size_t j = 0; j < families[k + 1].size(); ++j) {
        if (bwd[k + 1][j] && within_jump(families[k][i], families[k + 1][j], jump_limit)) {
          bwd[k][i] = 1;
          break;
        }
      }
    }
  }
  for (int k = 0; k < n; ++k) {
    std::vector<JointConfig> kept;
    for (std::size_t i = 0; i < families[k].size(); ++i) {
      if (bwd[k][i]) kept.push_back(std::move(families[k][i]));
    }
    families[k] = std::move(kept);
  }
  return -1;
}

std::optional<Capsule> build_capsule(const RobotModel& robot, const DirectionSet& dirs, const ExtrusionTask& task,
                                     int task_index, int direction, double rotation, const JointConfig& jump_limit) {
  auto families = pose_families(robot, task, dirs[direction], rotation);
  if (families.empty() || prune_to_chains(families, jump_limit) >= 0) return std::nullopt;
  Capsule c;
  c.task = task_index;
  c.direction = direction;
  c.rotation = rotation;
  c.first = std::move(families.front());
  c.last = std::move(families.back());
  return c;
}

double capsule_edge_cost(const RobotModel& robot, const std::vector<JointConfig>& last,
                         const std::vector<JointConfig>& first) {
  double best = kInf;
  for (const auto& a : last) {
    for (const auto& b : first) best = std::min(best, joint_distance(robot, a, b));
  }
  return best;
}

// ---------------------------------------------------------------------------

SparseResult rrt_star_sparse(const RobotModel& robot, const PlannerConfig& config,
                             const std::vector<ExtrusionTask>& tasks, int iterations, std::uint64_t seed) {
  struct Vertex {
    Capsule capsule;
    double cost = kInf;
    int parent = -1;
  };
  const auto t0 = Clock::now();
  const int n = static_cast<int>(tasks.size());
  SparseResult result;
  result.stats.capsules_per_task.assign(n, 0);
  if (n == 0) {
    result.success = true;
    result.stats.best_cost = 0.0;
    return result;
  }
  for (int i = 0; i < n; ++i) {
    if (tasks[i].directions.empty()) {
      result.message = "task " + std::to_string(i) + " (element " + std::to_string(tasks[i].element_id) +
                       ") has no feasible EE direction";
      return result;
    }
  }

  const DirectionSet dirs = sample_directions(config.directions);
  const JointConfig jump = jump_limits(robot, config);
  std::mt19937_64 rng(seed);
  std::vector<std::vector<Vertex>> graph(n);

  for (int it = 0; it < iterations && seconds_since(t0) < config.rrt_timeout; ++it) {
    const int i = std::uniform_int_distribution<int>(0, n - 1)(rng);
    const auto& task_dirs = tasks[i].directions;
    const int a = task_dirs[std::uniform_int_distribution<int>(0, static_cast<int>(task_dirs.size()) - 1)(rng)];
    double r;
    if (config.rotation_grid > 0) {
      r = kTwoPi * std::uniform_int_distribution<int>(0, config.rotation_grid - 1)(rng) / config.rotation_grid;
    } else {
      r = std::uniform_real_distribution<double>(0.0, kTwoPi)(rng);
    }
    ++result.stats.samples;
    auto capsule = build_capsule(robot, dirs, tasks[i], i, a, r, jump);
    if (!capsule) continue;

    Vertex v;
    v.capsule = std::move(*capsule);
    if (i == 0) {
      v.cost = 0.0;
    } else {
      // Nearest: cheapest way in from the previous task
      for (std::size_t u = 0; u < graph[i - 1].size(); ++u) {
        const Vertex& w = graph[i - 1][u];
        if (w.cost == kInf) continue;
        const double c = w.cost + capsule_edge_cost(robot, w.capsule.last, v.capsule.first);
        if (c < v.cost) {
          v.cost = c;
          v.parent = static_cast<int>(u);
        }
      }
    }
    graph[i].push_back(std::move(v));
    ++result.stats.feasible_capsules;

    // Rewire: improvements cascade forward task by task
    std::vector<int> improved = {static_cast<int>(graph[i].size()) - 1};
    for (int j = i + 1; j < n && !improved.empty(); ++j) {
      std::vector<int> next;
      for (std::size_t w = 0; w < graph[j].size(); ++w) {
        bool changed = false;
        for (int u : improved) {
          const Vertex& from = graph[j - 1][u];
          if (from.cost == kInf) continue;
          const double c = from.cost + capsule_edge_cost(robot, from.capsule.last, graph[j][w].capsule.first);
          if (c < graph[j][w].cost) {
            graph[j][w].cost = c;
            graph[j][w].parent = u;
            changed = true;
          }
        }
        if (changed) next.push_back(static_cast<int>(w));
      }
      improved = std::move(next);
    }
  }

  SparseStats& st = result.stats;
  for (int i = 0; i < n; ++i) {
    st.capsules_per_task[i] = static_cast<int>(graph[i].size());
    for (const Vertex& v : graph[i]) {
      st.stored_configs += v.capsule.first.size() + v.capsule.last.size();
      st.max_family = std::max({st.max_family, v.capsule.first.size(), v.capsule.last.size()});
      if (v.cost < kInf) st.deepest_task = std::max(st.deepest_task, i);
    }
  }
  int best = -1;
  for (std::size_t w = 0; w < graph[n - 1].size(); ++w) {
    if (graph[n - 1][w].cost < st.best_cost) {
      st.best_cost = graph[n - 1][w].cost;
      best = static_cast<int>(w);
    }
  }
  st.time = seconds_since(t0);
  if (best < 0) {
    const int stuck = st.deepest_task + 1;
    result.message = "no capsule path spans all tasks; deepest task reached " + std::to_string(st.deepest_task) +
                     ", first unreached task " + std::to_string(stuck) + " (element " +
                     std::to_string(tasks[stuck].element_id) + ")";
    return result;
  }
  result.path.resize(n);
  for (int i = n - 1, v = best; i >= 0; v = graph[i].at(v).parent, --i) result.path[i] = graph[i][v].capsule;
  result.success = true;
  result.message = "capsule path found";
  return result;
}

// ---------------------------------------------------------------------------

ExpansionResult expand_and_search(const RobotModel& robot, const PlannerConfig& config,
                                  const std::vector<ExtrusionTask>& tasks,
                                  const std::vector<std::vector<Capsule>>& candidates) {
  struct Block {  // one expanded capsule
    int task = 0;
    const Capsule* capsule = nullptr;
    std::vector<std::vector<JointConfig>> rungs;
    std::vector<std::vector<int>> ids;
  };
  ExpansionResult result;
  const int n = static_cast<int>(tasks.size());
  if (static_cast<int>(candidates.size()) != n) throw std::invalid_argument("expand_and_search: one capsule set per task");
  if (n == 0) {
    result.success = true;
    result.trajectory.cost = 0.0;
    return result;
  }
  const DirectionSet dirs = sample_directions(config.directions);
  const JointConfig jump = jump_limits(robot, config);

  Dag dag;
  std::vector<std::vector<Block>> blocks(n);
  struct Where {
    int task, block, rung, index;
  };
  std::vector<Where> where;
  for (int i = 0; i < n; ++i) {
    int first_break = -1;
    for (const Capsule& c : candidates[i]) {
      auto fam = pose_families(robot, tasks[i], dirs[c.direction], c.rotation);
      if (fam.empty()) {
        first_break = std::max(first_break, 0);
        continue;
      }
      const int broken = prune_to_chains(fam, jump);
      if (broken >= 0) {
        first_break = std::max(first_break, broken);
        continue;
      }
      Block b;
      b.task = i;
      b.capsule = &c;
      b.rungs = std::move(fam);
      b.ids.resize(b.rungs.size());
      for (std::size_t k = 0; k < b.rungs.size(); ++k) {
        for (std::size_t j = 0; j < b.rungs[k].size(); ++j) {
          b.ids[k].push_back(dag.add_vertex());
          where.push_back({i, static_cast<int>(blocks[i].size()), static_cast<int>(k), static_cast<int>(j)});
        }
      }
      blocks[i].push_back(std::move(b));
    }
    if (blocks[i].empty()) {
      result.message = "expansion failed at task " + std::to_string(i) + " (element " +
                       std::to_string(tasks[i].element_id) + "), path point " + std::to_string(std::max(first_break, 0));
      return result;
    }
  }

  for (int i = 0; i < n; ++i) {
    for (const Block& b : blocks[i]) {
      for (std::size_t k = 0; k + 1 < b.rungs.size(); ++k) {
        for (std::size_t u = 0; u < b.rungs[k].size(); ++u) {
          for (std::size_t v = 0; v < b.rungs[k + 1].size(); ++v) {
            if (within_jump(b.rungs[k][u], b.rungs[k + 1][v], jump)) {
              dag.add_edge(b.ids[k][u], b.ids[k + 1][v], joint_distance(robot, b.rungs[k][u], b.rungs[k + 1][v]));
            }
          }
        }
      }
      if (i + 1 == n) continue;
      for (const Block& nb : blocks[i + 1]) {
        for (std::size_t u = 0; u < b.rungs.back().size(); ++u) {
          for (std::size_t v = 0; v < nb.rungs.front().size(); ++v) {
            dag.add_edge(b.ids.back()[u], nb.ids.front()[v],
                         joint_distance(robot, b.rungs.back()[u], nb.rungs.front()[v]));
          }
        }
      }
    }
  }
  std::vector<int> sources, targets;
  for (const Block& b : blocks.front()) sources.insert(sources.end(), b.ids.front().begin(), b.ids.front().end());
  for (const Block& b : blocks.back()) targets.insert(targets.end(), b.ids.back().begin(), b.ids.back().end());
  result.vertices = static_cast<std::size_t>(dag.vertex_count());
  result.edges = dag.edge_count();

  const DagPath path = dag_shortest_path(dag, sources, targets);
  if (!path.found()) {
    result.message = "no joint path through the expanded ladder graph";
    return result;
  }
  CartesianTrajectory& traj = result.trajectory;
  traj.cost = path.cost;
  traj.tasks.resize(n);
  for (int v : path.vertices) {
    const Where& w = where[v];
    const Block& b = blocks[w.task][w.block];
    TaskMotion& m = traj.tasks[w.task];
    if (m.configs.empty()) {
      m.element_id = tasks[w.task].element_id;
      m.start_node = tasks[w.task].start_node;
      m.end_node = tasks[w.task].end_node;
      m.direction = b.capsule->direction;
      m.rotation = b.capsule->rotation;
      m.path = tasks[w.task].path;
    }
    m.configs.push_back(b.rungs[w.rung][w.index]);
  }
  result.success = true;
  result.message = "trajectory found";
  return result;
}

std::vector<std::vector<Capsule>> exhaustive_capsules(const RobotModel& robot, const PlannerConfig& config,
                                                      const std::vector<ExtrusionTask>& tasks, int rotation_grid) {
  const DirectionSet dirs = sample_directions(config.directions);
  const JointConfig jump = jump_limits(robot, config);
  std::vector<std::vector<Capsule>> out(tasks.size());
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    for (int a : tasks[i].directions) {
      for (int g = 0; g < rotation_grid; ++g) {
        auto c = build_capsule(robot, dirs, tasks[i], static_cast<int>(i), a, kTwoPi * g / rotation_grid, jump);
        if (c) out[i].push_back(std::move(*c));
      }
    }
  }
  return out;
}

FullLadderResult full_ladder_graph(const RobotModel& robot, const PlannerConfig& config,
                                   const std::vector<ExtrusionTask>& tasks, int rotation_grid) {
  FullLadderResult result;
  if (tasks.empty()) {
    result.success = true;
    result.cost = 0.0;
    return result;
  }
  double projected = 0.0;
  for (const auto& t : tasks) projected += 8.0 * static_cast<double>(t.path.size() * t.directions.size()) * rotation_grid;
  if (projected > static_cast<double>(config.full_graph_vertex_cap)) {
    result.message = "refused: projected " + std::to_string(static_cast<long long>(projected)) +
                     " vertices exceeds the cap of " + std::to_string(config.full_graph_vertex_cap);
    return result;
  }
  const DirectionSet dirs = sample_directions(config.directions);
  const JointConfig jump = jump_limits(robot, config);

  // (config, cost-to-come) on the last rung of the previous task
  std::vector<std::pair<JointConfig, double>> frontier;
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    const ExtrusionTask& task = tasks[i];
    std::vector<std::pair<JointConfig, double>> next;
    for (int a : task.directions) {
      for (int g = 0; g < rotation_grid; ++g) {
        const double r = kTwoPi * g / rotation_grid;
        std::vector<std::vector<JointConfig>> rungs;
        for (const Vec3& p : task.path) rungs.push_back(free_solutions(robot, tool_frame(p, dirs[a], r), task.scene));
        std::vector<double> dist(rungs[0].size(), i == 0 ? 0.0 : kInf);
        if (i > 0) {
          for (std::size_t j = 0; j < rungs[0].size(); ++j) {
            for (const auto& [q, c] : frontier) dist[j] = std::min(dist[j], c + joint_distance(robot, q, rungs[0][j]));
          }
        }
        result.vertices += rungs[0].size();
        for (std::size_t k = 1; k < rungs.size(); ++k) {
          std::vector<double> d(rungs[k].size(), kInf);
          for (std::size_t j = 0; j < rungs[k].size(); ++j) {
            for (std::size_t l = 0; l < rungs[k - 1].size(); ++l) {
              if (dist[l] == kInf || !within_jump(rungs[k - 1][l], rungs[k][j], jump)) continue;
              d[j] = std::min(d[j], dist[l] + joint_distance(robot, rungs[k - 1][l], rungs[k][j]));
            }
          }
          result.vertices += rungs[k].size();
          dist = std::move(d);
        }
        for (std::size_t j = 0; j < rungs.back().size(); ++j) {
          if (dist[j] < kInf) next.emplace_back(rungs.back()[j], dist[j]);
        }
      }
    }
    if (next.empty()) {
      result.message = "no jump-limited path through task " + std::to_string(i);
      return result;
    }
    frontier = std::move(next);
  }
  for (const auto& [q, c] : frontier) result.cost = std::min(result.cost, c);
  result.success = true;
  return result;
}

GraphSizeEstimate estimate_full_graph(const FullGraphScenario& s) {
  GraphSizeEstimate e;
  const double orientations = static_cast<double>(s.directions) * s.rotations;
  const double poses = static_cast<double>(s.elements) * s.points_per_element;
  const double neighbourhood = (1.0 + s.direction_neighbours) * (1.0 + s.rotation_neighbours);
  const double f = s.family_size;
  e.vertices = poses * orientations * f;
  e.edges = (poses - 1.0) * orientations * neighbourhood * f * f;
  const double vertex_bytes = 8.0 * s.dof + 8.0;  // joint values plus cost
  const double edge_bytes = 16.0;                 // target index plus cost
  e.bytes = e.vertices * vertex_bytes + e.edges * edge_bytes;
  return e;
}

// ---------------------------------------------------------------------------

Retraction plan_retraction(const RobotModel& robot, const PlannerConfig& config, const DirectionSet& dirs,
                           const CollisionScene& scene, const JointConfig& boundary,
                           const std::vector<int>& directions, double length, std::mt19937_64& rng,
                           const CollisionScene* final_scene) {
  const Frame start = fk(robot, boundary);
  const Vec3 tip = start.translation();
  Retraction out;
  out.configs = {boundary};
  out.tips = {tip};
  if (length <= 0.0) {
    out.success = true;
    return out;
  }
  const JointConfig jump = jump_limits(robot, config);
  const int steps = std::max(1, static_cast<int>(std::ceil(length / config.spacing)));
  std::vector<int> order = directions;
  std::shuffle(order.begin(), order.end(), rng);

  for (int a : order) {
    std::vector<JointConfig> configs = {boundary};
    std::vector<Vec3> tips = {tip};
    bool ok = true;
    for (int s = 1; s <= steps && ok; ++s) {
      Frame pose = start;
      pose.translation() = tip - (length * s / steps) * dirs[a];
      const JointConfig& prev = configs.back();
      std::optional<JointConfig> best;
      double best_d = kInf;
      for (const JointConfig& q : ik(robot, pose)) {
        if (!within_jump(prev, q, jump)) continue;
        const double d = joint_distance(robot, prev, q);
        if (d >= best_d) continue;
        if (motion_collides(robot, prev, q, scene)) continue;
        if (s == steps && final_scene && config_collides(robot, q, *final_scene)) continue;
        best = q;
        best_d = d;
      }
      if (!best) {
        ok = false;
        break;
      }
      configs.push_back(*best);
      tips.push_back(pose.translation());
    }
    if (ok) {
      out.success = true;
      out.direction = a;
      out.configs = std::move(configs);
      out.tips = std::move(tips);
      return out;
    }
  }
  return out;
}

nlohmann::json capsule_path_to_json(const std::vector<Capsule>& path, const std::vector<ExtrusionTask>& tasks,
                                    const RobotModel& robot) {
  nlohmann::json arr = nlohmann::json::array();
  for (std::size_t i = 0; i < path.size(); ++i) {
    const Capsule& c = path[i];
    const double in = i == 0 ? 0.0 : capsule_edge_cost(robot, path[i - 1].last, c.first);
    arr.push_back({{"task", c.task},
                   {"element", tasks.at(i).element_id},
                   {"direction", c.direction},
                   {"rotation", c.rotation},
                   {"first_family", c.first.size()},
                   {"last_family", c.last.size()},
                   {"incoming_cost", in}});
  }
  return arr;
}

nlohmann::json sparse_stats_to_json(const SparseStats& s) {
  return {{"samples", s.samples},
          {"feasible_capsules", s.feasible_capsules},
          {"deepest_task", s.deepest_task},
          {"capsules_per_task", s.capsules_per_task},
          {"stored_configs", s.stored_configs},
          {"max_family", s.max_family},
          {"best_cost", s.best_cost == kInf ? nlohmann::json(nullptr) : nlohmann::json(s.best_cost)},
          {"time", s.time}};
}

}  // namespace spex
