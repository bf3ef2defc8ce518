#include "spex/transition_planner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

namespace spex {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

// Largest per-joint move measured in resolution units.
double normalized_span(const JointSpace& s, const JointConfig& a, const JointConfig& b) {
  double m = 0.0;
  for (int j = 0; j < s.dof(); ++j) m = std::max(m, std::abs(b[j] - a[j]) / s.resolution[j]);
  return m;
}

double weighted_l1(const JointSpace& s, const JointConfig& a, const JointConfig& b) {
  double d = 0.0;
  for (int j = 0; j < s.dof(); ++j) d += s.weights[j] * std::abs(b[j] - a[j]);
  return d;
}

struct Tree {
  std::vector<JointConfig> nodes;
  std::vector<int> parent;

  int add(const JointConfig& q, int p) {
    nodes.push_back(q);
    parent.push_back(p);
    return static_cast<int>(nodes.size()) - 1;
  }

  int nearest(const JointSpace& s, const JointConfig& q) const {
    int best = 0;
    double bd = weighted_l1(s, nodes[0], q);
    for (int i = 1; i < static_cast<int>(nodes.size()); ++i) {
      const double d = weighted_l1(s, nodes[i], q);
      if (d < bd) {
        bd = d;
        best = i;
      }
    }
    return best;
  }

  std::vector<JointConfig> branch(int i) const {
    std::vector<JointConfig> out;
    for (; i >= 0; i = parent[i]) out.push_back(nodes[i]);
    return out;  // leaf to root
  }
};

enum class Step { kReached, kAdvanced, kTrapped };

// One bounded step from the nearest node toward q.
Step extend(Tree& tree, const JointSpace& s, const ValidityFn& valid, const JointConfig& q, double step_units,
            int& added) {
  const int near = tree.nearest(s, q);
  const JointConfig& from = tree.nodes[near];
  const double span = normalized_span(s, from, q);
  const bool reach = span <= step_units;
  const JointConfig to = reach ? q : JointConfig(from + (q - from) * (step_units / span));
  if (!segment_valid(s, valid, from, to)) return Step::kTrapped;
  added = tree.add(to, near);
  return reach ? Step::kReached : Step::kAdvanced;
}

void smooth(const JointSpace& s, const ValidityFn& valid, std::vector<JointConfig>& path, int iterations,
            std::mt19937_64& rng) {
  for (int it = 0; it < iterations && path.size() > 2; ++it) {
    const int n = static_cast<int>(path.size());
    int i = std::uniform_int_distribution<int>(0, n - 1)(rng);
    int j = std::uniform_int_distribution<int>(0, n - 1)(rng);
    if (i > j) std::swap(i, j);
    if (j - i < 2) continue;
    double along = 0.0;
    for (int k = i; k < j; ++k) along += weighted_l1(s, path[k], path[k + 1]);
    if (weighted_l1(s, path[i], path[j]) >= along) continue;
    if (!segment_valid(s, valid, path[i], path[j])) continue;
    path.erase(path.begin() + i + 1, path.begin() + j);
  }
}

// Number of equal pieces keeping every joint step under the jump limit. The
// margin keeps interpolated steps strictly under it after rounding.
int jump_pieces(const JointSpace& s, const JointConfig& a, const JointConfig& b) {
  double pieces = 1.0;
  if (s.jump_limit.size() != a.size()) return 1;
  for (int j = 0; j < s.dof(); ++j) {
    pieces = std::max(pieces, std::ceil(std::abs(b[j] - a[j]) / (s.jump_limit[j] * (1.0 - 1e-9))));
  }
  return static_cast<int>(pieces);
}

JointConfig piece_point(const JointConfig& a, const JointConfig& b, int p, int m) {
  return p == m ? b : JointConfig(a + (b - a) * (static_cast<double>(p) / m));
}

std::vector<JointConfig> densify(const JointSpace& s, const std::vector<JointConfig>& path) {
  std::vector<JointConfig> out = {path.front()};
  for (std::size_t k = 0; k + 1 < path.size(); ++k) {
    const int m = jump_pieces(s, path[k], path[k + 1]);
    for (int p = 1; p <= m; ++p) out.push_back(piece_point(path[k], path[k + 1], p, m));
  }
  return out;
}

}  // namespace

JointSpace robot_joint_space(const RobotModel& robot, const PlannerConfig& config) {
  const int n = robot.dof();
  JointSpace s;
  s.lower.resize(n);
  s.upper.resize(n);
  s.weights.resize(n);
  s.resolution.resize(n);
  for (int j = 0; j < n; ++j) {
    s.lower[j] = robot.lower(j);
    s.upper[j] = robot.upper(j);
    s.weights[j] = robot.weight(j);
    s.resolution[j] = robot.is_prismatic(j) ? kMotionStepMm : kMotionStepRad;
  }
  s.jump_limit = jump_limits(robot, config);
  return s;
}

bool segment_valid(const JointSpace& space, const ValidityFn& valid, const JointConfig& a, const JointConfig& b) {
  // samples the densified pieces exactly as they are emitted
  const int m = jump_pieces(space, a, b);
  JointConfig pa = a;
  for (int p = 1; p <= m; ++p) {
    const JointConfig pb = piece_point(a, b, p, m);
    const int n = std::max(1, static_cast<int>(std::ceil(normalized_span(space, pa, pb))));
    for (int k = 0; k <= n; ++k) {
      if (!valid(pa + (pb - pa) * (static_cast<double>(k) / n))) return false;
    }
    pa = pb;
  }
  return true;
}

bool path_valid(const JointSpace& space, const ValidityFn& valid, const std::vector<JointConfig>& path) {
  if (path.empty()) return false;
  if (path.size() == 1) return valid(path.front());
  for (std::size_t k = 0; k + 1 < path.size(); ++k) {
    if (!segment_valid(space, valid, path[k], path[k + 1])) return false;
  }
  return true;
}

double path_cost(const JointSpace& space, const std::vector<JointConfig>& path) {
  double c = 0.0;
  for (std::size_t k = 0; k + 1 < path.size(); ++k) c += weighted_l1(space, path[k], path[k + 1]);
  return c;
}

TransitionResult plan_transition(const JointSpace& space, const ValidityFn& valid, const JointConfig& start,
                                 const JointConfig& goal, const TransitionBudget& budget, std::mt19937_64& rng) {
  TransitionResult r;
  if (!valid(start) || !valid(goal)) {
    r.message = valid(start) ? "goal configuration is in collision" : "start configuration is in collision";
    return r;
  }
  if ((start - goal).cwiseAbs().maxCoeff() == 0.0) {
    r.success = true;
    r.path = {start};
    return r;
  }
  std::vector<JointConfig> raw;
  if (segment_valid(space, valid, start, goal)) {
    raw = {start, goal};
  } else {
    const double step_units = budget.extend_step / space.resolution[space.dof() - 1];
    const auto t0 = Clock::now();
    Tree a, b;
    a.add(start, -1);
    b.add(goal, -1);
    bool a_from_start = true;
    JointConfig sample(space.dof());
    for (r.iterations = 0; r.iterations < budget.iterations; ++r.iterations) {
      if (seconds_since(t0) > budget.timeout) break;
      for (int j = 0; j < space.dof(); ++j) {
        sample[j] = std::uniform_real_distribution<double>(space.lower[j], space.upper[j])(rng);
      }
      int na = -1;
      if (extend(a, space, valid, sample, step_units, na) == Step::kTrapped) {
        std::swap(a, b);
        a_from_start = !a_from_start;
        continue;
      }
      // connect: grow b toward the new node until it arrives or is blocked
      const JointConfig target = a.nodes[na];
      int nb = -1;
      Step s = Step::kAdvanced;
      while (s == Step::kAdvanced) s = extend(b, space, valid, target, step_units, nb);
      if (s == Step::kReached) {
        std::vector<JointConfig> from_a = a.branch(na);
        std::vector<JointConfig> from_b = b.branch(nb);
        std::reverse(from_a.begin(), from_a.end());
        from_a.insert(from_a.end(), from_b.begin() + 1, from_b.end());
        if (!a_from_start) std::reverse(from_a.begin(), from_a.end());
        raw = std::move(from_a);
        break;
      }
      std::swap(a, b);
      a_from_start = !a_from_start;
    }
    if (raw.empty()) {
      r.timed_out = true;
      r.message = "no connection within " + std::to_string(r.iterations) + " iterations";
      return r;
    }
    smooth(space, valid, raw, budget.smoothing_iterations, rng);
  }
  raw.front() = start;
  raw.back() = goal;
  r.path = densify(space, raw);
  r.success = true;
  return r;
}

TransitionResult plan_with_home_fallback(const JointSpace& space, const ValidityFn& valid, const JointConfig& start,
                                         const JointConfig& goal, const JointConfig& home,
                                         const TransitionBudget& direct, const TransitionBudget& fallback,
                                         std::mt19937_64& rng) {
  TransitionResult r = plan_transition(space, valid, start, goal, direct, rng);
  if (r.success || !valid(start) || !valid(goal)) return r;
  if (!valid(home)) {
    r.message = "home configuration is in collision";
    return r;
  }
  // the fallback budget is shared by both legs
  TransitionBudget leg = fallback;
  leg.iterations = std::max(1, fallback.iterations / 2);
  leg.timeout = fallback.timeout / 2.0;
  TransitionResult first = plan_transition(space, valid, start, home, leg, rng);
  if (!first.success) {
    first.used_fallback = true;
    first.message = "fallback leg to home failed: " + first.message;
    return first;
  }
  TransitionResult second = plan_transition(space, valid, home, goal, leg, rng);
  if (!second.success) {
    second.used_fallback = true;
    second.message = "fallback leg from home failed: " + second.message;
    return second;
  }
  TransitionResult out;
  out.success = true;
  out.used_fallback = true;
  out.iterations = r.iterations + first.iterations + second.iterations;
  out.path = std::move(first.path);
  out.path.insert(out.path.end(), second.path.begin() + 1, second.path.end());
  out.message = "direct attempt failed (" + r.message + "); routed through home";
  return out;
}

TransitionResult plan_robot_transition(const RobotModel& robot, const PlannerConfig& config,
                                       const CollisionScene& scene, const JointConfig& start,
                                       const JointConfig& goal, std::mt19937_64& rng) {
  const JointSpace space = robot_joint_space(robot, config);
  const ValidityFn valid = [&](const JointConfig& q) {
    return robot.within_limits(q, 1e-9) && !config_collides(robot, q, scene);
  };
  const TransitionSettings& t = config.transition;
  const TransitionBudget direct{t.direct_timeout, t.direct_iterations, t.extend_step, t.smoothing_iterations};
  const TransitionBudget fallback{t.fallback_timeout, t.fallback_iterations, t.extend_step, t.smoothing_iterations};
  return plan_with_home_fallback(space, valid, start, goal, robot.home, direct, fallback, rng);
}

}  // namespace spex
