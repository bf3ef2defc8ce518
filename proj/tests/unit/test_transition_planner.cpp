#include <doctest.h>

#include <cmath>
#include <deque>

#include "fixtures.hpp"
#include "spex/transition_planner.hpp"

using namespace spex;

namespace {

struct Box {
  double x0, y0, x1, y1;
};

JointSpace plane_space() {
  JointSpace s;
  s.lower = Eigen::Vector2d(-3, -3);
  s.upper = Eigen::Vector2d(3, 3);
  s.weights = Eigen::Vector2d(1, 1);
  s.resolution = Eigen::Vector2d(0.01, 0.01);
  s.jump_limit = Eigen::Vector2d(0.1, 0.1);
  return s;
}

ValidityFn free_of(const std::vector<Box>& boxes) {
  return [boxes](const JointConfig& q) {
    if (std::abs(q[0]) > 3 || std::abs(q[1]) > 3) return false;
    for (const Box& b : boxes) {
      if (q[0] >= b.x0 && q[0] <= b.x1 && q[1] >= b.y0 && q[1] <= b.y1) return false;
    }
    return true;
  };
}

// Grid BFS over cells of side h whose closed square is obstacle-free.
bool grid_connected(const std::vector<Box>& boxes, const JointConfig& a, const JointConfig& b, double h) {
  const int n = static_cast<int>(std::round(6.0 / h));
  auto cell_free = [&](int i, int j) {
    const double x0 = -3 + i * h, y0 = -3 + j * h;
    for (const Box& bx : boxes) {
      if (x0 <= bx.x1 && x0 + h >= bx.x0 && y0 <= bx.y1 && y0 + h >= bx.y0) return false;
    }
    return true;
  };
  auto cell_of = [&](const JointConfig& q) {
    return std::pair<int, int>(std::min(n - 1, int((q[0] + 3) / h)), std::min(n - 1, int((q[1] + 3) / h)));
  };
  const auto [si, sj] = cell_of(a);
  const auto [gi, gj] = cell_of(b);
  if (!cell_free(si, sj) || !cell_free(gi, gj)) return false;
  std::vector<char> seen(n * n, 0);
  std::deque<std::pair<int, int>> queue = {{si, sj}};
  seen[si * n + sj] = 1;
  while (!queue.empty()) {
    const auto [i, j] = queue.front();
    queue.pop_front();
    if (i == gi && j == gj) return true;
    const int di[4] = {1, -1, 0, 0}, dj[4] = {0, 0, 1, -1};
    for (int k = 0; k < 4; ++k) {
      const int ni = i + di[k], nj = j + dj[k];
      if (ni < 0 || nj < 0 || ni >= n || nj >= n || seen[ni * n + nj] || !cell_free(ni, nj)) continue;
      seen[ni * n + nj] = 1;
      queue.emplace_back(ni, nj);
    }
  }
  return false;
}

// Independent densely sampled path check.
bool dense_valid(const ValidityFn& valid, const std::vector<JointConfig>& path) {
  for (std::size_t k = 0; k + 1 < path.size(); ++k) {
    for (int s = 0; s <= 50; ++s) {
      if (!valid(path[k] + (path[k + 1] - path[k]) * (s / 50.0))) return false;
    }
  }
  return true;
}

void check_path(const JointSpace& space, const ValidityFn& valid, const TransitionResult& r, const JointConfig& a,
                const JointConfig& b) {
  REQUIRE_FALSE(r.path.empty());
  CHECK(r.path.front() == a);
  CHECK(r.path.back() == b);
  CHECK(dense_valid(valid, r.path));
  for (std::size_t k = 1; k < r.path.size(); ++k) {
    CHECK(((r.path[k] - r.path[k - 1]).cwiseAbs().array() <= space.jump_limit.array()).all());
  }
}

std::vector<Box> cul_de_sac() {
  // pocket around the origin open towards -x, wall beyond it
  return {{-0.6, 0.4, 0.6, 0.6}, {-0.6, -0.6, 0.6, -0.4}, {0.4, -0.6, 0.6, 0.6}, {1.0, -2.0, 1.2, 2.0}};
}

}  // namespace

TEST_CASE("straight line when free") {
  const JointSpace space = plane_space();
  const ValidityFn valid = free_of({});
  std::mt19937_64 rng(1);
  const JointConfig a = Eigen::Vector2d(-1, -1), b = Eigen::Vector2d(1, 0.5);
  const TransitionResult r = plan_transition(space, valid, a, b, {}, rng);
  REQUIRE(r.success);
  check_path(space, valid, r, a, b);
  CHECK(path_cost(space, r.path) == doctest::Approx(3.5));
  CHECK(r.iterations == 0);

  const TransitionResult same = plan_transition(space, valid, a, a, {}, rng);
  REQUIRE(same.success);
  CHECK(same.path.size() == 1);
}

TEST_CASE("invalid endpoints are reported") {
  const JointSpace space = plane_space();
  const ValidityFn valid = free_of({{-0.5, -0.5, 0.5, 0.5}});
  std::mt19937_64 rng(1);
  const TransitionResult r = plan_transition(space, valid, Eigen::Vector2d(0, 0), Eigen::Vector2d(2, 2), {}, rng);
  CHECK_FALSE(r.success);
  CHECK_FALSE(r.message.empty());
}

TEST_CASE("random boxes against a grid search oracle") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-2.8, 2.8), w(0.2, 1.2);
  const JointSpace space = plane_space();
  TransitionBudget budget;
  budget.iterations = 20000;
  budget.timeout = 30.0;
  int connected = 0, disconnected = 0;
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<Box> boxes;
    for (int k = 0; k < 6; ++k) {
      const double x = u(rng), y = u(rng);
      boxes.push_back({x, y, x + w(rng), y + w(rng)});
    }
    if (trial % 5 == 0) boxes.push_back({-0.1, -3.5, 0.1, 3.5});  // full wall splits the space
    const ValidityFn valid = free_of(boxes);
    const JointConfig a = Eigen::Vector2d(-2.5, u(rng)), b = Eigen::Vector2d(2.5, u(rng));
    if (!valid(a) || !valid(b)) continue;
    const TransitionResult r = plan_transition(space, valid, a, b, budget, rng);
    if (grid_connected(boxes, a, b, 0.05)) {
      ++connected;
      CHECK(r.success);
    }
    if (!grid_connected(boxes, a, b, 0.005)) {
      ++disconnected;
      CHECK_FALSE(r.success);
    }
    if (r.success) check_path(space, valid, r, a, b);
  }
  CHECK(connected > 5);
  CHECK(disconnected > 2);
}

TEST_CASE("cul-de-sac needs the home waypoint") {
  const JointSpace space = plane_space();
  const ValidityFn valid = free_of(cul_de_sac());
  const JointConfig start = Eigen::Vector2d(0, 0), goal = Eigen::Vector2d(2, 0), home = Eigen::Vector2d(-1.5, 2.5);
  TransitionBudget direct;
  direct.iterations = 40;
  direct.timeout = 0.05;
  TransitionBudget fallback;
  fallback.iterations = 20000;
  fallback.timeout = 20.0;

  std::mt19937_64 rng(4);
  const TransitionResult alone = plan_transition(space, valid, start, goal, direct, rng);
  CHECK_FALSE(alone.success);
  CHECK(alone.timed_out);

  std::mt19937_64 rng2(4);
  const TransitionResult r = plan_with_home_fallback(space, valid, start, goal, home, direct, fallback, rng2);
  REQUIRE(r.success);
  CHECK(r.used_fallback);
  check_path(space, valid, r, start, goal);
}

TEST_CASE("segment check matches the emitted waypoints") {
  const JointSpace space = plane_space();
  const ValidityFn valid = free_of({{0.3, -1.0, 0.31, 1.0}});
  CHECK_FALSE(segment_valid(space, valid, Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 0)));
  CHECK(segment_valid(space, valid, Eigen::Vector2d(0, 1.5), Eigen::Vector2d(1, 1.5)));
  CHECK(path_valid(space, valid, {Eigen::Vector2d(0, 0), Eigen::Vector2d(0, 1.5), Eigen::Vector2d(1, 1.5)}));
  CHECK_FALSE(path_valid(space, valid, {}));
}

TEST_CASE("robot transitions amid a partly built cube") {
  const RobotModel& robot = test::robot();
  const TrussModel cube = test::fixture_model("cube23");
  const PlannerConfig config = test::fast_config();
  std::vector<int> built;
  for (int e = 0; e < 12; ++e) built.push_back(e);
  const CollisionScene scene = build_scene(cube, config, built);
  std::mt19937_64 rng(6);
  int solved = 0;
  for (int trial = 0; trial < 8; ++trial) {
    JointConfig a = test::random_config(robot, rng), b = test::random_config(robot, rng);
    if (config_collides(robot, a, scene) || config_collides(robot, b, scene)) continue;
    const TransitionResult r = plan_robot_transition(robot, config, scene, a, b, rng);
    if (!r.success) continue;
    ++solved;
    CHECK(r.path.front() == a);
    CHECK(r.path.back() == b);
    const JointConfig jump = jump_limits(robot, config);
    for (std::size_t k = 1; k < r.path.size(); ++k) {
      CHECK_FALSE(motion_collides(robot, r.path[k - 1], r.path[k], scene));
      CHECK(((r.path[k] - r.path[k - 1]).cwiseAbs().array() <= jump.array()).all());
    }
  }
  CHECK(solved > 0);
}

TEST_CASE("fallback only when needed and only through a free home") {
  const JointSpace space = plane_space();
  const ValidityFn valid = free_of({{-0.2, -0.2, 0.2, 0.2}});
  std::mt19937_64 rng(9);
  const TransitionResult easy =
      plan_with_home_fallback(space, valid, Eigen::Vector2d(-1, 1), Eigen::Vector2d(1, 1), Eigen::Vector2d(0, 2), {},
                              {}, rng);
  REQUIRE(easy.success);
  CHECK_FALSE(easy.used_fallback);

  TransitionBudget direct;
  direct.iterations = 40;
  direct.timeout = 0.05;
  const TransitionResult bad_home = plan_with_home_fallback(space, free_of(cul_de_sac()), Eigen::Vector2d(0, 0),
                                                            Eigen::Vector2d(2, 0), Eigen::Vector2d(1.1, 0), direct,
                                                            {}, rng);
  CHECK_FALSE(bad_home.success);
  CHECK(bad_home.message.find("home") != std::string::npos);
}
