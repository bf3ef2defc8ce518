#include "fixtures.hpp"

#include <fstream>

namespace spex::test {

std::string data_path(const std::string& relative) { return std::string(SPEX_DATA_DIR) + "/" + relative; }

TrussModel fixture_model(const std::string& name) { return load_model_file(data_path("models/" + name + ".json")); }

const nlohmann::json& robot_document() {
  static const nlohmann::json doc = [] {
    std::ifstream in(data_path("robots/kr6_r900_like.json"));
    return nlohmann::json::parse(in);
  }();
  return doc;
}

const RobotModel& robot() {
  static const RobotModel r = load_robot(robot_document());
  return r;
}

JointConfig random_config(const RobotModel& robot, std::mt19937_64& rng) {
  JointConfig q(robot.dof());
  for (int j = 0; j < robot.dof(); ++j) {
    q[j] = std::uniform_real_distribution<double>(robot.lower(j), robot.upper(j))(rng);
  }
  return q;
}

TrussModel random_truss(int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<Node> nodes;
  for (int k = 0; k < 3; ++k) {
    const double a = 2.0 * kPi * k / 3.0;
    nodes.push_back({k, Vec3(450.0 + 50.0 * std::cos(a), 50.0 * std::sin(a), 0.0), true});
  }
  std::vector<Element> elements;
  auto has = [&](int a, int b) {
    for (const auto& e : elements) {
      if ((e.start_node == a && e.end_node == b) || (e.start_node == b && e.end_node == a)) return true;
    }
    return false;
  };
  while (static_cast<int>(elements.size()) < n) {
    const int from = std::uniform_int_distribution<int>(0, static_cast<int>(nodes.size()) - 1)(rng);
    const bool grow = nodes.size() < 4 || u(rng) > 0.0;
    int to = -1;
    if (grow) {
      Vec3 p = nodes[from].position + Vec3(35.0 * u(rng), 35.0 * u(rng), 25.0 + 20.0 * std::abs(u(rng)));
      p.z() = std::min(p.z(), 180.0);
      to = static_cast<int>(nodes.size());
      nodes.push_back({to, p, false});
    } else {
      to = std::uniform_int_distribution<int>(0, static_cast<int>(nodes.size()) - 1)(rng);
      const double len = (nodes[to].position - nodes[from].position).norm();
      if (to == from || has(from, to) || len < 10.0 || len > 120.0 ||
          (nodes[to].grounded && nodes[from].grounded)) {
        continue;
      }
    }
    elements.push_back({static_cast<int>(elements.size()), from, to, std::nullopt});
  }
  return TrussModel::create(std::move(nodes), std::move(elements), MaterialSpec{}, SectionSpec::solid_circle(1.5));
}

PlannerConfig fast_config(int directions) {
  PlannerConfig c;
  c.directions = directions;
  c.search_timeout = 120.0;
  return c;
}

LadderInstance random_ladder(std::mt19937_64& rng, int max_rungs, int max_width) {
  LadderInstance out;
  const int rungs = std::uniform_int_distribution<int>(1, max_rungs)(rng);
  std::uniform_real_distribution<double> cost(0.0, 10.0);
  std::vector<std::vector<int>> ids(rungs);
  for (int r = 0; r < rungs; ++r) {
    const int width = std::uniform_int_distribution<int>(1, max_width)(rng);
    for (int k = 0; k < width; ++k) ids[r].push_back(out.dag.add_vertex());
  }
  for (int r = 0; r + 1 < rungs; ++r) {
    const int next = static_cast<int>(ids[r + 1].size());
    for (int v : ids[r]) {
      const int degree = std::uniform_int_distribution<int>(0, std::min(3, next))(rng);
      for (int d = 0; d < degree; ++d) {
        out.dag.add_edge(v, ids[r + 1][std::uniform_int_distribution<int>(0, next - 1)(rng)], cost(rng));
      }
    }
  }
  out.sources = ids.front();
  out.targets = ids.back();
  return out;
}

double enumerate_best_path(const LadderInstance& instance) {
  std::vector<char> is_target(instance.dag.vertex_count(), 0);
  for (int t : instance.targets) is_target[t] = 1;
  double best = kInf;
  // explicit stack of (vertex, accumulated cost)
  std::vector<std::pair<int, double>> stack;
  for (int s : instance.sources) stack.emplace_back(s, 0.0);
  while (!stack.empty()) {
    const auto [v, c] = stack.back();
    stack.pop_back();
    if (is_target[v]) best = std::min(best, c);
    for (const auto& e : instance.dag.out(v)) stack.emplace_back(e.to, c + e.cost);
  }
  return best;
}

namespace {

// Plumb columns, stacks and portal frames: shapes whose centre of gravity
// stays over the support.
TrussModel toy_model(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> ux(400.0, 500.0), uy(-70.0, 70.0), uh(30.0, 65.0), ua(0.0, 2.0 * kPi);
  const int shape = std::uniform_int_distribution<int>(0, 3)(rng);
  const Vec3 g0(ux(rng), uy(rng), 0.0);
  std::vector<Node> nodes = {{0, g0, true}, {1, g0 + Vec3(0, 0, uh(rng)), false}};
  std::vector<Element> elements = {{0, 0, 1, std::nullopt}};
  if (shape == 1) {
    nodes.push_back({2, nodes[1].position + Vec3(0, 0, uh(rng)), false});
    elements.push_back({1, 1, 2, std::nullopt});
  } else if (shape >= 2) {
    const double a = ua(rng);
    const Vec3 g1 = g0 + std::uniform_real_distribution<double>(40.0, 80.0)(rng) * Vec3(std::cos(a), std::sin(a), 0);
    nodes.push_back({2, g1, true});
    nodes.push_back({3, Vec3(g1.x(), g1.y(), nodes[1].position.z()), false});
    elements.push_back({1, 2, 3, std::nullopt});
    if (shape == 3) elements.push_back({2, 1, 3, std::nullopt});
  }
  return TrussModel::create(std::move(nodes), std::move(elements), MaterialSpec{}, SectionSpec::solid_circle(1.5));
}

}  // namespace

std::optional<ToyInstance> toy_instance(std::mt19937_64& rng, const PlannerConfig& config) {
  TrussModel model = toy_model(rng);
  const SearchResult r = backtrack_search(model, robot(), config);
  if (r.status != SearchStatus::kSuccess) return std::nullopt;
  ToyInstance t{std::move(model), *r.plan, {}};
  t.tasks = make_tasks(t.model, config, t.sequence);
  return t;
}

}  // namespace spex::test
