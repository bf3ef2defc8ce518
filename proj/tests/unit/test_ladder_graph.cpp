#include <doctest.h>

#include "fixtures.hpp"

using namespace spex;

TEST_CASE("topological search equals path enumeration") {
  std::mt19937_64 rng(6);
  int reachable = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const test::LadderInstance inst = test::random_ladder(rng);
    const DagPath path = dag_shortest_path(inst.dag, inst.sources, inst.targets);
    const double best = test::enumerate_best_path(inst);
    CHECK(path.cost == best);
    CHECK(path.found() == (best < kInf));
    if (!path.found()) continue;
    ++reachable;
    // the returned vertices form that path
    double sum = 0.0;
    for (std::size_t k = 0; k + 1 < path.vertices.size(); ++k) {
      double edge = kInf;
      for (const auto& e : inst.dag.out(path.vertices[k])) {
        if (e.to == path.vertices[k + 1]) edge = std::min(edge, e.cost);
      }
      REQUIRE(edge < kInf);
      sum += edge;
    }
    CHECK(sum == doctest::Approx(path.cost).epsilon(1e-12));
  }
  CHECK(reachable > 50);
}

TEST_CASE("topological order respects every edge") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const auto inst = test::random_ladder(rng);
    const auto order = inst.dag.topological_order();
    REQUIRE(order.size() == static_cast<std::size_t>(inst.dag.vertex_count()));
    std::vector<int> pos(order.size());
    for (std::size_t i = 0; i < order.size(); ++i) pos[order[i]] = static_cast<int>(i);
    for (int v = 0; v < inst.dag.vertex_count(); ++v) {
      for (const auto& e : inst.dag.out(v)) CHECK(pos[v] < pos[e.to]);
    }
  }
}

TEST_CASE("cycles are rejected") {
  Dag g;
  const int a = g.add_vertex(), b = g.add_vertex(), c = g.add_vertex();
  g.add_edge(a, b, 1.0);
  g.add_edge(b, c, 1.0);
  g.add_edge(c, a, 1.0);
  CHECK_THROWS_AS(g.topological_order(), std::logic_error);
}

TEST_CASE("ties keep the first relaxation") {
  Dag g;
  const int s = g.add_vertex(), x = g.add_vertex(), y = g.add_vertex(), t = g.add_vertex();
  g.add_edge(s, x, 1.0);
  g.add_edge(s, y, 1.0);
  g.add_edge(x, t, 1.0);
  g.add_edge(y, t, 1.0);
  const DagPath p = dag_shortest_path(g, {s}, {t});
  CHECK(p.cost == 2.0);
  CHECK(p.vertices == std::vector<int>{s, x, t});
  CHECK_FALSE(dag_shortest_path(g, {t}, {s}).found());
}
