#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"

using namespace spex;

namespace {

nlohmann::json two_node_doc() {
  return nlohmann::json::parse(R"({
    "version": 1,
    "nodes": [{"id": 0, "xyz": [0, 0, 0], "grounded": true}, {"id": 1, "xyz": [0, 0, 50], "grounded": false}],
    "elements": [{"id": 0, "start": 0, "end": 1}],
    "material": {"elastic_modulus": 3500, "shear_modulus": 1290, "density": 1240},
    "section": {"radius": 1.5}
  })");
}

}  // namespace

TEST_CASE("fixtures load with their counts") {
  CHECK(test::fixture_model("single").element_count() == 1);
  CHECK(test::fixture_model("two_stack").element_count() == 2);
  const TrussModel cube = test::fixture_model("cube23");
  CHECK(cube.element_count() == 23);
  CHECK(cube.node_count() == 9);
  const TrussModel tower = test::fixture_model("tower52");
  CHECK(tower.element_count() == 52);
  CHECK(tower.has_layers());
}

TEST_CASE("load rejects malformed documents") {
  auto doc = two_node_doc();
  CHECK_NOTHROW(load_model(doc));

  auto dup = doc;
  dup["elements"].push_back({{"id", 1}, {"start", 1}, {"end", 0}});
  CHECK_THROWS_AS(load_model(dup), InputError);

  auto zero = doc;
  zero["nodes"][1]["xyz"] = {0, 0, 0};
  CHECK_THROWS_AS(load_model(zero), InputError);

  auto floating = doc;
  floating["nodes"][0]["grounded"] = false;
  CHECK_THROWS_AS(load_model(floating), InputError);

  auto unknown = doc;
  unknown["elements"][0]["end"] = 7;
  CHECK_THROWS_AS(load_model(unknown), InputError);

  auto no_nodes = doc;
  no_nodes.erase("nodes");
  CHECK_THROWS_AS(load_model(no_nodes), InputError);
}

TEST_CASE("serialize round trip") {
  for (const char* name : {"single", "two_stack", "cube23", "tower52"}) {
    const TrussModel m = test::fixture_model(name);
    const TrussModel back = load_model(serialize_model(m));
    CHECK(serialize_model(back) == serialize_model(m));
  }
}

TEST_CASE("adjacency matches a brute-force shared-node test") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 10; ++trial) {
    const TrussModel m = test::random_truss(12, rng);
    const auto adj = adjacency(m);
    for (int i = 0; i < m.element_count(); ++i) {
      for (int j = 0; j < m.element_count(); ++j) {
        const Element& a = m.element(i);
        const Element& b = m.element(j);
        const bool shared = i != j && (a.start_node == b.start_node || a.start_node == b.end_node ||
                                       a.end_node == b.start_node || a.end_node == b.end_node);
        CHECK(static_cast<bool>(adj[i][j]) == shared);
      }
    }
    const auto g = grounded_vector(m);
    for (int i = 0; i < m.element_count(); ++i) {
      const Element& e = m.element(i);
      CHECK(static_cast<bool>(g[i]) == (m.node(e.start_node).grounded || m.node(e.end_node).grounded));
    }
  }
}

TEST_CASE("discretization is uniform and oriented") {
  const TrussModel cube = test::fixture_model("cube23");
  for (int e = 0; e < cube.element_count(); ++e) {
    const Element& el = cube.element(e);
    for (int from : {el.start_node, el.end_node}) {
      const PathPoints p = discretize_element(cube, e, 5.0, from);
      const double len = cube.length(e);
      CHECK(p.count() == static_cast<int>(std::ceil(len / 5.0)) + 1);
      CHECK(p.from_node == from);
      CHECK((p.points.front() - cube.node(from).position).norm() == 0.0);
      CHECK((p.points.back() - cube.node(p.to_node).position).norm() == 0.0);
      const double step = len / (p.count() - 1);
      for (int k = 1; k < p.count(); ++k) {
        CHECK((p.points[k] - p.points[k - 1]).norm() == doctest::Approx(step).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("decomposition validation") {
  const TrussModel tower = test::fixture_model("tower52");
  const auto layers = model_layers(tower);
  const LayerGroups g = validate_decomposition(tower, layers);
  CHECK(g.groups.size() == 4);
  CHECK(g.warnings.empty());
  std::size_t total = 0;
  for (const auto& grp : g.groups) total += grp.size();
  CHECK(total == 52);

  auto gap = layers;
  for (int& l : gap) {
    if (l == 1) l = 2;
  }
  CHECK_THROWS_AS(validate_decomposition(tower, gap), InputError);
  CHECK_THROWS_AS(validate_decomposition(tower, std::vector<int>(3, 0)), InputError);

  // the top layer alone is floating
  auto inverted = layers;
  for (int& l : inverted) l = 3 - l;
  CHECK_FALSE(validate_decomposition(tower, inverted).warnings.empty());
}
