#include <doctest.h>

#include <cmath>
#include <numeric>

#include "fixtures.hpp"

using namespace spex;

namespace {

// n collinear elements from the grounded origin along `axis`.
TrussModel straight_bar(const Vec3& axis, double length, int n, double radius = 1.5) {
  std::vector<Node> nodes;
  std::vector<Element> elements;
  for (int i = 0; i <= n; ++i) nodes.push_back({i, axis * (length * i / n), i == 0});
  for (int i = 0; i < n; ++i) elements.push_back({i, i, i + 1, std::nullopt});
  return TrussModel::create(nodes, elements, MaterialSpec{}, SectionSpec::solid_circle(radius));
}

std::vector<int> all_elements(const TrussModel& m) {
  std::vector<int> ids(m.element_count());
  std::iota(ids.begin(), ids.end(), 0);
  return ids;
}

// Self-weight per unit length in N/mm.
double line_weight(const TrussModel& m, double g) { return m.material().density * 1e-9 * m.section().area * g; }

Eigen::Matrix<double, 6, 1> displacement_of(const StiffnessResult& r, int node) {
  for (std::size_t i = 0; i < r.free_nodes.size(); ++i) {
    if (r.free_nodes[i] == node) return r.displacements[i];
  }
  FAIL("node not free");
  return {};
}

}  // namespace

TEST_CASE("solid circle section") {
  const SectionSpec s = SectionSpec::solid_circle(2.0);
  CHECK(s.area == doctest::Approx(kPi * 4.0));
  CHECK(s.iy == doctest::Approx(kPi * 16.0 / 4.0));
  CHECK(s.iz == doctest::Approx(s.iy));
  CHECK(s.torsion == doctest::Approx(kPi * 16.0 / 2.0));
}

TEST_CASE("axial column under self-weight") {
  const double L = 300.0;
  const TrussModel m = straight_bar(Vec3::UnitZ(), L, 30);
  const auto r = analyze(m, all_elements(m), Vec3(0, 0, -9.81));
  REQUIRE(r.solved);
  const double w = line_weight(m, 9.81);
  const double EA = m.material().elastic_modulus * m.section().area;
  const double expected = w * L * L / (2.0 * EA);
  const double uz = displacement_of(r, 30)[2];
  CHECK(-uz == doctest::Approx(expected).epsilon(0.01));
}

TEST_CASE("cantilever bending under self-weight") {
  const double L = 200.0;
  const TrussModel m = straight_bar(Vec3::UnitX(), L, 40);
  const auto r = analyze(m, all_elements(m), Vec3(0, 0, -9.81));
  REQUIRE(r.solved);
  const double w = line_weight(m, 9.81);
  const double EI = m.material().elastic_modulus * m.section().iy;
  const double tip = w * std::pow(L, 4) / (8.0 * EI);
  const double slope = w * std::pow(L, 3) / (6.0 * EI);
  const auto u = displacement_of(r, 40);
  CHECK(-u[2] == doctest::Approx(tip).epsilon(0.01));
  CHECK(std::abs(u[4]) == doctest::Approx(slope).epsilon(0.01));
  CHECK(r.max_translation == doctest::Approx(std::abs(u[2])).epsilon(1e-6));
}

TEST_CASE("element stiffness is symmetric with rigid-body null space") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(-100, 100);
  const MaterialSpec mat;
  const SectionSpec sec = SectionSpec::solid_circle(1.5);
  for (int trial = 0; trial < 100; ++trial) {
    const Vec3 a(u(rng), u(rng), u(rng));
    Vec3 b(u(rng), u(rng), u(rng));
    if (trial % 10 == 0) b = a + Vec3(0, 0, 40);  // vertical members take the other reference axis
    const auto k = frame_element_stiffness(a, b, mat, sec);
    const double scale = k.cwiseAbs().maxCoeff();
    CHECK((k - k.transpose()).cwiseAbs().maxCoeff() <= 1e-9 * scale);
    for (int axis = 0; axis < 3; ++axis) {
      Eigen::Matrix<double, 12, 1> t = Eigen::Matrix<double, 12, 1>::Zero();
      t[axis] = t[6 + axis] = 1.0;
      CHECK((k * t).cwiseAbs().maxCoeff() <= 1e-9 * scale);
    }
    // small rigid rotation about the start node
    const Vec3 w(0.3, -0.2, 0.5);
    Eigen::Matrix<double, 12, 1> rot;
    rot << Vec3::Zero(), w, w.cross(b - a), w;
    CHECK((k * rot).cwiseAbs().maxCoeff() <= 1e-9 * scale * (b - a).norm());
  }
}

TEST_CASE("displacements are linear in gravity and reactions balance the weight") {
  const TrussModel cube = test::fixture_model("cube23");
  const auto ids = all_elements(cube);
  const auto r1 = analyze(cube, ids, Vec3(0, 0, -9.81));
  const auto r2 = analyze(cube, ids, Vec3(0, 0, -2.0 * 9.81));
  REQUIRE(r1.solved);
  REQUIRE(r2.solved);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < r1.displacements.size(); ++i) {
    num = std::max(num, (r2.displacements[i] - 2.0 * r1.displacements[i]).cwiseAbs().maxCoeff());
    den = std::max(den, r1.displacements[i].cwiseAbs().maxCoeff());
  }
  CHECK(num <= 1e-9 * 2.0 * den);

  double length = 0.0;
  for (int e : ids) length += cube.length(e);
  const double weight = line_weight(cube, 9.81) * length;
  CHECK(r1.total_weight == doctest::Approx(weight).epsilon(1e-12));
  Vec3 sum = Vec3::Zero();
  for (const auto& rx : r1.reactions) sum += rx.head<3>();
  CHECK(sum.z() == doctest::Approx(weight).epsilon(1e-8));
  CHECK(std::abs(sum.x()) < 1e-8 * weight);
  CHECK(std::abs(sum.y()) < 1e-8 * weight);
}

TEST_CASE("stability and stiffness verdicts") {
  const StructuralSettings settings;
  const TrussModel column = straight_bar(Vec3::UnitZ(), 60.0, 1);
  const std::vector<int> one = {0};
  CHECK(check_stiffness(column, one, settings));
  CHECK(check_stability(column, one, settings));

  // long thin cantilever: centre of gravity outside the single support and
  // the tip sags past the tolerance
  const TrussModel arm = straight_bar(Vec3::UnitX(), 300.0, 1, 1.0);
  CHECK_FALSE(check_stability(arm, one, settings));
  CHECK_FALSE(check_stiffness(arm, one, settings));

  // every prefix of the cube order built bottom-up is stiff
  const TrussModel cube = test::fixture_model("cube23");
  std::vector<int> prefix;
  for (int e = 0; e < cube.element_count(); ++e) {
    prefix.push_back(e);
    const auto v = check_structure(cube, prefix, settings);
    CHECK(v.stiff == check_stiffness(cube, prefix, settings));
    CHECK(v.stable == check_stability(cube, prefix, settings));
  }
}

TEST_CASE("centre of gravity is length weighted") {
  const TrussModel m = test::fixture_model("two_stack");
  const std::vector<int> both = {0, 1};
  double len = 0.0;
  Vec3 acc = Vec3::Zero();
  for (int e : both) {
    len += m.length(e);
    acc += m.length(e) * 0.5 * (m.start_point(e) + m.end_point(e));
  }
  CHECK((center_of_gravity(m, both) - acc / len).norm() < 1e-12);
}
