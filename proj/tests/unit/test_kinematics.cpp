#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"

using namespace spex;

namespace {

RobotModel track_robot() {
  nlohmann::json doc = test::robot_document();
  doc["track"] = {{"axis", {0, 1, 0}}, {"lower", -300.0}, {"upper", 300.0}, {"resolution", 50.0}};
  const auto home = doc.at("home");
  doc["home"] = nlohmann::json::array({0.0});
  for (const auto& h : home) doc["home"].push_back(h);
  return load_robot(doc);
}

bool contains(const std::vector<JointConfig>& sols, const JointConfig& q, double tol) {
  for (const auto& s : sols) {
    if (s.size() == q.size() && (s - q).cwiseAbs().maxCoeff() <= tol) return true;
  }
  return false;
}

}  // namespace

TEST_CASE("home and limits load in radians") {
  const RobotModel& r = test::robot();
  CHECK(r.dof() == 6);
  CHECK(r.home[2] == doctest::Approx(35.0 * kPi / 180.0));
  CHECK(r.within_limits(r.home));
  JointConfig out = r.home;
  out[0] = r.upper(0) + 0.1;
  CHECK_FALSE(r.within_limits(out));
}

TEST_CASE("robot loader rejects a non-spherical wrist") {
  nlohmann::json doc = test::robot_document();
  doc["joints"][4]["a"] = 15.0;
  CHECK_THROWS_AS(load_robot(doc), InputError);
  nlohmann::json five = test::robot_document();
  five["joints"].erase(5);
  CHECK_THROWS_AS(load_robot(five), InputError);
}

TEST_CASE("ik of fk contains the configuration") {
  const RobotModel& r = test::robot();
  std::mt19937_64 rng(1);
  int checked = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const JointConfig q = test::random_config(r, rng);
    const Frame pose = fk(r, q);
    const auto sols = ik(r, pose);
    CHECK(contains(sols, q, 1e-6));
    for (const auto& s : sols) {
      const auto [dp, dr] = pose_error(fk(r, s), pose);
      CHECK(dp <= 1e-6);
      CHECK(dr <= 1e-6);
      CHECK(r.within_limits(s, 1e-9));
    }
    ++checked;
  }
  CHECK(checked == 1000);
}

TEST_CASE("track robot solves the arm at the track value") {
  const RobotModel r = track_robot();
  REQUIRE(r.dof() == 7);
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 200; ++trial) {
    const JointConfig q = test::random_config(r, rng);
    const auto sols = ik_arm(r, fk(r, q), q[0]);
    CHECK(contains(sols, q, 1e-6));
  }
  // full ik lands on track samples
  JointConfig q = r.home;
  q[0] = 100.0;
  const auto sols = ik(r, fk(r, q));
  CHECK(contains(sols, q, 1e-6));
  for (const auto& s : sols) CHECK(std::fmod(s[0] + 300.0, 50.0) == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("analytic jacobian matches finite differences") {
  for (const RobotModel& r : {test::robot(), track_robot()}) {
    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 100; ++trial) {
      const JointConfig q = test::random_config(r, rng);
      const auto J = jacobian(r, q);
      const Frame f0 = fk(r, q);
      for (int j = 0; j < r.dof(); ++j) {
        const double h = 1e-6;
        JointConfig qp = q, qm = q;
        qp[j] += h;
        qm[j] -= h;
        const Frame fp = fk(r, qp), fm = fk(r, qm);
        const Vec3 v = (fp.translation() - fm.translation()) / (2 * h);
        const Mat3 dR = (fp.linear() - fm.linear()) / (2 * h);
        const Mat3 W = dR * f0.linear().transpose();
        const Vec3 w(0.5 * (W(2, 1) - W(1, 2)), 0.5 * (W(0, 2) - W(2, 0)), 0.5 * (W(1, 0) - W(0, 1)));
        const double scale = std::max(1.0, J.col(j).head<3>().norm());
        CHECK((J.col(j).head<3>() - v).norm() <= 1e-5 * scale);
        CHECK((J.col(j).tail<3>() - w).norm() <= 1e-5);
      }
    }
  }
}

TEST_CASE("collision queries") {
  const RobotModel& r = test::robot();
  CollisionScene empty;
  CHECK_FALSE(config_collides(r, r.home, empty));

  // obstacle through the extruder body, behind the tip
  const Frame tool = fk(r, r.home);
  const Vec3 tip = tool.translation();
  const Vec3 body = tip - 80.0 * tool.linear().col(2);
  const Vec3 across = tool.linear().col(0);
  CollisionScene blocked;
  blocked.obstacles.push_back({body - 20.0 * across, body + 20.0 * across, 3.0});
  CHECK(config_collides(r, r.home, blocked));

  // floor above the tip
  CollisionScene floor;
  floor.floor_z = tip.z() + 1.0;
  CHECK(config_collides(r, r.home, floor));

  // straight motion: endpoints free, midpoint blocked
  JointConfig a = r.home, b = r.home;
  a[0] = -0.6;
  b[0] = 0.6;
  CHECK_FALSE(config_collides(r, a, blocked));
  CHECK_FALSE(config_collides(r, b, blocked));
  CHECK(motion_collides(r, a, b, blocked));
  CHECK(motion_substeps(r, a, b) == static_cast<int>(std::ceil(1.2 / kMotionStepRad)));
}

TEST_CASE("joint distance norms") {
  const RobotModel& r = test::robot();
  JointConfig a = JointConfig::Zero(6), b = JointConfig::Zero(6);
  b[0] = 0.3;
  b[1] = -0.4;
  const double w0 = r.weight(0), w1 = r.weight(1);
  CHECK(joint_distance(r, a, b) == doctest::Approx(0.3 * w0 + 0.4 * w1));
  CHECK(joint_distance(r, a, b, DistanceNorm::kL2) == doctest::Approx(std::hypot(0.3 * w0, 0.4 * w1)));
}

TEST_CASE("joint config json round trip") {
  JointConfig q(6);
  q << 0.1, -0.2, 0.3, -0.4, 0.5, -0.6;
  CHECK(joint_config_from_json(joint_config_to_json(q)) == q);
}
