#include "spex/kinematics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

namespace spex {

namespace {

constexpr double kDeg = kPi / 180.0;
constexpr double kIkPositionTol = 1e-6;  // mm
constexpr double kIkRotationTol = 1e-6;  // rad

Frame dh_transform(const DhJoint& j, double q) {
  const double theta = q + j.theta_offset;
  const double ct = std::cos(theta), st = std::sin(theta);
  const double ca = std::cos(j.alpha), sa = std::sin(j.alpha);
  Frame t = Frame::Identity();
  t.linear() << ct, -st * ca, st * sa,
                st, ct * ca, -ct * sa,
                0.0, sa, ca;
  t.translation() = Vec3(j.a * ct, j.a * st, j.d);
  return t;
}

Vec3 read_vec3(const nlohmann::json& j, const char* what) {
  if (!j.is_array() || j.size() != 3) throw InputError(std::string("robot: ") + what + " must have 3 components");
  return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

Frame read_pose(const nlohmann::json& j) {
  Frame f = Frame::Identity();
  if (j.contains("xyz")) f.translation() = read_vec3(j.at("xyz"), "xyz");
  if (j.contains("rpy")) {
    const Vec3 rpy = read_vec3(j.at("rpy"), "rpy") * kDeg;
    f.linear() = (Eigen::AngleAxisd(rpy.z(), Vec3::UnitZ()) * Eigen::AngleAxisd(rpy.y(), Vec3::UnitY()) *
                  Eigen::AngleAxisd(rpy.x(), Vec3::UnitX()))
                     .toRotationMatrix();
  }
  return f;
}

CapsuleShape read_capsule(const nlohmann::json& j) {
  CapsuleShape c{read_vec3(j.at("p0"), "p0"), read_vec3(j.at("p1"), "p1"), j.at("radius").get<double>()};
  if (!(c.radius > 0.0)) throw InputError("robot: capsule radius must be positive");
  return c;
}

bool near(double a, double b) { return std::abs(a - b) < 1e-9; }

double wrap_pi(double a) { return std::remainder(a, kTwoPi); }

}  // namespace

double RobotModel::lower(int j) const {
  if (track) return j == 0 ? track->lower : arm[j - 1].lower;
  return arm[j].lower;
}

double RobotModel::upper(int j) const {
  if (track) return j == 0 ? track->upper : arm[j - 1].upper;
  return arm[j].upper;
}

double RobotModel::weight(int j) const {
  if (track) return j == 0 ? track->weight : arm[j - 1].weight;
  return arm[j].weight;
}

bool RobotModel::within_limits(const JointConfig& q, double tol) const {
  if (q.size() != dof()) return false;
  for (int j = 0; j < dof(); ++j) {
    if (q[j] < lower(j) - tol || q[j] > upper(j) + tol) return false;
  }
  return true;
}

void RobotModel::finalize() {
  constexpr double h = kPi / 2;
  const double alphas[6] = {-h, 0.0, -h, h, -h, 0.0};
  for (int k = 0; k < 6; ++k) {
    if (!near(arm[k].alpha, alphas[k])) {
      throw InputError("robot: joint " + std::to_string(k + 1) + " alpha does not match the spherical-wrist layout");
    }
    if (!(arm[k].lower < arm[k].upper)) throw InputError("robot: joint limits must satisfy lower < upper");
    if (!(arm[k].weight > 0.0)) throw InputError("robot: joint weights must be positive");
  }
  if (!near(arm[1].d, 0) || !near(arm[2].d, 0) || !near(arm[4].d, 0) || !near(arm[3].a, 0) ||
      !near(arm[4].a, 0) || !near(arm[5].a, 0)) {
    throw InputError("robot: DH table is not a spherical-wrist 6R arm (need d2=d3=d5=0, a4=a5=a6=0)");
  }
  if (std::abs(arm[1].a) < 1e-9) throw InputError("robot: a2 must be non-zero");
  if (track) {
    if (!(track->lower <= track->upper) || !(track->resolution > 0.0) || !(track->weight > 0.0)) {
      throw InputError("robot: invalid track block");
    }
    track->axis.normalize();
  }
  for (const LinkCapsule& c : link_capsules) {
    if (c.link < 0 || c.link > kToolLink) throw InputError("robot: capsule link index out of range");
  }

  // bodies: link capsules plus EE capsules on the tool link
  std::vector<int> body_link;
  for (const LinkCapsule& c : link_capsules) body_link.push_back(c.link);
  for (std::size_t i = 0; i < end_effector.capsules.size(); ++i) body_link.push_back(kToolLink);
  self_pairs_.clear();
  for (std::size_t i = 0; i < body_link.size(); ++i) {
    for (std::size_t j = i + 1; j < body_link.size(); ++j) {
      const int li = std::min(body_link[i], body_link[j]);
      const int lj = std::max(body_link[i], body_link[j]);
      if (lj - li <= 1) continue;
      const bool allowed = std::any_of(allowed_collisions.begin(), allowed_collisions.end(), [&](const auto& p) {
        return std::min(p.first, p.second) == li && std::max(p.first, p.second) == lj;
      });
      if (!allowed) self_pairs_.emplace_back(static_cast<int>(i), static_cast<int>(j));
    }
  }
  if (home.size() == 0) home = JointConfig::Zero(dof());
  if (home.size() != dof()) throw InputError("robot: home has the wrong number of joints");
  if (!within_limits(home)) throw InputError("robot: home is outside the joint limits");
}

RobotModel load_robot(const nlohmann::json& doc) {
  try {
    RobotModel robot;
    robot.name = doc.value("name", "robot");
    const auto& joints = doc.at("joints");
    if (!joints.is_array() || joints.size() != 6) throw InputError("robot: exactly six arm joints are required");
    for (int k = 0; k < 6; ++k) {
      const auto& j = joints[k];
      DhJoint dh;
      dh.a = j.value("a", 0.0);
      dh.alpha = j.value("alpha", 0.0) * kDeg;
      dh.d = j.value("d", 0.0);
      dh.theta_offset = j.value("theta_offset", 0.0) * kDeg;
      dh.lower = j.at("lower").get<double>() * kDeg;
      dh.upper = j.at("upper").get<double>() * kDeg;
      dh.weight = j.value("weight", 1.0);
      robot.arm[k] = dh;
    }
    if (doc.contains("track") && !doc.at("track").is_null()) {
      const auto& t = doc.at("track");
      TrackJoint track;
      track.axis = read_vec3(t.at("axis"), "track.axis");
      track.lower = t.at("lower").get<double>();
      track.upper = t.at("upper").get<double>();
      track.weight = t.value("weight", 5.0);
      track.resolution = t.value("resolution", 10.0);
      robot.track = track;
    }
    if (doc.contains("base")) robot.base = read_pose(doc.at("base"));
    if (doc.contains("tool")) robot.tool = read_pose(doc.at("tool"));
    if (doc.contains("links")) {
      for (const auto& c : doc.at("links")) robot.link_capsules.push_back({c.at("link").get<int>(), read_capsule(c)});
    }
    if (doc.contains("end_effector")) {
      for (const auto& c : doc.at("end_effector")) robot.end_effector.capsules.push_back(read_capsule(c));
    } else {
      robot.end_effector = EEGeometry::default_extruder();
    }
    if (doc.contains("allowed_collisions")) {
      for (const auto& p : doc.at("allowed_collisions")) robot.allowed_collisions.emplace_back(p[0], p[1]);
    }
    if (doc.contains("home")) {
      const auto& h = doc.at("home");
      robot.home.resize(static_cast<Eigen::Index>(h.size()));
      for (std::size_t i = 0; i < h.size(); ++i) {
        const bool prismatic = robot.track && i == 0;
        robot.home[static_cast<Eigen::Index>(i)] = h[i].get<double>() * (prismatic ? 1.0 : kDeg);
      }
    }
    robot.finalize();
    return robot;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("robot: schema violation: ") + e.what());
  }
}

RobotModel load_robot_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open robot file " + path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw InputError("robot file " + path + " is not valid JSON: " + e.what());
  }
  return load_robot(doc);
}

namespace {

Frame arm_base(const RobotModel& robot, double track_value) {
  if (!robot.track) return robot.base;
  Frame slide = Frame::Identity();
  slide.translation() = track_value * robot.track->axis;
  return slide * robot.base;
}

}  // namespace

std::array<Frame, 8> fk_frames(const RobotModel& robot, const JointConfig& q) {
  const int off = robot.arm_offset();
  std::array<Frame, 8> frames;
  frames[0] = arm_base(robot, robot.track ? q[0] : 0.0);
  for (int k = 0; k < 6; ++k) frames[k + 1] = frames[k] * dh_transform(robot.arm[k], q[off + k]);
  frames[7] = frames[6] * robot.tool;
  return frames;
}

Frame fk(const RobotModel& robot, const JointConfig& q) { return fk_frames(robot, q)[7]; }

Eigen::Matrix<double, 6, Eigen::Dynamic, 0, 6, kMaxDof> jacobian(const RobotModel& robot, const JointConfig& q) {
  const auto frames = fk_frames(robot, q);
  const Vec3 tip = frames[7].translation();
  Eigen::Matrix<double, 6, Eigen::Dynamic, 0, 6, kMaxDof> jac(6, robot.dof());
  jac.setZero();
  const int off = robot.arm_offset();
  if (robot.track) jac.block<3, 1>(0, 0) = robot.track->axis;
  for (int k = 0; k < 6; ++k) {
    const Vec3 axis = frames[k].linear().col(2);
    const Vec3 origin = frames[k].translation();
    jac.block<3, 1>(0, off + k) = axis.cross(tip - origin);
    jac.block<3, 1>(3, off + k) = axis;
  }
  return jac;
}

std::pair<double, double> pose_error(const Frame& a, const Frame& b) {
  const double dp = (a.translation() - b.translation()).norm();
  const Eigen::AngleAxisd aa(Mat3(a.linear().transpose() * b.linear()));
  return {dp, std::abs(aa.angle())};
}

std::vector<JointConfig> ik_arm(const RobotModel& robot, const Frame& tool_pose, double track_value) {
  std::vector<JointConfig> out;
  const auto& j = robot.arm;
  const Frame base = arm_base(robot, track_value);
  const Frame flange = base.inverse() * tool_pose * robot.tool.inverse();
  const Vec3 wc = flange.translation() - j[5].d * flange.linear().col(2);

  const double a1 = j[0].a, d1 = j[0].d, a2 = j[1].a, a3 = j[2].a, d4 = j[3].d;
  const double rho = std::hypot(wc.x(), wc.y());
  const double phi1 = rho > 1e-12 ? std::atan2(wc.y(), wc.x()) : 0.0;
  const double reach_r = std::hypot(a3, d4);
  const double phi3 = std::atan2(d4, a3);

  // theta values (offsets included) for the four position branches
  std::vector<std::array<double, 3>> position_branches;
  for (int shoulder = 0; shoulder < 2; ++shoulder) {
    const double t1 = shoulder == 0 ? phi1 : phi1 + kPi;
    const double r = shoulder == 0 ? rho : -rho;
    const double x1 = r - a1;
    const double y1 = d1 - wc.z();
    const double k = (x1 * x1 + y1 * y1 - a2 * a2 - a3 * a3 - d4 * d4) / (2.0 * a2);
    double c = k / reach_r;
    if (c > 1.0 + 1e-12 || c < -1.0 - 1e-12) continue;
    c = std::clamp(c, -1.0, 1.0);
    const double acos_c = std::acos(c);
    for (int elbow = 0; elbow < 2; ++elbow) {
      if (elbow == 1 && acos_c < 1e-12) break;  // double root
      const double t3 = (elbow == 0 ? acos_c : -acos_c) - phi3;
      const double u = a2 + a3 * std::cos(t3) - d4 * std::sin(t3);
      const double w = a3 * std::sin(t3) + d4 * std::cos(t3);
      const double t2 = std::atan2(y1, x1) - std::atan2(w, u);
      position_branches.push_back({t1, t2, t3});
    }
  }

  for (const auto& branch : position_branches) {
    Frame t03 = Frame::Identity();
    for (int m = 0; m < 3; ++m) t03 = t03 * dh_transform(j[m], branch[m] - j[m].theta_offset);
    const Mat3 r36 = t03.linear().transpose() * flange.linear();

    // r36 = Rz(t4) Ry(-t5) Rz(t6)
    const double sb = std::hypot(r36(0, 2), r36(1, 2));
    std::vector<std::array<double, 3>> wrists;
    if (sb > 1e-9) {
      for (int flip = 0; flip < 2; ++flip) {
        const double s = flip == 0 ? sb : -sb;
        const double b = std::atan2(s, r36(2, 2));
        const double a = std::atan2(r36(1, 2) / s, r36(0, 2) / s);
        const double cc = std::atan2(r36(2, 1) / s, -r36(2, 0) / s);
        wrists.push_back({a, -b, cc});
      }
    } else if (r36(2, 2) > 0.0) {
      wrists.push_back({0.0, 0.0, std::atan2(r36(1, 0), r36(0, 0))});
    } else {
      wrists.push_back({0.0, kPi, std::atan2(r36(1, 0), r36(1, 1))});
    }

    for (const auto& wrist : wrists) {
      const double thetas[6] = {branch[0], branch[1], branch[2], wrist[0], wrist[1], wrist[2]};
      // joint values wrapped to (-pi, pi], then every 2pi shift inside the limits
      std::vector<std::vector<double>> choices(6);
      bool empty = false;
      for (int m = 0; m < 6; ++m) {
        const double base_q = wrap_pi(thetas[m] - j[m].theta_offset);
        for (int shift = -2; shift <= 2; ++shift) {
          const double v = base_q + shift * kTwoPi;
          if (v >= j[m].lower - 1e-12 && v <= j[m].upper + 1e-12) {
            choices[m].push_back(std::clamp(v, j[m].lower, j[m].upper));
          }
        }
        if (choices[m].empty()) {
          empty = true;
          break;
        }
      }
      if (empty) continue;
      std::array<std::size_t, 6> idx{};
      while (true) {
        JointConfig q(robot.dof());
        const int off = robot.arm_offset();
        if (robot.track) q[0] = track_value;
        for (int m = 0; m < 6; ++m) q[off + m] = choices[m][idx[m]];
        out.push_back(q);
        int m = 5;
        while (m >= 0 && ++idx[m] == choices[m].size()) idx[m--] = 0;
        if (m < 0) break;
      }
    }
  }

  // keep exact solutions only, drop duplicates from degenerate branches
  std::vector<JointConfig> verified;
  for (const JointConfig& q : out) {
    const auto [dp, dr] = pose_error(fk(robot, q), tool_pose);
    if (dp > kIkPositionTol || dr > kIkRotationTol) continue;
    const bool dup = std::any_of(verified.begin(), verified.end(),
                                 [&](const JointConfig& v) { return (v - q).cwiseAbs().maxCoeff() < 1e-9; });
    if (!dup) verified.push_back(q);
  }
  return verified;
}

std::vector<JointConfig> ik(const RobotModel& robot, const Frame& tool_pose) {
  if (!robot.track) return ik_arm(robot, tool_pose, 0.0);
  std::vector<JointConfig> all;
  const TrackJoint& t = *robot.track;
  const int steps = static_cast<int>(std::floor((t.upper - t.lower) / t.resolution + 1e-9));
  for (int s = 0; s <= steps; ++s) {
    auto sols = ik_arm(robot, tool_pose, t.lower + s * t.resolution);
    all.insert(all.end(), sols.begin(), sols.end());
  }
  return all;
}

std::vector<LinkCapsule> posed_capsules(const RobotModel& robot, const JointConfig& q) {
  const auto frames = fk_frames(robot, q);
  std::vector<LinkCapsule> bodies;
  bodies.reserve(robot.link_capsules.size() + robot.end_effector.capsules.size());
  for (const LinkCapsule& c : robot.link_capsules) bodies.push_back({c.link, c.shape.transformed(frames[c.link])});
  for (const CapsuleShape& c : robot.end_effector.capsules) bodies.push_back({kToolLink, c.transformed(frames[7])});
  return bodies;
}

bool config_collides(const RobotModel& robot, const JointConfig& q, const CollisionScene& scene) {
  const auto bodies = posed_capsules(robot, q);
  for (const auto& [i, j] : robot.self_pairs()) {
    if (capsules_overlap(bodies[i].shape, bodies[j].shape, 0.0)) return true;
  }
  for (const LinkCapsule& b : bodies) {
    if (scene.floor_z) {
      const double lowest = std::min(b.shape.p0.z(), b.shape.p1.z()) - b.shape.radius - scene.clearance;
      if (lowest < *scene.floor_z) return true;
    }
    for (const CapsuleShape& o : scene.obstacles) {
      if (capsules_overlap(b.shape, o, scene.clearance)) return true;
    }
  }
  return false;
}

int motion_substeps(const RobotModel& robot, const JointConfig& a, const JointConfig& b) {
  double steps = 1.0;
  for (int j = 0; j < robot.dof(); ++j) {
    const double res = robot.is_prismatic(j) ? kMotionStepMm : kMotionStepRad;
    steps = std::max(steps, std::ceil(std::abs(b[j] - a[j]) / res));
  }
  return static_cast<int>(steps);
}

bool motion_collides(const RobotModel& robot, const JointConfig& a, const JointConfig& b, const CollisionScene& scene) {
  const int n = motion_substeps(robot, a, b);
  for (int k = 0; k <= n; ++k) {
    const JointConfig q = a + (b - a) * (static_cast<double>(k) / n);
    if (config_collides(robot, q, scene)) return true;
  }
  return false;
}

double joint_distance(const JointConfig& a, const JointConfig& b, std::span<const double> weights,
                      DistanceNorm norm) {
  double sum = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    const double d = weights[static_cast<std::size_t>(i)] * std::abs(a[i] - b[i]);
    sum += norm == DistanceNorm::kL1 ? d : d * d;
  }
  return norm == DistanceNorm::kL1 ? sum : std::sqrt(sum);
}

double joint_distance(const RobotModel& robot, const JointConfig& a, const JointConfig& b, DistanceNorm norm) {
  std::array<double, kMaxDof> w{};
  for (int j = 0; j < robot.dof(); ++j) w[j] = robot.weight(j);
  return joint_distance(a, b, std::span<const double>(w.data(), robot.dof()), norm);
}

nlohmann::json joint_config_to_json(const JointConfig& q) {
  auto arr = nlohmann::json::array();
  for (Eigen::Index i = 0; i < q.size(); ++i) arr.push_back(q[i]);
  return arr;
}

JointConfig joint_config_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.size() > kMaxDof) throw InputError("joint configuration must be an array of at most 7 values");
  JointConfig q(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) q[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  return q;
}

}  // namespace spex
