#pragma once

#include <json.hpp>

#include <array>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "spex/spatial.hpp"
#include "spex/types.hpp"

namespace spex {

// Standard DH row: Rz(theta + theta_offset) Tz(d) Tx(a) Rx(alpha).
struct DhJoint {
  double a = 0.0;
  double alpha = 0.0;
  double d = 0.0;
  double theta_offset = 0.0;
  double lower = -kPi;
  double upper = kPi;
  double weight = 1.0;
};

// Prismatic base track: the arm base slides along axis (unit, world frame).
struct TrackJoint {
  Vec3 axis = Vec3::UnitX();
  double lower = 0.0;
  double upper = 0.0;
  double weight = 5.0;
  double resolution = 10.0;  // mm between IK track samples
};

// Collision body rigidly attached to a frame. Link 0 is the arm base (after
// the track), link k the frame after arm joint k, link 7 the tool frame.
struct LinkCapsule {
  int link = 0;
  CapsuleShape shape;
};

constexpr int kToolLink = 7;

// Static obstacles for robot collision queries. Clearance grows every robot
// capsule radius; the floor is a half-space z < floor_z.
struct CollisionScene {
  std::vector<CapsuleShape> obstacles;
  std::optional<double> floor_z;
  double clearance = 2.0;
};

enum class DistanceNorm { kL1, kL2 };

// 6R spherical-wrist arm, optionally on a track. The arm must follow the
// industrial layout alpha = (-pi/2, 0, -pi/2, pi/2, -pi/2, 0) with
// d2 = d3 = d5 = 0 and a4 = a5 = a6 = 0; load_robot rejects anything else.
class RobotModel {
 public:
  std::string name;
  std::array<DhJoint, 6> arm;
  std::optional<TrackJoint> track;
  Frame base = Frame::Identity();
  Frame tool = Frame::Identity();  // flange -> tool tip, tip z is the nozzle direction
  std::vector<LinkCapsule> link_capsules;
  EEGeometry end_effector;
  std::vector<std::pair<int, int>> allowed_collisions;
  JointConfig home;

  int dof() const { return track ? 7 : 6; }
  int arm_offset() const { return track ? 1 : 0; }

  double lower(int j) const;
  double upper(int j) const;
  double weight(int j) const;
  bool is_prismatic(int j) const { return track && j == 0; }
  bool within_limits(const JointConfig& q, double tol = 1e-12) const;

  // Capsule pairs checked for self-collision (non-adjacent, not allowed).
  const std::vector<std::pair<int, int>>& self_pairs() const { return self_pairs_; }
  void finalize();  // validates structure and precomputes self pairs

 private:
  std::vector<std::pair<int, int>> self_pairs_;
};

RobotModel load_robot(const nlohmann::json& document);
RobotModel load_robot_file(const std::string& path);

// World frames: index 0 arm base, 1..6 after each arm joint, 7 the tool tip.
std::array<Frame, 8> fk_frames(const RobotModel& robot, const JointConfig& q);
Frame fk(const RobotModel& robot, const JointConfig& q);

// Geometric Jacobian of the tool tip (rows: linear velocity, angular velocity).
Eigen::Matrix<double, 6, Eigen::Dynamic, 0, 6, kMaxDof> jacobian(const RobotModel& robot, const JointConfig& q);

// Every analytic solution reproducing the tool pose, within joint limits. With
// a track the arm is solved at each track sample.
std::vector<JointConfig> ik(const RobotModel& robot, const Frame& tool_pose);

// Analytic solutions of the arm alone for a fixed track value.
std::vector<JointConfig> ik_arm(const RobotModel& robot, const Frame& tool_pose, double track_value);

// Robot and EE capsules in world coordinates, tagged with their link index.
std::vector<LinkCapsule> posed_capsules(const RobotModel& robot, const JointConfig& q);

bool config_collides(const RobotModel& robot, const JointConfig& q, const CollisionScene& scene);

// Interpolation resolution for motion checks: rad for revolute joints, mm for
// the track.
constexpr double kMotionStepRad = 0.02;
constexpr double kMotionStepMm = 2.0;

// Number of equal sub-steps so that no joint moves more than the resolution.
int motion_substeps(const RobotModel& robot, const JointConfig& a, const JointConfig& b);

// Collision along the straight joint-space segment a -> b, endpoints included.
bool motion_collides(const RobotModel& robot, const JointConfig& a, const JointConfig& b, const CollisionScene& scene);

double joint_distance(const RobotModel& robot, const JointConfig& a, const JointConfig& b,
                      DistanceNorm norm = DistanceNorm::kL1);
double joint_distance(const JointConfig& a, const JointConfig& b, std::span<const double> weights,
                      DistanceNorm norm);

// Position error (mm) and rotation angle error (rad) between two frames.
std::pair<double, double> pose_error(const Frame& a, const Frame& b);

nlohmann::json joint_config_to_json(const JointConfig& q);
JointConfig joint_config_from_json(const nlohmann::json& j);

}  // namespace spex
