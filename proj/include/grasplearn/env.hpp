#pragma once

#include <Eigen/Dense>
#include <Eigen/Geometry>
#include <array>
#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "grasplearn/contact.hpp"
#include "grasplearn/hold_check.hpp"
#include "grasplearn/kinematics.hpp"
#include "grasplearn/rng.hpp"
#include "grasplearn/shapes.hpp"

namespace grasplearn {

inline constexpr int kObservationSize = 15;
inline constexpr int kActionSize = 9;

/// Contact is registered when the fingertip sphere comes within this margin
/// of the object surface.
inline constexpr double kContactMargin = 1e-4;

/// Table position the object is placed at on reset, before jitter.
inline const Eigen::Vector2d kObjectNominalXY{0.45, 0.0};
inline constexpr double kObjectPlacementJitter = 0.005;  // +-, per axis

/// Arm configuration on reset: the ready pose, palm down with the tool
/// center about 0.12 m above the object's nominal resting position.
inline const Vector6d kArmHomeConfiguration =
    (Vector6d() << 0.0, 1.0, 0.23, 1.53, 0.0, 0.38).finished();

/// Fingers start slightly curled, the gripper's ready pre-shape.
inline constexpr double kFingerHomeAngle = 0.1;

struct TaskSpec {
  ObjectShape object_shape = ObjectShape::kCube;
  double object_scale = 1.0;
  double object_base_size = 0.065;  // m, cube side
  double target_height = 0.05;      // m lift above the resting pose
  int max_steps = 300;
  double sample_time = 0.05;        // s
  double friction_coeff = 0.5;
  double object_mass = 0.1;         // kg
  std::uint64_t seed = 0;
};

/// Joint velocity commands, each in [-1, 1] of the joint's maximum speed.
/// Values outside the range are clamped on ingestion.
struct Action {
  Vector6d arm_velocity_commands = Vector6d::Zero();
  Eigen::Vector3d finger_velocity_commands = Eigen::Vector3d::Zero();

  static Action clamped(const Vector6d& arm, const Eigen::Vector3d& fingers) {
    Action a;
    a.arm_velocity_commands = arm.cwiseMax(-1.0).cwiseMin(1.0);
    a.finger_velocity_commands = fingers.cwiseMax(-1.0).cwiseMin(1.0);
    return a;
  }

  static Action from_vector(const Eigen::VectorXd& v) {
    if (v.size() != kActionSize) {
      throw std::invalid_argument("action vector must have 9 components");
    }
    return clamped(v.head<6>(), v.tail<3>());
  }

  Eigen::Matrix<double, kActionSize, 1> to_vector() const {
    Eigen::Matrix<double, kActionSize, 1> v;
    v << arm_velocity_commands, finger_velocity_commands;
    return v;
  }
};

using Observation = Eigen::Matrix<double, kObservationSize, 1>;

struct EnvState {
  Vector6d arm_joint_angles = Vector6d::Zero();
  Eigen::Vector3d finger_joint_angles = Eigen::Vector3d::Zero();
  /// H: the tool center between the fingertips, where a grasped object's
  /// center sits. dist_obj_hand measures from here.
  Eigen::Vector3d hand_position = Eigen::Vector3d::Zero();
  Eigen::Quaterniond hand_orientation = Eigen::Quaterniond::Identity();
  std::array<Eigen::Vector3d, 3> fingertip_positions{};
  Eigen::Vector3d object_center = Eigen::Vector3d::Zero();
  Eigen::Quaterniond object_orientation = Eigen::Quaterniond::Identity();
  double object_height = 0.0;  // of the center, above the table
  bool attached = false;
  int step_index = 0;
  std::vector<Contact> contacts;  // object frame, relative to center of mass
  bool inter_finger_contact = false;
  double dist_obj_hand = 0.0;
};

/// Fingertip-sphere versus object contact detection. Fingertip positions are
/// world-frame sphere centers; returned contacts are in the object frame.
inline std::pair<std::vector<Contact>, bool> detect_contacts(
    const std::array<Eigen::Vector3d, 3>& fingertip_positions,
    const Eigen::Vector3d& object_center,
    const Eigen::Quaterniond& object_orientation, const ObjectGeometry& geometry,
    double friction_coeff) {
  std::vector<Contact> contacts;
  const Eigen::Quaterniond inv = object_orientation.conjugate();
  for (const auto& tip : fingertip_positions) {
    const Eigen::Vector3d local = inv * (tip - object_center);
    const SurfacePoint sp = geometry.nearest_surface(local);
    if (sp.signed_distance <= kFingertipRadius + kContactMargin) {
      contacts.push_back(
          make_contact(sp.point, -sp.outward_normal, friction_coeff));
    }
  }
  bool inter_finger = false;
  for (int i = 0; i < 3 && !inter_finger; ++i) {
    for (int j = i + 1; j < 3; ++j) {
      if ((fingertip_positions[static_cast<std::size_t>(i)] -
           fingertip_positions[static_cast<std::size_t>(j)])
              .norm() < 2.0 * kFingertipRadius) {
        inter_finger = true;
        break;
      }
    }
  }
  return {std::move(contacts), inter_finger};
}

/// Quasi-static grasping environment. Joints integrate velocity commands;
/// the object either rests on the table or rides rigidly on the hand once
/// two or more fingertips touch it and the friction pyramid can cancel
/// gravity. There is no dynamics: losing the hold drops the object straight
/// back to its resting pose.
class GraspEnv {
 public:
  explicit GraspEnv(const TaskSpec& spec)
      : spec_(spec),
        geometry_(spec.object_shape, spec.object_base_size, spec.object_scale) {
    if (spec.max_steps < 1) throw std::invalid_argument("max_steps must be >= 1");
    if (!(spec.sample_time > 0.0)) {
      throw std::invalid_argument("sample_time must be > 0");
    }
    if (!(spec.object_mass > 0.0)) {
      throw std::invalid_argument("object_mass must be > 0");
    }
    reset();
  }

  const TaskSpec& spec() const { return spec_; }
  const ObjectGeometry& geometry() const { return geometry_; }
  const EnvState& state() const { return state_; }
  bool done() const { return state_.step_index >= spec_.max_steps; }

  /// Height the object center must reach: resting height plus the lift
  /// target.
  double target_center_height() const {
    return geometry_.resting_height() + spec_.target_height;
  }

  /// Deterministic reset from the task seed.
  const EnvState& reset() { return reset_with(Rng(spec_.seed)); }

  /// Reset with an episode-specific stream derived from (seed, episode).
  const EnvState& reset(std::uint64_t episode) {
    return reset_with(Rng::derive(spec_.seed, episode));
  }

  Observation observation() const {
    Observation obs;
    obs << state_.object_center, state_.finger_joint_angles,
        state_.hand_position, state_.arm_joint_angles;
    return obs;
  }

  struct StepOutcome {
    Observation observation;
    bool done = false;
  };

  StepOutcome step(const Action& action) {
    if (done()) {
      throw std::logic_error("step() called on a finished episode");
    }
    const Action a = Action::clamped(action.arm_velocity_commands,
                                     action.finger_velocity_commands);
    const double dt = spec_.sample_time;
    state_.arm_joint_angles = clamp_arm_joints(
        state_.arm_joint_angles + a.arm_velocity_commands * (kArmMaxJointSpeed * dt));
    state_.finger_joint_angles = clamp_finger_joints(
        state_.finger_joint_angles +
        a.finger_velocity_commands * (kFingerMaxJointSpeed * dt));

    const FkResult fk =
        forward_kinematics(state_.arm_joint_angles, state_.finger_joint_angles);

    if (state_.attached) {
      // Object rides on the hand; the table remains impenetrable.
      Eigen::Isometry3d object_pose = fk.hand_pose * attach_relative_pose_;
      Eigen::Vector3d center = object_pose.translation();
      center.z() = std::max(center.z(), geometry_.resting_height());
      state_.object_center = center;
      state_.object_orientation = Eigen::Quaterniond(object_pose.linear());
    }

    update_contacts(fk);

    if (state_.attached) {
      if (!hold_satisfied()) {
        drop_object();
        update_contacts(fk);
      }
    } else if (hold_satisfied()) {
      state_.attached = true;
      Eigen::Isometry3d object_pose = Eigen::Isometry3d::Identity();
      object_pose.linear() = state_.object_orientation.toRotationMatrix();
      object_pose.translation() = state_.object_center;
      attach_relative_pose_ = fk.hand_pose.inverse() * object_pose;
    }

    update_derived(fk);
    state_.step_index += 1;
    return {observation(), done()};
  }

 private:
  const EnvState& reset_with(Rng rng) {
    state_ = EnvState{};
    state_.arm_joint_angles = kArmHomeConfiguration;
    state_.finger_joint_angles = Eigen::Vector3d::Constant(kFingerHomeAngle);
    state_.object_center =
        Eigen::Vector3d(kObjectNominalXY.x() +
                            rng.uniform(-kObjectPlacementJitter, kObjectPlacementJitter),
                        kObjectNominalXY.y() +
                            rng.uniform(-kObjectPlacementJitter, kObjectPlacementJitter),
                        geometry_.resting_height());
    state_.object_orientation = geometry_.resting_orientation();
    state_.attached = false;
    state_.step_index = 0;
    const FkResult fk =
        forward_kinematics(state_.arm_joint_angles, state_.finger_joint_angles);
    update_contacts(fk);
    update_derived(fk);
    return state_;
  }

  void update_contacts(const FkResult& fk) {
    auto [contacts, inter_finger] = detect_contacts(
        fk.fingertips, state_.object_center, state_.object_orientation,
        geometry_, spec_.friction_coeff);
    state_.contacts = std::move(contacts);
    state_.inter_finger_contact = inter_finger;
  }

  void update_derived(const FkResult& fk) {
    state_.hand_position = fk.tool_center_point;
    state_.hand_orientation = Eigen::Quaterniond(fk.hand_pose.linear());
    state_.fingertip_positions = fk.fingertips;
    state_.object_height = state_.object_center.z();
    state_.dist_obj_hand = (state_.hand_position - state_.object_center).norm();
  }

  bool hold_satisfied() const {
    if (static_cast<int>(state_.contacts.size()) < 2) return false;
    const Eigen::Vector3d gravity_object_frame =
        state_.object_orientation.conjugate() *
        Eigen::Vector3d(0.0, 0.0, -kGravity);
    return hold_check(state_.contacts, spec_.object_mass, gravity_object_frame,
                      spec_.friction_coeff);
  }

  void drop_object() {
    state_.attached = false;
    state_.object_center.z() = geometry_.resting_height();
    state_.object_orientation = geometry_.resting_orientation();
    state_.object_height = state_.object_center.z();
  }

  TaskSpec spec_;
  ObjectGeometry geometry_;
  EnvState state_;
  Eigen::Isometry3d attach_relative_pose_ = Eigen::Isometry3d::Identity();
};

}  // namespace grasplearn
