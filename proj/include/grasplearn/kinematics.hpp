#pragma once

#include <Eigen/Dense>
#include <Eigen/Geometry>
#include <array>
#include <cmath>
#include <stdexcept>

namespace grasplearn {

using Vector6d = Eigen::Matrix<double, 6, 1>;

// ---------------------------------------------------------------------------
// Arm and gripper model. A 6-revolute serial chain standing on the table
// plane (z = 0), with a 3-finger gripper whose fingers each have one
// revolute joint. Link i translates along the local z axis after joint i
// rotates about its axis:
//
//   joint  axis  link length [m]
//     1     z        0.290     base column
//     2     y        0.123     shoulder
//     3     y        0.290     upper arm
//     4     y        0.123     forearm
//     5     z        0.074     wrist yaw
//     6     y        0.074     wrist pitch -> palm center
//
// The palm frame's +z is the approach axis (points at the object when
// grasping). Finger k attaches at palm radius along azimuth a_k in the palm
// plane; its joint sweeps the 0.04 m link from "straight along the approach
// axis" (angle 0) toward the palm axis (angle pi/2).
// ---------------------------------------------------------------------------

inline constexpr std::array<double, 6> kArmLinkLengths = {
    0.29, 0.123, 0.29, 0.123, 0.074, 0.074};

inline constexpr double kPalmRadius = 0.05;
inline constexpr double kFingerLength = 0.045;
inline constexpr double kFingertipRadius = 0.01;

/// Finger base azimuths in the palm plane: two fingers on one side, an
/// opposing thumb.
inline const std::array<double, 3> kFingerAzimuths = {
    65.0 * M_PI / 180.0, 115.0 * M_PI / 180.0, 270.0 * M_PI / 180.0};

inline constexpr std::array<double, 6> kArmJointLowerLimits = {
    -M_PI, -2.6, -2.6, -2.6, -M_PI, -2.6};
inline constexpr std::array<double, 6> kArmJointUpperLimits = {
    M_PI, 2.6, 2.6, 2.6, M_PI, 2.6};
inline constexpr double kFingerJointLowerLimit = 0.0;
inline constexpr double kFingerJointUpperLimit = 1.4;

inline constexpr double kArmMaxJointSpeed = 0.5;     // rad/s
inline constexpr double kFingerMaxJointSpeed = 1.0;  // rad/s

/// The hand reference point H is the tool center: the spot on the approach
/// axis between the fingertips where a grasped object's center sits. With
/// the slightly-curled grasp closing angle, that is this far out of the palm
/// plane.
inline constexpr double kToolCenterOffset = 0.0445;

/// Hand pose with all arm joints at zero (the published golden pose): the
/// chain stacks straight up with identity orientation. The tool center sits
/// kToolCenterOffset further along +z.
inline const Eigen::Vector3d kZeroPoseHandPosition{0.0, 0.0, 0.974};

struct FkResult {
  Eigen::Isometry3d hand_pose = Eigen::Isometry3d::Identity();  // palm frame
  Eigen::Vector3d tool_center_point = Eigen::Vector3d::Zero();  // H
  std::array<Eigen::Vector3d, 3> fingertips;
};

inline Eigen::Isometry3d joint_transform(int joint_index, double angle) {
  Eigen::Isometry3d t = Eigen::Isometry3d::Identity();
  const bool about_z = joint_index == 0 || joint_index == 4;
  const Eigen::Vector3d axis =
      about_z ? Eigen::Vector3d::UnitZ() : Eigen::Vector3d::UnitY();
  t.linear() = Eigen::AngleAxisd(angle, axis).toRotationMatrix();
  t.translation() =
      t.linear() * Eigen::Vector3d(0.0, 0.0, kArmLinkLengths[joint_index]);
  return t;
}

/// Fingertip center in the palm frame for one finger joint angle.
inline Eigen::Vector3d fingertip_in_palm(int finger_index, double angle) {
  const double azimuth = kFingerAzimuths[static_cast<std::size_t>(finger_index)];
  const double radial = kPalmRadius - kFingerLength * std::sin(angle);
  return Eigen::Vector3d(radial * std::cos(azimuth), radial * std::sin(azimuth),
                         kFingerLength * std::cos(angle));
}

/// Serial-chain forward kinematics for the arm and fingertips.
inline FkResult forward_kinematics(const Vector6d& arm_joint_angles,
                                   const Eigen::Vector3d& finger_joint_angles) {
  if (!arm_joint_angles.allFinite() || !finger_joint_angles.allFinite()) {
    throw std::invalid_argument("joint angles must be finite");
  }
  FkResult out;
  Eigen::Isometry3d t = Eigen::Isometry3d::Identity();
  for (int i = 0; i < 6; ++i) {
    t = t * joint_transform(i, arm_joint_angles[i]);
  }
  out.hand_pose = t;
  out.tool_center_point = t * Eigen::Vector3d(0.0, 0.0, kToolCenterOffset);
  for (int k = 0; k < 3; ++k) {
    out.fingertips[static_cast<std::size_t>(k)] =
        t * fingertip_in_palm(k, finger_joint_angles[k]);
  }
  return out;
}

inline Vector6d clamp_arm_joints(Vector6d q) {
  for (int i = 0; i < 6; ++i) {
    q[i] = std::clamp(q[i], kArmJointLowerLimits[static_cast<std::size_t>(i)],
                      kArmJointUpperLimits[static_cast<std::size_t>(i)]);
  }
  return q;
}

inline Eigen::Vector3d clamp_finger_joints(Eigen::Vector3d q) {
  for (int i = 0; i < 3; ++i) {
    q[i] = std::clamp(q[i], kFingerJointLowerLimit, kFingerJointUpperLimit);
  }
  return q;
}

}  // namespace grasplearn
