#include <catch2/catch.hpp>

#include <Eigen/Dense>
#include <cmath>

#include "grasplearn/kinematics.hpp"
#include "grasplearn/rng.hpp"

using namespace grasplearn;
using Eigen::Vector3d;

namespace {

// Independent homogeneous-transform oracle built from plain 4x4 matrices and
// Rodrigues rotations, sharing no code with the implementation.
Eigen::Matrix4d rot_about(const Vector3d& axis, double angle) {
  const Vector3d a = axis.normalized();
  Eigen::Matrix3d k;
  k << 0, -a.z(), a.y(), a.z(), 0, -a.x(), -a.y(), a.x(), 0;
  const Eigen::Matrix3d r = Eigen::Matrix3d::Identity() +
                            std::sin(angle) * k +
                            (1.0 - std::cos(angle)) * (k * k);
  Eigen::Matrix4d t = Eigen::Matrix4d::Identity();
  t.topLeftCorner<3, 3>() = r;
  return t;
}

Eigen::Matrix4d translate_z(double d) {
  Eigen::Matrix4d t = Eigen::Matrix4d::Identity();
  t(2, 3) = d;
  return t;
}

Eigen::Matrix4d chain_oracle(const Vector6d& q) {
  Eigen::Matrix4d t = Eigen::Matrix4d::Identity();
  for (int i = 0; i < 6; ++i) {
    const Vector3d axis = (i == 0 || i == 4) ? Vector3d::UnitZ() : Vector3d::UnitY();
    t = t * rot_about(axis, q[i]) * translate_z(kArmLinkLengths[i]);
  }
  return t;
}

}  // namespace

TEST_CASE("zero configuration gives the golden pose", "[kinematics]") {
  const FkResult fk = forward_kinematics(Vector6d::Zero(), Vector3d::Zero());
  CHECK((fk.hand_pose.translation() - kZeroPoseHandPosition).norm() < 1e-12);
  CHECK((fk.hand_pose.linear() - Eigen::Matrix3d::Identity()).norm() < 1e-12);
  CHECK((fk.tool_center_point -
         (kZeroPoseHandPosition + Vector3d(0, 0, kToolCenterOffset)))
            .norm() < 1e-12);
}

TEST_CASE("base joint rotation by pi mirrors x and y", "[kinematics]") {
  Vector6d q = Vector6d::Zero();
  q << 0.0, 0.4, 0.7, 0.2, 0.0, 0.1;
  const Vector3d p0 = forward_kinematics(q, Vector3d::Zero()).hand_pose.translation();
  q[0] = M_PI;
  const Vector3d p1 = forward_kinematics(q, Vector3d::Zero()).hand_pose.translation();
  CHECK(p1.x() == Approx(-p0.x()).margin(1e-12));
  CHECK(p1.y() == Approx(-p0.y()).margin(1e-12));
  CHECK(p1.z() == Approx(p0.z()).margin(1e-12));
}

TEST_CASE("forward kinematics matches the transform oracle", "[kinematics][oracle]") {
  Rng rng(8);
  for (int trial = 0; trial < 200; ++trial) {
    Vector6d q;
    for (int i = 0; i < 6; ++i) q[i] = rng.uniform(-2.0, 2.0);
    Vector3d fingers(rng.uniform(0.0, 1.4), rng.uniform(0.0, 1.4),
                     rng.uniform(0.0, 1.4));
    const FkResult fk = forward_kinematics(q, fingers);
    const Eigen::Matrix4d oracle = chain_oracle(q);
    CHECK((fk.hand_pose.matrix() - oracle).cwiseAbs().maxCoeff() < 1e-12);

    // Fingertips are rigid palm-frame offsets carried by the hand pose.
    for (int k = 0; k < 3; ++k) {
      const Vector3d local = fingertip_in_palm(k, fingers[k]);
      Eigen::Vector4d h;
      h << local, 1.0;
      const Eigen::Vector4d world = oracle * h;
      CHECK((fk.fingertips[static_cast<std::size_t>(k)] - world.head<3>())
                .norm() < 1e-12);
    }
  }
}

TEST_CASE("fingertip sweep geometry", "[kinematics]") {
  // Open finger points along the approach axis; closing pulls it inward.
  const Vector3d open = fingertip_in_palm(0, 0.0);
  CHECK(open.z() == Approx(kFingerLength));
  CHECK(open.head<2>().norm() == Approx(kPalmRadius));

  const Vector3d closed = fingertip_in_palm(0, kFingerJointUpperLimit);
  CHECK(closed.head<2>().norm() < open.head<2>().norm());
  CHECK(closed.z() < open.z());
}

TEST_CASE("joint clamping respects documented limits", "[kinematics]") {
  Vector6d wild;
  wild << 10.0, -10.0, 3.0, -3.0, 4.0, 2.7;
  const Vector6d clamped = clamp_arm_joints(wild);
  for (int i = 0; i < 6; ++i) {
    CHECK(clamped[i] >= kArmJointLowerLimits[static_cast<std::size_t>(i)]);
    CHECK(clamped[i] <= kArmJointUpperLimits[static_cast<std::size_t>(i)]);
  }
  const Vector3d fingers = clamp_finger_joints({-1.0, 2.0, 0.5});
  CHECK(fingers[0] == 0.0);
  CHECK(fingers[1] == Approx(kFingerJointUpperLimit));
  CHECK(fingers[2] == 0.5);
}

TEST_CASE("non-finite joint angles are rejected", "[kinematics]") {
  Vector6d bad = Vector6d::Zero();
  bad[2] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(forward_kinematics(bad, Vector3d::Zero()),
                  std::invalid_argument);
}
