#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

namespace grasplearn {

/// Hard-finger contact: a point on the object surface transmitting a 3-D
/// force inside its friction cone. Position is expressed in the object frame
/// relative to the center of mass; the normal points into the object.
/// (normal, tangent1, tangent2) is an orthonormal contact frame.
struct Contact {
  Eigen::Vector3d position{Eigen::Vector3d::Zero()};
  Eigen::Vector3d normal{Eigen::Vector3d::UnitZ()};
  Eigen::Vector3d tangent1{Eigen::Vector3d::UnitX()};
  Eigen::Vector3d tangent2{Eigen::Vector3d::UnitY()};
  double friction_coeff = 0.0;
};

constexpr double kFrameTolerance = 1e-9;

inline bool contact_frame_valid(const Contact& c) {
  const auto& n = c.normal;
  const auto& t1 = c.tangent1;
  const auto& t2 = c.tangent2;
  return std::abs(n.norm() - 1.0) <= kFrameTolerance &&
         std::abs(t1.norm() - 1.0) <= kFrameTolerance &&
         std::abs(t2.norm() - 1.0) <= kFrameTolerance &&
         std::abs(n.dot(t1)) <= kFrameTolerance &&
         std::abs(n.dot(t2)) <= kFrameTolerance &&
         std::abs(t1.dot(t2)) <= kFrameTolerance;
}

inline void validate_contact(const Contact& c) {
  if (!contact_frame_valid(c)) {
    throw std::invalid_argument("contact frame is not orthonormal");
  }
  if (!(c.friction_coeff >= 0.0)) {
    throw std::invalid_argument("contact friction coefficient must be >= 0");
  }
}

/// Builds a contact with a deterministic tangent basis from an inward normal.
/// tangent1 is the normalized projection of the object-frame x-axis onto the
/// tangent plane; when the normal is within 1e-6 of +-x the y-axis is
/// projected instead. tangent2 = normal x tangent1.
inline Contact make_contact(const Eigen::Vector3d& position,
                            const Eigen::Vector3d& inward_normal,
                            double friction_coeff) {
  const double norm = inward_normal.norm();
  if (!(norm > 0.0) || !inward_normal.allFinite()) {
    throw std::invalid_argument("contact normal must be a nonzero vector");
  }
  Contact c;
  c.position = position;
  c.normal = inward_normal / norm;
  Eigen::Vector3d seed = Eigen::Vector3d::UnitX();
  if (std::abs(std::abs(c.normal.x()) - 1.0) < 1e-6) {
    seed = Eigen::Vector3d::UnitY();
  }
  Eigen::Vector3d t1 = seed - c.normal * c.normal.dot(seed);
  c.tangent1 = t1 / t1.norm();
  c.tangent2 = c.normal.cross(c.tangent1);
  c.friction_coeff = friction_coeff;
  validate_contact(c);
  return c;
}

}  // namespace grasplearn
