#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "grasplearn/contact.hpp"
#include "grasplearn/grasp_quality.hpp"
#include "grasplearn/nnls.hpp"

namespace grasplearn {

inline constexpr double kGravity = 9.81;                // m/s^2
inline constexpr int kFrictionPyramidEdges = 8;
inline constexpr double kContactForceCap = 10.0;        // N of normal force
inline constexpr double kHoldResidualTolerance = 1e-6;  // relative

/// Per-contact friction pyramid edges expressed in contact-frame force
/// coordinates (normal, tangent1, tangent2). Each edge carries unit normal
/// force, so the sum of edge coefficients is the contact's normal force.
inline Eigen::Matrix<double, 3, kFrictionPyramidEdges> friction_pyramid_edges(
    double friction_coeff) {
  Eigen::Matrix<double, 3, kFrictionPyramidEdges> edges;
  for (int k = 0; k < kFrictionPyramidEdges; ++k) {
    const double theta = 2.0 * M_PI * k / kFrictionPyramidEdges;
    edges(0, k) = 1.0;
    edges(1, k) = friction_coeff * std::cos(theta);
    edges(2, k) = friction_coeff * std::sin(theta);
  }
  return edges;
}

struct HoldSolution {
  bool holds = false;
  Eigen::VectorXd edge_forces;          // nonnegative pyramid coefficients
  double residual = 0.0;                // ||G E x + w_gravity||
  std::vector<double> normal_forces;    // per contact
};

/// Quasi-static hold test: can nonnegative pyramid-edge forces cancel the
/// object's gravity wrench? gravity is the acceleration vector expressed in
/// the object frame (moments are taken about the center of mass, so gravity
/// contributes no torque).
inline HoldSolution solve_hold(const std::vector<Contact>& contacts,
                               double object_mass,
                               const Eigen::Vector3d& gravity,
                               double friction_coeff,
                               double force_cap = kContactForceCap) {
  HoldSolution out;
  if (contacts.empty()) return out;

  const GraspMatrix g = build_grasp_matrix(contacts);
  const int m = g.num_contacts;
  Eigen::MatrixXd ge(6, m * kFrictionPyramidEdges);
  const auto edges = friction_pyramid_edges(friction_coeff);
  for (int i = 0; i < m; ++i) {
    ge.block(0, i * kFrictionPyramidEdges, 6, kFrictionPyramidEdges) =
        g.entries.block(0, 3 * i, 6, 3) * edges;
  }

  Eigen::Matrix<double, 6, 1> gravity_wrench;
  gravity_wrench << object_mass * gravity, Eigen::Vector3d::Zero();

  const NnlsResult solution = nnls(ge, -gravity_wrench);
  out.edge_forces = solution.x;
  out.residual = solution.residual_norm;

  out.normal_forces.resize(static_cast<std::size_t>(m), 0.0);
  bool within_cap = true;
  for (int i = 0; i < m; ++i) {
    const double fn = solution.x
                          .segment(i * kFrictionPyramidEdges,
                                   kFrictionPyramidEdges)
                          .sum();
    out.normal_forces[static_cast<std::size_t>(i)] = fn;
    if (fn > force_cap) within_cap = false;
  }

  const double w_norm = gravity_wrench.norm();
  out.holds =
      within_cap && out.residual <= kHoldResidualTolerance * std::max(w_norm, 1e-12);
  return out;
}

inline bool hold_check(const std::vector<Contact>& contacts, double object_mass,
                       const Eigen::Vector3d& gravity, double friction_coeff) {
  return solve_hold(contacts, object_mass, gravity, friction_coeff).holds;
}

}  // namespace grasplearn
