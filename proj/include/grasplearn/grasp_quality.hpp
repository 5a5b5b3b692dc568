#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

#include "grasplearn/contact.hpp"

namespace grasplearn {

/// 6 x 3m map from stacked contact-frame force components to the net object
/// wrench (force on top, moment about the center of mass below).
struct GraspMatrix {
  Eigen::MatrixXd entries{6, 0};
  int num_contacts = 0;
};

/// Singular values below tol * sigma_max count as zero.
constexpr double kRankTolerance = 1e-9;

/// Reward granted when the grasp matrix has a nontrivial null space, i.e.
/// internal squeezing forces exist.
constexpr double kGraspableReward = 0.1;

struct QualityResult {
  double graspable_reward = 0.0;          // 0 or kGraspableReward
  double q_vev = 0.0;                     // ellipsoid-volume quality
  double r_vev = 0.0;                     // normalized to [0, 1]
  int nullity = 0;                        // dim N(G)
  std::vector<double> singular_values;    // descending
};

/// Assembles G from validated contacts. Each contact contributes three
/// columns [d; p x d] for d in {normal, tangent1, tangent2}.
inline GraspMatrix build_grasp_matrix(const std::vector<Contact>& contacts) {
  GraspMatrix g;
  g.num_contacts = static_cast<int>(contacts.size());
  g.entries.resize(6, 3 * g.num_contacts);
  for (int i = 0; i < g.num_contacts; ++i) {
    const Contact& c = contacts[static_cast<std::size_t>(i)];
    validate_contact(c);
    const Eigen::Vector3d dirs[3] = {c.normal, c.tangent1, c.tangent2};
    for (int k = 0; k < 3; ++k) {
      g.entries.block<3, 1>(0, 3 * i + k) = dirs[k];
      g.entries.block<3, 1>(3, 3 * i + k) = c.position.cross(dirs[k]);
    }
  }
  return g;
}

inline std::vector<double> singular_values_of(const GraspMatrix& g) {
  if (g.entries.cols() == 0) return {};
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(g.entries);
  const auto& sv = svd.singularValues();
  return std::vector<double>(sv.data(), sv.data() + sv.size());
}

inline int count_above_tolerance(const std::vector<double>& sv, double tol) {
  if (sv.empty()) return 0;
  const double cutoff = tol * sv.front();
  return static_cast<int>(
      std::count_if(sv.begin(), sv.end(), [&](double s) { return s > cutoff; }));
}

/// Graspability from the null space of G: reward kGraspableReward when
/// N(G) != 0, otherwise 0. Returns (reward, nullity).
inline std::pair<double, int> graspable_reward(const GraspMatrix& g,
                                               double tol = kRankTolerance) {
  if (!(tol > 0.0)) throw std::invalid_argument("rank tolerance must be > 0");
  if (g.entries.cols() == 0) return {0.0, 0};
  const std::vector<double> sv = singular_values_of(g);
  const int rank = count_above_tolerance(sv, tol);
  const int nullity = static_cast<int>(g.entries.cols()) - rank;
  return {nullity > 0 ? kGraspableReward : 0.0, nullity};
}

/// Ellipsoid-volume quality: product of the above-tolerance singular values
/// of G (the pseudo-determinant form of sqrt(det(G G^T))). Returns
/// (q_vev, singular values descending).
inline std::pair<double, std::vector<double>> quality_vev(
    const GraspMatrix& g, double tol = kRankTolerance) {
  if (!(tol > 0.0)) throw std::invalid_argument("rank tolerance must be > 0");
  std::vector<double> sv = singular_values_of(g);
  if (sv.empty()) return {0.0, std::move(sv)};
  const double cutoff = tol * sv.front();
  double q = 1.0;
  for (double s : sv) {
    if (s > cutoff) q *= s;
  }
  return {q, std::move(sv)};
}

/// Supremum of q_vev over m contacts placed within max_moment_arm of the
/// center of mass. For orthonormal contact frames the force block of G G^T
/// is exactly m * I, and the moment block's spectrum is maximized by
/// radius-rho placements: a single contact attains (1 + rho^2); an
/// antipodal pair attains 2^(3/2) * 2 rho^2; for m >= 3 isotropic
/// placements attain (2 m^2 rho^2 / 3)^(3/2).
inline double max_quality_bound(int num_contacts, double max_moment_arm) {
  const double rho2 = max_moment_arm * max_moment_arm;
  if (num_contacts <= 0) return 1.0;
  if (num_contacts == 1) return 1.0 + rho2;
  if (num_contacts == 2) return std::pow(2.0, 1.5) * 2.0 * rho2;
  const double m = static_cast<double>(num_contacts);
  return std::pow(2.0 * m * m * rho2 / 3.0, 1.5);
}

/// Normalizes q_vev to [0, 1] by the analytic bound, clamped at 1.
inline double normalize_vev(double q_vev, int num_contacts,
                            double max_moment_arm) {
  if (!(max_moment_arm > 0.0)) {
    throw std::invalid_argument("max_moment_arm must be > 0");
  }
  if (num_contacts <= 0 || q_vev <= 0.0) return 0.0;
  return std::min(1.0, q_vev / max_quality_bound(num_contacts, max_moment_arm));
}

/// Convenience bundle of the quality metrics for one contact set.
inline QualityResult evaluate_quality(const std::vector<Contact>& contacts,
                                      double max_moment_arm,
                                      double tol = kRankTolerance) {
  const GraspMatrix g = build_grasp_matrix(contacts);
  QualityResult result;
  auto [q, sv] = quality_vev(g, tol);
  const int rank = count_above_tolerance(sv, tol);
  result.nullity = static_cast<int>(g.entries.cols()) - rank;
  result.graspable_reward = result.nullity > 0 ? kGraspableReward : 0.0;
  result.q_vev = g.num_contacts == 0 ? 0.0 : q;
  result.r_vev = normalize_vev(result.q_vev, g.num_contacts, max_moment_arm);
  result.singular_values = std::move(sv);
  return result;
}

}  // namespace grasplearn
