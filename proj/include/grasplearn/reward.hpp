#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

#include "grasplearn/env.hpp"
#include "grasplearn/grasp_quality.hpp"

namespace grasplearn {

/// The three reward compositions under comparison: the gated three-stage
/// reward, the task-terms-only baseline, and the ungated linear sum of all
/// components.
enum class RewardMode { kHierarchical, kTaskOnly, kLinearSummed };

inline const char* to_string(RewardMode m) {
  switch (m) {
    case RewardMode::kHierarchical: return "hierarchical";
    case RewardMode::kTaskOnly: return "task-only";
    case RewardMode::kLinearSummed: return "linear-summed";
  }
  return "?";
}

inline RewardMode reward_mode_from_string(const std::string& s) {
  if (s == "hierarchical") return RewardMode::kHierarchical;
  if (s == "task-only" || s == "task_only") return RewardMode::kTaskOnly;
  if (s == "linear-summed" || s == "linear_summed") {
    return RewardMode::kLinearSummed;
  }
  throw std::invalid_argument("unknown reward mode: " + s);
}

struct RewardConfig {
  double epsilon = 10.0;            // distance penalty weight
  double alpha = 30.0;              // lift reward weight
  double beta = 0.05;               // maximum height error, m
  double graspable_weight = 0.1;    // bonus when the grasp has internal forces
  double pregrasp_distance = 0.05;  // m, "close enough" gate threshold
  double close_penalty = -0.02;     // closing fingers while far
  double finger_contact_penalty = -0.02;  // fingers touching each other
  double dist_clamp_min = 0.02;     // m, clamp for the 1/d exponential
  RewardMode mode = RewardMode::kHierarchical;
};

inline void validate(const RewardConfig& cfg) {
  if (!(cfg.epsilon > 0.0)) throw std::invalid_argument("reward.epsilon must be > 0");
  if (!(cfg.alpha > 0.0)) throw std::invalid_argument("reward.alpha must be > 0");
  if (!(cfg.beta > 0.0)) throw std::invalid_argument("reward.beta must be > 0");
  if (cfg.close_penalty > 0.0 || cfg.finger_contact_penalty > 0.0) {
    throw std::invalid_argument("reward penalties must be <= 0");
  }
  if (!(cfg.pregrasp_distance > 0.0)) {
    throw std::invalid_argument("reward.pregrasp_distance must be > 0");
  }
  if (!(cfg.dist_clamp_min > 0.0)) {
    throw std::invalid_argument("reward.dist_clamp_min must be > 0");
  }
}

/// Binary hierarchy coefficients and the conditions that produced them.
/// The chain mu <= lambda and v <= mu holds by construction.
struct GateState {
  int lambda = 0;
  int mu = 0;
  int v = 0;
  bool cond1_pregrasp = false;
  bool cond2_graspable = false;
  bool cond3_contact_forces = false;
};

struct RewardBreakdown {
  double p_target = 0.0;
  double p_close = 0.0;
  double p_finger_contact = 0.0;
  double r_dist = 0.0;
  double r_graspable = 0.0;
  double r_vev = 0.0;
  double r_obj_height = 0.0;
  GateState gates;
  double total = 0.0;
};

/// Approach-stage penalty, -epsilon * dist.
inline double p_target(double dist_obj_hand, double epsilon) {
  if (dist_obj_hand < 0.0) throw std::invalid_argument("distance must be >= 0");
  return -(epsilon * dist_obj_hand);
}

/// Pre-grasp proximity reward exp(0.1 / d), clamped below at dist_clamp_min
/// and normalized by its value at the clamp point so the result lies in
/// (0, 1] and peaks at contact range.
inline double r_dist(double dist_obj_hand, double dist_clamp_min) {
  if (dist_obj_hand < 0.0) throw std::invalid_argument("distance must be >= 0");
  const double d = std::max(dist_obj_hand, dist_clamp_min);
  return std::exp(0.1 / d) / std::exp(0.1 / dist_clamp_min);
}

/// Lift-stage reward alpha * |beta - error|, with the height error capped at
/// beta so the value stays in [0, alpha * beta].
inline double r_obj_height(double object_height, double target_height,
                           double alpha, double beta) {
  const double error = std::min(std::abs(target_height - object_height), beta);
  return alpha * std::abs(beta - error);
}

/// Grasp-stage gate evaluation. Condition 1: the hand is within the
/// pre-grasp distance. Condition 2: the contact set has internal forces
/// (graspable null space, at least two contacts). Condition 3: positive
/// ellipsoid-volume quality.
inline GateState evaluate_gates(const EnvState& state,
                                const QualityResult& quality,
                                const RewardConfig& cfg) {
  GateState g;
  g.cond1_pregrasp = state.dist_obj_hand < cfg.pregrasp_distance;
  g.cond2_graspable =
      quality.nullity > 0 && static_cast<int>(state.contacts.size()) >= 2;
  g.cond3_contact_forces = quality.r_vev > 0.0;
  g.lambda = g.cond1_pregrasp ? 1 : 0;
  g.mu = g.lambda * (g.cond2_graspable ? 1 : 0);
  g.v = g.lambda * g.mu * (g.cond3_contact_forces ? 1 : 0);
  return g;
}

/// Recomputes the total from stored components under the mode's formula.
/// step_reward() uses exactly this, so logged breakdowns reconstruct
/// bitwise.
inline double reward_total(const RewardBreakdown& b, const RewardConfig& cfg) {
  switch (cfg.mode) {
    case RewardMode::kHierarchical:
      return b.p_target + b.p_close + b.p_finger_contact +
             b.gates.lambda * b.r_dist + b.gates.mu * cfg.graspable_weight +
             b.gates.v * b.r_vev + b.r_obj_height;
    case RewardMode::kTaskOnly:
      return b.p_target + b.r_obj_height;
    case RewardMode::kLinearSummed:
      return b.p_target + b.p_close + b.p_finger_contact + b.r_dist +
             b.r_graspable + b.r_vev + b.r_obj_height;
  }
  throw std::invalid_argument("unknown reward mode");
}

/// Per-step reward under the configured mode. target_center_height is the
/// absolute object-center height the lift aims for; the action supplies the
/// finger commands checked by the closing constraint.
inline RewardBreakdown step_reward(const EnvState& state, const Action& action,
                                   const QualityResult& quality,
                                   const RewardConfig& cfg,
                                   double target_center_height) {
  RewardBreakdown b;
  b.p_target = p_target(state.dist_obj_hand, cfg.epsilon);
  const bool closing =
      action.finger_velocity_commands.maxCoeff() > 0.0 &&
      state.dist_obj_hand >= cfg.pregrasp_distance;
  b.p_close = closing ? cfg.close_penalty : 0.0;
  b.p_finger_contact =
      state.inter_finger_contact ? cfg.finger_contact_penalty : 0.0;
  b.r_dist = r_dist(state.dist_obj_hand, cfg.dist_clamp_min);
  b.r_graspable = quality.graspable_reward;
  b.r_vev = quality.r_vev;
  b.r_obj_height =
      r_obj_height(state.object_height, target_center_height, cfg.alpha, cfg.beta);
  b.gates = evaluate_gates(state, quality, cfg);
  if (cfg.mode == RewardMode::kLinearSummed) {
    b.gates.lambda = 1;
    b.gates.mu = 1;
    b.gates.v = 1;
  }
  b.total = reward_total(b, cfg);
  return b;
}

}  // namespace grasplearn
