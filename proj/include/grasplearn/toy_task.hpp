#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <vector>

#include "grasplearn/rng.hpp"
#include "grasplearn/td3.hpp"

namespace grasplearn {

/// Built-in 1-DOF reach task used as a fast learning sanity check for the
/// TD3 stack: the agent observes its scalar position, moves it by
/// 0.1 * action per step, and earns exp(-10 |position|) per step over a
/// 50-step episode. Random policies collect a small return; a policy that
/// homes in on the origin collects close to the step count.
struct ToyReachTask {
  static constexpr int kEpisodeSteps = 50;
  static constexpr double kStepGain = 0.1;

  double position = 0.0;
  int step_index = 0;

  void reset(Rng& rng) {
    position = rng.uniform(-1.0, 1.0);
    step_index = 0;
  }

  double step(double action) {
    position += kStepGain * std::clamp(action, -1.0, 1.0);
    position = std::clamp(position, -2.0, 2.0);
    step_index += 1;
    return std::exp(-10.0 * std::abs(position));
  }

  bool done() const { return step_index >= kEpisodeSteps; }
};

struct ToyTrainResult {
  std::vector<double> episode_returns;
};

inline Td3Config toy_td3_config(std::uint64_t seed) {
  Td3Config cfg;
  cfg.batch_size = 64;
  cfg.buffer_capacity = 20000;
  cfg.hidden_size = 32;
  cfg.warmup_steps = 500;
  cfg.seed = seed;
  return cfg;
}

inline ToyTrainResult train_toy_reach(std::uint64_t seed, int episodes = 200) {
  const Td3Config cfg = toy_td3_config(seed);
  Td3Agent agent(1, 1, cfg);
  Rng env_rng = Rng::derive(seed, 0x707);
  ToyReachTask task;
  ToyTrainResult result;
  long long total_steps = 0;
  for (int episode = 0; episode < episodes; ++episode) {
    task.reset(env_rng);
    double episode_return = 0.0;
    while (!task.done()) {
      Eigen::VectorXd obs(1);
      obs << task.position;
      Eigen::VectorXd action =
          total_steps < cfg.warmup_steps
              ? agent.random_action()
              : agent.select_action(obs, cfg.exploration_noise_std);
      const double reward = task.step(action[0]);
      episode_return += reward;
      Eigen::VectorXd next_obs(1);
      next_obs << task.position;
      agent.buffer().push(
          Transition{obs, action, reward, next_obs, false});
      total_steps += 1;
      if (total_steps >= cfg.warmup_steps && agent.can_update()) {
        agent.update();
      }
    }
    result.episode_returns.push_back(episode_return);
  }
  return result;
}

}  // namespace grasplearn
