#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "grasplearn/config.hpp"
#include "grasplearn/env.hpp"
#include "grasplearn/grasp_quality.hpp"
#include "grasplearn/reward.hpp"
#include "grasplearn/td3.hpp"
#include "grasplearn/trace.hpp"

namespace grasplearn {

/// Success: the object-center height stays within 1 cm of the target over
/// the final 10 steps of the episode.
inline constexpr double kSuccessHeightTolerance = 0.01;
inline constexpr int kSuccessHoldSteps = 10;

/// Deterministic evaluation probes run at every checkpoint during training.
inline constexpr int kSnapshotEpisodes = 5;

struct EpisodeResult {
  double total_reward = 0.0;
  bool success = false;
  int first_lambda = -1;
  int first_mu = -1;
  int first_v = -1;
  bool gate_chain_ok = true;
  int steps = 0;
  // Eq (11)/(12)-style metrics averaged over the final kSuccessHoldSteps.
  double height_error = 0.0;
  double dist_obj_hand = 0.0;
  double grasp_quality = 0.0;
};

/// Runs one full episode. policy maps (observation, step index) to an
/// action; on_step sees every transition for logging or replay insertion.
template <typename Policy, typename StepHook>
EpisodeResult run_episode(GraspEnv& env, std::uint64_t episode_seed,
                          const RewardConfig& reward_cfg, Policy&& policy,
                          StepHook&& on_step) {
  env.reset(episode_seed);
  const double target_z = env.target_center_height();
  const double rho = env.geometry().circumscribed_radius();
  EpisodeResult result;
  int hold_streak = 0;
  double tail_height_error = 0.0;
  double tail_dist = 0.0;
  double tail_quality = 0.0;
  int tail_count = 0;
  const int tail_start = env.spec().max_steps - kSuccessHoldSteps;

  while (!env.done()) {
    const Observation obs = env.observation();
    const int step_index = env.state().step_index;
    const Action action = policy(obs, step_index);
    const auto outcome = env.step(action);
    const EnvState& state = env.state();
    const QualityResult quality = evaluate_quality(state.contacts, rho);
    const RewardBreakdown breakdown =
        step_reward(state, action, quality, reward_cfg, target_z);
    if (!std::isfinite(breakdown.total)) {
      throw std::runtime_error("non-finite reward at step " +
                               std::to_string(step_index));
    }
    result.total_reward += breakdown.total;
    if (breakdown.gates.lambda == 1 && result.first_lambda < 0) {
      result.first_lambda = step_index;
    }
    if (breakdown.gates.mu == 1 && result.first_mu < 0) {
      result.first_mu = step_index;
    }
    if (breakdown.gates.v == 1 && result.first_v < 0) {
      result.first_v = step_index;
    }
    if (breakdown.gates.v > breakdown.gates.mu ||
        breakdown.gates.mu > breakdown.gates.lambda) {
      result.gate_chain_ok = false;
    }
    const double height_error = std::abs(target_z - state.object_height);
    hold_streak = height_error <= kSuccessHeightTolerance ? hold_streak + 1 : 0;
    if (step_index >= tail_start) {
      tail_height_error += height_error;
      tail_dist += state.dist_obj_hand;
      tail_quality += quality.q_vev;
      ++tail_count;
    }
    on_step(step_index, obs, action, outcome.observation, breakdown, state);
    result.steps = step_index + 1;
  }
  result.success = hold_streak >= kSuccessHoldSteps;
  if (tail_count > 0) {
    result.height_error = tail_height_error / tail_count;
    result.dist_obj_hand = tail_dist / tail_count;
    result.grasp_quality = tail_quality / tail_count;
  }
  return result;
}

/// Deterministic-policy rollout (no exploration noise, no learning).
inline EpisodeResult evaluate_episode(GraspEnv& env, std::uint64_t episode_seed,
                                      const RewardConfig& reward_cfg,
                                      Td3Agent& agent) {
  return run_episode(
      env, episode_seed, reward_cfg,
      [&](const Observation& obs, int) {
        return Action::from_vector(agent.select_action(obs, 0.0));
      },
      [](int, const Observation&, const Action&, const Observation&,
         const RewardBreakdown&, const EnvState&) {});
}

struct TrainPaths {
  std::filesystem::path run_dir;
  std::filesystem::path trainlog;
  std::filesystem::path snapshots;
  std::filesystem::path manifest;
  std::vector<std::filesystem::path> checkpoints;
};

struct EpisodeLogRow {
  int episode;
  EpisodeResult result;
};

struct TrainOutcome {
  std::vector<EpisodeLogRow> episodes;
  TrainPaths paths;
};

inline std::string checkpoint_name(int episode) {
  std::ostringstream os;
  os << "checkpoint_ep" << std::setfill('0') << std::setw(6) << episode
     << ".net";
  return os.str();
}

/// Trains one seed of one reward mode and persists the run: per-episode
/// training log, deterministic evaluation snapshots at every checkpoint,
/// checkpoints in the network format, and a manifest binding everything to
/// the configuration hash.
inline TrainOutcome train_grasp_policy(
    const RunConfig& config, RewardMode mode, std::uint64_t seed,
    const std::filesystem::path& run_dir,
    const std::function<void(int, const EpisodeResult&)>& on_episode = {}) {
  namespace fs = std::filesystem;
  RewardConfig reward_cfg = config.reward;
  reward_cfg.mode = mode;
  TaskSpec task = config.task;
  task.seed = seed;
  Td3Config td3_cfg = config.td3;
  td3_cfg.seed = seed;

  fs::create_directories(run_dir);
  TrainOutcome outcome;
  outcome.paths.run_dir = run_dir;
  outcome.paths.trainlog = run_dir / "trainlog.csv";
  outcome.paths.snapshots = run_dir / "eval_snapshots.csv";
  outcome.paths.manifest = run_dir / "manifest.json";

  GraspEnv env(task);
  GraspEnv snapshot_env(task);
  Td3Agent agent(kObservationSize, kActionSize, td3_cfg);

  CsvWriter trainlog(outcome.paths.trainlog,
                     {"episode", "total_reward", "success", "first_lambda",
                      "first_mu", "first_v", "gate_chain_ok", "steps"});
  CsvWriter snapshots(outcome.paths.snapshots,
                      {"episode", "mean_return", "successes", "episodes"});

  long long total_steps = 0;
  const auto policy = [&](const Observation& obs, int) {
    if (total_steps < td3_cfg.warmup_steps) {
      return Action::from_vector(agent.random_action());
    }
    return Action::from_vector(
        agent.select_action(obs, td3_cfg.exploration_noise_std));
  };

  const auto learn_hook = [&](int, const Observation& obs, const Action& action,
                              const Observation& next_obs,
                              const RewardBreakdown& breakdown,
                              const EnvState&) {
    Transition t;
    t.state = obs;
    t.action = action.to_vector();
    t.reward = breakdown.total;
    t.next_state = next_obs;
    t.done = false;  // episodes end by the step limit; bootstrap through it
    agent.buffer().push(std::move(t));
    total_steps += 1;
    if (total_steps >= td3_cfg.warmup_steps && agent.can_update()) {
      const auto stats = agent.update();
      if (!std::isfinite(stats.critic.critic1_loss) ||
          !std::isfinite(stats.critic.critic2_loss)) {
        throw std::runtime_error("non-finite critic loss; aborting run");
      }
    }
  };

  const auto write_snapshot = [&](int episode) {
    double mean_return = 0.0;
    int successes = 0;
    for (int i = 0; i < kSnapshotEpisodes; ++i) {
      const EpisodeResult r = evaluate_episode(
          snapshot_env,
          0x5eed0000ULL + static_cast<std::uint64_t>(i), reward_cfg, agent);
      mean_return += r.total_reward;
      successes += r.success ? 1 : 0;
    }
    mean_return /= kSnapshotEpisodes;
    snapshots.row({std::to_string(episode), format_double(mean_return),
                   std::to_string(successes),
                   std::to_string(kSnapshotEpisodes)});
  };

  const auto write_checkpoint = [&](int episode) {
    const fs::path path = run_dir / checkpoint_name(episode);
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + path.string());
    agent.save(os);
    os.close();
    Json manifest{{"config_hash", config_hash(config)},
                  {"protocol_hash", protocol_hash(config)},
                  {"mode", to_string(mode)},
                  {"seed", seed},
                  {"episode", episode},
                  {"hidden_size", td3_cfg.hidden_size},
                  {"rng_state", agent.rng().save_state()}};
    std::ofstream ms(path.string() + ".json");
    ms << manifest.dump(2) << "\n";
    outcome.paths.checkpoints.push_back(path);
  };

  for (int episode = 1; episode <= config.episodes; ++episode) {
    const EpisodeResult result =
        run_episode(env, static_cast<std::uint64_t>(episode - 1), reward_cfg,
                    policy, learn_hook);
    trainlog.row({std::to_string(episode), format_double(result.total_reward),
                  std::to_string(result.success ? 1 : 0),
                  std::to_string(result.first_lambda),
                  std::to_string(result.first_mu),
                  std::to_string(result.first_v),
                  std::to_string(result.gate_chain_ok ? 1 : 0),
                  std::to_string(result.steps)});
    outcome.episodes.push_back({episode, result});
    if (on_episode) on_episode(episode, result);
    if (episode % config.checkpoint_interval == 0 ||
        episode == config.episodes) {
      write_snapshot(episode);
      write_checkpoint(episode);
    }
  }
  trainlog.flush();
  snapshots.flush();

  Json manifest{{"config", to_json(config)},
                {"config_hash", config_hash(config)},
                {"protocol_hash", protocol_hash(config)},
                {"mode", to_string(mode)},
                {"seed", seed},
                {"episodes", config.episodes},
                {"final_rng_state", agent.rng().save_state()}};
  std::ofstream ms(outcome.paths.manifest);
  ms << manifest.dump(2) << "\n";
  return outcome;
}

}  // namespace grasplearn
