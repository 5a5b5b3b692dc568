#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "grasplearn/env.hpp"
#include "grasplearn/reward.hpp"
#include "grasplearn/td3.hpp"

namespace grasplearn {

using Json = nlohmann::json;

/// Configuration problems carry the dotted path of the offending field.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& field, const std::string& what)
      : std::runtime_error(field + ": " + what), field_(field) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

struct RunConfig {
  TaskSpec task;
  RewardConfig reward;
  Td3Config td3;
  int episodes = 1000;
  int eval_episodes = 50;
  int checkpoint_interval = 100;
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
  std::string output_dir = "runs/default";
};

namespace detail {

template <typename T>
T require(const Json& node, const std::string& section, const char* key) {
  if (!node.contains(key)) {
    throw ConfigError(section + "." + key, "missing required field");
  }
  try {
    return node.at(key).get<T>();
  } catch (const Json::exception&) {
    throw ConfigError(section + "." + key, "wrong type");
  }
}

inline const Json& require_section(const Json& root, const char* key) {
  if (!root.contains(key) || !root.at(key).is_object()) {
    throw ConfigError(key, "missing required section");
  }
  return root.at(key);
}

}  // namespace detail

inline ObjectShape object_shape_from_string(const std::string& s) {
  if (s == "cube") return ObjectShape::kCube;
  if (s == "cylinder") return ObjectShape::kCylinder;
  if (s == "polyhedron") return ObjectShape::kPolyhedron;
  throw std::invalid_argument("unknown object shape: " + s);
}

inline void validate(const TaskSpec& spec) {
  if (!(spec.object_base_size > 0.0)) {
    throw ConfigError("task.object_base_size", "must be > 0");
  }
  if (!(spec.object_scale > 0.0)) {
    throw ConfigError("task.object_scale", "must be > 0");
  }
  if (!(spec.target_height > 0.0)) {
    throw ConfigError("task.target_height", "must be > 0");
  }
  if (spec.max_steps < 1) throw ConfigError("task.max_steps", "must be >= 1");
  if (!(spec.sample_time > 0.0)) {
    throw ConfigError("task.sample_time", "must be > 0");
  }
  if (spec.friction_coeff < 0.0) {
    throw ConfigError("task.friction_coeff", "must be >= 0");
  }
  if (!(spec.object_mass > 0.0)) {
    throw ConfigError("task.object_mass", "must be > 0");
  }
}

inline TaskSpec task_from_json(const Json& node) {
  TaskSpec spec;
  spec.object_shape = object_shape_from_string(
      detail::require<std::string>(node, "task", "object_shape"));
  spec.object_scale = detail::require<double>(node, "task", "object_scale");
  spec.object_base_size =
      detail::require<double>(node, "task", "object_base_size");
  spec.target_height = detail::require<double>(node, "task", "target_height");
  spec.max_steps = detail::require<int>(node, "task", "max_steps");
  spec.sample_time = detail::require<double>(node, "task", "sample_time");
  spec.friction_coeff =
      detail::require<double>(node, "task", "friction_coeff");
  spec.object_mass = detail::require<double>(node, "task", "object_mass");
  validate(spec);
  return spec;
}

inline RewardConfig reward_from_json(const Json& node) {
  RewardConfig cfg;
  cfg.epsilon = detail::require<double>(node, "reward", "epsilon");
  cfg.alpha = detail::require<double>(node, "reward", "alpha");
  cfg.beta = detail::require<double>(node, "reward", "beta");
  cfg.graspable_weight =
      detail::require<double>(node, "reward", "graspable_weight");
  cfg.pregrasp_distance =
      detail::require<double>(node, "reward", "pregrasp_distance");
  cfg.close_penalty = detail::require<double>(node, "reward", "close_penalty");
  cfg.finger_contact_penalty =
      detail::require<double>(node, "reward", "finger_contact_penalty");
  cfg.dist_clamp_min =
      detail::require<double>(node, "reward", "dist_clamp_min");
  cfg.mode = reward_mode_from_string(
      detail::require<std::string>(node, "reward", "mode"));
  try {
    validate(cfg);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("reward", e.what());
  }
  return cfg;
}

inline Td3Config td3_from_json(const Json& node) {
  Td3Config cfg;
  cfg.discount = detail::require<double>(node, "td3", "discount");
  cfg.batch_size = detail::require<int>(node, "td3", "batch_size");
  cfg.buffer_capacity = detail::require<std::uint64_t>(node, "td3", "buffer_capacity");
  cfg.tau = detail::require<double>(node, "td3", "tau");
  cfg.learning_rate = detail::require<double>(node, "td3", "learning_rate");
  cfg.policy_delay = detail::require<int>(node, "td3", "policy_delay");
  cfg.exploration_noise_std =
      detail::require<double>(node, "td3", "exploration_noise_std");
  cfg.target_noise_std =
      detail::require<double>(node, "td3", "target_noise_std");
  cfg.target_noise_clip =
      detail::require<double>(node, "td3", "target_noise_clip");
  cfg.warmup_steps = detail::require<int>(node, "td3", "warmup_steps");
  cfg.hidden_size = detail::require<int>(node, "td3", "hidden_size");
  try {
    validate(cfg);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("td3", e.what());
  }
  return cfg;
}

inline RunConfig run_config_from_json(const Json& root) {
  RunConfig cfg;
  cfg.task = task_from_json(detail::require_section(root, "task"));
  cfg.reward = reward_from_json(detail::require_section(root, "reward"));
  cfg.td3 = td3_from_json(detail::require_section(root, "td3"));
  const Json& run = detail::require_section(root, "run");
  cfg.episodes = detail::require<int>(run, "run", "episodes");
  cfg.eval_episodes = detail::require<int>(run, "run", "eval_episodes");
  cfg.checkpoint_interval =
      detail::require<int>(run, "run", "checkpoint_interval");
  cfg.seeds = detail::require<std::vector<std::uint64_t>>(run, "run", "seeds");
  cfg.output_dir = detail::require<std::string>(run, "run", "output_dir");
  if (cfg.episodes < 1) throw ConfigError("run.episodes", "must be >= 1");
  if (cfg.eval_episodes < 1) {
    throw ConfigError("run.eval_episodes", "must be >= 1");
  }
  if (cfg.checkpoint_interval < 1) {
    throw ConfigError("run.checkpoint_interval", "must be >= 1");
  }
  if (cfg.seeds.empty()) throw ConfigError("run.seeds", "must be nonempty");
  return cfg;
}

inline RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot read " + path.string());
  Json root;
  try {
    in >> root;
  } catch (const Json::exception& e) {
    throw ConfigError("config", std::string("parse error: ") + e.what());
  }
  return run_config_from_json(root);
}

inline Json to_json(const TaskSpec& spec) {
  return Json{{"object_shape", to_string(spec.object_shape)},
              {"object_scale", spec.object_scale},
              {"object_base_size", spec.object_base_size},
              {"target_height", spec.target_height},
              {"max_steps", spec.max_steps},
              {"sample_time", spec.sample_time},
              {"friction_coeff", spec.friction_coeff},
              {"object_mass", spec.object_mass}};
}

inline Json to_json(const RewardConfig& cfg) {
  return Json{{"epsilon", cfg.epsilon},
              {"alpha", cfg.alpha},
              {"beta", cfg.beta},
              {"graspable_weight", cfg.graspable_weight},
              {"pregrasp_distance", cfg.pregrasp_distance},
              {"close_penalty", cfg.close_penalty},
              {"finger_contact_penalty", cfg.finger_contact_penalty},
              {"dist_clamp_min", cfg.dist_clamp_min},
              {"mode", to_string(cfg.mode)}};
}

inline Json to_json(const Td3Config& cfg) {
  return Json{{"discount", cfg.discount},
              {"batch_size", cfg.batch_size},
              {"buffer_capacity", cfg.buffer_capacity},
              {"tau", cfg.tau},
              {"learning_rate", cfg.learning_rate},
              {"policy_delay", cfg.policy_delay},
              {"exploration_noise_std", cfg.exploration_noise_std},
              {"target_noise_std", cfg.target_noise_std},
              {"target_noise_clip", cfg.target_noise_clip},
              {"warmup_steps", cfg.warmup_steps},
              {"hidden_size", cfg.hidden_size}};
}

inline Json to_json(const RunConfig& cfg) {
  return Json{{"task", to_json(cfg.task)},
              {"reward", to_json(cfg.reward)},
              {"td3", to_json(cfg.td3)},
              {"run",
               Json{{"episodes", cfg.episodes},
                    {"eval_episodes", cfg.eval_episodes},
                    {"checkpoint_interval", cfg.checkpoint_interval},
                    {"seeds", cfg.seeds},
                    {"output_dir", cfg.output_dir}}}};
}

/// FNV-1a over the canonical (sorted-key) JSON dump.
inline std::uint64_t fnv1a_hash(const std::string& text) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

inline std::string hash_hex(std::uint64_t h) {
  std::ostringstream os;
  os << std::hex << h;
  return os.str();
}

/// Hash of the full run configuration.
inline std::string config_hash(const RunConfig& cfg) {
  return hash_hex(fnv1a_hash(to_json(cfg).dump()));
}

/// Hash of the parts shared across reward modes (task, learner, budgets);
/// artifacts with different protocol hashes must not be compared.
inline std::string protocol_hash(const RunConfig& cfg) {
  Json j{{"task", to_json(cfg.task)},
         {"td3", to_json(cfg.td3)},
         {"episodes", cfg.episodes},
         {"eval_episodes", cfg.eval_episodes},
         {"checkpoint_interval", cfg.checkpoint_interval},
         {"seeds", cfg.seeds}};
  return hash_hex(fnv1a_hash(j.dump()));
}

}  // namespace grasplearn
