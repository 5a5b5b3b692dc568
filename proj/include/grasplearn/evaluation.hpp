#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "grasplearn/config.hpp"
#include "grasplearn/trainer.hpp"

namespace grasplearn {

/// Episode-seed streams are partitioned so training (episode index),
/// snapshot probes, and evaluation never share a stream.
inline constexpr std::uint64_t kEvalSeedBase = 0xE0000000ULL;

struct EvalEpisodeRow {
  int episode = 0;
  bool success = false;
  double height_error = 0.0;
  double dist_obj_hand = 0.0;
  double grasp_quality = 0.0;
  double total_reward = 0.0;
};

struct EvalCell {
  RewardMode mode = RewardMode::kHierarchical;
  std::uint64_t seed = 0;
  ObjectShape shape = ObjectShape::kCube;
  double scale = 1.0;
  int checkpoint_episode = 0;
  std::vector<EvalEpisodeRow> episodes;

  double success_rate_percent() const {
    if (episodes.empty()) return 0.0;
    int n = 0;
    for (const auto& e : episodes) n += e.success ? 1 : 0;
    return 100.0 * n / static_cast<double>(episodes.size());
  }
  double mean(double EvalEpisodeRow::* field) const {
    if (episodes.empty()) return 0.0;
    double s = 0.0;
    for (const auto& e : episodes) s += e.*field;
    return s / static_cast<double>(episodes.size());
  }
};

inline std::string scale_tag(double scale) {
  std::ostringstream os;
  os << scale;
  std::string s = os.str();
  for (auto& c : s) {
    if (c == '.') c = 'p';
  }
  return s;
}

inline std::filesystem::path train_run_dir(const std::filesystem::path& out,
                                           RewardMode mode,
                                           std::uint64_t seed) {
  return out / to_string(mode) / ("seed" + std::to_string(seed));
}

/// Loads an agent from a checkpoint, validating the sidecar manifest against
/// the run configuration before trusting the weights.
inline Td3Agent load_checkpoint_agent(const RunConfig& config,
                                      const std::filesystem::path& checkpoint) {
  const std::filesystem::path manifest_path = checkpoint.string() + ".json";
  std::ifstream ms(manifest_path);
  if (!ms) {
    throw std::runtime_error("missing checkpoint manifest " +
                             manifest_path.string());
  }
  Json manifest;
  ms >> manifest;
  if (manifest.at("protocol_hash").get<std::string>() !=
      protocol_hash(config)) {
    throw std::runtime_error(
        "checkpoint " + checkpoint.string() +
        " was produced under a different protocol configuration; refusing");
  }
  if (manifest.at("hidden_size").get<int>() != config.td3.hidden_size) {
    throw std::runtime_error("checkpoint architecture mismatch (hidden size)");
  }
  Td3Agent agent(kObservationSize, kActionSize, config.td3);
  std::ifstream is(checkpoint, std::ios::binary);
  if (!is) throw std::runtime_error("cannot read " + checkpoint.string());
  agent.load(is);
  return agent;
}

/// Deterministic evaluation of one checkpoint on one (shape, scale) cell.
inline EvalCell evaluate_cell(const RunConfig& config, RewardMode mode,
                              std::uint64_t seed, int checkpoint_episode,
                              ObjectShape shape, double scale, int episodes) {
  const std::filesystem::path checkpoint =
      train_run_dir(config.output_dir, mode, seed) /
      checkpoint_name(checkpoint_episode);
  Td3Agent agent = load_checkpoint_agent(config, checkpoint);

  TaskSpec task = config.task;
  task.object_shape = shape;
  task.object_scale = scale;
  task.seed = seed;
  GraspEnv env(task);
  RewardConfig reward_cfg = config.reward;
  reward_cfg.mode = mode;

  EvalCell cell;
  cell.mode = mode;
  cell.seed = seed;
  cell.shape = shape;
  cell.scale = scale;
  cell.checkpoint_episode = checkpoint_episode;
  const std::uint64_t cell_base =
      kEvalSeedBase +
      fnv1a_hash(std::string(to_string(shape)) + scale_tag(scale)) % 0xFFFFF;
  for (int i = 0; i < episodes; ++i) {
    const EpisodeResult r = evaluate_episode(
        env, cell_base + static_cast<std::uint64_t>(i), reward_cfg, agent);
    EvalEpisodeRow row;
    row.episode = i;
    row.success = r.success;
    row.height_error = r.height_error;
    row.dist_obj_hand = r.dist_obj_hand;
    row.grasp_quality = r.grasp_quality;
    row.total_reward = r.total_reward;
    cell.episodes.push_back(row);
  }
  return cell;
}

inline void write_eval_cell_csv(const EvalCell& cell,
                                const std::filesystem::path& path) {
  CsvWriter csv(path, {"episode", "success", "height_error", "dist_obj_hand",
                       "grasp_quality", "total_reward"});
  for (const auto& e : cell.episodes) {
    csv.row({std::to_string(e.episode), std::to_string(e.success ? 1 : 0),
             format_double(e.height_error), format_double(e.dist_obj_hand),
             format_double(e.grasp_quality), format_double(e.total_reward)});
  }
}

inline std::filesystem::path eval_cell_csv_path(
    const std::filesystem::path& eval_dir, RewardMode mode, std::uint64_t seed,
    ObjectShape shape, double scale, int checkpoint_episode) {
  std::ostringstream name;
  name << to_string(mode) << "_seed" << seed << "_" << to_string(shape) << "_"
       << scale_tag(scale) << "_ep" << checkpoint_episode << ".csv";
  return eval_dir / name.str();
}

struct EvalRequest {
  std::vector<RewardMode> modes;
  std::vector<std::uint64_t> seeds;
  std::vector<ObjectShape> shapes = {ObjectShape::kCube, ObjectShape::kCylinder,
                                     ObjectShape::kPolyhedron};
  std::vector<double> scales = {0.9, 1.0, 1.1};
  int checkpoint_episode = 0;  // 0: use config.episodes
  int episodes = 0;            // 0: use config.eval_episodes
  int workers = 2;
};

struct EvalReport {
  std::vector<EvalCell> cells;

  Json to_json_report(const RunConfig& config) const {
    Json aggregates = Json::array();
    // Aggregate across seeds per (mode, shape, scale).
    for (const auto& probe : cells) {
      bool already = false;
      for (const auto& agg : aggregates) {
        if (agg.at("mode") == to_string(probe.mode) &&
            agg.at("shape") == to_string(probe.shape) &&
            agg.at("scale") == probe.scale) {
          already = true;
          break;
        }
      }
      if (already) continue;
      int successes = 0;
      int episodes = 0;
      double height = 0.0;
      double dist = 0.0;
      double quality = 0.0;
      Json per_seed = Json::array();
      for (const auto& cell : cells) {
        if (cell.mode != probe.mode || cell.shape != probe.shape ||
            cell.scale != probe.scale) {
          continue;
        }
        int cell_successes = 0;
        for (const auto& e : cell.episodes) {
          cell_successes += e.success ? 1 : 0;
          height += e.height_error;
          dist += e.dist_obj_hand;
          quality += e.grasp_quality;
        }
        successes += cell_successes;
        episodes += static_cast<int>(cell.episodes.size());
        per_seed.push_back(Json{{"seed", cell.seed},
                                {"successes", cell_successes},
                                {"episodes", cell.episodes.size()},
                                {"success_rate_percent",
                                 cell.success_rate_percent()}});
      }
      aggregates.push_back(Json{
          {"mode", to_string(probe.mode)},
          {"shape", to_string(probe.shape)},
          {"scale", probe.scale},
          {"checkpoint_episode", probe.checkpoint_episode},
          {"episodes", episodes},
          {"successes", successes},
          {"success_rate_percent",
           episodes ? 100.0 * successes / episodes : 0.0},
          {"mean_height_error", episodes ? height / episodes : 0.0},
          {"mean_dist_obj_hand", episodes ? dist / episodes : 0.0},
          {"mean_grasp_quality", episodes ? quality / episodes : 0.0},
          {"per_seed", per_seed}});
    }
    return Json{{"config_hash", config_hash(config)},
                {"protocol_hash", protocol_hash(config)},
                {"cells", aggregates}};
  }
};

/// Evaluates checkpoints over the (mode, seed, shape, scale) grid with a
/// small worker pool. Each cell is independent and internally deterministic;
/// results land in preassigned slots so the report order is stable.
inline EvalReport run_evaluation(const RunConfig& config,
                                 const EvalRequest& request) {
  namespace fs = std::filesystem;
  const int checkpoint_episode = request.checkpoint_episode > 0
                                     ? request.checkpoint_episode
                                     : config.episodes;
  const int episodes =
      request.episodes > 0 ? request.episodes : config.eval_episodes;

  struct Job {
    RewardMode mode;
    std::uint64_t seed;
    ObjectShape shape;
    double scale;
  };
  std::vector<Job> jobs;
  for (RewardMode mode : request.modes) {
    for (std::uint64_t seed : request.seeds) {
      for (ObjectShape shape : request.shapes) {
        for (double scale : request.scales) {
          jobs.push_back({mode, seed, shape, scale});
        }
      }
    }
  }

  EvalReport report;
  report.cells.resize(jobs.size());
  std::mutex fail_mutex;
  std::string failure;
  std::size_t next_job = 0;
  std::mutex job_mutex;
  auto worker = [&]() {
    for (;;) {
      std::size_t index;
      {
        std::lock_guard<std::mutex> lock(job_mutex);
        if (next_job >= jobs.size() || !failure.empty()) return;
        index = next_job++;
      }
      const Job& job = jobs[index];
      try {
        report.cells[index] =
            evaluate_cell(config, job.mode, job.seed, checkpoint_episode,
                          job.shape, job.scale, episodes);
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(fail_mutex);
        if (failure.empty()) failure = e.what();
        return;
      }
    }
  };
  const int worker_count =
      std::max(1, std::min<int>(request.workers,
                                static_cast<int>(jobs.size())));
  std::vector<std::thread> pool;
  for (int w = 0; w < worker_count; ++w) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (!failure.empty()) throw std::runtime_error(failure);

  const fs::path eval_dir = fs::path(config.output_dir) / "eval";
  fs::create_directories(eval_dir);
  for (const auto& cell : report.cells) {
    write_eval_cell_csv(
        cell, eval_cell_csv_path(eval_dir, cell.mode, cell.seed, cell.shape,
                                 cell.scale, cell.checkpoint_episode));
  }
  std::ofstream rs(eval_dir / "report.json");
  rs << report.to_json_report(config).dump(2) << "\n";
  return report;
}

}  // namespace grasplearn
