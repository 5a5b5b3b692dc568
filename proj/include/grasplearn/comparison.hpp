#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "grasplearn/config.hpp"
#include "grasplearn/evaluation.hpp"
#include "grasplearn/stats.hpp"
#include "grasplearn/trace.hpp"

namespace grasplearn {

inline constexpr int kRewardSmoothingWindow = 20;

struct ModeCurve {
  RewardMode mode = RewardMode::kHierarchical;
  std::vector<double> mean;  // across seeds, per episode
  std::vector<double> stddev;
};

/// Trailing moving average over at most kRewardSmoothingWindow episodes.
inline std::vector<double> smooth(const std::vector<double>& xs, int window) {
  std::vector<double> out(xs.size(), 0.0);
  double acc = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    acc += xs[i];
    if (i >= static_cast<std::size_t>(window)) {
      acc -= xs[i - static_cast<std::size_t>(window)];
    }
    const double n = std::min<std::size_t>(i + 1, static_cast<std::size_t>(window));
    out[i] = acc / static_cast<double>(n);
  }
  return out;
}

/// Per-episode training rewards for one mode, one row per seed. Runs whose
/// manifest carries a different protocol hash are refused.
inline std::vector<std::vector<double>> load_mode_rewards(
    const RunConfig& config, RewardMode mode) {
  std::vector<std::vector<double>> per_seed;
  for (std::uint64_t seed : config.seeds) {
    const auto dir = train_run_dir(config.output_dir, mode, seed);
    std::ifstream ms(dir / "manifest.json");
    if (ms) {
      Json manifest;
      ms >> manifest;
      if (manifest.value("protocol_hash", "") != protocol_hash(config)) {
        throw std::runtime_error(
            "run " + dir.string() +
            " was produced under a different protocol configuration; refusing");
      }
    }
    const auto path = dir / "trainlog.csv";
    const CsvTable log = read_csv(path);
    const int col = log.column("total_reward");
    std::vector<double> rewards;
    rewards.reserve(log.rows.size());
    for (std::size_t i = 0; i < log.rows.size(); ++i) {
      rewards.push_back(log.number(i, col));
    }
    per_seed.push_back(std::move(rewards));
  }
  return per_seed;
}

inline ModeCurve mode_curve(RewardMode mode,
                            const std::vector<std::vector<double>>& per_seed) {
  ModeCurve curve;
  curve.mode = mode;
  if (per_seed.empty()) return curve;
  const std::size_t episodes = per_seed.front().size();
  for (const auto& s : per_seed) {
    if (s.size() != episodes) {
      throw std::runtime_error("episode budgets differ across seeds; refusing");
    }
  }
  curve.mean.resize(episodes, 0.0);
  curve.stddev.resize(episodes, 0.0);
  for (std::size_t e = 0; e < episodes; ++e) {
    double m = 0.0;
    for (const auto& s : per_seed) m += s[e];
    m /= static_cast<double>(per_seed.size());
    double var = 0.0;
    for (const auto& s : per_seed) var += (s[e] - m) * (s[e] - m);
    curve.mean[e] = m;
    curve.stddev[e] = per_seed.size() > 1
                          ? std::sqrt(var / static_cast<double>(per_seed.size() - 1))
                          : 0.0;
  }
  return curve;
}

/// Fraction of the mode's own maximum smoothed mean reward reached at the
/// given episode checkpoint. Rewards can be negative, so the fraction is
/// measured above the curve's own minimum.
struct LearningEfficiency {
  RewardMode mode;
  std::vector<int> checkpoints;
  std::vector<double> fraction_of_max;
};

inline LearningEfficiency learning_efficiency(
    const ModeCurve& curve, const std::vector<int>& checkpoints) {
  LearningEfficiency eff;
  eff.mode = curve.mode;
  const std::vector<double> smoothed = smooth(curve.mean, kRewardSmoothingWindow);
  const double max_v = *std::max_element(smoothed.begin(), smoothed.end());
  const double min_v = *std::min_element(smoothed.begin(), smoothed.end());
  const double span = std::max(max_v - min_v, 1e-12);
  for (int c : checkpoints) {
    if (c < 1 || c > static_cast<int>(smoothed.size())) continue;
    eff.checkpoints.push_back(c);
    eff.fraction_of_max.push_back(
        (smoothed[static_cast<std::size_t>(c - 1)] - min_v) / span);
  }
  return eff;
}

struct ModeEvalPool {
  RewardMode mode;
  long long successes = 0;
  long long episodes = 0;
  std::vector<double> height_errors;
  std::vector<double> distances;
  std::vector<double> qualities;
};

/// Pools every persisted evaluation episode of one mode at one checkpoint
/// across seeds, shapes and scales.
inline ModeEvalPool pool_eval_rows(const RunConfig& config, RewardMode mode,
                                   int checkpoint_episode) {
  namespace fs = std::filesystem;
  ModeEvalPool pool;
  pool.mode = mode;
  const fs::path eval_dir = fs::path(config.output_dir) / "eval";
  const std::string suffix = "_ep" + std::to_string(checkpoint_episode) + ".csv";
  const std::string prefix = std::string(to_string(mode)) + "_seed";
  if (!fs::exists(eval_dir)) {
    throw std::runtime_error("no evaluation results under " +
                             eval_dir.string());
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(eval_dir)) {
    const std::string name = entry.path().filename().string();
    if (name.rfind(prefix, 0) == 0 &&
        name.size() > suffix.size() &&
        name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0) {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  for (const auto& file : files) {
    const CsvTable t = read_csv(file);
    const int success_col = t.column("success");
    const int height_col = t.column("height_error");
    const int dist_col = t.column("dist_obj_hand");
    const int quality_col = t.column("grasp_quality");
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
      pool.successes += t.number(i, success_col) > 0.5 ? 1 : 0;
      pool.episodes += 1;
      pool.height_errors.push_back(t.number(i, height_col));
      pool.distances.push_back(t.number(i, dist_col));
      pool.qualities.push_back(t.number(i, quality_col));
    }
  }
  if (pool.episodes == 0) {
    throw std::runtime_error("no evaluation episodes found for mode " +
                             std::string(to_string(mode)));
  }
  return pool;
}

struct CompareReport {
  Json json;
};

/// Builds the cross-mode comparison: learning-efficiency fractions at the
/// checkpoint budgets, pairwise N-1 chi-square on pooled success counts, and
/// one-way ANOVA with LSD pairwise p-values on the three §IV.B metric
/// distributions. Also writes the Fig 6-style mean/std curve CSV.
inline CompareReport run_compare(const RunConfig& config,
                                 const std::vector<RewardMode>& modes,
                                 int checkpoint_episode = 0) {
  namespace fs = std::filesystem;
  if (modes.size() < 2) {
    throw std::runtime_error("compare needs at least two completed modes");
  }
  const int eval_episode =
      checkpoint_episode > 0 ? checkpoint_episode : config.episodes;

  // Learning curves from the training logs.
  std::vector<ModeCurve> curves;
  std::size_t episode_count = 0;
  for (RewardMode mode : modes) {
    const auto per_seed = load_mode_rewards(config, mode);
    ModeCurve curve = mode_curve(mode, per_seed);
    if (curves.empty()) {
      episode_count = curve.mean.size();
    } else if (curve.mean.size() != episode_count) {
      throw std::runtime_error("episode budgets differ across modes; refusing");
    }
    curves.push_back(std::move(curve));
  }

  std::vector<int> checkpoints;
  for (int c : {200, 600, 1000}) {
    if (c <= static_cast<int>(episode_count)) checkpoints.push_back(c);
  }
  if (checkpoints.empty() || checkpoints.back() != static_cast<int>(episode_count)) {
    checkpoints.push_back(static_cast<int>(episode_count));
  }

  Json efficiency = Json::array();
  for (const auto& curve : curves) {
    const LearningEfficiency eff = learning_efficiency(curve, checkpoints);
    Json rows = Json::array();
    for (std::size_t i = 0; i < eff.checkpoints.size(); ++i) {
      rows.push_back(Json{{"episodes", eff.checkpoints[i]},
                          {"fraction_of_max", eff.fraction_of_max[i]}});
    }
    efficiency.push_back(
        Json{{"mode", to_string(curve.mode)}, {"checkpoints", rows}});
  }

  // Significance over pooled evaluation episodes.
  std::vector<ModeEvalPool> pools;
  for (RewardMode mode : modes) {
    pools.push_back(pool_eval_rows(config, mode, eval_episode));
  }
  Json chi = Json::array();
  for (std::size_t i = 0; i < pools.size(); ++i) {
    for (std::size_t j = i + 1; j < pools.size(); ++j) {
      const auto r = stats::n1_chi_square(
          {pools[i].successes, pools[i].episodes},
          {pools[j].successes, pools[j].episodes});
      chi.push_back(Json{{"pair",
                          {to_string(pools[i].mode), to_string(pools[j].mode)}},
                         {"statistic", r.statistic},
                         {"p_value", r.p_value},
                         {"degenerate", r.degenerate}});
    }
  }

  Json anova = Json::array();
  const struct {
    const char* label;
    std::vector<double> ModeEvalPool::* field;
  } categories[] = {
      {"height_error", &ModeEvalPool::height_errors},
      {"dist_obj_hand", &ModeEvalPool::distances},
      {"grasp_quality", &ModeEvalPool::qualities},
  };
  for (const auto& cat : categories) {
    std::vector<stats::SampleGroup> groups;
    for (const auto& pool : pools) {
      groups.push_back({to_string(pool.mode), pool.*(cat.field)});
    }
    const auto r = stats::one_way_anova_lsd(groups);
    Json pairwise = Json::array();
    for (const auto& p : r.pairwise) {
      pairwise.push_back(Json{{"pair", {p.label_a, p.label_b}},
                              {"t", p.t},
                              {"p_value", p.p_value}});
    }
    anova.push_back(Json{{"category", cat.label},
                         {"f", r.f},
                         {"p_value", r.p_value},
                         {"degenerate", r.degenerate},
                         {"pairwise", pairwise}});
  }

  Json success = Json::array();
  for (const auto& pool : pools) {
    success.push_back(
        Json{{"mode", to_string(pool.mode)},
             {"successes", pool.successes},
             {"episodes", pool.episodes},
             {"success_rate_percent",
              100.0 * pool.successes / static_cast<double>(pool.episodes)}});
  }

  CompareReport report;
  report.json = Json{{"config_hash", config_hash(config)},
                     {"protocol_hash", protocol_hash(config)},
                     {"eval_checkpoint", eval_episode},
                     {"learning_efficiency", efficiency},
                     {"success_rates", success},
                     {"n1_chi_square", chi},
                     {"anova_lsd", anova}};

  const fs::path compare_dir = fs::path(config.output_dir) / "compare";
  fs::create_directories(compare_dir);
  std::ofstream rs(compare_dir / "report.json");
  rs << report.json.dump(2) << "\n";

  std::vector<std::string> header = {"episode"};
  for (const auto& curve : curves) {
    header.push_back(std::string(to_string(curve.mode)) + "_mean");
    header.push_back(std::string(to_string(curve.mode)) + "_std");
  }
  CsvWriter csv(compare_dir / "curves.csv", header);
  for (std::size_t e = 0; e < episode_count; ++e) {
    std::vector<std::string> row = {std::to_string(e + 1)};
    for (const auto& curve : curves) {
      row.push_back(format_double(curve.mean[e]));
      row.push_back(format_double(curve.stddev[e]));
    }
    csv.row(row);
  }
  return report;
}

}  // namespace grasplearn
