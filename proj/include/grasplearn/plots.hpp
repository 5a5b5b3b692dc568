#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "grasplearn/comparison.hpp"
#include "grasplearn/evaluation.hpp"

namespace grasplearn {

/// Re-simulates one deterministic episode with a trained policy and writes
/// the full per-step trace: joints, poses, contact counts, gates, and every
/// reward term.
inline EpisodeResult write_episode_trace(const RunConfig& config,
                                         RewardMode mode, std::uint64_t seed,
                                         int checkpoint_episode,
                                         std::uint64_t episode_seed,
                                         const std::filesystem::path& path) {
  const std::filesystem::path checkpoint =
      train_run_dir(config.output_dir, mode, seed) /
      checkpoint_name(checkpoint_episode);
  Td3Agent agent = load_checkpoint_agent(config, checkpoint);
  TaskSpec task = config.task;
  task.seed = seed;
  GraspEnv env(task);
  RewardConfig reward_cfg = config.reward;
  reward_cfg.mode = mode;

  std::vector<std::string> header = {"step"};
  for (int i = 0; i < 6; ++i) header.push_back("arm_q" + std::to_string(i));
  for (int i = 0; i < 3; ++i) header.push_back("finger_q" + std::to_string(i));
  for (const char* c : {"hand_x", "hand_y", "hand_z", "obj_x", "obj_y", "obj_z",
                        "obj_height", "dist_obj_hand"}) {
    header.push_back(c);
  }
  for (const char* c :
       {"contacts", "inter_finger", "attached", "lambda", "mu", "v"}) {
    header.push_back(c);
  }
  for (const char* c : {"p_target", "p_close", "p_finger_contact", "r_dist",
                        "r_graspable", "r_vev", "r_obj_height", "total"}) {
    header.push_back(c);
  }
  CsvWriter csv(path, header);

  return run_episode(
      env, episode_seed, reward_cfg,
      [&](const Observation& obs, int) {
        return Action::from_vector(agent.select_action(obs, 0.0));
      },
      [&](int step, const Observation&, const Action&, const Observation&,
          const RewardBreakdown& b, const EnvState& s) {
        std::vector<std::string> row = {std::to_string(step)};
        for (int i = 0; i < 6; ++i) {
          row.push_back(format_double(s.arm_joint_angles[i]));
        }
        for (int i = 0; i < 3; ++i) {
          row.push_back(format_double(s.finger_joint_angles[i]));
        }
        for (double v :
             {s.hand_position.x(), s.hand_position.y(), s.hand_position.z(),
              s.object_center.x(), s.object_center.y(), s.object_center.z(),
              s.object_height, s.dist_obj_hand}) {
          row.push_back(format_double(v));
        }
        row.push_back(std::to_string(s.contacts.size()));
        row.push_back(std::to_string(s.inter_finger_contact ? 1 : 0));
        row.push_back(std::to_string(s.attached ? 1 : 0));
        row.push_back(std::to_string(b.gates.lambda));
        row.push_back(std::to_string(b.gates.mu));
        row.push_back(std::to_string(b.gates.v));
        for (double v : {b.p_target, b.p_close, b.p_finger_contact, b.r_dist,
                         b.r_graspable, b.r_vev, b.r_obj_height, b.total}) {
          row.push_back(format_double(v));
        }
        csv.row(row);
      });
}

inline const char* kPlotScript = R"PY(#!/usr/bin/env python3
"""Renders the exported reward-trace and learning-curve CSVs.

Usage: python3 render_plots.py [plot_dir]
Writes reward_trace.png and learning_curves.png next to the CSVs.
"""
import csv
import os
import sys

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt


def read_csv(path):
    with open(path) as f:
        rows = list(csv.DictReader(f))
    return rows


def render_trace(plot_dir):
    rows = read_csv(os.path.join(plot_dir, "reward_trace.csv"))
    steps = [int(r["step"]) for r in rows]
    fig, (top, bottom) = plt.subplots(2, 1, figsize=(9, 7), sharex=True)
    for key in ["p_target", "r_dist", "r_graspable", "r_vev", "r_obj_height"]:
        top.plot(steps, [float(r[key]) for r in rows], label=key)
    top.plot(steps, [float(r["total"]) for r in rows], "k--", label="total")
    top.legend(loc="best", fontsize=8)
    top.set_ylabel("reward component")
    for key, style in [("lambda", "-"), ("mu", "--"), ("v", ":")]:
        bottom.step(steps, [int(r[key]) for r in rows], style, label=key)
    bottom.set_ylim(-0.1, 1.1)
    bottom.set_xlabel("step")
    bottom.set_ylabel("gate")
    bottom.legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(os.path.join(plot_dir, "reward_trace.png"), dpi=150)


def render_curves(plot_dir):
    rows = read_csv(os.path.join(plot_dir, "learning_curves.csv"))
    episodes = [int(r["episode"]) for r in rows]
    modes = sorted({k[:-5] for k in rows[0] if k.endswith("_mean")})
    fig, ax = plt.subplots(figsize=(9, 5))
    for mode in modes:
        mean = [float(r[mode + "_mean"]) for r in rows]
        std = [float(r[mode + "_std"]) for r in rows]
        ax.plot(episodes, mean, label=mode)
        ax.fill_between(episodes, [m - s for m, s in zip(mean, std)],
                        [m + s for m, s in zip(mean, std)], alpha=0.2)
    ax.set_xlabel("training episode")
    ax.set_ylabel("total reward")
    ax.legend(loc="best")
    fig.tight_layout()
    fig.savefig(os.path.join(plot_dir, "learning_curves.png"), dpi=150)


def main():
    plot_dir = sys.argv[1] if len(sys.argv) > 1 else os.path.dirname(__file__)
    render_trace(plot_dir)
    render_curves(plot_dir)
    print("wrote", os.path.join(plot_dir, "reward_trace.png"))
    print("wrote", os.path.join(plot_dir, "learning_curves.png"))


if __name__ == "__main__":
    main()
)PY";

struct ExportResult {
  std::filesystem::path trace_csv;
  std::filesystem::path curves_csv;
  std::filesystem::path script;
  EpisodeResult trace_episode;
};

/// Exports (a) a single-episode reward/gate trace for the first seed of the
/// given mode, (b) the across-seed mean/std learning-curve CSV for every
/// requested mode, and (c) a standalone matplotlib script rendering both.
inline ExportResult run_export_plots(const RunConfig& config,
                                     const std::vector<RewardMode>& modes,
                                     RewardMode trace_mode,
                                     int checkpoint_episode = 0) {
  namespace fs = std::filesystem;
  const fs::path plot_dir = fs::path(config.output_dir) / "plots";
  fs::create_directories(plot_dir);
  const int episode = checkpoint_episode > 0 ? checkpoint_episode
                                             : config.episodes;
  ExportResult result;
  result.trace_csv = plot_dir / "reward_trace.csv";
  result.trace_episode = write_episode_trace(
      config, trace_mode, config.seeds.front(), episode,
      kEvalSeedBase, result.trace_csv);

  std::vector<ModeCurve> curves;
  for (RewardMode mode : modes) {
    curves.push_back(mode_curve(mode, load_mode_rewards(config, mode)));
  }
  std::vector<std::string> header = {"episode"};
  for (const auto& curve : curves) {
    header.push_back(std::string(to_string(curve.mode)) + "_mean");
    header.push_back(std::string(to_string(curve.mode)) + "_std");
  }
  result.curves_csv = plot_dir / "learning_curves.csv";
  CsvWriter csv(result.curves_csv, header);
  const std::size_t episodes = curves.empty() ? 0 : curves.front().mean.size();
  for (std::size_t e = 0; e < episodes; ++e) {
    std::vector<std::string> row = {std::to_string(e + 1)};
    for (const auto& curve : curves) {
      row.push_back(format_double(curve.mean[e]));
      row.push_back(format_double(curve.stddev[e]));
    }
    csv.row(row);
  }

  result.script = plot_dir / "render_plots.py";
  std::ofstream script(result.script);
  script << kPlotScript;
  return result;
}

}  // namespace grasplearn
