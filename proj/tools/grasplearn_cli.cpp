// Command-line front end: train / eval / compare / quality / export-plots.
//
// Exit codes: 0 success, 1 usage or configuration error, 2 runtime failure.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "grasplearn/comparison.hpp"
#include "grasplearn/config.hpp"
#include "grasplearn/evaluation.hpp"
#include "grasplearn/plots.hpp"
#include "grasplearn/trace.hpp"
#include "grasplearn/trainer.hpp"

namespace fs = std::filesystem;
using namespace grasplearn;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitRuntime = 2;

std::vector<RewardMode> parse_modes(const std::string& mode_flag) {
  if (mode_flag.empty() || mode_flag == "all") {
    return {RewardMode::kHierarchical, RewardMode::kTaskOnly,
            RewardMode::kLinearSummed};
  }
  return {reward_mode_from_string(mode_flag)};
}

RunConfig load_config_or_die(const std::string& path,
                             const std::string& out_override) {
  RunConfig config = load_run_config(path);
  if (!out_override.empty()) config.output_dir = out_override;
  return config;
}

int cmd_train(const std::string& config_path, const std::string& mode_flag,
              std::optional<std::uint64_t> seed_flag,
              const std::string& out_override, int workers) {
  RunConfig config = load_config_or_die(config_path, out_override);
  std::vector<std::uint64_t> seeds =
      seed_flag ? std::vector<std::uint64_t>{*seed_flag} : config.seeds;
  const std::vector<RewardMode> modes = parse_modes(mode_flag);

  {
    fs::create_directories(config.output_dir);
    std::ofstream ms(fs::path(config.output_dir) / "manifest.json");
    if (!ms) {
      std::cerr << "error: cannot write to output_dir " << config.output_dir
                << "\n";
      return kExitUsage;
    }
    ms << Json{{"config", to_json(config)},
               {"config_hash", config_hash(config)},
               {"protocol_hash", protocol_hash(config)}}
              .dump(2)
       << "\n";
  }

  struct Job {
    RewardMode mode;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (RewardMode mode : modes) {
    for (std::uint64_t seed : seeds) jobs.push_back({mode, seed});
  }
  std::mutex out_mutex;
  std::size_t next = 0;
  std::mutex job_mutex;
  std::string failure;
  auto worker = [&]() {
    for (;;) {
      std::size_t index;
      {
        std::lock_guard<std::mutex> lock(job_mutex);
        if (next >= jobs.size() || !failure.empty()) return;
        index = next++;
      }
      const Job job = jobs[index];
      try {
        const fs::path dir =
            train_run_dir(config.output_dir, job.mode, job.seed);
        train_grasp_policy(config, job.mode, job.seed, dir,
                           [&](int episode, const EpisodeResult& r) {
                             if (episode % 100 != 0) return;
                             std::lock_guard<std::mutex> lock(out_mutex);
                             std::cout << to_string(job.mode) << " seed "
                                       << job.seed << ": episode " << episode
                                       << " reward " << r.total_reward << "\n";
                           });
        std::lock_guard<std::mutex> lock(out_mutex);
        std::cout << to_string(job.mode) << " seed " << job.seed << ": done ("
                  << dir.string() << ")\n";
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(job_mutex);
        if (failure.empty()) failure = e.what();
        return;
      }
    }
  };
  const int worker_count = std::max(
      1, std::min<int>(workers, static_cast<int>(jobs.size())));
  std::vector<std::thread> pool;
  for (int w = 0; w < worker_count; ++w) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (!failure.empty()) {
    std::cerr << "error: " << failure << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}

int cmd_eval(const std::string& config_path, const std::string& mode_flag,
             std::optional<std::uint64_t> seed_flag, const std::string& shape,
             double scale, int episodes, int checkpoint, int workers,
             const std::string& out_override, bool json_output) {
  RunConfig config = load_config_or_die(config_path, out_override);
  EvalRequest request;
  request.modes = parse_modes(mode_flag);
  request.seeds =
      seed_flag ? std::vector<std::uint64_t>{*seed_flag} : config.seeds;
  if (!shape.empty()) request.shapes = {object_shape_from_string(shape)};
  if (scale > 0.0) request.scales = {scale};
  request.episodes = episodes;
  request.checkpoint_episode = checkpoint;
  request.workers = workers;
  const EvalReport report = run_evaluation(config, request);
  const Json j = report.to_json_report(config);
  if (json_output) {
    std::cout << j.dump(2) << "\n";
  } else {
    for (const auto& cell : j.at("cells")) {
      std::cout << cell.at("mode").get<std::string>() << " "
                << cell.at("shape").get<std::string>() << " x"
                << cell.at("scale").get<double>() << ": success "
                << cell.at("success_rate_percent").get<double>()
                << "%, height err "
                << cell.at("mean_height_error").get<double>()
                << " m, dist "
                << cell.at("mean_dist_obj_hand").get<double>()
                << " m, quality "
                << cell.at("mean_grasp_quality").get<double>() << "\n";
    }
  }
  return kExitOk;
}

int cmd_compare(const std::string& config_path, const std::string& out_override,
                int checkpoint, bool json_output) {
  RunConfig config = load_config_or_die(config_path, out_override);
  const std::vector<RewardMode> modes = {RewardMode::kHierarchical,
                                         RewardMode::kTaskOnly,
                                         RewardMode::kLinearSummed};
  std::vector<RewardMode> present;
  for (RewardMode mode : modes) {
    if (fs::exists(train_run_dir(config.output_dir, mode,
                                 config.seeds.front()) /
                   "trainlog.csv")) {
      present.push_back(mode);
    }
  }
  if (present.size() < 2) {
    std::cerr << "error: compare needs at least two completed modes under "
              << config.output_dir << "\n";
    return kExitUsage;
  }
  const CompareReport report = run_compare(config, present, checkpoint);
  if (json_output) {
    std::cout << report.json.dump(2) << "\n";
  } else {
    std::cout << "learning efficiency (fraction of own max, smoothed):\n";
    for (const auto& mode : report.json.at("learning_efficiency")) {
      std::cout << "  " << mode.at("mode").get<std::string>() << ":";
      for (const auto& row : mode.at("checkpoints")) {
        std::cout << "  @" << row.at("episodes").get<int>() << " ep: "
                  << row.at("fraction_of_max").get<double>();
      }
      std::cout << "\n";
    }
    std::cout << "success rates:\n";
    for (const auto& row : report.json.at("success_rates")) {
      std::cout << "  " << row.at("mode").get<std::string>() << ": "
                << row.at("success_rate_percent").get<double>() << "% ("
                << row.at("successes").get<long long>() << "/"
                << row.at("episodes").get<long long>() << ")\n";
    }
    std::cout << "N-1 chi-square:\n";
    for (const auto& row : report.json.at("n1_chi_square")) {
      std::cout << "  " << row.at("pair")[0].get<std::string>() << " vs "
                << row.at("pair")[1].get<std::string>() << ": p = "
                << row.at("p_value").get<double>() << "\n";
    }
    std::cout << "one-way ANOVA (LSD pairwise):\n";
    for (const auto& row : report.json.at("anova_lsd")) {
      std::cout << "  " << row.at("category").get<std::string>() << ": F = "
                << row.at("f").get<double>() << ", p = "
                << row.at("p_value").get<double>() << "\n";
      for (const auto& pair : row.at("pairwise")) {
        std::cout << "    " << pair.at("pair")[0].get<std::string>() << " vs "
                  << pair.at("pair")[1].get<std::string>() << ": p = "
                  << pair.at("p_value").get<double>() << "\n";
      }
    }
  }
  return kExitOk;
}

int cmd_quality(const std::string& contact_file, double max_moment_arm,
                bool json_output) {
  const std::vector<Contact> contacts = load_contact_set(contact_file);
  const GraspMatrix g = build_grasp_matrix(contacts);
  const QualityResult q = evaluate_quality(contacts, max_moment_arm);
  if (json_output) {
    Json j{{"num_contacts", g.num_contacts},
           {"rows", g.entries.rows()},
           {"cols", g.entries.cols()},
           {"nullity", q.nullity},
           {"graspable_reward", q.graspable_reward},
           {"q_vev", q.q_vev},
           {"r_vev", q.r_vev},
           {"singular_values", q.singular_values}};
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << "contacts:         " << g.num_contacts << "\n"
              << "grasp matrix:     " << g.entries.rows() << " x "
              << g.entries.cols() << "\n"
              << "nullity:          " << q.nullity << "\n"
              << "graspable reward: " << q.graspable_reward << "\n"
              << "singular values: ";
    for (double s : q.singular_values) std::cout << " " << s;
    std::cout << "\n"
              << "Q_vev:            " << q.q_vev << "\n"
              << "r_vev:            " << q.r_vev << "\n";
  }
  return kExitOk;
}

int cmd_export_plots(const std::string& config_path,
                     const std::string& out_override,
                     const std::string& trace_mode_flag, int checkpoint) {
  RunConfig config = load_config_or_die(config_path, out_override);
  std::vector<RewardMode> present;
  for (RewardMode mode : {RewardMode::kHierarchical, RewardMode::kTaskOnly,
                          RewardMode::kLinearSummed}) {
    if (fs::exists(train_run_dir(config.output_dir, mode,
                                 config.seeds.front()) /
                   "trainlog.csv")) {
      present.push_back(mode);
    }
  }
  if (present.empty()) {
    std::cerr << "error: no training logs found under " << config.output_dir
              << "\n";
    return kExitUsage;
  }
  const RewardMode trace_mode = trace_mode_flag.empty()
                                    ? present.front()
                                    : reward_mode_from_string(trace_mode_flag);
  const ExportResult r =
      run_export_plots(config, present, trace_mode, checkpoint);
  std::cout << "wrote " << r.trace_csv.string() << "\n"
            << "wrote " << r.curves_csv.string() << "\n"
            << "wrote " << r.script.string() << "\n"
            << "trace gates: lambda@" << r.trace_episode.first_lambda << " mu@"
            << r.trace_episode.first_mu << " v@" << r.trace_episode.first_v
            << (r.trace_episode.success ? " (success)" : "") << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Physics-guided hierarchical-reward grasp learning"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_override;
  std::string mode_flag;
  std::string shape_flag;
  std::string trace_mode_flag;
  std::optional<std::uint64_t> seed_flag;
  double scale_flag = 0.0;
  double moment_arm = 0.0325 * std::sqrt(3.0);
  int episodes = 0;
  int checkpoint = 0;
  int workers = static_cast<int>(std::thread::hardware_concurrency());
  bool json_output = false;
  std::string contact_file;

  auto* train = app.add_subcommand("train", "Train policies per seed and mode");
  train->add_option("--config", config_path, "Run configuration file")
      ->required();
  train->add_option("--mode", mode_flag,
                    "hierarchical|task-only|linear-summed|all");
  train->add_option("--seed", seed_flag, "Train only this seed");
  train->add_option("--out", out_override, "Override output directory");
  train->add_option("--workers", workers, "Parallel training workers");

  auto* eval = app.add_subcommand("eval", "Evaluate checkpoints on the grid");
  eval->add_option("--config", config_path, "Run configuration file")
      ->required();
  eval->add_option("--mode", mode_flag, "Reward mode(s) to evaluate");
  eval->add_option("--seed", seed_flag, "Evaluate only this seed");
  eval->add_option("--shape", shape_flag, "cube|cylinder|polyhedron");
  eval->add_option("--scale", scale_flag, "Object scale override");
  eval->add_option("--episodes", episodes, "Evaluation episodes per cell");
  eval->add_option("--checkpoint", checkpoint, "Checkpoint episode");
  eval->add_option("--workers", workers, "Worker pool size");
  eval->add_option("--out", out_override, "Override output directory");
  eval->add_flag("--json", json_output, "Machine-readable output");

  auto* compare = app.add_subcommand("compare", "Cross-mode comparison report");
  compare->add_option("--config", config_path, "Run configuration file")
      ->required();
  compare->add_option("--checkpoint", checkpoint, "Eval checkpoint episode");
  compare->add_option("--out", out_override, "Override output directory");
  compare->add_flag("--json", json_output, "Machine-readable output");

  auto* quality = app.add_subcommand("quality", "Inspect a contact-set file");
  quality->add_option("file", contact_file, "Contact-set file")->required();
  quality->add_option("--max-moment-arm", moment_arm,
                      "Object circumscribed radius for normalization [m]");
  quality->add_flag("--json", json_output, "Machine-readable output");

  auto* plots = app.add_subcommand("export-plots",
                                   "Export trace/curve CSVs and a plot script");
  plots->add_option("--config", config_path, "Run configuration file")
      ->required();
  plots->add_option("--mode", trace_mode_flag, "Mode for the episode trace");
  plots->add_option("--checkpoint", checkpoint, "Checkpoint episode");
  plots->add_option("--out", out_override, "Override output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (train->parsed()) {
      return cmd_train(config_path, mode_flag, seed_flag, out_override,
                       workers);
    }
    if (eval->parsed()) {
      return cmd_eval(config_path, mode_flag, seed_flag, shape_flag, scale_flag,
                      episodes, checkpoint, workers, out_override, json_output);
    }
    if (compare->parsed()) {
      return cmd_compare(config_path, out_override, checkpoint, json_output);
    }
    if (quality->parsed()) {
      return cmd_quality(contact_file, moment_arm, json_output);
    }
    if (plots->parsed()) {
      return cmd_export_plots(config_path, out_override, trace_mode_flag,
                              checkpoint);
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ContactFileError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}
