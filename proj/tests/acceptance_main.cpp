// Acceptance suite: runs every acceptance criterion end to end and prints
// one PASS/FAIL line per criterion. Criterion 8 trains the full 5-seed,
// 3-mode, 1000-episode protocol; completed runs found under --runs-dir are
// reused, so re-running the suite after a finished protocol run is cheap.

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "grasplearn/comparison.hpp"
#include "grasplearn/config.hpp"
#include "grasplearn/evaluation.hpp"
#include "grasplearn/plots.hpp"
#include "grasplearn/stats.hpp"
#include "grasplearn/toy_task.hpp"
#include "grasplearn/trainer.hpp"

namespace fs = std::filesystem;
using namespace grasplearn;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Criterion {
  int id;
  std::string name;
  bool pass = false;
  std::string detail;
};

// --------------------------------------------------------------------------
// Shared helpers
// --------------------------------------------------------------------------

Contact random_contact(Rng& rng) {
  Eigen::Vector3d p;
  do {
    p = Eigen::Vector3d(rng.uniform(-1, 1), rng.uniform(-1, 1),
                        rng.uniform(-1, 1));
  } while (p.norm() > 1.0);
  Eigen::Quaterniond q(rng.normal(), rng.normal(), rng.normal(), rng.normal());
  q.normalize();
  const Eigen::Matrix3d r = q.toRotationMatrix();
  Contact c;
  c.position = p;
  c.normal = r.col(0);
  c.tangent1 = r.col(1);
  c.tangent2 = r.col(2);
  c.friction_coeff = 0.5;
  return c;
}

double pseudo_det_eigen_route(const GraspMatrix& g) {
  if (g.entries.cols() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g.entries *
                                                    g.entries.transpose());
  const auto& ev = es.eigenvalues();
  const double cutoff = 1e-10 * ev.maxCoeff();
  double prod = 1.0;
  for (int i = 0; i < ev.size(); ++i) {
    if (ev[i] > cutoff) prod *= ev[i];
  }
  return std::sqrt(prod);
}

RunConfig protocol_config(const fs::path& output_dir,
                          const std::vector<std::uint64_t>& seeds) {
  RunConfig cfg;  // defaults are the paper protocol
  cfg.seeds = seeds;
  cfg.output_dir = output_dir.string();
  return cfg;
}

bool run_complete(const RunConfig& cfg, RewardMode mode, std::uint64_t seed) {
  const fs::path dir = train_run_dir(cfg.output_dir, mode, seed);
  const fs::path log = dir / "trainlog.csv";
  const fs::path manifest = dir / "manifest.json";
  if (!fs::exists(log) || !fs::exists(manifest)) return false;
  try {
    Json m;
    std::ifstream is(manifest);
    is >> m;
    if (m.at("protocol_hash").get<std::string>() != protocol_hash(cfg)) {
      return false;
    }
    return read_csv(log).rows.size() ==
           static_cast<std::size_t>(cfg.episodes);
  } catch (...) {
    return false;
  }
}

/// Trains every missing (mode, seed) run of the protocol with a worker pool.
void ensure_protocol_runs(const RunConfig& cfg, int workers,
                          std::ostream& log) {
  struct Job {
    RewardMode mode;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (RewardMode mode : {RewardMode::kHierarchical, RewardMode::kTaskOnly,
                          RewardMode::kLinearSummed}) {
    for (std::uint64_t seed : cfg.seeds) {
      if (!run_complete(cfg, mode, seed)) jobs.push_back({mode, seed});
    }
  }
  if (jobs.empty()) {
    log << "  [criterion 8] reusing completed runs under " << cfg.output_dir
        << "\n";
    return;
  }
  log << "  [criterion 8] training " << jobs.size() << " runs ("
      << cfg.episodes << " episodes each) with " << workers << " workers\n";
  std::mutex mu;
  std::size_t next = 0;
  std::string failure;
  auto worker = [&]() {
    for (;;) {
      std::size_t index;
      {
        std::lock_guard<std::mutex> lock(mu);
        if (next >= jobs.size() || !failure.empty()) return;
        index = next++;
      }
      const Job job = jobs[index];
      const auto start = Clock::now();
      try {
        train_grasp_policy(cfg, job.mode, job.seed,
                           train_run_dir(cfg.output_dir, job.mode, job.seed));
        std::lock_guard<std::mutex> lock(mu);
        log << "    " << to_string(job.mode) << " seed " << job.seed
            << " finished in " << static_cast<int>(seconds_since(start))
            << " s\n"
            << std::flush;
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(mu);
        if (failure.empty()) failure = e.what();
      }
    }
  };
  std::vector<std::thread> pool;
  for (int w = 0; w < std::max(1, workers); ++w) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (!failure.empty()) throw std::runtime_error(failure);
}

struct ProtocolOutcome {
  double success_hier = 0.0;
  double success_task = 0.0;
  double success_linear = 0.0;
  double frac200_hier = 0.0;
  double frac200_task = 0.0;
  double frac200_linear = 0.0;
  bool ordering_ok = false;
  std::string summary;
};

ProtocolOutcome evaluate_protocol(const RunConfig& cfg, int workers) {
  const std::vector<RewardMode> modes = {RewardMode::kHierarchical,
                                         RewardMode::kTaskOnly,
                                         RewardMode::kLinearSummed};
  // Cube at original size, 50 deterministic episodes per seed.
  EvalRequest request;
  request.modes = modes;
  request.seeds = cfg.seeds;
  request.shapes = {ObjectShape::kCube};
  request.scales = {1.0};
  request.workers = workers;
  const EvalReport eval = run_evaluation(cfg, request);

  auto success_rate = [&](RewardMode mode) {
    long long successes = 0;
    long long episodes = 0;
    for (const auto& cell : eval.cells) {
      if (cell.mode != mode) continue;
      for (const auto& e : cell.episodes) {
        successes += e.success ? 1 : 0;
        episodes += 1;
      }
    }
    return episodes ? 100.0 * successes / episodes : 0.0;
  };

  auto fraction_at_200 = [&](RewardMode mode) {
    const ModeCurve curve = mode_curve(mode, load_mode_rewards(cfg, mode));
    const LearningEfficiency eff = learning_efficiency(curve, {200});
    return eff.fraction_of_max.empty() ? 0.0 : eff.fraction_of_max.front();
  };

  ProtocolOutcome out;
  out.success_hier = success_rate(RewardMode::kHierarchical);
  out.success_task = success_rate(RewardMode::kTaskOnly);
  out.success_linear = success_rate(RewardMode::kLinearSummed);
  out.frac200_hier = fraction_at_200(RewardMode::kHierarchical);
  out.frac200_task = fraction_at_200(RewardMode::kTaskOnly);
  out.frac200_linear = fraction_at_200(RewardMode::kLinearSummed);
  out.ordering_ok = out.success_hier >= out.success_task &&
                    out.success_hier >= out.success_linear &&
                    out.frac200_hier > out.frac200_task &&
                    out.frac200_hier > out.frac200_linear;
  std::ostringstream os;
  os << "success % h/t/l = " << out.success_hier << "/" << out.success_task
     << "/" << out.success_linear << "; frac@200 = " << out.frac200_hier << "/"
     << out.frac200_task << "/" << out.frac200_linear;
  out.summary = os.str();
  return out;
}

// --------------------------------------------------------------------------
// Criteria
// --------------------------------------------------------------------------

Criterion criterion1_grasp_math_oracles() {
  Criterion c{1, "grasp-math oracle suite (1000 random contact sets)"};
  const auto start = Clock::now();
  Rng rng(814);
  std::mt19937_64 shuffler(5);
  int checked = 0;
  double worst = 0.0;
  bool ok = true;
  for (int trial = 0; trial < 1000 && ok; ++trial) {
    const int m = 1 + static_cast<int>(rng.uniform_index(4));
    std::vector<Contact> contacts;
    for (int i = 0; i < m; ++i) contacts.push_back(random_contact(rng));
    const GraspMatrix g = build_grasp_matrix(contacts);
    const auto [q, sv] = quality_vev(g);
    const double oracle = pseudo_det_eigen_route(g);
    const double rel =
        std::abs(q - oracle) / std::max({std::abs(q), std::abs(oracle), 1e-300});
    worst = std::max(worst, rel);
    if (rel > 1e-8) ok = false;

    // Permutation invariance.
    std::vector<Contact> shuffled = contacts;
    std::shuffle(shuffled.begin(), shuffled.end(), shuffler);
    const auto [q_perm, sv_perm] = quality_vev(build_grasp_matrix(shuffled));
    if (std::abs(q_perm - q) > 1e-8 * std::abs(q)) ok = false;

    // Rotation invariance.
    Eigen::Quaterniond rot(rng.normal(), rng.normal(), rng.normal(),
                           rng.normal());
    rot.normalize();
    const Eigen::Matrix3d r = rot.toRotationMatrix();
    for (auto& contact : shuffled) {
      contact.position = r * contact.position;
      contact.normal = r * contact.normal;
      contact.tangent1 = r * contact.tangent1;
      contact.tangent2 = r * contact.tangent2;
    }
    const auto [q_rot, sv_rot] = quality_vev(build_grasp_matrix(shuffled));
    if (std::abs(q_rot - q) > 1e-8 * std::abs(q)) ok = false;
    ++checked;
  }
  const double elapsed = seconds_since(start);
  c.pass = ok && checked == 1000 && elapsed < 10.0;
  std::ostringstream os;
  os << checked << " sets, worst rel err " << worst << ", " << elapsed << " s";
  c.detail = os.str();
  return c;
}

Criterion criterion2_fig1b_ordering(const fs::path& share_dir) {
  Criterion c{2, "quality ordering: skewed < antipodal < three-contact"};
  const double rho = 0.0325 * std::sqrt(3.0);
  const auto skewed =
      load_contact_set(share_dir / "contacts" / "skewed_pinch.txt");
  const auto antipodal =
      load_contact_set(share_dir / "contacts" / "antipodal_pair.txt");
  const auto three =
      load_contact_set(share_dir / "contacts" / "three_finger_spread.txt");
  const double r1 = evaluate_quality(skewed, rho).r_vev;
  const double r2 = evaluate_quality(antipodal, rho).r_vev;
  const double r3 = evaluate_quality(three, rho).r_vev;
  c.pass = r1 < r2 && r2 < r3 && r1 > 0.0;
  std::ostringstream os;
  os << "r_vev " << r1 << " < " << r2 << " < " << r3;
  c.detail = os.str();
  return c;
}

Criterion criterion3_eq1_exactness() {
  Criterion c{3, "graspable reward takes exactly {0, 0.1}"};
  Rng rng(31);
  bool ok = true;
  for (int trial = 0; trial < 500; ++trial) {
    const int m = static_cast<int>(rng.uniform_index(5));
    std::vector<Contact> contacts;
    for (int i = 0; i < m; ++i) contacts.push_back(random_contact(rng));
    const auto [reward, nullity] =
        graspable_reward(build_grasp_matrix(contacts));
    if (!(reward == 0.0 || reward == 0.1)) ok = false;
    if ((reward == 0.1) != (nullity > 0)) ok = false;
  }
  const std::vector<Contact> antipodal = {
      make_contact({0.0325, 0, 0}, {-1, 0, 0}, 0.5),
      make_contact({-0.0325, 0, 0}, {1, 0, 0}, 0.5)};
  const auto [antipodal_reward, antipodal_nullity] =
      graspable_reward(build_grasp_matrix(antipodal));
  Rng single_rng(7);
  const auto [single_reward, single_nullity] =
      graspable_reward(build_grasp_matrix({random_contact(single_rng)}));
  ok = ok && antipodal_reward == 0.1 && single_reward == 0.0;
  c.pass = ok;
  std::ostringstream os;
  os << "antipodal " << antipodal_reward << ", single " << single_reward;
  c.detail = os.str();
  return c;
}

Criterion criterion4_gate_chain(const RunConfig& cfg) {
  Criterion c{4, "gate chain v <= mu <= lambda and ordered first-satisfaction"};
  long long rows = 0;
  long long violations = 0;
  long long misordered = 0;
  for (std::uint64_t seed : cfg.seeds) {
    const fs::path log_path =
        train_run_dir(cfg.output_dir, RewardMode::kHierarchical, seed) /
        "trainlog.csv";
    const CsvTable log = read_csv(log_path);
    const int chain = log.column("gate_chain_ok");
    const int l = log.column("first_lambda");
    const int m = log.column("first_mu");
    const int v = log.column("first_v");
    for (std::size_t i = 0; i < log.rows.size(); ++i) {
      ++rows;
      if (log.number(i, chain) != 1.0) ++violations;
      const double fl = log.number(i, l);
      const double fm = log.number(i, m);
      const double fv = log.number(i, v);
      if (fl >= 0 && fm >= 0 && fv >= 0 && !(fl <= fm && fm <= fv)) {
        ++misordered;
      }
    }
  }
  c.pass = rows > 0 && violations == 0 && misordered == 0;
  std::ostringstream os;
  os << rows << " episodes, " << violations << " chain violations, "
     << misordered << " misordered first-satisfactions";
  c.detail = os.str();
  return c;
}

Criterion criterion5_reward_decomposition() {
  Criterion c{5, "reward decomposition bitwise in all three modes"};
  Rng rng(8191);
  bool ok = true;
  const double target_z = 0.0825;
  for (RewardMode mode : {RewardMode::kHierarchical, RewardMode::kTaskOnly,
                          RewardMode::kLinearSummed}) {
    RewardConfig cfg;
    cfg.mode = mode;
    for (int i = 0; i < 10000 && ok; ++i) {
      EnvState state;
      state.dist_obj_hand = rng.uniform(0.0, 0.4);
      state.object_height = rng.uniform(0.03, 0.12);
      state.inter_finger_contact = rng.uniform() < 0.2;
      const int contacts = static_cast<int>(rng.uniform_index(4));
      for (int k = 0; k < contacts; ++k) {
        state.contacts.push_back(
            make_contact({0.03, 0, 0}, {-1, 0, 0}, 0.5));
      }
      QualityResult quality;
      quality.nullity =
          contacts >= 2 ? static_cast<int>(rng.uniform_index(2)) : 0;
      quality.graspable_reward = quality.nullity > 0 ? 0.1 : 0.0;
      quality.r_vev = contacts > 0 ? rng.uniform(0.0, 1.0) : 0.0;
      Eigen::VectorXd av(9);
      for (int k = 0; k < 9; ++k) av[k] = rng.uniform(-1, 1);
      const Action action = Action::from_vector(av);
      const RewardBreakdown b =
          step_reward(state, action, quality, cfg, target_z);
      if (b.total != reward_total(b, cfg)) ok = false;
      if (mode == RewardMode::kTaskOnly &&
          b.total != b.p_target + b.r_obj_height) {
        ok = false;
      }
      if (b.gates.v > b.gates.mu || b.gates.mu > b.gates.lambda) ok = false;
    }
  }
  // Hierarchical == linear-summed when fully gated and penalty-free.
  RewardConfig hier;
  hier.mode = RewardMode::kHierarchical;
  RewardConfig linear;
  linear.mode = RewardMode::kLinearSummed;
  for (int i = 0; i < 5000 && ok; ++i) {
    EnvState state;
    state.dist_obj_hand = rng.uniform(0.0, 0.049);
    state.object_height = rng.uniform(0.03, 0.12);
    state.inter_finger_contact = false;
    state.contacts = {make_contact({0.03, 0, 0}, {-1, 0, 0}, 0.5),
                      make_contact({-0.03, 0, 0}, {1, 0, 0}, 0.5)};
    QualityResult quality;
    quality.nullity = 1;
    quality.graspable_reward = 0.1;
    quality.r_vev = rng.uniform(1e-9, 1.0);
    Action action;
    action.finger_velocity_commands.setConstant(-0.2);
    const RewardBreakdown hb = step_reward(state, action, quality, hier, target_z);
    const RewardBreakdown lb =
        step_reward(state, action, quality, linear, target_z);
    if (hb.total != lb.total) ok = false;
  }
  c.pass = ok;
  c.detail = "30000 decompositions + 5000 gated equivalences, bitwise";
  return c;
}

Criterion criterion6_gradient_checks() {
  Criterion c{6, "analytic gradients vs central differences < 1e-4"};
  Rng rng(606);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const int depth = 2 + static_cast<int>(rng.uniform_index(2));
    std::vector<int> dims = {2 + static_cast<int>(rng.uniform_index(8))};
    for (int l = 0; l < depth; ++l) {
      dims.push_back(2 + static_cast<int>(rng.uniform_index(63)));
    }
    std::vector<Activation> acts(dims.size() - 1,
                                 rng.uniform() < 0.5 ? Activation::kRelu
                                                     : Activation::kTanh);
    acts.back() = Activation::kTanh;
    const DenseNet net = DenseNet::make(dims, acts, rng);
    Eigen::VectorXd input(dims.front());
    for (int i = 0; i < input.size(); ++i) input[i] = rng.uniform(-1, 1);
    Eigen::VectorXd target(dims.back());
    for (int i = 0; i < target.size(); ++i) target[i] = rng.uniform(-1, 1);
    const double err = grad_check(
        net, input,
        [&](const Eigen::VectorXd& y) {
          const Eigen::VectorXd diff = y - target;
          return std::make_pair(diff.squaredNorm(),
                                Eigen::VectorXd(2.0 * diff));
        },
        1e-5);
    worst = std::max(worst, err);
  }

  // Through the TD3 actor-loss composition Q1(s, actor(s)).
  Td3Config cfg;
  cfg.batch_size = 8;
  cfg.hidden_size = 10;
  cfg.buffer_capacity = 64;
  cfg.seed = 3;
  Td3Agent agent(3, 2, cfg);
  Rng trng(9);
  for (int i = 0; i < 16; ++i) {
    Transition t;
    t.state = Eigen::VectorXd::NullaryExpr(3, [&](int) { return trng.uniform(-1, 1); });
    t.next_state =
        Eigen::VectorXd::NullaryExpr(3, [&](int) { return trng.uniform(-1, 1); });
    t.action =
        Eigen::VectorXd::NullaryExpr(2, [&](int) { return trng.uniform(-1, 1); });
    t.reward = trng.uniform(-1, 1);
    agent.buffer().push(std::move(t));
  }
  const auto batch = agent.sample_batch();
  const auto [loss, grads] = agent.actor_loss_gradients(batch);
  auto loss_at = [&]() {
    const Eigen::MatrixXd pi = forward(agent.actor(), batch.states);
    Eigen::MatrixXd sa(5, batch.states.cols());
    sa.topRows(3) = batch.states;
    sa.bottomRows(2) = pi;
    return -forward(agent.critic1(), sa).mean();
  };
  double actor_worst = 0.0;
  auto& layers = agent.mutable_actor().layers;
  const double h = 1e-5;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    for (int i = 0; i < layers[l].weights.rows(); ++i) {
      for (int j = 0; j < layers[l].weights.cols(); ++j) {
        double& p = layers[l].weights(i, j);
        const double saved = p;
        p = saved + h;
        const double up = loss_at();
        p = saved - h;
        const double down = loss_at();
        p = saved;
        const double numeric = (up - down) / (2.0 * h);
        const double analytic = grads.weights[l](i, j);
        actor_worst = std::max(
            actor_worst, std::abs(analytic - numeric) /
                             std::max(1e-8, std::abs(analytic) +
                                                std::abs(numeric)));
      }
    }
  }
  c.pass = worst < 1e-4 && actor_worst < 1e-4;
  std::ostringstream os;
  os << "worst net err " << worst << ", actor-composition err " << actor_worst;
  c.detail = os.str();
  return c;
}

Criterion criterion7_toy_task() {
  Criterion c{7, "TD3 toy reach: last-20 return >= 3x first-20, 3/3 seeds"};
  const auto start = Clock::now();
  bool ok = true;
  std::ostringstream os;
  for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
    const ToyTrainResult r = train_toy_reach(seed, 200);
    double first = 0.0;
    double last = 0.0;
    for (int i = 0; i < 20; ++i) {
      first += r.episode_returns[static_cast<std::size_t>(i)];
      last += r.episode_returns[r.episode_returns.size() - 1 -
                                static_cast<std::size_t>(i)];
    }
    const double ratio = last / std::max(first, 1e-9);
    os << "seed " << seed << " ratio " << ratio << "; ";
    if (!(last > 3.0 * first)) ok = false;
  }
  const double elapsed = seconds_since(start);
  os << elapsed << " s";
  c.pass = ok && elapsed < 300.0;
  c.detail = os.str();
  return c;
}

Criterion criterion8_directional(const fs::path& runs_dir, int workers,
                                 bool& rerun_used) {
  Criterion c{8, "directional reproduction: success rate and learning speed"};
  const auto start = Clock::now();
  const std::vector<std::uint64_t> first_seeds = {1, 2, 3, 4, 5};
  const std::vector<std::uint64_t> fresh_seeds = {11, 12, 13, 14, 15};

  RunConfig cfg = protocol_config(runs_dir / "protocol", first_seeds);
  ensure_protocol_runs(cfg, workers, std::cout);
  ProtocolOutcome outcome = evaluate_protocol(cfg, workers);
  std::string summary = outcome.summary;
  if (!outcome.ordering_ok) {
    rerun_used = true;
    std::cout << "  [criterion 8] ordering failed on seeds {1..5}; documented "
                 "rerun with fresh seeds {11..15}\n";
    RunConfig fresh = protocol_config(runs_dir / "protocol_rerun", fresh_seeds);
    ensure_protocol_runs(fresh, workers, std::cout);
    outcome = evaluate_protocol(fresh, workers);
    summary += " | rerun: " + outcome.summary;
  }
  c.pass = outcome.ordering_ok;
  std::ostringstream os;
  os << summary << "; " << static_cast<int>(seconds_since(start)) << " s";
  c.detail = os.str();
  return c;
}

Criterion criterion9_statistics() {
  Criterion c{9, "statistics match direct-formula oracles to 1e-10"};
  Rng rng(909);
  bool ok = true;
  double worst_chi = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const long long ta = 2 + static_cast<long long>(rng.uniform_index(400));
    const long long tb = 2 + static_cast<long long>(rng.uniform_index(400));
    const stats::BinomialOutcome a{
        static_cast<long long>(rng.uniform_index(ta + 1)), ta};
    const stats::BinomialOutcome b{
        static_cast<long long>(rng.uniform_index(tb + 1)), tb};
    const auto res = stats::n1_chi_square(a, b);
    const double col1 = static_cast<double>(a.successes + b.successes);
    const double col2 = static_cast<double>((a.trials - a.successes) +
                                            (b.trials - b.successes));
    if (col1 == 0.0 || col2 == 0.0) {
      if (!res.degenerate || res.p_value != 1.0) ok = false;
      continue;
    }
    // Expected-count Pearson formula, scaled by (N-1)/N.
    const double n = static_cast<double>(a.trials + b.trials);
    double chi2 = 0.0;
    const double observed[2][2] = {
        {static_cast<double>(a.successes),
         static_cast<double>(a.trials - a.successes)},
        {static_cast<double>(b.successes),
         static_cast<double>(b.trials - b.successes)}};
    const double rows[2] = {static_cast<double>(a.trials),
                            static_cast<double>(b.trials)};
    const double cols[2] = {col1, col2};
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 2; ++j) {
        const double expected = rows[i] * cols[j] / n;
        const double d = observed[i][j] - expected;
        chi2 += d * d / expected;
      }
    }
    const double reference = chi2 * (n - 1.0) / n;
    worst_chi = std::max(worst_chi, std::abs(res.statistic - reference));
    if (std::abs(res.statistic - reference) > 1e-10) ok = false;
  }

  double worst_anova = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int k = 2 + static_cast<int>(rng.uniform_index(4));
    std::vector<stats::SampleGroup> groups;
    for (int i = 0; i < k; ++i) {
      stats::SampleGroup g;
      g.label = "g" + std::to_string(i);
      const int n = 2 + static_cast<int>(rng.uniform_index(10));
      for (int j = 0; j < n; ++j) g.values.push_back(rng.normal(0.0, 2.0));
      groups.push_back(g);
    }
    const auto r = stats::one_way_anova_lsd(groups);
    const double rel = std::abs(r.ss_total - (r.ss_between + r.ss_within)) /
                       std::max(r.ss_total, 1e-300);
    worst_anova = std::max(worst_anova, rel);
    if (rel > 1e-10) ok = false;
  }

  const auto degenerate = stats::one_way_anova_lsd(
      {{"a", {1.0, 1.0}}, {"b", {1.0, 1.0}}});
  if (!degenerate.degenerate || degenerate.p_value != 1.0) ok = false;

  c.pass = ok;
  std::ostringstream os;
  os << "worst chi dev " << worst_chi << ", worst SS identity rel "
     << worst_anova;
  c.detail = os.str();
  return c;
}

Criterion criterion10_determinism(const fs::path& scratch_dir) {
  Criterion c{10, "bitwise determinism and persistence round trips"};
  RunConfig cfg;
  cfg.task.max_steps = 60;
  cfg.td3.batch_size = 32;
  cfg.td3.warmup_steps = 60;
  cfg.td3.buffer_capacity = 8192;
  cfg.td3.hidden_size = 16;
  cfg.episodes = 4;
  cfg.eval_episodes = 3;
  cfg.checkpoint_interval = 2;
  cfg.seeds = {7};
  bool ok = true;
  std::string note;

  auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
  };

  fs::remove_all(scratch_dir);
  cfg.output_dir = (scratch_dir / "a").string();
  const auto a = train_grasp_policy(cfg, RewardMode::kHierarchical, 7,
                                    train_run_dir(cfg.output_dir,
                                                  RewardMode::kHierarchical, 7));
  cfg.output_dir = (scratch_dir / "b").string();
  const auto b = train_grasp_policy(cfg, RewardMode::kHierarchical, 7,
                                    train_run_dir(cfg.output_dir,
                                                  RewardMode::kHierarchical, 7));
  if (slurp(a.paths.trainlog) != slurp(b.paths.trainlog)) {
    ok = false;
    note += "trainlogs differ; ";
  }
  if (a.paths.checkpoints.size() != b.paths.checkpoints.size()) {
    ok = false;
  } else {
    for (std::size_t i = 0; i < a.paths.checkpoints.size(); ++i) {
      if (slurp(a.paths.checkpoints[i]) != slurp(b.paths.checkpoints[i])) {
        ok = false;
        note += "checkpoints differ; ";
      }
    }
  }

  // Checkpoint round trip through a fresh agent.
  {
    Td3Config agent_cfg = cfg.td3;
    agent_cfg.seed = 123;
    Td3Agent agent(kObservationSize, kActionSize, agent_cfg);
    std::ifstream is(a.paths.checkpoints.back(), std::ios::binary);
    agent.load(is);
    std::ostringstream saved;
    agent.save(saved);
    if (saved.str() != slurp(a.paths.checkpoints.back())) {
      ok = false;
      note += "checkpoint round trip not bit-exact; ";
    }
  }

  // Every EvalReport value recomputes from the persisted per-episode rows.
  cfg.output_dir = (scratch_dir / "a").string();
  EvalRequest request;
  request.modes = {RewardMode::kHierarchical};
  request.seeds = {7};
  request.shapes = {ObjectShape::kCube};
  request.scales = {1.0};
  request.workers = 1;
  const EvalReport report = run_evaluation(cfg, request);
  const Json j = report.to_json_report(cfg);
  for (const auto& cell : j.at("cells")) {
    const fs::path csv_path = eval_cell_csv_path(
        fs::path(cfg.output_dir) / "eval", RewardMode::kHierarchical, 7,
        ObjectShape::kCube, 1.0, cfg.episodes);
    const CsvTable t = read_csv(csv_path);
    long long successes = 0;
    double height = 0.0;
    const int success_col = t.column("success");
    const int height_col = t.column("height_error");
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
      successes += t.number(i, success_col) > 0.5 ? 1 : 0;
      height += t.number(i, height_col);
    }
    const double rate = 100.0 * successes / static_cast<double>(t.rows.size());
    const double mean_height = height / static_cast<double>(t.rows.size());
    if (std::abs(cell.at("success_rate_percent").get<double>() - rate) >
        1e-12) {
      ok = false;
      note += "success rate not recomputable; ";
    }
    if (std::abs(cell.at("mean_height_error").get<double>() - mean_height) >
        1e-12 * std::max(1.0, std::abs(mean_height))) {
      ok = false;
      note += "mean height error not recomputable; ";
    }
  }

  fs::remove_all(scratch_dir);
  c.pass = ok;
  c.detail = ok ? "train/checkpoint/eval all reproduce exactly" : note;
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  fs::path runs_dir = "acceptance_runs";
  fs::path share_dir = "share";
  int workers = std::max(1u, std::thread::hardware_concurrency());
  std::set<int> only;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--runs-dir" && i + 1 < argc) {
      runs_dir = argv[++i];
    } else if (arg == "--share-dir" && i + 1 < argc) {
      share_dir = argv[++i];
    } else if (arg == "--workers" && i + 1 < argc) {
      workers = std::stoi(argv[++i]);
    } else if (arg == "--only" && i + 1 < argc) {
      std::stringstream ss(argv[++i]);
      std::string tok;
      while (std::getline(ss, tok, ',')) only.insert(std::stoi(tok));
    } else {
      std::cerr << "usage: acceptance [--runs-dir DIR] [--share-dir DIR] "
                   "[--workers N] [--only 1,2,...]\n";
      return 2;
    }
  }

  std::vector<Criterion> results;
  bool rerun_used = false;
  RunConfig protocol = protocol_config(runs_dir / "protocol", {1, 2, 3, 4, 5});

  auto wants = [&](int id) { return only.empty() || only.count(id) > 0; };
  auto record = [&](Criterion&& c) {
    std::printf("%s  criterion %2d: %s (%s)\n", c.pass ? "PASS" : "FAIL", c.id,
                c.name.c_str(), c.detail.c_str());
    std::fflush(stdout);
    results.push_back(std::move(c));
  };

  try {
    if (wants(1)) record(criterion1_grasp_math_oracles());
    if (wants(2)) record(criterion2_fig1b_ordering(share_dir));
    if (wants(3)) record(criterion3_eq1_exactness());
    if (wants(5)) record(criterion5_reward_decomposition());
    if (wants(6)) record(criterion6_gradient_checks());
    if (wants(7)) record(criterion7_toy_task());
    if (wants(9)) record(criterion9_statistics());
    if (wants(10)) record(criterion10_determinism(runs_dir / "determinism"));
    // The training-dependent criteria run last; 8 produces the runs 4 reads.
    if (wants(8)) record(criterion8_directional(runs_dir, workers, rerun_used));
    if (wants(4)) {
      // Gate-chain over the protocol runs (either seed set that completed).
      RunConfig gate_cfg = protocol;
      if (!run_complete(gate_cfg, RewardMode::kHierarchical, 1)) {
        gate_cfg = protocol_config(runs_dir / "protocol_rerun",
                                   {11, 12, 13, 14, 15});
      }
      record(criterion4_gate_chain(gate_cfg));
    }
  } catch (const std::exception& e) {
    std::cerr << "acceptance suite aborted: " << e.what() << "\n";
    return 2;
  }

  int failed = 0;
  for (const auto& c : results) failed += c.pass ? 0 : 1;
  if (rerun_used) {
    std::printf("note: criterion 8 used its documented one-time fresh-seed "
                "rerun\n");
  }
  std::printf("%zu criteria run, %d failed\n", results.size(), failed);
  return failed == 0 ? 0 : 1;
}
