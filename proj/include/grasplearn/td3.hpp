#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cstdint>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <utility>
#include <vector>

#include "grasplearn/neural.hpp"
#include "grasplearn/rng.hpp"

namespace grasplearn {

struct Td3Config {
  double discount = 0.99;
  int batch_size = 256;
  std::size_t buffer_capacity = 1000000;
  double tau = 0.005;             // target smoothing factor
  double learning_rate = 0.001;
  int policy_delay = 2;           // critic updates per actor update
  double exploration_noise_std = 0.2;
  double target_noise_std = 0.2;
  double target_noise_clip = 0.5;
  int warmup_steps = 3000;        // uniform random actions, no updates
  int hidden_size = 128;
  std::uint64_t seed = 0;
};

inline void validate(const Td3Config& cfg) {
  if (!(cfg.discount > 0.0 && cfg.discount < 1.0)) {
    throw std::invalid_argument("td3.discount must be in (0, 1)");
  }
  if (!(cfg.tau > 0.0 && cfg.tau <= 1.0)) {
    throw std::invalid_argument("td3.tau must be in (0, 1]");
  }
  if (cfg.policy_delay < 1) {
    throw std::invalid_argument("td3.policy_delay must be >= 1");
  }
  if (cfg.batch_size < 1) throw std::invalid_argument("td3.batch_size must be >= 1");
  if (cfg.buffer_capacity < static_cast<std::size_t>(cfg.batch_size)) {
    throw std::invalid_argument("td3.buffer_capacity must hold a batch");
  }
  if (cfg.hidden_size < 1) throw std::invalid_argument("td3.hidden_size must be >= 1");
  if (!(cfg.learning_rate > 0.0)) {
    throw std::invalid_argument("td3.learning_rate must be > 0");
  }
  if (cfg.warmup_steps < 0) throw std::invalid_argument("td3.warmup_steps must be >= 0");
}

struct Transition {
  Eigen::VectorXd state;
  Eigen::VectorXd action;
  double reward = 0.0;
  Eigen::VectorXd next_state;
  bool done = false;  // true terminal only; time-limit cuts stay false
};

/// Uniform-overwrite ring buffer of transitions. Batches sample indices
/// without replacement.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw std::invalid_argument("buffer capacity must be > 0");
  }

  std::size_t capacity() const { return capacity_; }
  std::size_t size() const { return storage_.size(); }

  void push(Transition t) {
    if (storage_.size() < capacity_) {
      storage_.push_back(std::move(t));
    } else {
      storage_[write_cursor_] = std::move(t);
    }
    write_cursor_ = (write_cursor_ + 1) % capacity_;
  }

  const Transition& operator[](std::size_t i) const { return storage_[i]; }

  /// Distinct uniform indices via Floyd's sampling algorithm.
  std::vector<std::size_t> sample_indices(Rng& rng, int batch) const {
    if (static_cast<std::size_t>(batch) > storage_.size()) {
      throw std::logic_error("replay buffer holds fewer transitions than a batch");
    }
    const std::size_t n = storage_.size();
    std::vector<std::size_t> chosen;
    chosen.reserve(static_cast<std::size_t>(batch));
    for (std::size_t j = n - static_cast<std::size_t>(batch); j < n; ++j) {
      const std::size_t t = rng.uniform_index(j + 1);
      if (std::find(chosen.begin(), chosen.end(), t) == chosen.end()) {
        chosen.push_back(t);
      } else {
        chosen.push_back(j);
      }
    }
    return chosen;
  }

 private:
  std::size_t capacity_;
  std::size_t write_cursor_ = 0;
  std::vector<Transition> storage_;
};

/// tau * source + (1 - tau) * target, every parameter.
inline void polyak_update(DenseNet& target, const DenseNet& source, double tau) {
  if (target.layers.size() != source.layers.size()) {
    throw std::invalid_argument("polyak shapes do not match");
  }
  for (std::size_t l = 0; l < target.layers.size(); ++l) {
    target.layers[l].weights =
        tau * source.layers[l].weights + (1.0 - tau) * target.layers[l].weights;
    target.layers[l].bias =
        tau * source.layers[l].bias + (1.0 - tau) * target.layers[l].bias;
  }
}

/// Twin Delayed DDPG: twin critics regressing to the clipped double-Q
/// target with smoothed target actions, and an actor updated every
/// policy_delay-th critic step.
class Td3Agent {
 public:
  Td3Agent(int observation_dim, int action_dim, const Td3Config& cfg)
      : cfg_(cfg),
        obs_dim_(observation_dim),
        action_dim_(action_dim),
        rng_(Rng::derive(cfg.seed, 0x7d3)),
        buffer_(cfg.buffer_capacity) {
    validate(cfg);
    const std::vector<int> actor_dims = {obs_dim_, cfg.hidden_size,
                                         cfg.hidden_size, action_dim_};
    const std::vector<Activation> actor_acts = {
        Activation::kRelu, Activation::kRelu, Activation::kTanh};
    const std::vector<int> critic_dims = {obs_dim_ + action_dim_,
                                          cfg.hidden_size, cfg.hidden_size, 1};
    const std::vector<Activation> critic_acts = {
        Activation::kRelu, Activation::kRelu, Activation::kIdentity};
    actor_ = DenseNet::make(actor_dims, actor_acts, rng_, 0.1);
    critic1_ = DenseNet::make(critic_dims, critic_acts, rng_);
    critic2_ = DenseNet::make(critic_dims, critic_acts, rng_);
    target_actor_ = actor_;
    target_critic1_ = critic1_;
    target_critic2_ = critic2_;
    opt_actor_ = AdamState::zero_like(actor_);
    opt_critic1_ = AdamState::zero_like(critic1_);
    opt_critic2_ = AdamState::zero_like(critic2_);
    grads_critic1_ = Gradients::zero_like(critic1_);
    grads_critic2_ = Gradients::zero_like(critic2_);
    grads_actor_ = Gradients::zero_like(actor_);
  }

  const Td3Config& config() const { return cfg_; }
  ReplayBuffer& buffer() { return buffer_; }
  const ReplayBuffer& buffer() const { return buffer_; }
  const DenseNet& actor() const { return actor_; }
  const DenseNet& critic1() const { return critic1_; }
  const DenseNet& critic2() const { return critic2_; }
  const DenseNet& target_actor() const { return target_actor_; }
  const DenseNet& target_critic1() const { return target_critic1_; }
  const DenseNet& target_critic2() const { return target_critic2_; }
  DenseNet& mutable_actor() { return actor_; }
  DenseNet& mutable_critic1() { return critic1_; }
  DenseNet& mutable_critic2() { return critic2_; }
  DenseNet& mutable_target_actor() { return target_actor_; }
  DenseNet& mutable_target_critic1() { return target_critic1_; }
  DenseNet& mutable_target_critic2() { return target_critic2_; }
  long long critic_update_count() const { return critic_updates_; }
  long long actor_update_count() const { return actor_updates_; }
  Rng& rng() { return rng_; }

  /// Uniform random action in [-1, 1]^n, used during warmup.
  Eigen::VectorXd random_action() {
    Eigen::VectorXd a(action_dim_);
    for (int i = 0; i < action_dim_; ++i) a[i] = rng_.uniform(-1.0, 1.0);
    return a;
  }

  /// Deterministic policy plus optional Gaussian exploration noise, clamped
  /// to the action box.
  Eigen::VectorXd select_action(const Eigen::VectorXd& observation,
                                double noise_std) {
    if (observation.size() != obs_dim_) {
      throw std::invalid_argument("observation size mismatch");
    }
    Eigen::VectorXd a = forward_one(actor_, observation);
    if (noise_std > 0.0) {
      for (int i = 0; i < a.size(); ++i) a[i] += rng_.normal(0.0, noise_std);
    }
    return a.cwiseMax(-1.0).cwiseMin(1.0);
  }

  struct Batch {
    Eigen::MatrixXd states;       // obs x B
    Eigen::MatrixXd actions;      // act x B
    Eigen::RowVectorXd rewards;   // 1 x B
    Eigen::MatrixXd next_states;  // obs x B
    Eigen::RowVectorXd not_done;  // 1 x B
  };

  void sample_batch_into(Batch& b) {
    const auto idx = buffer_.sample_indices(rng_, cfg_.batch_size);
    const int n = cfg_.batch_size;
    b.states.resize(obs_dim_, n);
    b.actions.resize(action_dim_, n);
    b.rewards.resize(n);
    b.next_states.resize(obs_dim_, n);
    b.not_done.resize(n);
    for (int i = 0; i < n; ++i) {
      const Transition& t = buffer_[idx[static_cast<std::size_t>(i)]];
      b.states.col(i) = t.state;
      b.actions.col(i) = t.action;
      b.rewards[i] = t.reward;
      b.next_states.col(i) = t.next_state;
      b.not_done[i] = t.done ? 0.0 : 1.0;
    }
  }

  Batch sample_batch() {
    Batch b;
    sample_batch_into(b);
    return b;
  }

  struct CriticUpdateResult {
    double critic1_loss = 0.0;
    double critic2_loss = 0.0;
    double mean_target_q = 0.0;
    double min_target_q = 0.0;
    double max_target_q = 0.0;
  };

  /// One clipped-double-Q regression step on both critics. Intermediate
  /// storage lives in the agent, so steady-state updates do not allocate.
  CriticUpdateResult critic_update(const Batch& batch) {
    const int n = static_cast<int>(batch.states.cols());
    // Smoothed target action: clipped noise on the target policy, clamped to
    // the action box.
    forward_cached(target_actor_, batch.next_states, cache_target_actor_);
    Eigen::MatrixXd& target_actions = cache_target_actor_.post.back();
    noise_.resize(action_dim_, n);
    rng_.fill_normal(noise_.data(), static_cast<std::size_t>(noise_.size()),
                     cfg_.target_noise_std);
    target_actions += noise_.cwiseMax(-cfg_.target_noise_clip)
                          .cwiseMin(cfg_.target_noise_clip);
    target_actions = target_actions.cwiseMax(-1.0).cwiseMin(1.0);
    next_sa_.resize(obs_dim_ + action_dim_, n);
    next_sa_.topRows(obs_dim_) = batch.next_states;
    next_sa_.bottomRows(action_dim_) = target_actions;
    const auto& q1_next =
        forward_cached(target_critic1_, next_sa_, cache_target_critic1_);
    const auto& q2_next =
        forward_cached(target_critic2_, next_sa_, cache_target_critic2_);
    target_ = batch.rewards +
              cfg_.discount * batch.not_done.cwiseProduct(
                                  q1_next.row(0).cwiseMin(q2_next.row(0)));

    sa_.resize(obs_dim_ + action_dim_, n);
    sa_.topRows(obs_dim_) = batch.states;
    sa_.bottomRows(action_dim_) = batch.actions;

    CriticUpdateResult result;
    result.mean_target_q = target_.mean();
    result.min_target_q = target_.minCoeff();
    result.max_target_q = target_.maxCoeff();
    result.critic1_loss = regress_critic(critic1_, opt_critic1_, cache_critic1_,
                                         scratch_critic1_, grads_critic1_);
    result.critic2_loss = regress_critic(critic2_, opt_critic2_, cache_critic2_,
                                         scratch_critic2_, grads_critic2_);
    critic_updates_ += 1;
    return result;
  }

  /// Loss -mean Q1(s, actor(s)) and its gradient with respect to the actor
  /// parameters, with no update applied.
  std::pair<double, Gradients> actor_loss_gradients(const Batch& batch) const {
    const int n = static_cast<int>(batch.states.cols());
    ForwardCache actor_cache;
    const Eigen::MatrixXd pi = forward(actor_, batch.states, &actor_cache);
    Eigen::MatrixXd sa(obs_dim_ + action_dim_, n);
    sa.topRows(obs_dim_) = batch.states;
    sa.bottomRows(action_dim_) = pi;
    ForwardCache critic_cache;
    const Eigen::MatrixXd q = forward(critic1_, sa, &critic_cache);
    const double actor_loss = -q.mean();

    // dLoss/dQ = -1/n; push through the critic to its action inputs, then
    // through the actor.
    const Eigen::MatrixXd dq =
        Eigen::MatrixXd::Constant(1, n, -1.0 / static_cast<double>(n));
    Eigen::MatrixXd input_grad;
    backward(critic1_, critic_cache, dq, &input_grad);
    const Eigen::MatrixXd action_grad = input_grad.bottomRows(action_dim_);
    return {actor_loss, backward(actor_, actor_cache, action_grad)};
  }

  /// Delayed policy step: ascend mean Q1(s, actor(s)), then move all three
  /// targets by polyak averaging. Invoking it off the policy_delay schedule
  /// is a protocol error.
  double actor_update(const Batch& batch) {
    if (critic_updates_ == 0 || critic_updates_ % cfg_.policy_delay != 0 ||
        actor_updates_ * cfg_.policy_delay >= critic_updates_) {
      throw std::logic_error("actor_update invoked off the delayed schedule");
    }
    const int n = static_cast<int>(batch.states.cols());
    const auto& pi = forward_cached(actor_, batch.states, cache_actor_);
    sa_.resize(obs_dim_ + action_dim_, n);
    sa_.topRows(obs_dim_) = batch.states;
    sa_.bottomRows(action_dim_) = pi;
    const auto& q = forward_cached(critic1_, sa_, cache_actor_critic_);
    const double actor_loss = -q.mean();

    dq_.resize(1, n);
    dq_.setConstant(-1.0 / static_cast<double>(n));
    backward_into(critic1_, cache_actor_critic_, dq_, scratch_critic1_,
                  grads_critic1_, &input_grad_);
    action_grad_ = input_grad_.bottomRows(action_dim_);
    backward_into(actor_, cache_actor_, action_grad_, scratch_actor_,
                  grads_actor_);
    adam_step(actor_, grads_actor_, opt_actor_, cfg_.learning_rate);
    actor_updates_ += 1;

    polyak_update(target_actor_, actor_, cfg_.tau);
    polyak_update(target_critic1_, critic1_, cfg_.tau);
    polyak_update(target_critic2_, critic2_, cfg_.tau);
    return actor_loss;
  }

  struct UpdateStats {
    CriticUpdateResult critic;
    bool actor_updated = false;
    double actor_loss = 0.0;
  };

  /// One environment-step's worth of learning: a critic update, plus the
  /// delayed actor/target update when due. Refuses until the buffer holds a
  /// full batch.
  UpdateStats update() {
    if (buffer_.size() < static_cast<std::size_t>(cfg_.batch_size)) {
      throw std::logic_error("update refused: buffer smaller than batch");
    }
    UpdateStats stats;
    sample_batch_into(batch_);
    stats.critic = critic_update(batch_);
    if (critic_updates_ % cfg_.policy_delay == 0) {
      stats.actor_loss = actor_update(batch_);
      stats.actor_updated = true;
    }
    return stats;
  }

  bool can_update() const {
    return buffer_.size() >= static_cast<std::size_t>(cfg_.batch_size);
  }

  /// Serializes all six networks (actor, critics, targets) back to back in
  /// the neural checkpoint format.
  void save(std::ostream& os) const {
    save_network(os, actor_);
    save_network(os, critic1_);
    save_network(os, critic2_);
    save_network(os, target_actor_);
    save_network(os, target_critic1_);
    save_network(os, target_critic2_);
  }

  void load(std::istream& is) {
    DenseNet a = load_network(is);
    DenseNet c1 = load_network(is);
    DenseNet c2 = load_network(is);
    DenseNet ta = load_network(is);
    DenseNet tc1 = load_network(is);
    DenseNet tc2 = load_network(is);
    if (a.input_size() != obs_dim_ || a.output_size() != action_dim_ ||
        c1.input_size() != obs_dim_ + action_dim_) {
      throw std::runtime_error("checkpoint architecture mismatch");
    }
    actor_ = std::move(a);
    critic1_ = std::move(c1);
    critic2_ = std::move(c2);
    target_actor_ = std::move(ta);
    target_critic1_ = std::move(tc1);
    target_critic2_ = std::move(tc2);
  }

 private:
  /// Regression toward target_ on the sa_ batch already assembled by
  /// critic_update.
  double regress_critic(DenseNet& critic, AdamState& opt, ForwardCache& cache,
                        BackwardScratch& scratch, Gradients& grads) {
    const int n = static_cast<int>(sa_.cols());
    const auto& q = forward_cached(critic, sa_, cache);
    err_ = q.row(0) - target_;
    const double loss = err_.squaredNorm() / static_cast<double>(n);
    dq_ = (2.0 / static_cast<double>(n)) * err_;
    backward_into(critic, cache, dq_, scratch, grads);
    adam_step(critic, grads, opt, cfg_.learning_rate);
    return loss;
  }

  Td3Config cfg_;
  int obs_dim_;
  int action_dim_;
  Rng rng_;
  ReplayBuffer buffer_;
  DenseNet actor_, critic1_, critic2_;
  DenseNet target_actor_, target_critic1_, target_critic2_;
  AdamState opt_actor_, opt_critic1_, opt_critic2_;
  long long critic_updates_ = 0;
  long long actor_updates_ = 0;

  // Steady-state scratch: shapes are fixed per agent, so these allocate once.
  Batch batch_;
  ForwardCache cache_target_actor_, cache_target_critic1_, cache_target_critic2_;
  ForwardCache cache_critic1_, cache_critic2_, cache_actor_, cache_actor_critic_;
  BackwardScratch scratch_critic1_, scratch_critic2_, scratch_actor_;
  Gradients grads_critic1_, grads_critic2_, grads_actor_;
  Eigen::MatrixXd noise_, next_sa_, sa_, dq_, input_grad_, action_grad_;
  Eigen::RowVectorXd target_, err_;
};

}  // namespace grasplearn
