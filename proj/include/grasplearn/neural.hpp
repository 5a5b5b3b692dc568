#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <functional>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "grasplearn/rng.hpp"

namespace grasplearn {

enum class Activation : std::uint8_t { kRelu = 0, kTanh = 1, kIdentity = 2 };

struct DenseLayer {
  Eigen::MatrixXd weights;  // out x in
  Eigen::VectorXd bias;     // out
  Activation activation = Activation::kIdentity;
};

/// Plain dense feed-forward network in double precision. Batches are stored
/// column-wise: a (dim x batch) matrix holds one sample per column.
struct DenseNet {
  std::vector<DenseLayer> layers;

  int input_size() const {
    return layers.empty() ? 0 : static_cast<int>(layers.front().weights.cols());
  }
  int output_size() const {
    return layers.empty() ? 0 : static_cast<int>(layers.back().weights.rows());
  }

  /// Uniform +-1/sqrt(fan_in) init; the last layer is scaled by
  /// final_layer_scale (used to keep initial policy outputs small).
  static DenseNet make(const std::vector<int>& dims,
                       const std::vector<Activation>& activations, Rng& rng,
                       double final_layer_scale = 1.0) {
    if (dims.size() < 2 || activations.size() != dims.size() - 1) {
      throw std::invalid_argument("network dims/activations mismatch");
    }
    DenseNet net;
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
      DenseLayer layer;
      const int in = dims[l];
      const int out = dims[l + 1];
      if (in < 1 || out < 1) throw std::invalid_argument("bad layer size");
      const double bound = 1.0 / std::sqrt(static_cast<double>(in));
      const double scale =
          l + 2 == dims.size() ? final_layer_scale : 1.0;
      layer.weights.resize(out, in);
      layer.bias.resize(out);
      for (int i = 0; i < out; ++i) {
        for (int j = 0; j < in; ++j) {
          layer.weights(i, j) = scale * rng.uniform(-bound, bound);
        }
        layer.bias[i] = scale * rng.uniform(-bound, bound);
      }
      layer.activation = activations[l];
      net.layers.push_back(std::move(layer));
    }
    return net;
  }
};

inline void validate(const DenseNet& net) {
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    const auto& layer = net.layers[l];
    if (layer.bias.size() != layer.weights.rows()) {
      throw std::invalid_argument("bias/weight row mismatch");
    }
    if (l > 0 &&
        net.layers[l - 1].weights.rows() != layer.weights.cols()) {
      throw std::invalid_argument("adjacent layer dimensions do not chain");
    }
    if (!layer.weights.allFinite() || !layer.bias.allFinite()) {
      throw std::invalid_argument("non-finite network parameter");
    }
  }
}

namespace detail {

inline void activate_in_place(Activation act, Eigen::MatrixXd& z) {
  switch (act) {
    case Activation::kRelu:
      z = z.cwiseMax(0.0);
      return;
    case Activation::kTanh:
      z.array() = z.array().tanh();
      return;
    case Activation::kIdentity:
      return;
  }
  throw std::invalid_argument("unknown activation");
}

/// Derivative expressed through the activated value a. This works for every
/// supported activation: relu's derivative is the a > 0 indicator (the kink
/// at exactly zero counts as zero slope), tanh' = 1 - a^2.
inline Eigen::ArrayXXd activation_derivative(Activation act,
                                             const Eigen::MatrixXd& a) {
  switch (act) {
    case Activation::kRelu:
      return (a.array() > 0.0).cast<double>();
    case Activation::kTanh:
      return 1.0 - a.array().square();
    case Activation::kIdentity:
      return Eigen::ArrayXXd::Ones(a.rows(), a.cols());
  }
  throw std::invalid_argument("unknown activation");
}

}  // namespace detail

/// Per-layer activated values kept for the backward pass. Reusing one cache
/// object across calls with identical shapes runs allocation-free: storage
/// is kept and assigned into.
struct ForwardCache {
  Eigen::MatrixXd input;
  std::vector<Eigen::MatrixXd> post;
};

inline Eigen::MatrixXd forward(const DenseNet& net, const Eigen::MatrixXd& input,
                               ForwardCache* cache = nullptr) {
  if (input.rows() != net.input_size()) {
    throw std::invalid_argument("input size does not match the first layer");
  }
  if (cache) {
    cache->input = input;
    cache->post.resize(net.layers.size());
    const Eigen::MatrixXd* current = &cache->input;
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
      const auto& layer = net.layers[l];
      Eigen::MatrixXd& z = cache->post[l];
      z.resize(layer.weights.rows(), current->cols());
      z.noalias() = layer.weights * (*current);
      z.colwise() += layer.bias;
      detail::activate_in_place(layer.activation, z);
      current = &z;
    }
    return *current;
  }
  Eigen::MatrixXd a = input;
  Eigen::MatrixXd z;
  for (const auto& layer : net.layers) {
    z.noalias() = layer.weights * a;
    z.colwise() += layer.bias;
    detail::activate_in_place(layer.activation, z);
    a.swap(z);
  }
  return a;
}

/// Forward whose result stays inside the cache (no return copy); the output
/// is cache.post.back().
inline const Eigen::MatrixXd& forward_cached(const DenseNet& net,
                                             const Eigen::MatrixXd& input,
                                             ForwardCache& cache) {
  if (input.rows() != net.input_size()) {
    throw std::invalid_argument("input size does not match the first layer");
  }
  cache.input = input;
  cache.post.resize(net.layers.size());
  const Eigen::MatrixXd* current = &cache.input;
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    const auto& layer = net.layers[l];
    Eigen::MatrixXd& z = cache.post[l];
    z.resize(layer.weights.rows(), current->cols());
    z.noalias() = layer.weights * (*current);
    z.colwise() += layer.bias;
    detail::activate_in_place(layer.activation, z);
    current = &z;
  }
  return cache.post.back();
}

/// Single-sample convenience wrapper.
inline Eigen::VectorXd forward_one(const DenseNet& net,
                                   const Eigen::VectorXd& input) {
  return forward(net, Eigen::MatrixXd(input), nullptr).col(0);
}

struct Gradients {
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> bias;

  static Gradients zero_like(const DenseNet& net) {
    Gradients g;
    for (const auto& layer : net.layers) {
      g.weights.emplace_back(
          Eigen::MatrixXd::Zero(layer.weights.rows(), layer.weights.cols()));
      g.bias.emplace_back(Eigen::VectorXd::Zero(layer.bias.size()));
    }
    return g;
  }

  bool all_finite() const {
    for (const auto& w : weights) {
      if (!w.allFinite()) return false;
    }
    for (const auto& b : bias) {
      if (!b.allFinite()) return false;
    }
    return true;
  }
};

/// Reverse-mode gradients of the affine/activation chain. output_grad holds
/// dLoss/dOutput, one column per sample; gradients sum over the batch. When
/// input_grad is non-null it receives dLoss/dInput (needed to push critic
/// gradients through the actor).
/// Reusable intermediate storage for backward passes.
struct BackwardScratch {
  std::vector<Eigen::MatrixXd> delta;
};

/// Reverse-mode pass writing into preallocated gradients and scratch, so
/// repeated same-shape calls do not allocate.
inline void backward_into(const DenseNet& net, const ForwardCache& cache,
                          const Eigen::MatrixXd& output_grad,
                          BackwardScratch& scratch, Gradients& grads,
                          Eigen::MatrixXd* input_grad = nullptr) {
  const std::size_t n = net.layers.size();
  if (cache.post.size() != n) {
    throw std::invalid_argument("stale forward cache");
  }
  if (output_grad.rows() != net.output_size() ||
      output_grad.cols() != cache.input.cols()) {
    throw std::invalid_argument("output gradient shape mismatch");
  }
  if (grads.weights.size() != n || grads.bias.size() != n) {
    throw std::invalid_argument("gradient buffers do not match the network");
  }
  scratch.delta.resize(n);
  scratch.delta[n - 1] = output_grad;
  for (std::size_t l = n; l-- > 0;) {
    const auto& layer = net.layers[l];
    Eigen::MatrixXd& delta = scratch.delta[l];
    delta.array() *=
        detail::activation_derivative(layer.activation, cache.post[l]);
    const Eigen::MatrixXd& below = l == 0 ? cache.input : cache.post[l - 1];
    grads.weights[l].resize(layer.weights.rows(), layer.weights.cols());
    grads.weights[l].noalias() = delta * below.transpose();
    grads.bias[l] = delta.rowwise().sum();
    if (l > 0) {
      scratch.delta[l - 1].resize(layer.weights.cols(), delta.cols());
      scratch.delta[l - 1].noalias() = layer.weights.transpose() * delta;
    } else if (input_grad) {
      input_grad->resize(layer.weights.cols(), delta.cols());
      input_grad->noalias() = layer.weights.transpose() * delta;
    }
  }
}

inline Gradients backward(const DenseNet& net, const ForwardCache& cache,
                          const Eigen::MatrixXd& output_grad,
                          Eigen::MatrixXd* input_grad = nullptr) {
  Gradients grads;
  grads.weights.resize(net.layers.size());
  grads.bias.resize(net.layers.size());
  BackwardScratch scratch;
  backward_into(net, cache, output_grad, scratch, grads, input_grad);
  return grads;
}

struct AdamState {
  std::vector<Eigen::MatrixXd> first_moment_w;
  std::vector<Eigen::MatrixXd> second_moment_w;
  std::vector<Eigen::VectorXd> first_moment_b;
  std::vector<Eigen::VectorXd> second_moment_b;
  long long timestep = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps_hat = 1e-8;

  static AdamState zero_like(const DenseNet& net) {
    AdamState s;
    for (const auto& layer : net.layers) {
      s.first_moment_w.emplace_back(
          Eigen::MatrixXd::Zero(layer.weights.rows(), layer.weights.cols()));
      s.second_moment_w.emplace_back(
          Eigen::MatrixXd::Zero(layer.weights.rows(), layer.weights.cols()));
      s.first_moment_b.emplace_back(Eigen::VectorXd::Zero(layer.bias.size()));
      s.second_moment_b.emplace_back(Eigen::VectorXd::Zero(layer.bias.size()));
    }
    return s;
  }
};

/// Bias-corrected Adam update. Rejects non-finite gradients before touching
/// any parameter.
inline void adam_step(DenseNet& net, const Gradients& grads, AdamState& state,
                      double learning_rate) {
  if (grads.weights.size() != net.layers.size()) {
    throw std::invalid_argument("gradient/network layer count mismatch");
  }
  if (!grads.all_finite()) {
    throw std::runtime_error("adam_step rejected non-finite gradients");
  }
  state.timestep += 1;
  const double t = static_cast<double>(state.timestep);
  const double correction1 = 1.0 - std::pow(state.beta1, t);
  const double correction2 = 1.0 - std::pow(state.beta2, t);
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    auto update = [&](auto& param, const auto& grad, auto& m, auto& v) {
      m = state.beta1 * m + (1.0 - state.beta1) * grad;
      v = (state.beta2 * v.array() +
           (1.0 - state.beta2) * grad.array().square())
              .matrix();
      const auto m_hat = m.array() / correction1;
      const auto v_hat = v.array() / correction2;
      param.array() -= learning_rate * m_hat / (v_hat.sqrt() + state.eps_hat);
    };
    update(net.layers[l].weights, grads.weights[l], state.first_moment_w[l],
           state.second_moment_w[l]);
    update(net.layers[l].bias, grads.bias[l], state.first_moment_b[l],
           state.second_moment_b[l]);
  }
}

/// Scalar loss functional on the network output: returns the loss and
/// dLoss/dOutput.
using LossFunctional =
    std::function<std::pair<double, Eigen::VectorXd>(const Eigen::VectorXd&)>;

/// Central-difference gradient verification. Returns the maximum relative
/// error over every parameter.
inline double grad_check(const DenseNet& net, const Eigen::VectorXd& input,
                         const LossFunctional& loss, double fd_step = 1e-5) {
  ForwardCache cache;
  const Eigen::VectorXd out = forward(net, Eigen::MatrixXd(input), &cache).col(0);
  const auto [loss0, dloss] = loss(out);
  (void)loss0;
  const Gradients analytic =
      backward(net, cache, Eigen::MatrixXd(dloss), nullptr);

  DenseNet probe = net;
  double max_rel_error = 0.0;
  auto probe_param = [&](double& value, double analytic_grad) {
    const double saved = value;
    value = saved + fd_step;
    const double up = loss(forward_one(probe, input)).first;
    value = saved - fd_step;
    const double down = loss(forward_one(probe, input)).first;
    value = saved;
    const double numeric = (up - down) / (2.0 * fd_step);
    const double rel = std::abs(analytic_grad - numeric) /
                       std::max(1e-8, std::abs(analytic_grad) + std::abs(numeric));
    max_rel_error = std::max(max_rel_error, rel);
  };
  for (std::size_t l = 0; l < probe.layers.size(); ++l) {
    auto& layer = probe.layers[l];
    for (int i = 0; i < layer.weights.rows(); ++i) {
      for (int j = 0; j < layer.weights.cols(); ++j) {
        probe_param(layer.weights(i, j), analytic.weights[l](i, j));
      }
    }
    for (int i = 0; i < layer.bias.size(); ++i) {
      probe_param(layer.bias[i], analytic.bias[l][i]);
    }
  }
  return max_rel_error;
}

// ---------------------------------------------------------------------------
// Checkpoint format: "GLNET1\n" magic, then little-endian fixed-width fields:
// u32 layer count; per layer u32 in, u32 out, u8 activation; then per layer
// the weight matrix (column-major) and bias as raw 64-bit floats. Round trips
// bit-exactly.
// ---------------------------------------------------------------------------

inline constexpr char kCheckpointMagic[8] = {'G', 'L', 'N', 'E',
                                             'T', '1', '\n', '\0'};

namespace detail {

template <typename T>
void write_raw(std::ostream& os, const T& value) {
  os.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_raw(std::istream& is) {
  T value;
  is.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!is) throw std::runtime_error("truncated checkpoint");
  return value;
}

}  // namespace detail

inline void save_network(std::ostream& os, const DenseNet& net) {
  os.write(kCheckpointMagic, sizeof(kCheckpointMagic));
  detail::write_raw(os, static_cast<std::uint32_t>(net.layers.size()));
  for (const auto& layer : net.layers) {
    detail::write_raw(os, static_cast<std::uint32_t>(layer.weights.cols()));
    detail::write_raw(os, static_cast<std::uint32_t>(layer.weights.rows()));
    detail::write_raw(os, static_cast<std::uint8_t>(layer.activation));
  }
  for (const auto& layer : net.layers) {
    os.write(reinterpret_cast<const char*>(layer.weights.data()),
             static_cast<std::streamsize>(sizeof(double) * layer.weights.size()));
    os.write(reinterpret_cast<const char*>(layer.bias.data()),
             static_cast<std::streamsize>(sizeof(double) * layer.bias.size()));
  }
  if (!os) throw std::runtime_error("checkpoint write failed");
}

inline DenseNet load_network(std::istream& is) {
  char magic[sizeof(kCheckpointMagic)];
  is.read(magic, sizeof(magic));
  if (!is || std::memcmp(magic, kCheckpointMagic, sizeof(magic)) != 0) {
    throw std::runtime_error("not a network checkpoint");
  }
  const auto layer_count = detail::read_raw<std::uint32_t>(is);
  if (layer_count > 1024) throw std::runtime_error("corrupt checkpoint header");
  DenseNet net;
  for (std::uint32_t l = 0; l < layer_count; ++l) {
    DenseLayer layer;
    const auto in = detail::read_raw<std::uint32_t>(is);
    const auto out = detail::read_raw<std::uint32_t>(is);
    const auto act = detail::read_raw<std::uint8_t>(is);
    if (act > 2) throw std::runtime_error("corrupt activation tag");
    layer.weights.resize(out, in);
    layer.bias.resize(out);
    layer.activation = static_cast<Activation>(act);
    net.layers.push_back(std::move(layer));
  }
  for (auto& layer : net.layers) {
    is.read(reinterpret_cast<char*>(layer.weights.data()),
            static_cast<std::streamsize>(sizeof(double) * layer.weights.size()));
    is.read(reinterpret_cast<char*>(layer.bias.data()),
            static_cast<std::streamsize>(sizeof(double) * layer.bias.size()));
  }
  if (!is) throw std::runtime_error("truncated checkpoint");
  validate(net);
  return net;
}

}  // namespace grasplearn
