#include "lyapnav/neural.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lyapnav/error.hpp"
#include "lyapnav/kernels.hpp"
#include "lyapnav/rng.hpp"

namespace lyapnav::neural {
namespace {

std::vector<std::size_t> layer_offsets(const std::vector<std::size_t>& sizes) {
  std::vector<std::size_t> offsets;
  std::size_t offset = 0;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    offsets.push_back(offset);
    offset += sizes[l + 1] * sizes[l] + sizes[l + 1];
  }
  offsets.push_back(offset);
  return offsets;
}

void validate_sizes(const std::vector<std::size_t>& sizes) {
  if (sizes.size() < 2) {
    throw ConfigError("network needs at least an input and an output size, got " +
                      std::to_string(sizes.size()) + " sizes");
  }
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    if (sizes[i] == 0) throw ConfigError("layer size " + std::to_string(i) + " must be positive");
  }
}

inline double activate(Activation act, double z) {
  switch (act) {
    case Activation::identity:
      return z;
    case Activation::tanh:
      return std::tanh(z);
    case Activation::relu:
      return z > 0.0 ? z : 0.0;
  }
  return z;
}

// Derivative expressed through the activation's output.
inline double derivative_from_output(Activation act, double y) {
  switch (act) {
    case Activation::identity:
      return 1.0;
    case Activation::tanh:
      return 1.0 - y * y;
    case Activation::relu:
      return y > 0.0 ? 1.0 : 0.0;
  }
  return 1.0;
}

}  // namespace

void Batch::reset(std::size_t rows, std::size_t cols) {
  rows_ = rows;
  cols_ = cols;
  data_.assign(rows * cols, 0.0);
}

Mlp::Mlp(std::vector<std::size_t> layer_sizes, Activation hidden, Activation output)
    : layer_sizes_(std::move(layer_sizes)), hidden_(hidden), output_(output) {
  validate_sizes(layer_sizes_);
  offsets_ = layer_offsets(layer_sizes_);
  params_.assign(offsets_.back(), 0.0);
}

std::span<double> Mlp::weights(std::size_t layer) noexcept {
  return {params_.data() + weight_offset(layer), layer_sizes_[layer + 1] * layer_sizes_[layer]};
}
std::span<const double> Mlp::weights(std::size_t layer) const noexcept {
  return {params_.data() + weight_offset(layer), layer_sizes_[layer + 1] * layer_sizes_[layer]};
}
std::span<double> Mlp::biases(std::size_t layer) noexcept {
  return {params_.data() + bias_offset(layer), layer_sizes_[layer + 1]};
}
std::span<const double> Mlp::biases(std::size_t layer) const noexcept {
  return {params_.data() + bias_offset(layer), layer_sizes_[layer + 1]};
}

bool Mlp::same_architecture(const Mlp& other) const noexcept {
  return layer_sizes_ == other.layer_sizes_ && hidden_ == other.hidden_ &&
         output_ == other.output_;
}

GradientSet::GradientSet(const Mlp& net)
    : layer_sizes_(net.layer_sizes()),
      offsets_(layer_offsets(layer_sizes_)),
      values_(net.parameter_count(), 0.0) {}

std::span<double> GradientSet::weights(std::size_t layer) noexcept {
  return {values_.data() + offsets_[layer], layer_sizes_[layer + 1] * layer_sizes_[layer]};
}
std::span<const double> GradientSet::weights(std::size_t layer) const noexcept {
  return {values_.data() + offsets_[layer], layer_sizes_[layer + 1] * layer_sizes_[layer]};
}
std::span<double> GradientSet::biases(std::size_t layer) noexcept {
  return {values_.data() + offsets_[layer] + layer_sizes_[layer + 1] * layer_sizes_[layer],
          layer_sizes_[layer + 1]};
}
std::span<const double> GradientSet::biases(std::size_t layer) const noexcept {
  return {values_.data() + offsets_[layer] + layer_sizes_[layer + 1] * layer_sizes_[layer],
          layer_sizes_[layer + 1]};
}

void GradientSet::zero() noexcept { std::fill(values_.begin(), values_.end(), 0.0); }

const Batch& forward_batch(const Mlp& net, const Batch& inputs, ForwardCache& cache) {
  if (inputs.cols() != net.input_size()) {
    throw DimensionError("network input", net.input_size(), inputs.cols());
  }
  const std::size_t layers = net.layer_count();
  const auto& sizes = net.layer_sizes();
  const std::size_t rows = inputs.rows();
  cache.activations.resize(layers + 1);
  cache.activations[0] = inputs;
  const auto& k = kernels::table();
  for (std::size_t l = 0; l < layers; ++l) {
    const std::size_t in = sizes[l];
    const std::size_t out = sizes[l + 1];
    const Activation act = net.activation(l);
    const Batch& x = cache.activations[l];
    Batch& y = cache.activations[l + 1];
    y.reset(rows, out);
    const double* w = net.weights(l).data();
    const auto bias = net.biases(l);
    for (std::size_t b = 0; b < rows; ++b) {
      const double* xb = x.row(b).data();
      double* yb = y.row(b).data();
      for (std::size_t o = 0; o < out; ++o) {
        yb[o] = activate(act, k.dot(w + o * in, xb, in) + bias[o]);
      }
    }
  }
  return cache.activations[layers];
}

void backward_batch(const Mlp& net, ForwardCache& cache, const Batch& upstream,
                    GradientSet* grads, Batch* input_grads) {
  const std::size_t layers = net.layer_count();
  const auto& sizes = net.layer_sizes();
  if (cache.activations.size() != layers + 1 || cache.activations[0].cols() != sizes[0]) {
    throw UsageError("backward_batch called without a matching forward_batch");
  }
  const std::size_t rows = cache.activations[0].rows();
  if (upstream.cols() != net.output_size()) {
    throw DimensionError("upstream gradient", net.output_size(), upstream.cols());
  }
  if (upstream.rows() != rows) throw DimensionError("upstream batch rows", rows, upstream.rows());
  if (grads != nullptr && !grads->matches(net)) {
    throw ConfigError("gradient set does not mirror the network's parameter shapes");
  }
  const auto& k = kernels::table();

  // delta holds d(loss)/d(pre-activation) of the current layer.
  Batch& delta = cache.delta;
  delta.reset(rows, net.output_size());
  {
    const Batch& y = cache.activations[layers];
    const Activation act = net.output_activation();
    for (std::size_t b = 0; b < rows; ++b) {
      for (std::size_t o = 0; o < net.output_size(); ++o) {
        delta.at(b, o) = upstream.at(b, o) * derivative_from_output(act, y.at(b, o));
      }
    }
  }

  for (std::size_t l = layers; l-- > 0;) {
    const std::size_t in = sizes[l];
    const std::size_t out = sizes[l + 1];
    const Batch& x = cache.activations[l];
    if (grads != nullptr) {
      double* gw = grads->weights(l).data();
      auto gb = grads->biases(l);
      for (std::size_t b = 0; b < rows; ++b) {
        const double* xb = x.row(b).data();
        for (std::size_t o = 0; o < out; ++o) {
          const double d = delta.at(b, o);
          if (d == 0.0) continue;
          k.axpy(d, xb, gw + o * in, in);
          gb[o] += d;
        }
      }
    }
    const bool need_input = l > 0 || input_grads != nullptr;
    if (!need_input) break;
    Batch& next = cache.delta_next;
    next.reset(rows, in);
    const double* w = net.weights(l).data();
    for (std::size_t b = 0; b < rows; ++b) {
      double* nb = next.row(b).data();
      for (std::size_t o = 0; o < out; ++o) {
        const double d = delta.at(b, o);
        if (d == 0.0) continue;
        k.axpy(d, w + o * in, nb, in);
      }
    }
    if (l == 0) {
      *input_grads = next;
      break;
    }
    const Activation act = net.hidden_activation();
    for (std::size_t b = 0; b < rows; ++b) {
      for (std::size_t i = 0; i < in; ++i) {
        next.at(b, i) *= derivative_from_output(act, x.at(b, i));
      }
    }
    std::swap(cache.delta, cache.delta_next);
  }
}

std::vector<double> mlp_forward(const Mlp& net, std::span<const double> input) {
  if (input.size() != net.input_size()) {
    throw DimensionError("network input", net.input_size(), input.size());
  }
  Batch in(1, input.size());
  std::copy(input.begin(), input.end(), in.row(0).begin());
  ForwardCache cache;
  const Batch& out = forward_batch(net, in, cache);
  return {out.row(0).begin(), out.row(0).end()};
}

BackwardResult mlp_backward(const Mlp& net, std::span<const double> input,
                            std::span<const double> upstream_grad) {
  if (input.size() != net.input_size()) {
    throw DimensionError("network input", net.input_size(), input.size());
  }
  if (upstream_grad.size() != net.output_size()) {
    throw DimensionError("upstream gradient", net.output_size(), upstream_grad.size());
  }
  Batch in(1, input.size());
  std::copy(input.begin(), input.end(), in.row(0).begin());
  Batch up(1, upstream_grad.size());
  std::copy(upstream_grad.begin(), upstream_grad.end(), up.row(0).begin());
  ForwardCache cache;
  forward_batch(net, in, cache);
  BackwardResult result{GradientSet(net), {}};
  Batch input_grad;
  backward_batch(net, cache, up, &result.grads, &input_grad);
  result.input_grad.assign(input_grad.row(0).begin(), input_grad.row(0).end());
  return result;
}

Mlp init_mlp(std::vector<std::size_t> layer_sizes, Activation hidden, Activation output,
             std::uint64_t seed) {
  Mlp net(std::move(layer_sizes), hidden, output);
  Rng rng(seed);
  for (std::size_t l = 0; l < net.layer_count(); ++l) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(net.layer_sizes()[l]));
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (double& w : net.weights(l)) w = dist(rng);
  }
  return net;
}

AdamState::AdamState(std::size_t parameter_count, AdamConfig config)
    : config_(config), first_moment_(parameter_count, 0.0), second_moment_(parameter_count, 0.0) {
  if (!(config.learning_rate > 0.0)) throw ConfigError("adam learning_rate must be > 0");
  if (!(config.beta1 >= 0.0 && config.beta1 < 1.0)) throw ConfigError("adam beta1 must be in [0,1)");
  if (!(config.beta2 >= 0.0 && config.beta2 < 1.0)) throw ConfigError("adam beta2 must be in [0,1)");
  if (!(config.epsilon > 0.0)) throw ConfigError("adam epsilon must be > 0");
}

void adam_step(AdamState& state, std::span<double> params, std::span<const double> grads) {
  if (params.size() != state.size()) throw DimensionError("adam parameters", state.size(), params.size());
  if (grads.size() != state.size()) throw DimensionError("adam gradients", state.size(), grads.size());
  for (std::size_t i = 0; i < grads.size(); ++i) {
    if (!std::isfinite(grads[i])) {
      throw NumericError("non-finite gradient entry at index " + std::to_string(i));
    }
  }
  ++state.step_count_;
  const auto& cfg = state.config_;
  const double t = static_cast<double>(state.step_count_);
  const kernels::AdamCoefficients c{cfg.learning_rate,
                                    cfg.beta1,
                                    cfg.beta2,
                                    cfg.epsilon,
                                    1.0 - std::pow(cfg.beta1, t),
                                    1.0 - std::pow(cfg.beta2, t)};
  kernels::adam_update(c, grads, state.first_moment_, state.second_moment_, params);
}

void adam_step(AdamState& state, Mlp& net, const GradientSet& grads) {
  if (!grads.matches(net)) {
    throw ConfigError("gradient set does not mirror the network's parameter shapes");
  }
  adam_step(state, net.parameters(), grads.values());
}

void soft_update(Mlp& target, const Mlp& source, double tau) {
  if (!target.same_architecture(source)) {
    throw ConfigError("soft_update requires identical architectures");
  }
  if (!(tau > 0.0 && tau <= 1.0)) throw ConfigError("soft_update tau must be in (0, 1]");
  kernels::lerp(tau, source.parameters(), target.parameters());
}

}  // namespace lyapnav::neural
