#pragma once

// Dense feed-forward networks with hand-written reverse mode, Adam, and
// target-network blending. Parameters of one network live in a single
// contiguous buffer (per layer: row-major weights, then biases) so optimizer
// and blending passes run over one span through the SIMD kernels.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace lyapnav::neural {

enum class Activation { identity, tanh, relu };

/// Row-major batch of equally sized vectors.
class Batch {
 public:
  Batch() = default;
  Batch(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  std::span<double> row(std::size_t i) noexcept { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const noexcept {
    return {data_.data() + i * cols_, cols_};
  }
  double& at(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
  double at(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

  std::span<double> values() noexcept { return data_; }
  std::span<const double> values() const noexcept { return data_; }

  /// Reshapes, keeping capacity; contents are zeroed.
  void reset(std::size_t rows, std::size_t cols);

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

class Mlp {
 public:
  /// Zero-initialized network. Throws ConfigError for fewer than two sizes or a zero size.
  Mlp(std::vector<std::size_t> layer_sizes, Activation hidden, Activation output);

  const std::vector<std::size_t>& layer_sizes() const noexcept { return layer_sizes_; }
  std::size_t layer_count() const noexcept { return layer_sizes_.size() - 1; }
  std::size_t input_size() const noexcept { return layer_sizes_.front(); }
  std::size_t output_size() const noexcept { return layer_sizes_.back(); }
  Activation hidden_activation() const noexcept { return hidden_; }
  Activation output_activation() const noexcept { return output_; }
  Activation activation(std::size_t layer) const noexcept {
    return layer + 1 == layer_count() ? output_ : hidden_;
  }

  std::size_t parameter_count() const noexcept { return params_.size(); }
  std::span<double> parameters() noexcept { return params_; }
  std::span<const double> parameters() const noexcept { return params_; }

  /// Row-major (out x in) weight block of `layer`.
  std::span<double> weights(std::size_t layer) noexcept;
  std::span<const double> weights(std::size_t layer) const noexcept;
  std::span<double> biases(std::size_t layer) noexcept;
  std::span<const double> biases(std::size_t layer) const noexcept;

  std::size_t weight_offset(std::size_t layer) const noexcept { return offsets_[layer]; }
  std::size_t bias_offset(std::size_t layer) const noexcept {
    return offsets_[layer] + layer_sizes_[layer + 1] * layer_sizes_[layer];
  }

  bool same_architecture(const Mlp& other) const noexcept;

  friend bool operator==(const Mlp&, const Mlp&) = default;

 private:
  std::vector<std::size_t> layer_sizes_;
  Activation hidden_;
  Activation output_;
  std::vector<std::size_t> offsets_;
  std::vector<double> params_;
};

/// Gradients with exactly the parameter layout of the network they were made for.
class GradientSet {
 public:
  explicit GradientSet(const Mlp& net);

  std::span<double> values() noexcept { return values_; }
  std::span<const double> values() const noexcept { return values_; }
  std::span<double> weights(std::size_t layer) noexcept;
  std::span<const double> weights(std::size_t layer) const noexcept;
  std::span<double> biases(std::size_t layer) noexcept;
  std::span<const double> biases(std::size_t layer) const noexcept;

  const std::vector<std::size_t>& layer_sizes() const noexcept { return layer_sizes_; }
  bool matches(const Mlp& net) const noexcept { return net.layer_sizes() == layer_sizes_; }
  void zero() noexcept;

 private:
  std::vector<std::size_t> layer_sizes_;
  std::vector<std::size_t> offsets_;
  std::vector<double> values_;
};

/// Per-layer activations kept from forward_batch for backward_batch, plus scratch.
struct ForwardCache {
  std::vector<Batch> activations;  // [0] = input, [layer_count] = output
  Batch delta;
  Batch delta_next;
};

/// Evaluates a batch; the returned reference points into `cache`.
const Batch& forward_batch(const Mlp& net, const Batch& inputs, ForwardCache& cache);

/// Reverse pass for the batch most recently run through `cache`. Accumulates
/// d(sum_b upstream_b . output_b)/d(params) into `grads` and writes the input
/// gradient into `input_grads` (each may be null to skip).
void backward_batch(const Mlp& net, ForwardCache& cache, const Batch& upstream,
                    GradientSet* grads, Batch* input_grads);

std::vector<double> mlp_forward(const Mlp& net, std::span<const double> input);

struct BackwardResult {
  GradientSet grads;
  std::vector<double> input_grad;
};

BackwardResult mlp_backward(const Mlp& net, std::span<const double> input,
                            std::span<const double> upstream_grad);

/// Weights ~ U[-1/sqrt(fan_in), +1/sqrt(fan_in)], biases zero, reproducible from seed.
Mlp init_mlp(std::vector<std::size_t> layer_sizes, Activation hidden, Activation output,
             std::uint64_t seed);

struct AdamConfig {
  double learning_rate = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  friend bool operator==(const AdamConfig&, const AdamConfig&) = default;
};

class AdamState {
 public:
  AdamState(std::size_t parameter_count, AdamConfig config);
  AdamState(const Mlp& net, AdamConfig config) : AdamState(net.parameter_count(), config) {}

  const AdamConfig& config() const noexcept { return config_; }
  std::uint64_t step_count() const noexcept { return step_count_; }
  std::span<const double> first_moment() const noexcept { return first_moment_; }
  std::span<const double> second_moment() const noexcept { return second_moment_; }
  std::size_t size() const noexcept { return first_moment_.size(); }

  friend void adam_step(AdamState& state, std::span<double> params,
                        std::span<const double> grads);

 private:
  AdamConfig config_;
  std::uint64_t step_count_ = 0;
  std::vector<double> first_moment_;
  std::vector<double> second_moment_;
};

/// One bias-corrected Adam step in place. Rejects shape mismatch and non-finite gradients
/// before touching any state.
void adam_step(AdamState& state, std::span<double> params, std::span<const double> grads);
void adam_step(AdamState& state, Mlp& net, const GradientSet& grads);

/// target <- (1 - tau) target + tau source, tau in (0, 1].
void soft_update(Mlp& target, const Mlp& source, double tau);

}  // namespace lyapnav::neural
