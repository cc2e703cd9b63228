#pragma once

// Proximal policy optimization with a diagonal Gaussian policy over the
// normalized action box [-1, 1]^2, a separate value network, the clipped
// surrogate objective, and finite-horizon advantages on (optionally shaped)
// rewards.

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "lyapnav/envsim.hpp"
#include "lyapnav/episode_log.hpp"
#include "lyapnav/neural.hpp"
#include "lyapnav/rng.hpp"
#include "lyapnav/shaping.hpp"

namespace lyapnav::ppo {

using State = std::array<double, envsim::kStateDim>;
using NormalizedAction = std::array<double, envsim::kActionDim>;

inline constexpr double kLogStdMin = -5.0;
inline constexpr double kLogStdMax = 2.0;

struct PpoConfig {
  std::size_t horizon = 2048;          // T
  std::size_t parallel_segments = 1;   // N
  std::size_t epochs = 10;             // K
  std::size_t minibatch_size = 32;     // M <= N * T
  double clip_epsilon = 0.2;
  double gamma = 0.99;
  double value_coeff = 0.5;
  double entropy_coeff = 0.0;
  double initial_log_std = -0.5;
  bool normalize_advantages = true;
  std::vector<std::size_t> hidden_sizes{64, 64};
  neural::AdamConfig policy_optimizer{};
  neural::AdamConfig value_optimizer{};

  friend bool operator==(const PpoConfig&, const PpoConfig&) = default;
};

void validate(const PpoConfig& cfg);

struct GaussianPolicy {
  GaussianPolicy(const PpoConfig& cfg, std::uint64_t seed);

  neural::Mlp mean_net;    // 26 -> hidden -> 2, tanh output
  std::array<double, envsim::kActionDim> log_std{};
  neural::Mlp value_net;   // 26 -> hidden -> 1

  NormalizedAction mean(std::span<const double> state) const;
  double value(std::span<const double> state) const;
};

/// Diagonal Gaussian log density summed over dimensions.
double gaussian_log_density(std::span<const double> mean, std::span<const double> log_std,
                            std::span<const double> action);

double log_prob(const GaussianPolicy& policy, std::span<const double> state,
                std::span<const double> action);

struct LogProbGradient {
  neural::GradientSet mean_net;
  std::array<double, envsim::kActionDim> log_std{};
};

/// d log_prob / d(policy parameters); the value net does not enter.
LogProbGradient log_prob_gradient(const GaussianPolicy& policy, std::span<const double> state,
                                  std::span<const double> action);

struct RolloutStep {
  State state{};
  NormalizedAction action{};  // sampled, before clamping to the action box
  double reward = 0.0;        // raw
  double shaped_reward = 0.0;
  double log_prob_old = 0.0;
  double value_estimate = 0.0;
  bool done = false;  // segment ends in goal or collision
};

/// Contiguous steps of a single episode inside a rollout.
struct Segment {
  std::size_t begin = 0;
  std::size_t end = 0;             // exclusive
  double bootstrap_value = 0.0;    // V(s_T); 0 after goal or collision
  bool episode_ended = false;
};

struct Rollout {
  std::vector<RolloutStep> steps;
  std::vector<Segment> segments;
  std::vector<EpisodeRecord> finished_episodes;
};

/// Persistent interaction state across rollouts: episodes may straddle collections.
class RolloutCollector {
 public:
  RolloutCollector(envsim::World world, std::uint64_t seed);

  /// Runs N * T steps (fewer if `episode_budget` episodes finish first). Shaped
  /// rewards are shape_trajectory of each segment's raw rewards.
  Rollout collect(const GaussianPolicy& policy, const PpoConfig& cfg,
                  const shaping::ShapingConfig& shaping, int episode_budget,
                  const EpisodeCallback& on_episode = {});

  int episodes_completed() const noexcept { return episodes_completed_; }

 private:
  void start_episode();

  envsim::World world_;
  std::uint64_t seed_;
  envsim::Environment env_;
  Rng rng_;
  State state_{};
  EpisodeRecord current_{};
  bool in_episode_ = false;
  int episodes_completed_ = 0;
};

/// Fresh collector: one rollout from reset, deterministic in seed.
Rollout collect_rollout(const GaussianPolicy& policy, const envsim::World& world,
                        const PpoConfig& cfg, const shaping::ShapingConfig& shaping,
                        std::uint64_t seed);

struct Advantages {
  std::vector<double> raw;         // before normalization
  std::vector<double> normalized;  // zero mean, unit variance (or raw if disabled)
  std::vector<double> returns;     // raw + value_estimate: value-head regression targets
};

/// Per segment: shaping::shaped_advantages over the stored shaped rewards (equal
/// to the raw rewards when shaping was disabled at collection) and the stored value
/// estimates plus bootstrap.
Advantages compute_advantages(const Rollout& rollout, double gamma, bool normalize = true);

/// min(ratio A, clip(ratio, 1 - eps, 1 + eps) A). Throws NumericError for ratio <= 0.
double clipped_loss(double ratio, double advantage, double epsilon);

struct TrainingSample {
  State state{};
  NormalizedAction action{};
  double log_prob_old = 0.0;
  double advantage = 0.0;
  double target_return = 0.0;
};

struct LossTerms {
  double total = 0.0;        // policy + value_coeff * value - entropy_coeff * entropy
  double policy = 0.0;       // -mean clipped objective
  double value = 0.0;        // mean squared error
  double entropy = 0.0;
  double mean_ratio = 0.0;
  double clip_fraction = 0.0;
};

LossTerms combined_loss(const GaussianPolicy& policy, std::span<const TrainingSample> batch,
                        const PpoConfig& cfg);

struct PolicyGradient {
  neural::GradientSet mean_net;
  std::array<double, envsim::kActionDim> log_std{};
  neural::GradientSet value_net;
  LossTerms loss;
};

PolicyGradient combined_loss_gradient(const GaussianPolicy& policy,
                                      std::span<const TrainingSample> batch, const PpoConfig& cfg);

struct PpoAgent {
  PpoAgent(const PpoConfig& cfg, std::uint64_t seed);

  GaussianPolicy policy;
  neural::AdamState mean_opt;
  neural::AdamState log_std_opt;
  neural::AdamState value_opt;
};

struct UpdateStats {
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double clip_fraction = 0.0;
  std::size_t optimizer_steps = 0;
};

/// K epochs of shuffled minibatches of size M, one Adam step each.
/// Throws ConfigError if M exceeds the rollout length.
UpdateStats ppo_update(PpoAgent& agent, const Rollout& rollout, const Advantages& advantages,
                       const PpoConfig& cfg, Rng& rng);

EpisodeLog train_ppo(const envsim::World& world, const PpoConfig& cfg,
                     const shaping::ShapingConfig& shaping, int episodes, std::uint64_t seed,
                     const EpisodeCallback& on_episode = {});

}  // namespace lyapnav::ppo
