#pragma once

// Deep deterministic policy gradient with target networks, uniform replay and
// Gaussian exploration. Actions are handled in normalized form u in [-1, 1]^2
// (the actor's tanh output); envsim::scale_action maps them to velocities.

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

namespace lyapnav::ddpg {

using State = std::array<double, envsim::kStateDim>;
using NormalizedAction = std::array<double, envsim::kActionDim>;

struct Transition {
  State state{};
  NormalizedAction action{};  // executed action, already inside [-1, 1]
  double reward = 0.0;        // raw
  double shaped_reward = 0.0;
  State next_state{};
  bool done = false;  // goal or collision; timeouts keep the bootstrap

  friend bool operator==(const Transition&, const Transition&) = default;
};

class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  void push(const Transition& t);
  std::size_t size() const noexcept { return count_; }
  std::size_t capacity() const noexcept { return storage_.size(); }
  std::size_t write_index() const noexcept { return write_index_; }
  const Transition& at(std::size_t slot) const;

  /// Slot indices drawn uniformly with replacement from occupied slots.
  std::vector<std::size_t> sample_indices(std::size_t n, Rng& rng) const;
  std::vector<Transition> sample(std::size_t n, Rng& rng) const;

  /// Oldest to newest.
  std::vector<Transition> contents() const;

 private:
  std::vector<Transition> storage_;
  std::size_t write_index_ = 0;
  std::size_t count_ = 0;
};

struct DdpgConfig {
  std::vector<std::size_t> hidden_sizes{64, 64};
  neural::AdamConfig actor_optimizer{};
  neural::AdamConfig critic_optimizer{};
  double gamma = 0.99;
  double tau = 0.005;
  double noise_scale = 0.1;  // std of exploration noise in normalized action units
  std::size_t batch_size = 32;
  std::size_t buffer_capacity = 100000;
  std::size_t warmup = 1000;

  friend bool operator==(const DdpgConfig&, const DdpgConfig&) = default;
};

void validate(const DdpgConfig& cfg);

class DdpgAgent {
 public:
  DdpgAgent(const DdpgConfig& cfg, std::uint64_t seed);

  const DdpgConfig& config() const noexcept { return cfg_; }

  neural::Mlp actor;          // 26 -> hidden -> 2, tanh output
  neural::Mlp critic;         // 28 -> hidden -> 1, identity output
  neural::Mlp target_actor;
  neural::Mlp target_critic;
  neural::AdamState actor_opt;
  neural::AdamState critic_opt;

  /// Deterministic actor output in normalized units.
  NormalizedAction act(std::span<const double> state) const;

 private:
  DdpgConfig cfg_;
};

/// Actor output plus optional Gaussian noise (std = noise_scale), clamped to [-1, 1].
NormalizedAction select_normalized_action(const DdpgAgent& agent, std::span<const double> state,
                                          bool explore, Rng& rng);

/// Same, on an observation, mapped onto the world's velocity bounds.
envsim::Action select_action(const DdpgAgent& agent, const envsim::Observation& obs,
                             const envsim::World& world, bool explore, Rng& rng);

/// Mean-squared TD regression toward r + gamma Q'(s', mu'(s')) (bootstrap dropped on done),
/// using shaped rewards when shaping is enabled. One Adam step; returns the pre-step loss.
double critic_update(DdpgAgent& agent, std::span<const Transition> batch,
                     const shaping::ShapingConfig& shaping);

/// Ascends mean Q(s, mu(s)) with one Adam step on the actor only; returns the pre-step
/// loss -mean Q.
double actor_update(DdpgAgent& agent, std::span<const Transition> batch);

/// Gradient of -mean Q(s, mu(s)) w.r.t. the actor parameters (no update).
neural::GradientSet actor_objective_gradient(const DdpgAgent& agent,
                                             std::span<const Transition> batch);

/// Mean Q(s, mu(s)) over the batch.
double actor_objective(const DdpgAgent& agent, std::span<const Transition> batch);

/// Soft update of both targets toward their sources.
void update_targets(DdpgAgent& agent);

EpisodeLog train_ddpg(const envsim::World& world, const DdpgConfig& cfg,
                      const shaping::ShapingConfig& shaping, int episodes, std::uint64_t seed,
                      const EpisodeCallback& on_episode = {});

}  // namespace lyapnav::ddpg
