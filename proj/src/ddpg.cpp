#include "lyapnav/ddpg.hpp"

#include <algorithm>
#include <chrono>
#include <optional>
#include <string>

#include "lyapnav/error.hpp"

namespace lyapnav::ddpg {
namespace {

using neural::Activation;
using neural::Batch;
using neural::ForwardCache;

constexpr std::size_t kCriticInput = envsim::kStateDim + envsim::kActionDim;

// Stream tags for derive_seed.
constexpr std::uint64_t kActorInit = 1;
constexpr std::uint64_t kCriticInit = 2;
constexpr std::uint64_t kTrainingStream = 3;
constexpr std::uint64_t kResetStream = 4;

std::vector<std::size_t> with_io(std::size_t in, const std::vector<std::size_t>& hidden,
                                 std::size_t out) {
  std::vector<std::size_t> sizes{in};
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(out);
  return sizes;
}

void require_nonempty(std::span<const Transition> batch, const char* what) {
  if (batch.empty()) throw UsageError(std::string(what) + ": empty minibatch");
}

Batch states_of(std::span<const Transition> batch, bool next) {
  Batch out(batch.size(), envsim::kStateDim);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const State& s = next ? batch[i].next_state : batch[i].state;
    std::copy(s.begin(), s.end(), out.row(i).begin());
  }
  return out;
}

Batch actions_of(std::span<const Transition> batch) {
  Batch out(batch.size(), envsim::kActionDim);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    std::copy(batch[i].action.begin(), batch[i].action.end(), out.row(i).begin());
  }
  return out;
}

// Critic input rows: [state, action].
Batch concat(const Batch& states, const Batch& actions) {
  Batch out(states.rows(), kCriticInput);
  for (std::size_t i = 0; i < states.rows(); ++i) {
    auto row = out.row(i);
    std::copy(states.row(i).begin(), states.row(i).end(), row.begin());
    std::copy(actions.row(i).begin(), actions.row(i).end(), row.begin() + envsim::kStateDim);
  }
  return out;
}

}  // namespace

ReplayBuffer::ReplayBuffer(std::size_t capacity) {
  if (capacity == 0) throw ConfigError("ddpg.buffer_capacity must be positive");
  storage_.resize(capacity);
}

void ReplayBuffer::push(const Transition& t) {
  storage_[write_index_] = t;
  write_index_ = (write_index_ + 1) % storage_.size();
  count_ = std::min(count_ + 1, storage_.size());
}

const Transition& ReplayBuffer::at(std::size_t slot) const {
  if (slot >= count_) throw UsageError("replay slot " + std::to_string(slot) + " is not occupied");
  return storage_[slot];
}

std::vector<std::size_t> ReplayBuffer::sample_indices(std::size_t n, Rng& rng) const {
  if (count_ == 0) throw UsageError("cannot sample from an empty replay buffer");
  std::uniform_int_distribution<std::size_t> pick(0, count_ - 1);
  std::vector<std::size_t> idx(n);
  for (auto& i : idx) i = pick(rng);
  return idx;
}

std::vector<Transition> ReplayBuffer::sample(std::size_t n, Rng& rng) const {
  std::vector<Transition> out;
  out.reserve(n);
  for (std::size_t i : sample_indices(n, rng)) out.push_back(storage_[i]);
  return out;
}

std::vector<Transition> ReplayBuffer::contents() const {
  std::vector<Transition> out;
  out.reserve(count_);
  const std::size_t start = count_ < storage_.size() ? 0 : write_index_;
  for (std::size_t k = 0; k < count_; ++k) out.push_back(storage_[(start + k) % storage_.size()]);
  return out;
}

void validate(const DdpgConfig& cfg) {
  if (cfg.hidden_sizes.empty()) throw ConfigError("ddpg.hidden_sizes must not be empty");
  for (std::size_t h : cfg.hidden_sizes) {
    if (h == 0) throw ConfigError("ddpg.hidden_sizes entries must be positive");
  }
  if (!(cfg.gamma > 0.0 && cfg.gamma <= 1.0)) throw ConfigError("gamma must be in (0, 1]");
  if (!(cfg.tau > 0.0 && cfg.tau <= 1.0)) throw ConfigError("ddpg.tau must be in (0, 1]");
  if (!(cfg.noise_scale >= 0.0)) throw ConfigError("ddpg.noise_scale must be >= 0");
  if (cfg.batch_size == 0) throw ConfigError("ddpg.batch_size must be positive");
  if (cfg.buffer_capacity == 0) throw ConfigError("ddpg.buffer_capacity must be positive");
  if (cfg.warmup > cfg.buffer_capacity) {
    throw ConfigError("ddpg.warmup must not exceed ddpg.buffer_capacity");
  }
}

DdpgAgent::DdpgAgent(const DdpgConfig& cfg, std::uint64_t seed)
    : actor(neural::init_mlp(with_io(envsim::kStateDim, cfg.hidden_sizes, envsim::kActionDim),
                             Activation::tanh, Activation::tanh, derive_seed(seed, {kActorInit}))),
      critic(neural::init_mlp(with_io(kCriticInput, cfg.hidden_sizes, 1), Activation::tanh,
                              Activation::identity, derive_seed(seed, {kCriticInit}))),
      target_actor(actor),
      target_critic(critic),
      actor_opt(actor, cfg.actor_optimizer),
      critic_opt(critic, cfg.critic_optimizer),
      cfg_(cfg) {
  validate(cfg);
}

NormalizedAction DdpgAgent::act(std::span<const double> state) const {
  const auto out = neural::mlp_forward(actor, state);
  return {out[0], out[1]};
}

NormalizedAction select_normalized_action(const DdpgAgent& agent, std::span<const double> state,
                                          bool explore, Rng& rng) {
  NormalizedAction u = agent.act(state);
  if (explore) {
    std::normal_distribution<double> noise(0.0, agent.config().noise_scale);
    for (double& x : u) x += noise(rng);
  }
  for (double& x : u) x = std::clamp(x, -1.0, 1.0);
  return u;
}

envsim::Action select_action(const DdpgAgent& agent, const envsim::Observation& obs,
                             const envsim::World& world, bool explore, Rng& rng) {
  const auto features = obs.features(world);
  const auto u = select_normalized_action(agent, features, explore, rng);
  return envsim::scale_action(u, world);
}

double critic_update(DdpgAgent& agent, std::span<const Transition> batch,
                     const shaping::ShapingConfig& shaping) {
  require_nonempty(batch, "critic_update");
  const std::size_t n = batch.size();
  const double gamma = agent.config().gamma;

  ForwardCache target_actor_cache, target_critic_cache, critic_cache;
  const Batch next_states = states_of(batch, true);
  const Batch next_actions = neural::forward_batch(agent.target_actor, next_states, target_actor_cache);
  const Batch& q_next = neural::forward_batch(
      agent.target_critic, concat(next_states, next_actions), target_critic_cache);

  std::vector<double> targets(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double r = shaping.enabled ? batch[i].shaped_reward : batch[i].reward;
    targets[i] = shaping::shaped_td_target(r, q_next.at(i, 0), batch[i].done, gamma);
  }

  const Batch& q = neural::forward_batch(
      agent.critic, concat(states_of(batch, false), actions_of(batch)), critic_cache);
  double loss = 0.0;
  Batch upstream(n, 1);
  for (std::size_t i = 0; i < n; ++i) {
    const double err = q.at(i, 0) - targets[i];
    loss += err * err;
    upstream.at(i, 0) = 2.0 * err / static_cast<double>(n);
  }
  loss /= static_cast<double>(n);

  neural::GradientSet grads(agent.critic);
  neural::backward_batch(agent.critic, critic_cache, upstream, &grads, nullptr);
  neural::adam_step(agent.critic_opt, agent.critic, grads);
  return loss;
}

namespace {

struct ActorPass {
  neural::GradientSet grads;
  double mean_q;
};

ActorPass actor_pass(const DdpgAgent& agent, std::span<const Transition> batch) {
  const std::size_t n = batch.size();
  ForwardCache actor_cache, critic_cache;
  const Batch states = states_of(batch, false);
  const Batch& actions = neural::forward_batch(agent.actor, states, actor_cache);
  const Batch& q = neural::forward_batch(agent.critic, concat(states, actions), critic_cache);
  double mean_q = 0.0;
  for (std::size_t i = 0; i < n; ++i) mean_q += q.at(i, 0);
  mean_q /= static_cast<double>(n);

  Batch upstream(n, 1);
  for (std::size_t i = 0; i < n; ++i) upstream.at(i, 0) = -1.0 / static_cast<double>(n);
  Batch critic_input_grad;
  neural::backward_batch(agent.critic, critic_cache, upstream, nullptr, &critic_input_grad);

  Batch action_grad(n, envsim::kActionDim);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < envsim::kActionDim; ++j) {
      action_grad.at(i, j) = critic_input_grad.at(i, envsim::kStateDim + j);
    }
  }
  ActorPass pass{neural::GradientSet(agent.actor), mean_q};
  neural::backward_batch(agent.actor, actor_cache, action_grad, &pass.grads, nullptr);
  return pass;
}

}  // namespace

double actor_objective(const DdpgAgent& agent, std::span<const Transition> batch) {
  require_nonempty(batch, "actor_objective");
  ForwardCache actor_cache, critic_cache;
  const Batch states = states_of(batch, false);
  const Batch& actions = neural::forward_batch(agent.actor, states, actor_cache);
  const Batch& q = neural::forward_batch(agent.critic, concat(states, actions), critic_cache);
  double mean_q = 0.0;
  for (std::size_t i = 0; i < batch.size(); ++i) mean_q += q.at(i, 0);
  return mean_q / static_cast<double>(batch.size());
}

neural::GradientSet actor_objective_gradient(const DdpgAgent& agent,
                                             std::span<const Transition> batch) {
  require_nonempty(batch, "actor_objective_gradient");
  return actor_pass(agent, batch).grads;
}

double actor_update(DdpgAgent& agent, std::span<const Transition> batch) {
  require_nonempty(batch, "actor_update");
  ActorPass pass = actor_pass(agent, batch);
  neural::adam_step(agent.actor_opt, agent.actor, pass.grads);
  return -pass.mean_q;
}

void update_targets(DdpgAgent& agent) {
  neural::soft_update(agent.target_actor, agent.actor, agent.config().tau);
  neural::soft_update(agent.target_critic, agent.critic, agent.config().tau);
}

EpisodeLog train_ddpg(const envsim::World& world, const DdpgConfig& cfg,
                      const shaping::ShapingConfig& shaping, int episodes, std::uint64_t seed,
                      const EpisodeCallback& on_episode) {
  if (episodes < 0) throw ConfigError("episodes must be >= 0");
  shaping::validate(shaping);
  const auto started = std::chrono::steady_clock::now();
  EpisodeLog log;
  log.seed = seed;
  log.algorithm = "ddpg";
  log.shaping = shaping.enabled;

  envsim::Environment env(world);
  DdpgAgent agent(cfg, seed);
  ReplayBuffer buffer(cfg.buffer_capacity);
  Rng rng(derive_seed(seed, {kTrainingStream}));

  auto finalize = [&](Transition& t, double r_next) {
    t.shaped_reward = shaping.enabled ? shaping::shape_reward(t.reward, r_next, shaping) : t.reward;
    buffer.push(t);
  };

  for (int ep = 0; ep < episodes; ++ep) {
    const auto first = env.reset(derive_seed(seed, {kResetStream, static_cast<std::uint64_t>(ep)}));
    State state = first.features(world);
    std::optional<Transition> pending;
    EpisodeRecord record{ep, 0.0, 0, envsim::Terminal::running};

    while (true) {
      const NormalizedAction u = select_normalized_action(agent, state, true, rng);
      const envsim::StepResult res = env.step(envsim::scale_action(u, world));
      record.reward += res.reward;
      ++record.steps;

      Transition t;
      t.state = state;
      t.action = u;
      t.reward = res.reward;
      t.next_state = res.observation.features(world);
      t.done = res.terminal == envsim::Terminal::goal_reached ||
               res.terminal == envsim::Terminal::collided;

      // Transition t-1 is finalized once r_t is known; the episode's last one uses 0.
      if (pending) finalize(*pending, t.reward);
      pending = t;
      if (res.terminal != envsim::Terminal::running) {
        finalize(*pending, 0.0);
        pending.reset();
      }

      if (buffer.size() >= std::max(cfg.warmup, std::size_t{1})) {
        const auto batch = buffer.sample(cfg.batch_size, rng);
        critic_update(agent, batch, shaping);
        actor_update(agent, batch);
        update_targets(agent);
      }

      state = t.next_state;
      if (res.terminal != envsim::Terminal::running) {
        record.terminal = res.terminal;
        break;
      }
    }
    log.episodes.push_back(record);
    if (on_episode) on_episode(record);
  }
  log.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return log;
}

}  // namespace lyapnav::ddpg
