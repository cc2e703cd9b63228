#include "lyapnav/ppo.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <limits>
#include <numeric>
#include <string>

#include "lyapnav/error.hpp"

namespace lyapnav::ppo {
namespace {

using neural::Activation;
using neural::Batch;
using neural::ForwardCache;

constexpr std::uint64_t kMeanInit = 1;
constexpr std::uint64_t kValueInit = 2;
constexpr std::uint64_t kActionStream = 3;
constexpr std::uint64_t kResetStream = 4;
constexpr std::uint64_t kShuffleStream = 5;

const double kHalfLogTwoPi = 0.5 * std::log(2.0 * std::numbers::pi);

std::vector<std::size_t> with_io(std::size_t in, const std::vector<std::size_t>& hidden,
                                 std::size_t out) {
  std::vector<std::size_t> sizes{in};
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(out);
  return sizes;
}

Batch states_of(std::span<const TrainingSample> batch) {
  Batch out(batch.size(), envsim::kStateDim);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    std::copy(batch[i].state.begin(), batch[i].state.end(), out.row(i).begin());
  }
  return out;
}

double clip(double x, double lo, double hi) { return std::clamp(x, lo, hi); }

// Shared forward work for the loss and its gradient.
struct LossPass {
  ForwardCache mean_cache;
  ForwardCache value_cache;
  std::vector<double> ratio;
  std::vector<double> advantage;
  std::vector<bool> unclipped_active;
  LossTerms terms;
};

LossPass loss_pass(const GaussianPolicy& policy, std::span<const TrainingSample> batch,
                   const PpoConfig& cfg) {
  if (batch.empty()) throw UsageError("PPO loss on an empty minibatch");
  const std::size_t n = batch.size();
  const double inv_n = 1.0 / static_cast<double>(n);
  LossPass pass;
  const Batch states = states_of(batch);
  const Batch& means = neural::forward_batch(policy.mean_net, states, pass.mean_cache);
  const Batch& values = neural::forward_batch(policy.value_net, states, pass.value_cache);
  pass.ratio.resize(n);
  pass.advantage.resize(n);
  pass.unclipped_active.resize(n);
  double objective = 0.0;
  double value_loss = 0.0;
  std::size_t clipped = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double lp = gaussian_log_density(means.row(i), policy.log_std, batch[i].action);
    const double ratio = std::exp(lp - batch[i].log_prob_old);
    const double a = batch[i].advantage;
    const double unclipped = ratio * a;
    const double clipped_term = clip(ratio, 1.0 - cfg.clip_epsilon, 1.0 + cfg.clip_epsilon) * a;
    pass.ratio[i] = ratio;
    pass.advantage[i] = a;
    pass.unclipped_active[i] = unclipped <= clipped_term;
    if (!pass.unclipped_active[i]) ++clipped;
    objective += std::min(unclipped, clipped_term);
    const double err = values.at(i, 0) - batch[i].target_return;
    value_loss += err * err;
    pass.terms.mean_ratio += ratio;
  }
  double entropy = 0.0;
  for (double ls : policy.log_std) entropy += 0.5 + kHalfLogTwoPi + ls;
  pass.terms.policy = -objective * inv_n;
  pass.terms.value = value_loss * inv_n;
  pass.terms.entropy = entropy;
  pass.terms.mean_ratio *= inv_n;
  pass.terms.clip_fraction = static_cast<double>(clipped) * inv_n;
  pass.terms.total =
      pass.terms.policy + cfg.value_coeff * pass.terms.value - cfg.entropy_coeff * entropy;
  return pass;
}

}  // namespace

void validate(const PpoConfig& cfg) {
  if (cfg.horizon == 0) throw ConfigError("ppo.horizon must be positive");
  if (cfg.parallel_segments == 0) throw ConfigError("ppo.parallel_segments must be positive");
  if (cfg.epochs == 0) throw ConfigError("ppo.epochs must be positive");
  if (cfg.minibatch_size == 0) throw ConfigError("ppo.minibatch_size must be positive");
  if (cfg.minibatch_size > cfg.horizon * cfg.parallel_segments) {
    throw ConfigError("ppo.minibatch_size (" + std::to_string(cfg.minibatch_size) +
                      ") must not exceed ppo.horizon * ppo.parallel_segments (" +
                      std::to_string(cfg.horizon * cfg.parallel_segments) + ")");
  }
  if (!(cfg.clip_epsilon > 0.0 && cfg.clip_epsilon < 1.0)) {
    throw ConfigError("ppo.clip_epsilon must be in (0, 1)");
  }
  if (!(cfg.gamma > 0.0 && cfg.gamma <= 1.0)) throw ConfigError("gamma must be in (0, 1]");
  if (!(cfg.value_coeff >= 0.0)) throw ConfigError("ppo.value_coeff must be >= 0");
  if (!(cfg.entropy_coeff >= 0.0)) throw ConfigError("ppo.entropy_coeff must be >= 0");
  if (!(cfg.initial_log_std >= kLogStdMin && cfg.initial_log_std <= kLogStdMax)) {
    throw ConfigError("ppo.initial_log_std must be in [-5, 2]");
  }
  if (cfg.hidden_sizes.empty()) throw ConfigError("ppo.hidden_sizes must not be empty");
}

GaussianPolicy::GaussianPolicy(const PpoConfig& cfg, std::uint64_t seed)
    : mean_net(neural::init_mlp(with_io(envsim::kStateDim, cfg.hidden_sizes, envsim::kActionDim),
                                Activation::tanh, Activation::tanh, derive_seed(seed, {kMeanInit}))),
      value_net(neural::init_mlp(with_io(envsim::kStateDim, cfg.hidden_sizes, 1), Activation::tanh,
                                 Activation::identity, derive_seed(seed, {kValueInit}))) {
  log_std.fill(cfg.initial_log_std);
}

NormalizedAction GaussianPolicy::mean(std::span<const double> state) const {
  const auto out = neural::mlp_forward(mean_net, state);
  return {out[0], out[1]};
}

double GaussianPolicy::value(std::span<const double> state) const {
  return neural::mlp_forward(value_net, state)[0];
}

double gaussian_log_density(std::span<const double> mean, std::span<const double> log_std,
                            std::span<const double> action) {
  if (mean.size() != action.size()) throw DimensionError("action", mean.size(), action.size());
  if (log_std.size() != action.size()) throw DimensionError("log_std", action.size(), log_std.size());
  double lp = 0.0;
  for (std::size_t d = 0; d < action.size(); ++d) {
    const double z = (action[d] - mean[d]) / std::exp(log_std[d]);
    lp += -0.5 * z * z - log_std[d] - kHalfLogTwoPi;
  }
  return lp;
}

double log_prob(const GaussianPolicy& policy, std::span<const double> state,
                std::span<const double> action) {
  return gaussian_log_density(policy.mean(state), policy.log_std, action);
}

LogProbGradient log_prob_gradient(const GaussianPolicy& policy, std::span<const double> state,
                                  std::span<const double> action) {
  const auto mu = policy.mean(state);
  if (action.size() != envsim::kActionDim) {
    throw DimensionError("action", envsim::kActionDim, action.size());
  }
  std::array<double, envsim::kActionDim> dmu{};
  LogProbGradient out{neural::GradientSet(policy.mean_net), {}};
  for (std::size_t d = 0; d < envsim::kActionDim; ++d) {
    const double sigma = std::exp(policy.log_std[d]);
    const double z = (action[d] - mu[d]) / sigma;
    dmu[d] = z / sigma;
    out.log_std[d] = z * z - 1.0;
  }
  out.mean_net = neural::mlp_backward(policy.mean_net, state, dmu).grads;
  return out;
}

RolloutCollector::RolloutCollector(envsim::World world, std::uint64_t seed)
    : world_(std::move(world)),
      seed_(seed),
      env_(world_),
      rng_(derive_seed(seed, {kActionStream})) {}

void RolloutCollector::start_episode() {
  const auto obs = env_.reset(
      derive_seed(seed_, {kResetStream, static_cast<std::uint64_t>(episodes_completed_)}));
  state_ = obs.features(world_);
  current_ = EpisodeRecord{episodes_completed_, 0.0, 0, envsim::Terminal::running};
  in_episode_ = true;
}

Rollout RolloutCollector::collect(const GaussianPolicy& policy, const PpoConfig& cfg,
                                  const shaping::ShapingConfig& shaping, int episode_budget,
                                  const EpisodeCallback& on_episode) {
  validate(cfg);
  shaping::validate(shaping);
  Rollout rollout;
  const std::size_t total = cfg.horizon * cfg.parallel_segments;
  rollout.steps.reserve(total);
  std::normal_distribution<double> unit(0.0, 1.0);
  std::size_t segment_begin = 0;

  auto close_segment = [&](double bootstrap, bool ended) {
    if (rollout.steps.size() == segment_begin) return;
    Segment seg{segment_begin, rollout.steps.size(), bootstrap, ended};
    std::vector<double> raw;
    raw.reserve(seg.end - seg.begin);
    for (std::size_t i = seg.begin; i < seg.end; ++i) raw.push_back(rollout.steps[i].reward);
    const auto shaped = shaping::shape_trajectory(raw, shaping);
    for (std::size_t i = seg.begin; i < seg.end; ++i) {
      rollout.steps[i].shaped_reward = shaped[i - seg.begin];
    }
    rollout.segments.push_back(seg);
    segment_begin = rollout.steps.size();
  };

  while (rollout.steps.size() < total && episodes_completed_ < episode_budget) {
    if (!in_episode_) start_episode();
    RolloutStep step;
    step.state = state_;
    const auto mu = policy.mean(state_);
    NormalizedAction clamped{};
    for (std::size_t d = 0; d < envsim::kActionDim; ++d) {
      step.action[d] = mu[d] + std::exp(policy.log_std[d]) * unit(rng_);
      clamped[d] = std::clamp(step.action[d], -1.0, 1.0);
    }
    step.log_prob_old = gaussian_log_density(mu, policy.log_std, step.action);
    step.value_estimate = policy.value(state_);
    const auto res = env_.step(envsim::scale_action(clamped, world_));
    step.reward = res.reward;
    step.done = res.terminal == envsim::Terminal::goal_reached ||
                res.terminal == envsim::Terminal::collided;
    rollout.steps.push_back(step);
    current_.reward += res.reward;
    ++current_.steps;
    state_ = res.observation.features(world_);

    const bool segment_boundary = rollout.steps.size() % cfg.horizon == 0;
    if (res.terminal != envsim::Terminal::running) {
      current_.terminal = res.terminal;
      close_segment(step.done ? 0.0 : policy.value(state_), true);
      rollout.finished_episodes.push_back(current_);
      ++episodes_completed_;
      in_episode_ = false;
      if (on_episode) on_episode(current_);
    } else if (segment_boundary) {
      close_segment(policy.value(state_), false);
    }
  }
  if (in_episode_) close_segment(policy.value(state_), false);
  return rollout;
}

Rollout collect_rollout(const GaussianPolicy& policy, const envsim::World& world,
                        const PpoConfig& cfg, const shaping::ShapingConfig& shaping,
                        std::uint64_t seed) {
  RolloutCollector collector(world, seed);
  return collector.collect(policy, cfg, shaping, std::numeric_limits<int>::max());
}

Advantages compute_advantages(const Rollout& rollout, double gamma, bool normalize) {
  Advantages out;
  const std::size_t n = rollout.steps.size();
  out.raw.assign(n, 0.0);
  out.returns.assign(n, 0.0);
  std::size_t covered = 0;
  for (const auto& seg : rollout.segments) {
    if (seg.begin != covered || seg.end > n || seg.end <= seg.begin) {
      throw DimensionError("rollout segment start", covered, seg.begin);
    }
    std::vector<double> rewards;
    std::vector<double> values;
    for (std::size_t i = seg.begin; i < seg.end; ++i) {
      rewards.push_back(rollout.steps[i].shaped_reward);
      values.push_back(rollout.steps[i].value_estimate);
    }
    values.push_back(seg.bootstrap_value);
    const auto adv = shaping::shaped_advantages(rewards, values, gamma);
    for (std::size_t i = seg.begin; i < seg.end; ++i) {
      out.raw[i] = adv[i - seg.begin];
      out.returns[i] = adv[i - seg.begin] + rollout.steps[i].value_estimate;
    }
    covered = seg.end;
  }
  if (covered != n) throw DimensionError("rollout steps covered by segments", n, covered);

  out.normalized = out.raw;
  if (normalize && n > 0) {
    const double mean = std::accumulate(out.raw.begin(), out.raw.end(), 0.0) / static_cast<double>(n);
    double var = 0.0;
    for (double a : out.raw) var += (a - mean) * (a - mean);
    const double std_dev = std::sqrt(var / static_cast<double>(n));
    for (double& a : out.normalized) a = (a - mean) / (std_dev + 1e-8);
  }
  return out;
}

double clipped_loss(double ratio, double advantage, double epsilon) {
  if (!(ratio > 0.0)) throw NumericError("clipped_loss: ratio must be positive");
  return std::min(ratio * advantage, clip(ratio, 1.0 - epsilon, 1.0 + epsilon) * advantage);
}

LossTerms combined_loss(const GaussianPolicy& policy, std::span<const TrainingSample> batch,
                        const PpoConfig& cfg) {
  return loss_pass(policy, batch, cfg).terms;
}

PolicyGradient combined_loss_gradient(const GaussianPolicy& policy,
                                      std::span<const TrainingSample> batch, const PpoConfig& cfg) {
  LossPass pass = loss_pass(policy, batch, cfg);
  const std::size_t n = batch.size();
  const double inv_n = 1.0 / static_cast<double>(n);
  PolicyGradient out{neural::GradientSet(policy.mean_net), {}, neural::GradientSet(policy.value_net),
                     pass.terms};

  const Batch& means = pass.mean_cache.activations.back();
  const Batch& values = pass.value_cache.activations.back();
  Batch mean_upstream(n, envsim::kActionDim);
  Batch value_upstream(n, 1);
  for (std::size_t i = 0; i < n; ++i) {
    // d(-min(...)/n)/d(log_prob); zero where the clipped branch is selected.
    const double dlogp =
        pass.unclipped_active[i] ? -inv_n * pass.ratio[i] * pass.advantage[i] : 0.0;
    for (std::size_t d = 0; d < envsim::kActionDim; ++d) {
      const double sigma = std::exp(policy.log_std[d]);
      const double z = (batch[i].action[d] - means.at(i, d)) / sigma;
      mean_upstream.at(i, d) = dlogp * z / sigma;
      out.log_std[d] += dlogp * (z * z - 1.0);
    }
    value_upstream.at(i, 0) =
        cfg.value_coeff * 2.0 * (values.at(i, 0) - batch[i].target_return) * inv_n;
  }
  for (double& g : out.log_std) g -= cfg.entropy_coeff;
  neural::backward_batch(policy.mean_net, pass.mean_cache, mean_upstream, &out.mean_net, nullptr);
  neural::backward_batch(policy.value_net, pass.value_cache, value_upstream, &out.value_net,
                         nullptr);
  return out;
}

PpoAgent::PpoAgent(const PpoConfig& cfg, std::uint64_t seed)
    : policy(cfg, seed),
      mean_opt(policy.mean_net, cfg.policy_optimizer),
      log_std_opt(envsim::kActionDim, cfg.policy_optimizer),
      value_opt(policy.value_net, cfg.value_optimizer) {
  validate(cfg);
}

UpdateStats ppo_update(PpoAgent& agent, const Rollout& rollout, const Advantages& advantages,
                       const PpoConfig& cfg, Rng& rng) {
  const std::size_t n = rollout.steps.size();
  if (advantages.normalized.size() != n || advantages.returns.size() != n) {
    throw DimensionError("advantages", n, advantages.normalized.size());
  }
  if (cfg.minibatch_size > n) {
    throw ConfigError("ppo.minibatch_size (" + std::to_string(cfg.minibatch_size) +
                      ") exceeds the rollout length (" + std::to_string(n) + ")");
  }
  std::vector<TrainingSample> samples(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& s = rollout.steps[i];
    samples[i] = {s.state, s.action, s.log_prob_old, advantages.normalized[i],
                  advantages.returns[i]};
  }
  std::vector<std::size_t> order(n);
  std::vector<TrainingSample> minibatch;
  minibatch.reserve(cfg.minibatch_size);
  UpdateStats stats;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < n; start += cfg.minibatch_size) {
      const std::size_t stop = std::min(n, start + cfg.minibatch_size);
      minibatch.clear();
      for (std::size_t k = start; k < stop; ++k) minibatch.push_back(samples[order[k]]);
      PolicyGradient grad = combined_loss_gradient(agent.policy, minibatch, cfg);
      neural::adam_step(agent.mean_opt, agent.policy.mean_net, grad.mean_net);
      neural::adam_step(agent.log_std_opt, agent.policy.log_std, grad.log_std);
      for (double& ls : agent.policy.log_std) ls = std::clamp(ls, kLogStdMin, kLogStdMax);
      neural::adam_step(agent.value_opt, agent.policy.value_net, grad.value_net);
      stats.policy_loss += grad.loss.policy;
      stats.value_loss += grad.loss.value;
      stats.entropy += grad.loss.entropy;
      stats.clip_fraction += grad.loss.clip_fraction;
      ++stats.optimizer_steps;
    }
  }
  const double steps = static_cast<double>(stats.optimizer_steps);
  stats.policy_loss /= steps;
  stats.value_loss /= steps;
  stats.entropy /= steps;
  stats.clip_fraction /= steps;
  return stats;
}

EpisodeLog train_ppo(const envsim::World& world, const PpoConfig& cfg,
                     const shaping::ShapingConfig& shaping, int episodes, std::uint64_t seed,
                     const EpisodeCallback& on_episode) {
  if (episodes < 0) throw ConfigError("episodes must be >= 0");
  validate(cfg);
  shaping::validate(shaping);
  const auto started = std::chrono::steady_clock::now();
  EpisodeLog log;
  log.seed = seed;
  log.algorithm = "ppo";
  log.shaping = shaping.enabled;

  PpoAgent agent(cfg, seed);
  RolloutCollector collector(world, seed);
  Rng shuffle_rng(derive_seed(seed, {kShuffleStream}));
  while (collector.episodes_completed() < episodes) {
    const Rollout rollout = collector.collect(agent.policy, cfg, shaping, episodes, on_episode);
    log.episodes.insert(log.episodes.end(), rollout.finished_episodes.begin(),
                        rollout.finished_episodes.end());
    // No update after the budget runs out: nothing would observe it.
    if (collector.episodes_completed() >= episodes) break;
    const Advantages adv = compute_advantages(rollout, cfg.gamma, cfg.normalize_advantages);
    ppo_update(agent, rollout, adv, cfg, shuffle_rng);
  }
  log.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return log;
}

}  // namespace lyapnav::ppo
