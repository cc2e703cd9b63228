#pragma once

// Lyapunov-style reward shaping and the places it enters learning:
//
//   shaped_t = r_t + eta * (gamma * r_{t+1} - r_t)
//
// The shaped stream replaces raw rewards in the critic's TD target (DDPG) and
// in the finite-horizon advantage estimate (PPO). Episode rewards reported to
// the harness are always raw.

#include <span>
#include <vector>

namespace lyapnav::shaping {

struct ShapingConfig {
  double eta = 0.4;     // [0, 1]
  double gamma = 0.99;  // (0, 1]
  bool enabled = true;

  friend bool operator==(const ShapingConfig&, const ShapingConfig&) = default;
};

/// Throws ConfigError naming `shaping.eta` / `gamma` when out of range.
void validate(const ShapingConfig& cfg);

/// Throws NumericError on non-finite inputs. Does not look at cfg.enabled.
double shape_reward(double r_current, double r_next, const ShapingConfig& cfg);

/// Element t uses rewards[t + 1] as its successor; the last element uses 0.
/// Identity when shaping is disabled. Throws ConfigError on an empty sequence.
std::vector<double> shape_trajectory(std::span<const double> rewards, const ShapingConfig& cfg);

/// r_next + gamma * value_next, with the bootstrap dropped when done.
double shaped_td_target(double r_next, double value_next, bool done, double gamma);

/// A_t = -V(s_t) + sum_{k=t}^{T-1} gamma^{k-t} r_k + gamma^{T-t} V(s_T).
/// `values` holds T + 1 entries; pass 0 as the last one for a terminal segment.
/// O(T) backward recursion.
std::vector<double> shaped_advantages(std::span<const double> shaped_rewards,
                                      std::span<const double> values, double gamma);

}  // namespace lyapnav::shaping
